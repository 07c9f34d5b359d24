/**
 * Annotator app shell: wires the pure session state machine to the canvas,
 * the keyboard/pointer controls, and the data API.
 *
 * Interaction model (keyboard-first):
 *   click/drag      place the cutoff for the section under the pointer
 *   Left / Right    select section
 *   Up / Down       nudge the selected handle one pixel row (Shift: ten)
 *   Home / End      handle to the top (fully traversable) / bottom (blocked)
 *   s or Enter      save to the server
 *   n               next unannotated frame
 *   Escape          discard unsaved edits
 *   r               retry a failed save
 */

import { ApiClient, ServerDownError, ValidationError } from "./api";
import { drawScene, sectionAt } from "./render";
import { AnnotationSession, UnsavedChangesError } from "./session";
import type { FrameInfo } from "./types";

function must<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (el === null) throw new Error(`missing element #${id}`);
  return el as T;
}

const canvas = must<HTMLCanvasElement>("view");
const frameLabel = must<HTMLElement>("frame-label");
const scoresLine = must<HTMLElement>("scores");
const statusLine = must<HTMLElement>("status");
const messageLine = must<HTMLElement>("message");
const buttons = {
  prev: must<HTMLButtonElement>("prev"),
  next: must<HTMLButtonElement>("next"),
  skip: must<HTMLButtonElement>("skip"),
  save: must<HTMLButtonElement>("save"),
  discard: must<HTMLButtonElement>("discard"),
  retry: must<HTMLButtonElement>("retry"),
};

const api = new ApiClient("");
const annotatorId =
  new URLSearchParams(window.location.search).get("annotator") ?? "anonymous";

let session: AnnotationSession | null = null;
let image: HTMLImageElement | null = null;
let selected = 0;
let pointerDown = false;

// -- presentation -----------------------------------------------------------------

function showMessage(text: string, kind: "info" | "error" = "info"): void {
  messageLine.textContent = text;
  messageLine.dataset.kind = kind;
}

function redraw(): void {
  const ctx = canvas.getContext("2d");
  if (ctx === null || session === null) return;
  if (session.current === null || image === null) {
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    return;
  }
  drawScene(ctx, image, { k: session.k, cutoffs: session.cutoffY(), selected });
}

function refreshHud(): void {
  if (session === null) return;
  const frame = session.current;
  if (frame === null) {
    frameLabel.textContent = session.complete
      ? "all frames annotated - use prev/next to review"
      : "no frame open";
    scoresLine.textContent = "";
    statusLine.textContent = "";
    return;
  }
  const total = session.frameList.length;
  const done = session.frameList.filter((f) => f.annotated).length;
  frameLabel.textContent =
    `frame ${frame.index + 1}/${total} - ${frame.domain} - ${frame.image_path}`;
  scoresLine.textContent =
    "scores: " + session.scores().map((s) => s.toFixed(2)).join("  ");
  statusLine.textContent =
    `${done}/${total} annotated` +
    (frame.annotated ? " | stored" : " | new") +
    (session.dirty ? " | UNSAVED EDITS" : "");
}

function refreshAll(): void {
  redraw();
  refreshHud();
}

// -- frame loading ----------------------------------------------------------------

async function loadImage(frame: FrameInfo): Promise<void> {
  const img = new Image();
  img.src = api.imageUrl(frame.index);
  await img.decode();
  canvas.width = img.naturalWidth;
  canvas.height = img.naturalHeight;
  image = img;
}

async function openFrame(index: number): Promise<void> {
  if (session === null) return;
  const existing = await api.annotation(index);
  const frame = session.openFrame(index, existing);
  selected = 0;
  await loadImage(frame);
  showMessage(existing === null ? "new frame - place the handles" : "stored annotation loaded");
  refreshAll();
}

async function nextUnannotated(): Promise<void> {
  if (session === null) return;
  const frame = session.loadNextUnannotated();
  if (frame === null) {
    image = null;
    showMessage("every frame has an annotation");
    refreshAll();
    return;
  }
  selected = 0;
  await loadImage(frame);
  showMessage("new frame - place the handles");
  refreshAll();
}

async function step(delta: number): Promise<void> {
  if (session === null) return;
  const total = session.frameList.length;
  if (total === 0) return;
  const here = session.current?.index ?? (delta > 0 ? -1 : total);
  const target = Math.min(total - 1, Math.max(0, here + delta));
  if (target === here) return;
  await openFrame(target);
}

// -- actions ----------------------------------------------------------------------

async function save(): Promise<void> {
  if (session === null || session.current === null) return;
  const index = session.current.index;
  buttons.retry.hidden = true;
  try {
    const saved = await api.saveAnnotation(index, session.buildPayload());
    session.markSaved(saved);
    showMessage(`saved frame ${index + 1}`);
  } catch (err) {
    if (err instanceof ValidationError) {
      showMessage(`server rejected the annotation: ${err.message}`, "error");
    } else if (err instanceof ServerDownError) {
      // Nothing is lost: the session still holds the edits; retry re-sends.
      buttons.retry.hidden = false;
      showMessage("server unreachable - your edits are kept, press r to retry", "error");
    } else {
      throw err;
    }
  }
  refreshAll();
}

async function discard(): Promise<void> {
  if (session === null || session.current === null || !session.dirty) return;
  const index = session.current.index;
  session.discardChanges(await api.annotation(index));
  showMessage("edits discarded");
  refreshAll();
}

function guarded(action: () => Promise<void>): () => void {
  return () => {
    action().catch((err) => {
      if (err instanceof UnsavedChangesError) {
        showMessage("unsaved edits - save (s) or discard (Escape) first", "error");
      } else if (err instanceof ServerDownError) {
        buttons.retry.hidden = false;
        showMessage(`server unreachable: ${err.message} - press r to retry`, "error");
      } else {
        showMessage(String(err), "error");
        throw err;
      }
    });
  };
}

// -- input ------------------------------------------------------------------------

function pointerRow(ev: PointerEvent): { x: number; y: number } {
  const rect = canvas.getBoundingClientRect();
  return {
    x: ((ev.clientX - rect.left) / rect.width) * canvas.width,
    y: ((ev.clientY - rect.top) / rect.height) * canvas.height,
  };
}

function placeAtPointer(ev: PointerEvent): void {
  if (session === null || session.current === null) return;
  const { x, y } = pointerRow(ev);
  selected = sectionAt(x, canvas.width, session.k);
  session.setCutoffRow(selected, y, canvas.height);
  refreshAll();
}

canvas.addEventListener("pointerdown", (ev) => {
  pointerDown = true;
  canvas.setPointerCapture(ev.pointerId);
  placeAtPointer(ev);
});
canvas.addEventListener("pointermove", (ev) => {
  if (pointerDown) placeAtPointer(ev);
});
canvas.addEventListener("pointerup", () => {
  pointerDown = false;
});

window.addEventListener("keydown", (ev) => {
  if (session === null) return;
  const k = session.k;
  switch (ev.key) {
    case "ArrowLeft":
      selected = Math.max(0, selected - 1);
      break;
    case "ArrowRight":
      selected = Math.min(k - 1, selected + 1);
      break;
    case "ArrowUp":
      if (session.current !== null)
        session.nudge(selected, ev.shiftKey ? -10 : -1, canvas.height);
      break;
    case "ArrowDown":
      if (session.current !== null)
        session.nudge(selected, ev.shiftKey ? 10 : 1, canvas.height);
      break;
    case "Home":
      if (session.current !== null) session.setCutoff(selected, 0.0);
      break;
    case "End":
      if (session.current !== null) session.setCutoff(selected, 1.0);
      break;
    case "Enter":
      // A focused button already fires its own click on Enter.
      if (ev.target instanceof HTMLButtonElement) return;
      guarded(save)();
      return;
    case "s":
      guarded(save)();
      return;
    case "n":
      guarded(nextUnannotated)();
      return;
    case "Escape":
      guarded(discard)();
      return;
    case "r":
      if (!buttons.retry.hidden) guarded(save)();
      return;
    default:
      return;
  }
  ev.preventDefault();
  refreshAll();
});

buttons.prev.addEventListener("click", guarded(() => step(-1)));
buttons.next.addEventListener("click", guarded(() => step(1)));
buttons.skip.addEventListener("click", guarded(nextUnannotated));
buttons.save.addEventListener("click", guarded(save));
buttons.discard.addEventListener("click", guarded(discard));
buttons.retry.addEventListener("click", guarded(save));

// -- boot -------------------------------------------------------------------------

async function boot(): Promise<void> {
  try {
    const { k, frames } = await api.frames();
    session = new AnnotationSession(frames, k, annotatorId);
    showMessage(`annotating as "${annotatorId}"`);
    await nextUnannotated();
    if (session.complete && frames.length > 0) {
      // Everything is already stored; open the first frame for review.
      await openFrame(0);
    }
  } catch (err) {
    showMessage(
      err instanceof ServerDownError
        ? `cannot reach the annotation server: ${err.message}`
        : String(err),
      "error",
    );
  }
}

void boot();
