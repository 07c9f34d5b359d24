/**
 * Annotation session state, kept free of DOM and network concerns so every
 * invariant is unit-testable:
 *
 * - one normalized cutoff per section, always clamped to [0, 1];
 * - a score is derived as `1 - cutoff_y` and in no other way;
 * - unsaved edits set a dirty flag that blocks navigation until the caller
 *   saves or explicitly discards;
 * - user placement is quantized to pixel edges (row / height), but cutoffs
 *   loaded from a stored annotation are kept bit-for-bit.
 */

import type { AnnotationDoc, AnnotationPayload, FrameInfo } from "./types";

/** Thrown when navigation would silently drop unsaved handle edits. */
export class UnsavedChangesError extends Error {
  constructor() {
    super("unsaved changes: save the annotation or discard it first");
    this.name = "UnsavedChangesError";
  }
}

function clamp01(value: number): number {
  if (Number.isNaN(value)) throw new Error("cutoff must be a number");
  return Math.min(1, Math.max(0, value));
}

export class AnnotationSession {
  readonly k: number;
  readonly annotatorId: string;
  private frames: FrameInfo[];
  private position: number | null = null;
  private cutoffs: number[] = [];
  private dirtyFlag = false;

  constructor(frames: FrameInfo[], k: number, annotatorId = "anonymous") {
    if (!Number.isInteger(k) || k < 1) throw new Error(`k must be a positive integer, got ${k}`);
    this.k = k;
    this.annotatorId = annotatorId;
    this.frames = frames.map((f) => ({ ...f }));
  }

  /** Frames in manifest order, as last reported by the server. */
  get frameList(): readonly FrameInfo[] {
    return this.frames;
  }

  get current(): FrameInfo | null {
    return this.position === null ? null : this.frames[this.position] ?? null;
  }

  get dirty(): boolean {
    return this.dirtyFlag;
  }

  /** True once every frame in the queue is annotated: the completion state. */
  get complete(): boolean {
    return this.frames.every((f) => f.annotated);
  }

  /** Normalized cutoffs of the open frame, top = 0. */
  cutoffY(): readonly number[] {
    this.requireOpen();
    return this.cutoffs;
  }

  /** Derived per-section scores. The only score formula in the client. */
  scores(): number[] {
    this.requireOpen();
    return this.cutoffs.map((y) => 1 - y);
  }

  /**
   * Open the first unannotated frame in manifest order with the default
   * top-of-image handles.  Returns the frame, or null when everything is
   * annotated (completion screen).
   */
  loadNextUnannotated(): FrameInfo | null {
    if (this.dirtyFlag) throw new UnsavedChangesError();
    const next = this.frames.find((f) => !f.annotated);
    if (next === undefined) {
      this.position = null;
      this.cutoffs = [];
      return null;
    }
    this.openFrame(next.index, null);
    return next;
  }

  /**
   * Open a specific frame.  Handles come from the stored annotation when one
   * exists (restored exactly), otherwise they default to the image top —
   * score 1 everywhere, so the annotator only marks obstacles.
   */
  openFrame(index: number, existing: AnnotationDoc | null = null): FrameInfo {
    if (this.dirtyFlag) throw new UnsavedChangesError();
    const position = this.frames.findIndex((f) => f.index === index);
    if (position < 0) throw new Error(`unknown frame index ${index}`);
    if (existing !== null) {
      if (existing.k !== this.k) {
        throw new Error(`annotation has k=${existing.k}, session expects k=${this.k}`);
      }
      if (existing.cutoff_y.length !== this.k) {
        throw new Error(`annotation has ${existing.cutoff_y.length} cutoffs, expected ${this.k}`);
      }
      this.cutoffs = existing.cutoff_y.map(clamp01);
    } else {
      this.cutoffs = new Array(this.k).fill(0);
    }
    this.position = position;
    this.dirtyFlag = false;
    return this.frames[position]!;
  }

  /** Place one handle by normalized position; clamped into [0, 1]. */
  setCutoff(section: number, y: number): void {
    this.requireOpen();
    this.requireSection(section);
    this.cutoffs[section] = clamp01(y);
    this.dirtyFlag = true;
  }

  /**
   * Place one handle on a pixel edge of an image `height` pixels tall.
   * Row 0 is the top edge (score 1), row `height` the bottom edge (score 0).
   */
  setCutoffRow(section: number, row: number, height: number): void {
    if (!Number.isInteger(height) || height < 1) {
      throw new Error(`height must be a positive integer, got ${height}`);
    }
    const edge = Math.min(height, Math.max(0, Math.round(row)));
    this.setCutoff(section, edge / height);
  }

  /** Keyboard nudge: move a handle by whole pixel edges. */
  nudge(section: number, deltaRows: number, height: number): void {
    this.requireOpen();
    this.requireSection(section);
    const currentRow = Math.round(this.cutoffs[section]! * height);
    this.setCutoffRow(section, currentRow + deltaRows, height);
  }

  /** The PUT body for the open frame. */
  buildPayload(): AnnotationPayload {
    this.requireOpen();
    return {
      k: this.k,
      cutoff_y: [...this.cutoffs],
      annotator_id: this.annotatorId,
    };
  }

  /**
   * Record a successful save: the server's stored document becomes the new
   * clean state and the frame is flagged annotated.
   */
  markSaved(saved: AnnotationDoc): void {
    this.requireOpen();
    if (saved.k !== this.k || saved.cutoff_y.length !== this.k) {
      throw new Error("server returned an annotation with a different section count");
    }
    this.cutoffs = [...saved.cutoff_y];
    this.frames[this.position!]!.annotated = true;
    this.dirtyFlag = false;
  }

  /** Throw away unsaved edits, restoring the given stored annotation (or the top default). */
  discardChanges(existing: AnnotationDoc | null = null): void {
    this.requireOpen();
    this.dirtyFlag = false;
    const index = this.frames[this.position!]!.index;
    this.openFrame(index, existing);
  }

  private requireOpen(): void {
    if (this.position === null) throw new Error("no frame is open");
  }

  private requireSection(section: number): void {
    if (!Number.isInteger(section) || section < 0 || section >= this.k) {
      throw new Error(`section ${section} outside [0, ${this.k})`);
    }
  }
}

/**
 * Column boundaries of the k equal-width sections of a `width`-pixel image:
 * round(i * width / k) for i = 0..k, half away from zero — the same rule the
 * trainer uses, so the dividers drawn here match the labels downstream.
 */
export function sectionBoundaries(width: number, k: number): number[] {
  if (!Number.isInteger(k) || k < 1) throw new Error(`k must be a positive integer, got ${k}`);
  if (width < k) throw new Error(`width ${width} is smaller than section count ${k}`);
  const bounds: number[] = [];
  for (let i = 0; i <= k; i++) {
    bounds.push(Math.floor((i * width) / k + 0.5));
  }
  return bounds;
}
