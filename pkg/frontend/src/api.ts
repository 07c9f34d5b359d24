/**
 * Thin typed client for the annotation server's data API.
 *
 * Endpoints:
 *   GET /api/frames          -> { k, frames: FrameInfo[] }
 *   GET /api/image/<i>       -> PNG bytes (used as an <img> src, not fetched here)
 *   GET /api/annotation/<i>  -> AnnotationDoc, or 404 when none is stored
 *   PUT /api/annotation/<i>  -> stores the payload, echoes the full document
 *
 * The fetch implementation is injectable so unit tests can exercise the
 * error-handling paths without a live server.
 */

import type { AnnotationDoc, AnnotationPayload, FramesResponse } from "./types";

/** The server rejected a payload (HTTP 400); `message` is the server's reason. */
export class ValidationError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ValidationError";
  }
}

/** The server could not be reached or answered with an unexpected status. */
export class ServerDownError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ServerDownError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(base = "", fetchImpl?: FetchLike) {
    // Strip a trailing slash so base + "/api/..." composes cleanly.
    this.base = base.endsWith("/") ? base.slice(0, -1) : base;
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.base + path, init);
    } catch (err) {
      throw new ServerDownError(`cannot reach annotation server: ${String(err)}`);
    }
    return response;
  }

  /** Section count and frame manifest, in annotation order. */
  async frames(): Promise<FramesResponse> {
    const response = await this.request("/api/frames");
    if (!response.ok) {
      throw new ServerDownError(`GET /api/frames failed with HTTP ${response.status}`);
    }
    return (await response.json()) as FramesResponse;
  }

  /** URL of the frame image, suitable for an <img> element's src. */
  imageUrl(index: number): string {
    return `${this.base}/api/image/${index}`;
  }

  /** Stored annotation for a frame, or null when none exists yet. */
  async annotation(index: number): Promise<AnnotationDoc | null> {
    const response = await this.request(`/api/annotation/${index}`);
    if (response.status === 404) return null;
    if (!response.ok) {
      throw new ServerDownError(
        `GET /api/annotation/${index} failed with HTTP ${response.status}`,
      );
    }
    return (await response.json()) as AnnotationDoc;
  }

  /**
   * Store an annotation.  Returns the document as the server recorded it
   * (with image_path and created_at filled in).  Raises ValidationError with
   * the server's message when the payload is rejected.
   */
  async saveAnnotation(index: number, payload: AnnotationPayload): Promise<AnnotationDoc> {
    const response = await this.request(`/api/annotation/${index}`, {
      method: "PUT",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
    if (response.status === 400) {
      let message = `PUT /api/annotation/${index} rejected`;
      try {
        const body = (await response.json()) as { error?: string };
        if (body.error) message = body.error;
      } catch {
        // Non-JSON 400 body; keep the generic message.
      }
      throw new ValidationError(message);
    }
    if (!response.ok) {
      throw new ServerDownError(
        `PUT /api/annotation/${index} failed with HTTP ${response.status}`,
      );
    }
    return (await response.json()) as AnnotationDoc;
  }
}
