/** Shapes exchanged with the annotation data API. */

/** One manifest entry as returned by `GET /api/frames`. */
export interface FrameInfo {
  index: number;
  image_path: string;
  domain: string;
  annotated: boolean;
}

/** Envelope of `GET /api/frames`: the dataset's section count plus the manifest. */
export interface FramesResponse {
  k: number;
  frames: FrameInfo[];
}

/** Annotation document as stored on disk and sent over `PUT /api/annotation/<i>`. */
export interface AnnotationDoc {
  image_path: string;
  k: number;
  /** Normalized cutoff per section, measured from the top: 0 = top, 1 = bottom. */
  cutoff_y: number[];
  annotator_id: string;
  created_at: string;
}

/** Payload the client sends; the server fills in image path and timestamp. */
export interface AnnotationPayload {
  k: number;
  cutoff_y: number[];
  annotator_id: string;
}
