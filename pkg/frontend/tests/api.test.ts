import { describe, expect, it } from "vitest";

import { ApiClient, ServerDownError, ValidationError } from "../src/api";
import type { AnnotationDoc, AnnotationPayload } from "../src/types";

interface Recorded {
  url: string;
  init?: RequestInit;
}

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

/** Fetch stub that pops canned responses and records every request. */
function stubFetch(responses: (Response | Error)[], log: Recorded[] = []) {
  return async (url: string, init?: RequestInit): Promise<Response> => {
    log.push({ url, init });
    const next = responses.shift();
    if (next === undefined) throw new Error("stub ran out of responses");
    if (next instanceof Error) throw next;
    return next;
  };
}

const doc: AnnotationDoc = {
  image_path: "images/img_00000.png",
  k: 2,
  cutoff_y: [0.25, 1],
  annotator_id: "tester",
  created_at: "2026-08-14T00:00:00+00:00",
};

const payload: AnnotationPayload = { k: 2, cutoff_y: [0.25, 1], annotator_id: "tester" };

describe("ApiClient.frames", () => {
  it("returns the section count and manifest from the envelope", async () => {
    const log: Recorded[] = [];
    const frames = [
      { index: 0, image_path: "images/img_00000.png", domain: "asphalt_like", annotated: false },
    ];
    const client = new ApiClient("", stubFetch([jsonResponse(200, { k: 9, frames })], log));
    const result = await client.frames();
    expect(result.k).toBe(9);
    expect(result.frames).toEqual(frames);
    expect(log[0]!.url).toBe("/api/frames");
  });

  it("composes URLs against a base with or without a trailing slash", async () => {
    for (const base of ["http://127.0.0.1:8787", "http://127.0.0.1:8787/"]) {
      const log: Recorded[] = [];
      const client = new ApiClient(base, stubFetch([jsonResponse(200, { k: 9, frames: [] })], log));
      await client.frames();
      expect(log[0]!.url).toBe("http://127.0.0.1:8787/api/frames");
      expect(client.imageUrl(3)).toBe("http://127.0.0.1:8787/api/image/3");
    }
  });

  it("wraps non-OK statuses in ServerDownError", async () => {
    const client = new ApiClient("", stubFetch([jsonResponse(500, { error: "boom" })]));
    await expect(client.frames()).rejects.toBeInstanceOf(ServerDownError);
  });
});

describe("ApiClient.annotation", () => {
  it("returns the stored document", async () => {
    const log: Recorded[] = [];
    const client = new ApiClient("", stubFetch([jsonResponse(200, doc)], log));
    expect(await client.annotation(0)).toEqual(doc);
    expect(log[0]!.url).toBe("/api/annotation/0");
  });

  it("maps 404 (nothing stored yet) to null", async () => {
    const client = new ApiClient("", stubFetch([jsonResponse(404, { error: "no annotation" })]));
    expect(await client.annotation(5)).toBeNull();
  });

  it("wraps other failures in ServerDownError", async () => {
    const client = new ApiClient("", stubFetch([jsonResponse(500, { error: "boom" })]));
    await expect(client.annotation(0)).rejects.toBeInstanceOf(ServerDownError);
  });
});

describe("ApiClient.saveAnnotation", () => {
  it("PUTs the JSON payload and returns the stored document", async () => {
    const log: Recorded[] = [];
    const client = new ApiClient("", stubFetch([jsonResponse(200, doc)], log));
    const saved = await client.saveAnnotation(0, payload);
    expect(saved).toEqual(doc);
    expect(log[0]!.url).toBe("/api/annotation/0");
    expect(log[0]!.init?.method).toBe("PUT");
    expect(JSON.parse(log[0]!.init?.body as string)).toEqual(payload);
  });

  it("surfaces the server's rejection reason as ValidationError", async () => {
    const reason = "cutoff_y[0]=1.5 outside [0, 1]";
    const client = new ApiClient("", stubFetch([jsonResponse(400, { error: reason })]));
    await expect(client.saveAnnotation(0, payload)).rejects.toThrow(ValidationError);
    const client2 = new ApiClient("", stubFetch([jsonResponse(400, { error: reason })]));
    await expect(client2.saveAnnotation(0, payload)).rejects.toThrow(reason);
  });

  it("keeps a generic message for a 400 without a JSON body", async () => {
    const client = new ApiClient(
      "",
      stubFetch([new Response("not json", { status: 400 })]),
    );
    await expect(client.saveAnnotation(2, payload)).rejects.toThrow(/rejected/);
  });

  it("wraps other statuses in ServerDownError", async () => {
    const client = new ApiClient("", stubFetch([jsonResponse(503, { error: "restarting" })]));
    await expect(client.saveAnnotation(0, payload)).rejects.toBeInstanceOf(ServerDownError);
  });
});

describe("network failures", () => {
  it("maps a refused connection to ServerDownError on every call", async () => {
    const refused = () => new TypeError("fetch failed");
    for (const call of [
      (c: ApiClient) => c.frames(),
      (c: ApiClient) => c.annotation(0),
      (c: ApiClient) => c.saveAnnotation(0, payload),
    ]) {
      const client = new ApiClient("", stubFetch([refused()]));
      await expect(call(client)).rejects.toBeInstanceOf(ServerDownError);
    }
  });

  it("loses no data across a failed save: the identical payload can be re-sent", async () => {
    const log: Recorded[] = [];
    const client = new ApiClient(
      "",
      stubFetch([new TypeError("fetch failed"), jsonResponse(200, doc)], log),
    );
    await expect(client.saveAnnotation(0, payload)).rejects.toBeInstanceOf(ServerDownError);
    const saved = await client.saveAnnotation(0, payload);
    expect(saved).toEqual(doc);
    expect(log).toHaveLength(2);
    expect(log[1]!.init?.body).toBe(log[0]!.init?.body);
  });
});
