/**
 * Long-running score provider: one response per request frame on stdio.
 *
 * Malformed frames (wrong type, dim/payload mismatch, model/shape
 * disagreement) produce an error frame and the process keeps serving; a
 * stream that ends inside a frame produces a final error frame before a
 * clean exit.
 */

import { loadScorer, Scorer } from "./model.js";
import {
  FrameReader,
  MSG_SCORE_REQUEST,
  decodeRequestBody,
  encodeError,
  encodeResponse,
} from "./protocol.js";

export function handleFrame(scorer: Scorer, body: Buffer): Buffer {
  try {
    if (body.length < 1 || body[0] !== MSG_SCORE_REQUEST) {
      return encodeError(`unexpected frame type 0x${body.length ? body[0].toString(16) : "??"}`);
    }
    const req = decodeRequestBody(body);
    if (!(req.sigma > 0) || !Number.isFinite(req.sigma)) {
      return encodeError(`sigma must be positive and finite, got ${req.sigma}`);
    }
    if (scorer.dims) {
      const [a, b, c] = scorer.dims;
      const [d0, d1, d2] = req.dims;
      if (a * b * c !== d0 * d1 * d2) {
        return encodeError(
          `model expects ${a}x${b}x${c} tensors, request is ${d0}x${d1}x${d2}`
        );
      }
    }
    const x = Float64Array.from(req.payload);
    const s = scorer.score(x, req.sigma);
    return encodeResponse(req.dims, Float32Array.from(s));
  } catch (err) {
    return encodeError(err instanceof Error ? err.message : String(err));
  }
}

export function serve(scorer: Scorer, stdin: NodeJS.ReadableStream, stdout: NodeJS.WritableStream): Promise<void> {
  const reader = new FrameReader();
  return new Promise((resolve) => {
    stdin.on("data", (chunk: Buffer) => {
      let frames: Buffer[];
      try {
        frames = reader.push(chunk);
      } catch (err) {
        // unrecoverable framing: report once and stop consuming
        stdout.write(encodeError(err instanceof Error ? err.message : String(err)));
        stdin.removeAllListeners("data");
        resolve();
        return;
      }
      for (const body of frames) {
        stdout.write(handleFrame(scorer, body));
      }
    });
    stdin.on("end", () => {
      if (reader.pending() > 0) {
        stdout.write(encodeError(`stream ended inside a frame (${reader.pending()} bytes pending)`));
      }
      resolve();
    });
  });
}

export { loadScorer };
