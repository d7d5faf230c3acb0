/**
 * Length-prefixed stdio frames for score requests/responses.
 *
 * Every frame is a u32-LE byte count followed by that many body bytes:
 *   request  (0x01): type | sigma f64-LE | d0,d1,d2 u32-LE | d0*d1*d2 f32-LE
 *   response (0x02): type | d0,d1,d2 u32-LE | payload f32-LE
 *   error    (0xFF): type | UTF-8 message
 *
 * Complex tensors travel as real with the trailing axis doubled
 * (interleaved re/im pairs); the payload is shape-preserving either way.
 */

export const MSG_SCORE_REQUEST = 0x01;
export const MSG_SCORE_RESPONSE = 0x02;
export const MSG_ERROR = 0xff;

export const MAX_FRAME_BYTES = 1 << 30;

export interface ScoreRequest {
  sigma: number;
  dims: [number, number, number];
  payload: Float32Array;
}

export function encodeRequest(req: ScoreRequest): Buffer {
  const n = req.dims[0] * req.dims[1] * req.dims[2];
  if (req.payload.length !== n) {
    throw new Error(`payload length ${req.payload.length} != ${n}`);
  }
  const body = Buffer.alloc(1 + 8 + 12 + 4 * n);
  body.writeUInt8(MSG_SCORE_REQUEST, 0);
  body.writeDoubleLE(req.sigma, 1);
  body.writeUInt32LE(req.dims[0], 9);
  body.writeUInt32LE(req.dims[1], 13);
  body.writeUInt32LE(req.dims[2], 17);
  Buffer.from(req.payload.buffer, req.payload.byteOffset, 4 * n).copy(body, 21);
  return prefix(body);
}

export function encodeResponse(dims: [number, number, number], payload: Float32Array): Buffer {
  const n = dims[0] * dims[1] * dims[2];
  if (payload.length !== n) {
    throw new Error(`payload length ${payload.length} != ${n}`);
  }
  const body = Buffer.alloc(1 + 12 + 4 * n);
  body.writeUInt8(MSG_SCORE_RESPONSE, 0);
  body.writeUInt32LE(dims[0], 1);
  body.writeUInt32LE(dims[1], 5);
  body.writeUInt32LE(dims[2], 9);
  Buffer.from(payload.buffer, payload.byteOffset, 4 * n).copy(body, 13);
  return prefix(body);
}

export function encodeError(message: string): Buffer {
  const msg = Buffer.from(message, "utf8");
  const body = Buffer.alloc(1 + msg.length);
  body.writeUInt8(MSG_ERROR, 0);
  msg.copy(body, 1);
  return prefix(body);
}

function prefix(body: Buffer): Buffer {
  const head = Buffer.alloc(4);
  head.writeUInt32LE(body.length, 0);
  return Buffer.concat([head, body]);
}

/** Parse a request body (after the type byte has been checked). */
export function decodeRequestBody(body: Buffer): ScoreRequest {
  if (body.length < 21) {
    throw new Error(`request body too short: ${body.length} bytes`);
  }
  const sigma = body.readDoubleLE(1);
  const dims: [number, number, number] = [
    body.readUInt32LE(9),
    body.readUInt32LE(13),
    body.readUInt32LE(17),
  ];
  const n = dims[0] * dims[1] * dims[2];
  if (body.length !== 21 + 4 * n) {
    throw new Error(`payload length ${body.length - 21} != 4*${n}`);
  }
  // copy into an aligned buffer: the frame slice may sit at any offset
  const aligned = Buffer.alloc(4 * n);
  body.copy(aligned, 0, 21);
  const payload = new Float32Array(aligned.buffer, 0, n);
  return { sigma, dims, payload };
}

export function decodeResponseBody(body: Buffer): { dims: [number, number, number]; payload: Float32Array } {
  if (body.length < 13) {
    throw new Error(`response body too short: ${body.length} bytes`);
  }
  const dims: [number, number, number] = [
    body.readUInt32LE(1),
    body.readUInt32LE(5),
    body.readUInt32LE(9),
  ];
  const n = dims[0] * dims[1] * dims[2];
  if (body.length !== 13 + 4 * n) {
    throw new Error(`payload length ${body.length - 13} != 4*${n}`);
  }
  const aligned = Buffer.alloc(4 * n);
  body.copy(aligned, 0, 13);
  return { dims, payload: new Float32Array(aligned.buffer, 0, n) };
}

/**
 * Incremental frame splitter: feed stream chunks, get complete frame bodies.
 * A frame whose length prefix is implausible is unrecoverable (the stream
 * cannot be resynchronized), so it is reported and the reader poisoned.
 */
export class FrameReader {
  private buf: Buffer = Buffer.alloc(0);
  private poisoned = false;

  /** Returns complete frame bodies (type byte included) found so far. */
  push(chunk: Buffer): Buffer[] {
    if (this.poisoned) return [];
    this.buf = this.buf.length === 0 ? chunk : Buffer.concat([this.buf, chunk]);
    const frames: Buffer[] = [];
    while (this.buf.length >= 4) {
      const length = this.buf.readUInt32LE(0);
      if (length < 1 || length > MAX_FRAME_BYTES) {
        this.poisoned = true;
        throw new Error(`implausible frame length ${length}`);
      }
      if (this.buf.length < 4 + length) break;
      frames.push(this.buf.subarray(4, 4 + length));
      this.buf = this.buf.subarray(4 + length);
    }
    return frames;
  }

  /** Bytes still sitting in the buffer (a partial frame at end-of-stream). */
  pending(): number {
    return this.buf.length;
  }
}
