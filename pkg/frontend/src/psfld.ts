import { readFileSync } from "fs";

const MAGIC = "PSFLD1";

export interface FieldDump {
  k: number;
  nR: number;
  nTheta: number;
  R: number;
  d: number;
  /** fields[c][i * nTheta + j]: ring-major node values, ring 0 = center. */
  fields: Float64Array[];
}

/** Parse the little-endian PSFLD1 field dump written by the solver package. */
export function readPsfld(path: string): FieldDump {
  const buf = readFileSync(path);
  if (buf.length < MAGIC.length + 3 * 8 + 2 * 8) {
    throw new Error(`${path}: too short for a PSFLD1 dump`);
  }
  if (buf.toString("latin1", 0, MAGIC.length) !== MAGIC) {
    throw new Error(`${path}: bad magic, not a PSFLD1 dump`);
  }
  let off = MAGIC.length;
  const k = Number(buf.readBigInt64LE(off));
  const nR = Number(buf.readBigInt64LE(off + 8));
  const nTheta = Number(buf.readBigInt64LE(off + 16));
  off += 24;
  const R = buf.readDoubleLE(off);
  const d = buf.readDoubleLE(off + 8);
  off += 16;
  const per = (nR + 1) * nTheta;
  if (buf.length < off + k * per * 8) {
    throw new Error(`${path}: truncated dump (${buf.length} bytes for k=${k})`);
  }
  const fields: Float64Array[] = [];
  for (let c = 0; c < k; c++) {
    const slice = new Float64Array(per);
    for (let m = 0; m < per; m++) {
      slice[m] = buf.readDoubleLE(off + (c * per + m) * 8);
    }
    fields.push(slice);
  }
  return { k, nR, nTheta, R, d, fields };
}
