import { readFileSync } from "fs";

export interface Table {
  header: string[];
  rows: number[][];
}

/** Parse a numeric CSV with a header row; errors name the offending row/column. */
export function readCsv(path: string): Table {
  const text = readFileSync(path, "utf8");
  const lines = text
    .split("\n")
    .map((l) => l.trim())
    .filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new Error(`${path}: empty CSV`);
  }
  const header = lines[0].split(",").map((h) => h.trim());
  if (lines.length === 1) {
    throw new Error(`${path}: CSV has a header but no data rows`);
  }
  const rows: number[][] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== header.length) {
      throw new Error(
        `${path}: row ${i + 1} has ${parts.length} fields, expected ${header.length}`
      );
    }
    const row = parts.map((p, j) => {
      const v = Number(p);
      if (!Number.isFinite(v)) {
        throw new Error(
          `${path}: row ${i + 1}, column "${header[j]}": not a number (${p.trim()})`
        );
      }
      return v;
    });
    rows.push(row);
  }
  return { header, rows };
}

export function column(table: Table, name: string, path = "<csv>"): number[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new Error(`${path}: missing column "${name}" (have ${table.header.join(", ")})`);
  }
  return table.rows.map((r) => r[idx]);
}
