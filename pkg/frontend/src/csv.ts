/**
 * Reader for the memory-experiment results CSV.
 *
 * The harness writes a `#` comment preamble, then a fixed 16-column header,
 * then one row per (code, layout, basis, p, shift-noise) estimate.  We
 * validate the header verbatim so a stale or foreign file fails loudly
 * instead of producing an empty figure.
 */

export const CSV_COLUMNS = [
  "code", "layout", "basis", "p", "tau_s", "tau_m", "T", "shots",
  "failures", "p_fail_total", "p_L_round", "ci_low", "ci_high",
  "seed", "decoder", "timestamp",
] as const;

export interface ResultRow {
  code: string;
  layout: string;
  basis: string;
  p: number;
  tauS: number;
  tauM: number;
  rounds: number;
  shots: number;
  failures: number;
  pFailTotal: number;
  pRound: number;
  ciLow: number;
  ciHigh: number;
  seed: number;
  decoder: string;
  timestamp: string;
}

function parseRow(line: string, lineNo: number): ResultRow {
  const parts = line.split(",");
  if (parts.length !== CSV_COLUMNS.length) {
    throw new Error(
      `line ${lineNo}: expected ${CSV_COLUMNS.length} fields, got ${parts.length}`,
    );
  }
  const num = (index: number, name: string): number => {
    const value = Number(parts[index]);
    if (!Number.isFinite(value)) {
      throw new Error(`line ${lineNo}: ${name} is not a number: ${parts[index]}`);
    }
    return value;
  };
  return {
    code: parts[0],
    layout: parts[1],
    basis: parts[2],
    p: num(3, "p"),
    tauS: num(4, "tau_s"),
    tauM: num(5, "tau_m"),
    rounds: num(6, "T"),
    shots: num(7, "shots"),
    failures: num(8, "failures"),
    pFailTotal: num(9, "p_fail_total"),
    pRound: num(10, "p_L_round"),
    ciLow: num(11, "ci_low"),
    ciHigh: num(12, "ci_high"),
    seed: num(13, "seed"),
    decoder: parts[14],
    timestamp: parts[15],
  };
}

export function parseResults(text: string): ResultRow[] {
  const lines = text.split("\n");
  let header: string | null = null;
  const rows: ResultRow[] = [];
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (line === "" || line.startsWith("#")) {
      continue;
    }
    if (header === null) {
      header = line;
      if (header !== CSV_COLUMNS.join(",")) {
        throw new Error("header does not match the results schema");
      }
      continue;
    }
    rows.push(parseRow(line, i + 1));
  }
  if (header === null) {
    throw new Error("no header found");
  }
  return rows;
}
