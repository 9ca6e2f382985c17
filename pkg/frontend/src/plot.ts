/** Command-line entry: results CSV in, standalone SVG out. */

import { readFileSync, writeFileSync } from "node:fs";
import { parseResults } from "./csv.js";
import { buildFigure, renderSvg } from "./figure.js";

function main(argv: string[]): number {
  const [input, output] = argv;
  if (input === undefined || output === undefined) {
    console.error("usage: plot <results.csv> <out.svg>");
    return 2;
  }
  let rows;
  try {
    rows = parseResults(readFileSync(input, "utf8"));
  } catch (err) {
    console.error(`error reading ${input}: ${(err as Error).message}`);
    return 1;
  }
  const model = buildFigure(rows);
  writeFileSync(output, renderSvg(model) + "\n");
  const note = model.dropped > 0 ? ` (${model.dropped} zero-failure rows dropped)` : "";
  console.log(
    `wrote ${output}: ${model.series.length} series, ` +
      `${model.overlays.length} reference curves${note}`,
  );
  return 0;
}

process.exit(main(process.argv.slice(2)));
