#!/usr/bin/env node
import { plotGammaSweep } from "./plot.js";

function usage(): never {
  console.error("usage: semsample-plot <bench.csv> <out.svg> [level]");
  process.exit(1);
}

async function main(): Promise<void> {
  const args = process.argv.slice(2);
  if (args.length < 2 || args.length > 3) {
    usage();
  }
  const level = args[2] !== undefined ? Number(args[2]) : undefined;
  if (level !== undefined && (!Number.isInteger(level) || level < 1)) {
    usage();
  }
  await plotGammaSweep(args[0], args[1], level);
  console.log(`wrote ${args[1]}`);
}

main().catch((error: unknown) => {
  console.error(`error: ${error instanceof Error ? error.message : String(error)}`);
  process.exit(1);
});
