/** Parsing for the bench CSV schema: method,level,budget,foreground_rate,point_recall,scenes */

export class SchemaError extends Error {}

export interface BenchRow {
  method: string;
  level: number;
  budget: number;
  foregroundRate: number;
  pointRecall: number | null;
  scenes: number;
}

export interface SweepPoint {
  gamma: number;
  foregroundRate: number;
  pointRecall: number | null;
}

const HEADER = ["method", "level", "budget", "foreground_rate", "point_recall", "scenes"];
const GAMMA_METHOD = /^sfps\(gamma=([^)]+)\)$/;

function parseNumber(cell: string, line: number, column: string): number {
  const value = Number(cell);
  if (cell.trim() === "" || Number.isNaN(value)) {
    throw new SchemaError(`line ${line}: ${column} is not a number: ${JSON.stringify(cell)}`);
  }
  return value;
}

export function parseBenchCsv(text: string): BenchRow[] {
  const lines = text.split(/\r?\n/).filter((line) => line.trim() !== "");
  if (lines.length === 0) {
    throw new SchemaError("empty CSV");
  }
  const header = lines[0].split(",");
  if (HEADER.some((name, i) => header[i] !== name)) {
    throw new SchemaError(`bad header: expected ${HEADER.join(",")}, got ${lines[0]}`);
  }
  if (lines.length === 1) {
    throw new SchemaError("CSV has a header but no data rows");
  }
  const rows: BenchRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== HEADER.length) {
      throw new SchemaError(`line ${i + 1}: expected ${HEADER.length} cells, got ${cells.length}`);
    }
    rows.push({
      method: cells[0],
      level: parseNumber(cells[1], i + 1, "level"),
      budget: parseNumber(cells[2], i + 1, "budget"),
      foregroundRate: parseNumber(cells[3], i + 1, "foreground_rate"),
      pointRecall: cells[4] === "" ? null : parseNumber(cells[4], i + 1, "point_recall"),
      scenes: parseNumber(cells[5], i + 1, "scenes"),
    });
  }
  return rows;
}

/**
 * Pull the sfps gamma-sweep rows out of a bench table, sorted by gamma.
 * Rows from other levels are ignored; by default the lowest level present
 * among sweep rows is used.
 */
export function extractGammaSweep(rows: BenchRow[], level?: number): SweepPoint[] {
  const sweep = rows
    .map((row) => ({ row, match: GAMMA_METHOD.exec(row.method) }))
    .filter((entry) => entry.match !== null) as { row: BenchRow; match: RegExpExecArray }[];
  if (sweep.length === 0) {
    throw new SchemaError("no sfps(gamma=...) rows in this CSV");
  }
  const chosen = level ?? Math.min(...sweep.map((entry) => entry.row.level));
  const points = sweep
    .filter((entry) => entry.row.level === chosen)
    .map((entry) => {
      const gamma = Number(entry.match[1]);
      if (Number.isNaN(gamma) || gamma < 0) {
        throw new SchemaError(`bad gamma in method ${entry.row.method}`);
      }
      return {
        gamma,
        foregroundRate: entry.row.foregroundRate,
        pointRecall: entry.row.pointRecall,
      };
    });
  if (points.length === 0) {
    throw new SchemaError(`no sweep rows at level ${chosen}`);
  }
  return points.sort((a, b) => a.gamma - b.gamma);
}
