import type { ColumnStatus, StatusPayload } from "./types.js";

// Every number shown on the dashboard is copied from the /status payload;
// nothing is recomputed here, so displayed metrics always trace back to an
// API field.

export interface DashboardRow {
  column: number;
  name: string;
  labels: number;
  degenerate: boolean;
  meanCertainty: number | null;
  cvF1: number;
  predictionChange: number | null;
  f1: number | null;
  topFeatures: string[];
}

export interface Series {
  labels: number[];
  f1: number[];
  precision: number[];
  recall: number[];
}

export function dashboardRows(status: StatusPayload): DashboardRow[] {
  return status.per_column.map((c: ColumnStatus) => ({
    column: c.column,
    name: c.name,
    labels: c.labels,
    degenerate: c.degenerate,
    meanCertainty: c.mean_certainty,
    cvF1: c.cv_f1,
    predictionChange: c.prediction_change,
    f1: c.f1 ?? null,
    topFeatures: c.top_features ?? [],
  }));
}

export type SortKey = "name" | "labels" | "meanCertainty" | "cvF1" | "predictionChange";

export function sortRows(rows: DashboardRow[], key: SortKey, ascending: boolean): DashboardRow[] {
  return [...rows].sort((a, b) => {
    const av = a[key];
    const bv = b[key];
    if (av === null) return 1; // unknown values always last
    if (bv === null) return -1;
    const cmp = typeof av === "string" ? av.localeCompare(bv as string) : (av as number) - (bv as number);
    return ascending ? cmp : -cmp;
  });
}

export function sortByMeanCertainty(rows: DashboardRow[]): DashboardRow[] {
  // Ascending, unknown certainty last: the top row is the next MC pick.
  return sortRows(rows, "meanCertainty", true);
}

export function convergenceSeries(status: StatusPayload): Series {
  return {
    labels: status.convergence.map((p) => p.labels_used),
    f1: status.convergence.map((p) => p.f1),
    precision: status.convergence.map((p) => p.precision),
    recall: status.convergence.map((p) => p.recall),
  };
}

/** Ground-truth metrics (F1 series) are shown only for oracle runs. */
export function showF1Series(status: StatusPayload): boolean {
  return status.has_ground_truth;
}

export function budgetLine(status: StatusPayload): string {
  return `${status.labels_used} / ${status.budget} labels used, ${status.budget_remaining} remaining`;
}
