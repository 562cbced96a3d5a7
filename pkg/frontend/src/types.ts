// Payload shapes of the labeling service JSON API. The UI renders these
// fields verbatim; it never recomputes metrics client-side.

export type Decision = "erroneous" | "correct";

export interface BatchCell {
  row: number;
  col: number;
  value: string;
  tuple: string[];
  disagreement: number | null;
  certainty: number | null;
}

export interface BatchPayload {
  session_id: string;
  phase: "init" | "active" | "done";
  iteration: number;
  labels_used: number;
  budget_remaining: number;
  done: boolean;
  column: number | null;
  column_name: string | null;
  cells: BatchCell[];
}

export interface ColumnStatus {
  column: number;
  name: string;
  labels: number;
  labels_erroneous: number;
  labels_correct: number;
  degenerate: boolean;
  mean_certainty: number | null;
  cv_f1: number;
  prediction_change: number | null;
  precision?: number;
  recall?: number;
  f1?: number;
  top_features: string[];
}

export interface ConvergencePoint {
  labels_used: number;
  precision: number;
  recall: number;
  f1: number;
}

export interface StatusPayload {
  session_id: string;
  phase: string;
  iteration: number;
  labels_used: number;
  budget: number;
  budget_remaining: number;
  has_ground_truth: boolean;
  done: boolean;
  convergence: ConvergencePoint[];
  per_column: ColumnStatus[];
}

export interface SummaryPayload {
  session_id: string;
  iteration: number;
  phase: string;
  column: number | null;
  labels_used: number;
  budget_remaining: number;
  done: boolean;
  per_column: Omit<ColumnStatus, "top_features">[];
  global: { precision: number; recall: number; f1: number } | null;
}

export interface ExplainStep {
  feature: number;
  name: string;
  op: "<=" | ">";
  threshold: number;
  value: number;
}

export interface ExplainPayload {
  row: number;
  col: number;
  steps: ExplainStep[];
  leaf: { erroneous: number; correct: number; erroneous_fraction: number };
  verdict: Decision;
  text: string;
}

export interface LabelSubmission {
  row: number;
  col: number;
  label: Decision;
}

export interface ApiErrorBody {
  error: string;
  message: string;
}
