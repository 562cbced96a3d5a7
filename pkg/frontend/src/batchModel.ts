import type { BatchPayload, Decision, LabelSubmission } from "./types.js";

export type KeyOutcome = "decided" | "moved" | "submit" | null;

/**
 * State machine behind the batch view: one card per queried cell, a pending
 * decision per card, and keyboard-first navigation. A batch is submittable
 * only when every cell has a decision; decisions are buffered locally and
 * only sent on submit (no optimistic server state).
 */
export class BatchViewModel {
  readonly payload: BatchPayload;
  private readonly decisions = new Map<number, Decision>();
  focus = 0;

  constructor(payload: BatchPayload) {
    this.payload = payload;
  }

  get size(): number {
    return this.payload.cells.length;
  }

  decisionFor(index: number): Decision | undefined {
    return this.decisions.get(index);
  }

  get decidedCount(): number {
    return this.decisions.size;
  }

  get submittable(): boolean {
    return this.size > 0 && this.decisions.size === this.size;
  }

  decide(index: number, decision: Decision): void {
    if (index < 0 || index >= this.size) return;
    this.decisions.set(index, decision);
  }

  /** Keyboard protocol: e = erroneous, c = correct (focus then advances),
   * arrows/j/k navigate, Enter submits once complete. */
  handleKey(key: string): KeyOutcome {
    switch (key) {
      case "e":
      case "E":
        this.decide(this.focus, "erroneous");
        this.advance();
        return "decided";
      case "c":
      case "C":
        this.decide(this.focus, "correct");
        this.advance();
        return "decided";
      case "ArrowDown":
      case "j":
        this.advance();
        return "moved";
      case "ArrowUp":
      case "k":
        this.focus = Math.max(0, this.focus - 1);
        return "moved";
      case "Enter":
        return this.submittable ? "submit" : null;
      default:
        return null;
    }
  }

  private advance(): void {
    this.focus = Math.min(this.size - 1, this.focus + 1);
  }

  toLabels(): LabelSubmission[] {
    return this.payload.cells.map((cell, i) => ({
      row: cell.row,
      col: cell.col,
      label: this.decisions.get(i) as Decision,
    }));
  }
}
