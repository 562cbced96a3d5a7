// @vitest-environment jsdom
import { describe, expect, it } from "vitest";
import type { AppState } from "../src/app.js";
import { BatchViewModel } from "../src/batchModel.js";
import { renderApp } from "../src/render.js";
import type { BatchPayload, StatusPayload } from "../src/types.js";

function batchPayload(n = 10): BatchPayload {
  return {
    session_id: "s",
    phase: "active",
    iteration: 1,
    labels_used: 0,
    budget_remaining: 300,
    done: false,
    column: 1,
    column_name: "salary",
    cells: Array.from({ length: n }, (_, i) => ({
      row: i,
      col: 1,
      value: `v${i}`,
      tuple: [`n${i}`, `v${i}`, "z"],
      disagreement: 0.3,
      certainty: 0.7,
    })),
  };
}

const status: StatusPayload = {
  session_id: "s",
  phase: "active",
  iteration: 1,
  labels_used: 10,
  budget: 300,
  budget_remaining: 290,
  has_ground_truth: false,
  done: false,
  convergence: [],
  per_column: [],
};

function state(batch: BatchViewModel | null, banner: string | null = null): AppState {
  return {
    sessionId: "s",
    batch,
    status,
    banner,
    terminal: batch === null,
    explanation: null,
    explanationPlaceholder: null,
    sortKey: "meanCertainty",
    sortAscending: true,
  };
}

describe("DOM rendering", () => {
  it("renders one card per cell with the target highlighted", () => {
    const root = document.createElement("div");
    renderApp(root, state(new BatchViewModel(batchPayload(10))));
    expect(root.querySelectorAll(".card").length).toBe(10);
    const firstCard = root.querySelector(".card")!;
    const target = firstCard.querySelector(".cell.target")!;
    expect(target.textContent).toBe("v0");
    expect(firstCard.querySelectorAll(".cell").length).toBe(3); // whole tuple shown
  });

  it("submit stays disabled until every card is decided", () => {
    const model = new BatchViewModel(batchPayload(10));
    for (let i = 0; i < 9; i++) model.decide(i, "correct");
    const root = document.createElement("div");
    renderApp(root, state(model));
    expect((root.querySelector("#submit-batch") as HTMLButtonElement).disabled).toBe(true);
    model.decide(9, "erroneous");
    renderApp(root, state(model));
    expect((root.querySelector("#submit-batch") as HTMLButtonElement).disabled).toBe(false);
  });

  it("shows the 409 banner as an alert", () => {
    const root = document.createElement("div");
    renderApp(root, state(new BatchViewModel(batchPayload(2)), "Label submission rejected"));
    const banner = root.querySelector(".banner")!;
    expect(banner.getAttribute("role")).toBe("alert");
    expect(banner.textContent).toContain("rejected");
  });

  it("terminal state renders the budget-exhausted view", () => {
    const root = document.createElement("div");
    renderApp(root, state(null));
    expect(root.textContent).toContain("Session complete");
  });

  it("empty convergence renders a placeholder instead of a chart", () => {
    const root = document.createElement("div");
    renderApp(root, state(new BatchViewModel(batchPayload(1))));
    expect(root.querySelector(".chart .placeholder")?.textContent).toContain("no iterations");
  });

  it("explanation panel renders the decision path or a placeholder", () => {
    const root = document.createElement("div");
    const base = state(new BatchViewModel(batchPayload(1)));
    renderApp(root, base);
    expect(root.querySelector(".explain-pane .placeholder")?.textContent).toContain("click a card");

    renderApp(root, {
      ...base,
      explanationPlaceholder: "no surrogate trained yet for this column",
    });
    expect(root.querySelector(".explain-pane .placeholder")?.textContent).toContain("no surrogate");

    renderApp(root, {
      ...base,
      explanation: {
        row: 0,
        col: 1,
        steps: [{ feature: 2, name: "col=salary|unigram=$", op: "<=", threshold: 0.1, value: 0 }],
        leaf: { erroneous: 4, correct: 0, erroneous_fraction: 5 / 6 },
        verdict: "erroneous",
        text: "…",
      },
    });
    expect(root.querySelector(".explain-pane .condition")?.textContent).toContain("col=salary|unigram=$");
    expect(root.querySelector(".explain-pane .verdict")?.textContent).toContain("erroneous");
  });

  it("clicking a sortable header is reflected via data attributes", () => {
    const root = document.createElement("div");
    renderApp(root, state(new BatchViewModel(batchPayload(1))));
    const headers = root.querySelectorAll("th.sortable");
    expect(headers.length).toBe(5);
    expect((headers[2] as HTMLElement).dataset.sortKey).toBe("meanCertainty");
  });
});
