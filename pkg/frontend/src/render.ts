import type { AppState } from "./app.js";
import { dashboardRows, sortRows, convergenceSeries, showF1Series, budgetLine } from "./dashboardModel.js";
import type { BatchViewModel } from "./batchModel.js";
import { explanationView } from "./explainModel.js";
import type { StatusPayload } from "./types.js";

// Plain-DOM rendering; no client-side math beyond chart geometry.

export function renderApp(root: HTMLElement, state: AppState): void {
  root.replaceChildren();
  if (state.banner) {
    const banner = el("div", "banner", state.banner);
    banner.setAttribute("role", "alert");
    root.appendChild(banner);
  }
  const main = el("div", "layout");
  main.appendChild(renderBatchPane(state));
  const side = el("div", "side");
  if (state.status) side.appendChild(renderDashboard(state));
  side.appendChild(renderExplanation(state));
  main.appendChild(side);
  root.appendChild(main);
}

function renderBatchPane(state: AppState): HTMLElement {
  const pane = el("section", "batch-pane");
  if (state.terminal || !state.batch) {
    pane.appendChild(el("h2", "", "Session complete"));
    pane.appendChild(
      el("p", "", "The label budget is exhausted or every column is resolved."),
    );
    return pane;
  }
  const batch = state.batch;
  const header = el(
    "h2",
    "",
    `Column "${batch.payload.column_name}" — batch of ${batch.size} (${batch.decidedCount} decided)`,
  );
  pane.appendChild(header);
  pane.appendChild(
    el("p", "hint", "keys: e = erroneous, c = correct, arrows move, Enter submits"),
  );
  batch.payload.cells.forEach((cell, index) => {
    const card = el("div", "card" + (index === batch.focus ? " focused" : ""));
    card.dataset.row = String(cell.row);
    card.dataset.col = String(cell.col);
    const tuple = el("div", "tuple");
    cell.tuple.forEach((value, col) => {
      const chip = el("span", col === cell.col ? "cell target" : "cell", value || "(empty)");
      tuple.appendChild(chip);
    });
    card.appendChild(tuple);
    const meta = [];
    if (cell.disagreement !== null) meta.push(`disagreement ${cell.disagreement.toFixed(3)}`);
    if (cell.certainty !== null) meta.push(`certainty ${cell.certainty.toFixed(3)}`);
    card.appendChild(el("div", "meta", meta.join(" · ")));
    const decision = batch.decisionFor(index);
    card.appendChild(el("div", "decision " + (decision ?? "undecided"), decision ?? "undecided"));
    pane.appendChild(card);
  });
  const submit = el("button", "submit", "Submit batch") as HTMLButtonElement;
  submit.disabled = !batch.submittable;
  submit.id = "submit-batch";
  pane.appendChild(submit);
  return pane;
}

const SORTABLE_HEADERS: [string, string][] = [
  ["column", "name"],
  ["labels", "labels"],
  ["mean certainty", "meanCertainty"],
  ["CV F1", "cvF1"],
  ["pred. change", "predictionChange"],
];

function renderDashboard(state: AppState): HTMLElement {
  const status = state.status as StatusPayload;
  const pane = el("section", "dashboard");
  pane.appendChild(el("h2", "", "Progress"));
  pane.appendChild(el("p", "budget", budgetLine(status)));
  pane.appendChild(renderChart(status));
  const table = document.createElement("table");
  table.className = "columns";
  const head = document.createElement("tr");
  for (const [title, key] of SORTABLE_HEADERS) {
    const th = el("th", "sortable", title + (state.sortKey === key ? (state.sortAscending ? " ↑" : " ↓") : ""));
    th.dataset.sortKey = key;
    head.appendChild(th);
  }
  head.appendChild(el("th", "", "decisive features"));
  table.appendChild(head);
  for (const row of sortRows(dashboardRows(status), state.sortKey, state.sortAscending)) {
    const tr = document.createElement("tr");
    tr.appendChild(el("td", "", row.degenerate ? `${row.name} (degenerate)` : row.name));
    tr.appendChild(el("td", "", String(row.labels)));
    tr.appendChild(el("td", "", row.meanCertainty === null ? "—" : row.meanCertainty.toFixed(3)));
    tr.appendChild(el("td", "", row.cvF1.toFixed(3)));
    tr.appendChild(el("td", "", row.predictionChange === null ? "—" : row.predictionChange.toFixed(3)));
    tr.appendChild(el("td", "features", row.topFeatures.join(", ")));
    table.appendChild(tr);
  }
  pane.appendChild(table);
  return pane;
}

function renderChart(status: StatusPayload): HTMLElement {
  const wrap = el("div", "chart");
  const series = convergenceSeries(status);
  if (series.labels.length === 0) {
    wrap.appendChild(el("p", "placeholder", "no iterations completed yet"));
    return wrap;
  }
  const svgNS = "http://www.w3.org/2000/svg";
  const svg = document.createElementNS(svgNS, "svg");
  svg.setAttribute("viewBox", "0 0 300 120");
  svg.setAttribute("class", "convergence");
  const maxX = Math.max(...series.labels, 1);
  const line = (ys: number[], cls: string) => {
    const points = series.labels
      .map((x, i) => `${(x / maxX) * 290 + 5},${115 - ys[i] * 110}`)
      .join(" ");
    const poly = document.createElementNS(svgNS, "polyline");
    poly.setAttribute("points", points);
    poly.setAttribute("class", cls);
    poly.setAttribute("fill", "none");
    svg.appendChild(poly);
  };
  if (showF1Series(status)) {
    line(series.f1, "f1");
    line(series.precision, "precision");
    line(series.recall, "recall");
  }
  wrap.appendChild(svg);
  wrap.appendChild(
    el(
      "p",
      "chart-caption",
      showF1Series(status)
        ? `F1 over labels used (${series.labels.length} points)`
        : "no ground truth attached; certainty and CV shown in the table",
    ),
  );
  return wrap;
}

function renderExplanation(state: AppState): HTMLElement {
  const pane = el("section", "explain-pane");
  pane.appendChild(el("h2", "", "Why?"));
  if (state.explanationPlaceholder) {
    pane.appendChild(el("p", "placeholder", state.explanationPlaceholder));
    return pane;
  }
  if (!state.explanation) {
    pane.appendChild(el("p", "placeholder", "click a card to see the decision path"));
    return pane;
  }
  const view = explanationView(state.explanation);
  if (view.conditions.length === 0) {
    pane.appendChild(el("p", "", `always ${view.verdict}`));
  } else {
    const list = document.createElement("ol");
    for (const condition of view.conditions) {
      list.appendChild(el("li", "condition", condition));
    }
    pane.appendChild(list);
    pane.appendChild(el("p", "verdict", `then: ${view.verdict}`));
  }
  pane.appendChild(el("p", "leaf", view.leafLine));
  return pane;
}

function el(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function bindKeyboard(target: Window, handler: (key: string) => void): () => void {
  const listener = (event: KeyboardEvent) => {
    if (event.target instanceof HTMLInputElement || event.target instanceof HTMLTextAreaElement) {
      return;
    }
    handler(event.key);
  };
  target.addEventListener("keydown", listener);
  return () => target.removeEventListener("keydown", listener);
}

export function batchModelFocusLabel(batch: BatchViewModel): string {
  const cell = batch.payload.cells[batch.focus];
  return cell ? `${cell.row},${cell.col}` : "";
}
