import { ApiClient } from "./api.js";
import { AppController } from "./app.js";
import { bindKeyboard, renderApp } from "./render.js";

// Browser entry point: one session per tab, driven from the form in
// index.html and the global keyboard shortcuts.

const root = document.getElementById("app");
if (!root) throw new Error("missing #app container");

const api = new ApiClient("");
const controller = new AppController(api, (state) => renderApp(root, state));

bindKeyboard(window, (key) => {
  void controller.handleKey(key);
});

root.addEventListener("click", (event) => {
  const target = event.target as HTMLElement;
  if (target.id === "submit-batch") {
    void controller.submit();
    return;
  }
  const header = target.closest("th.sortable") as HTMLElement | null;
  if (header?.dataset.sortKey) {
    controller.setSort(header.dataset.sortKey as never);
    return;
  }
  const card = target.closest(".card") as HTMLElement | null;
  if (card?.dataset.row !== undefined && card.dataset.col !== undefined) {
    void controller.explain(Number(card.dataset.row), Number(card.dataset.col));
  }
});

const form = document.getElementById("session-form") as HTMLFormElement | null;
form?.addEventListener("submit", (event) => {
  event.preventDefault();
  const path = (document.getElementById("csv-path") as HTMLInputElement).value.trim();
  const gtPath = (document.getElementById("gt-path") as HTMLInputElement).value.trim();
  const budget = Number((document.getElementById("budget") as HTMLInputElement).value) || 300;
  const body: Record<string, unknown> = { csv_path: path, config: { budget } };
  if (gtPath) body.ground_truth_path = gtPath;
  void controller.createSession(body);
});
