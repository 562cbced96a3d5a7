import type { ExplainPayload } from "./types.js";

export interface ExplainView {
  conditions: string[];
  verdict: string;
  leafLine: string;
  text: string;
}

// Feature names come verbatim from the server's registry; UI adds no
// interpretation beyond layout.
export function explanationView(payload: ExplainPayload): ExplainView {
  const conditions = payload.steps.map(
    (s) => `${s.name} ${s.op} ${formatNumber(s.threshold)} (value ${formatNumber(s.value)})`,
  );
  const total = payload.leaf.erroneous + payload.leaf.correct;
  return {
    conditions,
    verdict: payload.verdict,
    leafLine: `${payload.leaf.erroneous}/${total} labeled erroneous at this leaf`,
    text: payload.text,
  };
}

function formatNumber(x: number): string {
  return Number.isInteger(x) ? String(x) : x.toPrecision(4);
}
