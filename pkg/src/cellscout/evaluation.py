"""Ground-truth oracle, cell-wise detection metrics, synthetic error
injection, and convergence-curve aggregation across seeded runs."""

from __future__ import annotations

import csv
import io
import json
import string
from dataclasses import dataclass, field

import numpy as np

from .errors import BadPlan, EmptyLog, OutOfBounds
from .table import CellRef, GroundTruth, Label, LabelSource, LabelValue, Table

_TYPO_POOL = string.ascii_letters + string.digits


def oracle_label(dirty: Table, gt: GroundTruth, cell: CellRef, iteration: int = 0) -> Label:
    """A cell is erroneous exactly when its dirty value differs from the
    ground-truth value (exact string comparison, no normalization)."""
    cell.check_bounds(dirty)
    erroneous = dirty.cell(cell.row, cell.col) != gt.cell(cell.row, cell.col)
    return Label(
        cell=cell,
        value=LabelValue.ERRONEOUS if erroneous else LabelValue.CORRECT,
        source=LabelSource.ORACLE,
        iteration=iteration,
    )


def true_error_cells(dirty: Table, gt: GroundTruth) -> set[CellRef]:
    return {
        CellRef(i, j)
        for i in range(dirty.n_rows)
        for j in range(dirty.n_cols)
        if dirty.cells[i][j] != gt.cells[i][j]
    }


@dataclass(frozen=True)
class DetectionResult:
    predicted: frozenset
    actual: frozenset

    @property
    def tp(self) -> int:
        return len(self.predicted & self.actual)

    @property
    def fp(self) -> int:
        return len(self.predicted - self.actual)

    @property
    def fn(self) -> int:
        return len(self.actual - self.predicted)

    @property
    def precision(self) -> float:
        # Empty prediction sets count as perfectly precise so degenerate runs
        # keep a defined F1.
        if not self.predicted:
            return 1.0
        return self.tp / (self.tp + self.fp)

    @property
    def recall(self) -> float:
        if not self.actual:
            return 1.0
        return self.tp / (self.tp + self.fn)

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        if p + r == 0.0:
            return 0.0
        return 2 * p * r / (p + r)


def score(predicted, gt: GroundTruth, dirty: Table) -> DetectionResult:
    pred = frozenset(predicted)
    for cell in pred:
        if not (0 <= cell.row < dirty.n_rows and 0 <= cell.col < dirty.n_cols):
            raise OutOfBounds(f"{cell} outside {dirty.n_rows}x{dirty.n_cols}")
    return DetectionResult(predicted=pred, actual=frozenset(true_error_cells(dirty, gt)))


KIND_TYPO = "typo"
KIND_MISSING = "missing"
KIND_FORMAT = "format"
KIND_CROSS = "cross"
KIND_SUBSTITUTE = "substitute"  # length-preserving single-character typo
COLUMN_KINDS = (KIND_TYPO, KIND_MISSING, KIND_FORMAT, KIND_CROSS, KIND_SUBSTITUTE)
PAIR_KINDS = (KIND_TYPO, KIND_MISSING, KIND_FORMAT, KIND_SUBSTITUTE, "swap")

_SUBSTITUTE_POOL = string.ascii_uppercase


@dataclass(frozen=True)
class ColumnInjection:
    column: int
    rate: float
    kind: str
    marker: str = "$"  # format: character stripped from the value
    determinant: int | None = None  # cross: column whose value the target must agree with


@dataclass(frozen=True)
class PairInjection:
    """Correlated errors: with probability ``rate`` per row, both named
    columns are corrupted in that same row."""

    driver: int
    dependent: int
    rate: float
    driver_kind: str = KIND_TYPO
    dependent_kind: str = "swap"


@dataclass(frozen=True)
class InjectionPlan:
    seed: int
    columns: tuple[ColumnInjection, ...] = ()
    pairs: tuple[PairInjection, ...] = ()

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "columns": [
                {
                    "column": c.column,
                    "rate": c.rate,
                    "kind": c.kind,
                    "marker": c.marker,
                    "determinant": c.determinant,
                }
                for c in self.columns
            ],
            "pairs": [
                {
                    "driver": p.driver,
                    "dependent": p.dependent,
                    "rate": p.rate,
                    "driver_kind": p.driver_kind,
                    "dependent_kind": p.dependent_kind,
                }
                for p in self.pairs
            ],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "InjectionPlan":
        try:
            columns = tuple(
                ColumnInjection(
                    column=int(c["column"]),
                    rate=float(c["rate"]),
                    kind=c["kind"],
                    marker=c.get("marker", "$"),
                    determinant=c.get("determinant"),
                )
                for c in obj.get("columns", [])
            )
            pairs = tuple(
                PairInjection(
                    driver=int(p["driver"]),
                    dependent=int(p["dependent"]),
                    rate=float(p["rate"]),
                    driver_kind=p.get("driver_kind", KIND_TYPO),
                    dependent_kind=p.get("dependent_kind", "swap"),
                )
                for p in obj.get("pairs", [])
            )
            return cls(seed=int(obj["seed"]), columns=columns, pairs=pairs)
        except (KeyError, TypeError, ValueError) as exc:
            raise BadPlan(f"malformed injection plan: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "InjectionPlan":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise BadPlan(f"plan is not valid JSON: {exc}") from exc
        return cls.from_dict(obj)


def _validate_plan(plan: InjectionPlan, table: Table) -> None:
    for c in plan.columns:
        if not 0 <= c.column < table.n_cols:
            raise BadPlan(f"column {c.column} outside 0..{table.n_cols - 1}")
        if not 0.0 <= c.rate <= 1.0:
            raise BadPlan(f"rate {c.rate} outside [0, 1]")
        if c.kind not in COLUMN_KINDS:
            raise BadPlan(f"unknown error kind {c.kind!r}")
        if c.kind == KIND_CROSS:
            if c.determinant is None or not 0 <= c.determinant < table.n_cols:
                raise BadPlan(f"cross injection on column {c.column} needs a valid determinant")
            if c.determinant == c.column:
                raise BadPlan("cross determinant must differ from the target column")
    for p in plan.pairs:
        for col in (p.driver, p.dependent):
            if not 0 <= col < table.n_cols:
                raise BadPlan(f"pair column {col} outside 0..{table.n_cols - 1}")
        if p.driver == p.dependent:
            raise BadPlan("pair must name two different columns")
        if not 0.0 <= p.rate <= 1.0:
            raise BadPlan(f"pair rate {p.rate} outside [0, 1]")
        if p.driver_kind not in PAIR_KINDS or p.dependent_kind not in PAIR_KINDS:
            raise BadPlan("unknown pair mutation kind")


def typo_value(value: str, rng: np.random.Generator) -> str:
    """One random character edit: insert, delete, or substitute."""
    ops = ["insert"]
    if value:
        ops += ["substitute", "delete"]
    op = ops[int(rng.integers(len(ops)))]
    if op == "insert":
        pos = int(rng.integers(len(value) + 1))
        ch = _TYPO_POOL[int(rng.integers(len(_TYPO_POOL)))]
        return value[:pos] + ch + value[pos:]
    pos = int(rng.integers(len(value)))
    if op == "delete":
        return value[:pos] + value[pos + 1 :]
    ch = _TYPO_POOL[int(rng.integers(len(_TYPO_POOL)))]
    return value[:pos] + ch + value[pos + 1 :]


def _substitute(value: str, rng: np.random.Generator) -> str | None:
    if not value:
        return None
    pos = int(rng.integers(len(value)))
    ch = _SUBSTITUTE_POOL[int(rng.integers(len(_SUBSTITUTE_POOL)))]
    return value[:pos] + ch + value[pos + 1 :]


def _mutate(
    kind: str,
    value: str,
    row: int,
    col: int,
    table: Table,
    rng: np.random.Generator,
    marker: str = "$",
    determinant: int | None = None,
) -> str:
    """Apply one mutation, guaranteed to differ from the original; kinds that
    cannot change this particular value fall back to a character typo."""
    for _ in range(64):
        if kind == KIND_MISSING:
            candidate = ""
        elif kind == KIND_FORMAT:
            candidate = value.replace(marker, "")
        elif kind == KIND_CROSS:
            candidate = _cross_value(value, row, col, table, determinant, rng)
        elif kind == "swap":
            candidate = _swap_value(value, col, table, rng)
        elif kind == KIND_SUBSTITUTE:
            candidate = _substitute(value, rng)
        else:
            candidate = typo_value(value, rng)
        if candidate is not None and candidate != value:
            return candidate
        if kind in (KIND_MISSING, KIND_FORMAT):
            break  # deterministic kinds cannot succeed by retrying
    # Fall back to an insert typo, which always differs.
    pos = int(rng.integers(len(value) + 1))
    ch = _TYPO_POOL[int(rng.integers(len(_TYPO_POOL)))]
    return value[:pos] + ch + value[pos:]


def _cross_value(value, row, col, table, determinant, rng) -> str | None:
    det_value = table.cells[row][determinant]
    for _ in range(32):
        other = int(rng.integers(table.n_rows))
        if table.cells[other][determinant] != det_value and table.cells[other][col] != value:
            return table.cells[other][col]
    return None


def _swap_value(value, col, table, rng) -> str | None:
    for _ in range(32):
        other = int(rng.integers(table.n_rows))
        if table.cells[other][col] != value:
            return table.cells[other][col]
    return None


def inject_errors(clean: Table, plan: InjectionPlan) -> tuple[Table, GroundTruth]:
    """Corrupt a copy of ``clean`` per the plan; ground truth is the input."""
    _validate_plan(plan, clean)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([plan.seed, 0x1E])))
    grid = [list(row) for row in clean.cells]
    for spec in plan.columns:
        draws = rng.random(clean.n_rows)
        for i in range(clean.n_rows):
            if draws[i] < spec.rate:
                grid[i][spec.column] = _mutate(
                    spec.kind,
                    clean.cells[i][spec.column],
                    i,
                    spec.column,
                    clean,
                    rng,
                    marker=spec.marker,
                    determinant=spec.determinant,
                )
    for pair in plan.pairs:
        draws = rng.random(clean.n_rows)
        for i in range(clean.n_rows):
            if draws[i] < pair.rate:
                grid[i][pair.driver] = _mutate(
                    pair.driver_kind, clean.cells[i][pair.driver], i, pair.driver, clean, rng
                )
                grid[i][pair.dependent] = _mutate(
                    pair.dependent_kind, clean.cells[i][pair.dependent], i, pair.dependent, clean, rng
                )
    dirty = Table(schema=clean.schema, cells=tuple(tuple(row) for row in grid))
    return dirty, clean


@dataclass(frozen=True)
class ConvergencePoint:
    labels_used: int
    precision: float
    recall: float
    f1: float

    def to_dict(self) -> dict:
        return {
            "labels_used": self.labels_used,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


@dataclass
class AggregateCurve:
    """Mean and population stddev across runs, aligned on label counts by
    last-observation-carried-forward."""

    labels: list[int]
    mean_f1: list[float]
    std_f1: list[float]
    mean_precision: list[float]
    std_precision: list[float]
    mean_recall: list[float]
    std_recall: list[float]
    points: list[ConvergencePoint] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["labels_used", "mean_f1", "std_f1", "mean_p", "mean_r"])
        for i, count in enumerate(self.labels):
            writer.writerow(
                [count, self.mean_f1[i], self.std_f1[i], self.mean_precision[i], self.mean_recall[i]]
            )
        return buf.getvalue()

    def value_at(self, labels_used: int, metric: str = "mean_f1") -> float:
        series = getattr(self, metric)
        best = None
        for i, count in enumerate(self.labels):
            if count <= labels_used:
                best = series[i]
            else:
                break
        if best is None:
            best = series[0]
        return best


def record_convergence(runs: list[list[ConvergencePoint]]) -> AggregateCurve:
    """Align per-seed curves on the union of label counts and aggregate."""
    if not runs or any(not run for run in runs):
        raise EmptyLog("need at least one completed run with at least one point")
    counts = sorted({p.labels_used for run in runs for p in run})
    per_metric = {"f1": [], "precision": [], "recall": []}
    for run in runs:
        ordered = sorted(run, key=lambda p: p.labels_used)
        for metric in per_metric:
            series = []
            pos = 0
            current = getattr(ordered[0], metric)
            for count in counts:
                while pos < len(ordered) and ordered[pos].labels_used <= count:
                    current = getattr(ordered[pos], metric)
                    pos += 1
                series.append(current)
            per_metric[metric].append(series)
    f1 = np.array(per_metric["f1"])
    precision = np.array(per_metric["precision"])
    recall = np.array(per_metric["recall"])
    curve = AggregateCurve(
        labels=counts,
        mean_f1=f1.mean(axis=0).tolist(),
        std_f1=f1.std(axis=0).tolist(),
        mean_precision=precision.mean(axis=0).tolist(),
        std_precision=precision.std(axis=0).tolist(),
        mean_recall=recall.mean(axis=0).tolist(),
        std_recall=recall.std(axis=0).tolist(),
    )
    curve.points = [
        ConvergencePoint(counts[i], curve.mean_precision[i], curve.mean_recall[i], curve.mean_f1[i])
        for i in range(len(counts))
    ]
    return curve
