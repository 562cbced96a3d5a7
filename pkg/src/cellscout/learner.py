"""Two-dimensional active learning: which column to ask about next, and
which cells inside it.

The session is a push-mode state machine so that the headless oracle driver
and the HTTP labeling service share exactly the same behavior: the session
exposes one pending batch at a time, and every label submission advances it.

Phases: ``init`` (frequency-ranked probing of every column until each has
two erroneous and two correct labels or hits the probe cap), ``active``
(the retrain/select/sample loop), ``done`` (budget exhausted or nothing
selectable). Randomness is derived per event from the session seed, so a
snapshot plus the same subsequent labels replays bit-equal.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass, field, asdict
from enum import Enum

import numpy as np

from . import forest
from .embedding import EmbeddingModel, train_embedding
from .errors import (
    BudgetExhausted,
    ColumnExhausted,
    LabelMismatch,
    NoSelectableColumn,
    NotTrained,
    SnapshotMismatch,
)
from .evaluation import ConvergencePoint, DetectionResult, oracle_label, score
from .features import (
    ErrorProbabilityBlock,
    FeatureMatrix,
    NGramVocabulary,
    assemble,
    build_column_stats,
    build_ngram_vocab,
)
from .forest import Committee, CvReport, Hyperparams, certainty
from .snapshots import (
    SNAPSHOT_FORMAT_VERSION,
    SessionSnapshot,
    config_digest,
    floats_to_strings,
    strings_to_floats,
)
from .table import (
    CellRef,
    GroundTruth,
    Label,
    LabelSource,
    LabelStore,
    LabelValue,
    Table,
    table_to_csv_text,
)


class Strategy(str, Enum):
    RANDOM = "ra"
    ROUND_ROBIN = "rr"
    MIN_CERTAINTY = "mc"
    MAX_ERROR = "me"
    MAX_PREDICTION_CHANGE = "mpc"


METRIC_STRATEGIES = (Strategy.MIN_CERTAINTY, Strategy.MAX_ERROR, Strategy.MAX_PREDICTION_CHANGE)

DEFAULT_GRID = ((4, 1), (4, 5), (8, 1), (8, 5), (16, 1), (16, 5))


@dataclass(frozen=True)
class SessionConfig:
    batch_size: int = 10
    budget: int = 300
    strategy: Strategy = Strategy.MIN_CERTAINTY
    seed: int = 0
    ngram_n: int = 1
    text_mode: str = "char"  # "char" or "word" (word level exists for ablations only)
    use_text: bool = True
    use_metadata: bool = True
    use_embedding: bool = True
    embedding_dim: int = 50
    use_error_correlation: bool = True
    vocab_cap: int = 2000
    committee_size: int = 25
    cv_folds: int = 4
    grid: tuple = DEFAULT_GRID
    init_per_class: int = 2
    init_cap: int = 20

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")
        if self.budget < 1:
            raise ValueError("budget must be >= 1")

    def hyperparam_grid(self) -> tuple[Hyperparams, ...]:
        return tuple(
            Hyperparams(max_depth=d, min_leaf=l, n_trees=self.committee_size)
            for d, l in self.grid
        )

    def to_dict(self) -> dict:
        obj = asdict(self)
        obj["strategy"] = self.strategy.value
        obj["grid"] = [list(g) for g in self.grid]
        return obj

    @classmethod
    def from_dict(cls, obj: dict) -> "SessionConfig":
        data = dict(obj)
        data["strategy"] = Strategy(data["strategy"])
        data["grid"] = tuple(tuple(g) for g in data["grid"])
        return cls(**data)

    def digest(self) -> str:
        return config_digest(self.to_dict())


@dataclass
class BatchRequest:
    """One pending query: cells of a single column, most informative first."""

    column: int
    cells: list[CellRef]
    iteration: int
    kind: str  # "init" or "active"
    rationale: list[dict] | None = None  # per-cell {"disagreement", "certainty"}

    def cell_set(self) -> frozenset:
        return frozenset(self.cells)


@dataclass
class ColumnState:
    index: int
    degenerate: bool = False
    train_count: int = 0
    committee: Committee | None = None
    probabilities: np.ndarray | None = None
    disagreements: np.ndarray | None = None
    previous_predictions: np.ndarray | None = None
    change_fraction: float = 1.0
    cv_history: list[float] = field(default_factory=list)
    latest_cv: float = 0.0
    latest_hp: Hyperparams | None = None
    surrogate: forest.TreeNode | None = None

    @property
    def predictions(self) -> np.ndarray | None:
        if self.probabilities is None:
            return None
        return self.probabilities >= 0.5


@dataclass
class IterationSummary:
    iteration: int
    phase: str
    column: int | None
    labels_used: int
    budget_remaining: int
    per_column: list[dict]
    global_metrics: dict | None
    done: bool


def build_probe_sequence(table: Table, col: int, cap: int) -> list[CellRef]:
    """Frequency-ranked initialization order for one column.

    Distinct values are sorted by ascending frequency (ties by first
    occurrence), then presented alternating rarest / most frequent / second
    rarest / ... . When every distinct value has been shown once, the walk
    wraps around to each value's next occurrence, capped at ``cap`` cells.
    """
    first_row: dict[str, int] = {}
    occurrences: dict[str, list[int]] = {}
    counts: Counter[str] = Counter()
    for i, value in enumerate(table.column(col)):
        counts[value] += 1
        occurrences.setdefault(value, []).append(i)
        first_row.setdefault(value, i)
    ranked = sorted(counts, key=lambda v: (counts[v], first_row[v]))
    order: list[str] = []
    lo, hi = 0, len(ranked) - 1
    take_rare = True
    while lo <= hi:
        if take_rare:
            order.append(ranked[lo])
            lo += 1
        else:
            order.append(ranked[hi])
            hi -= 1
        take_rare = not take_rare
    sequence: list[CellRef] = []
    round_idx = 0
    while len(sequence) < cap:
        added = False
        for value in order:
            occ = occurrences[value]
            if round_idx < len(occ):
                sequence.append(CellRef(occ[round_idx], col))
                added = True
                if len(sequence) >= cap:
                    break
        if not added:
            break
        round_idx += 1
    return sequence


def select_by_metric(strategy: Strategy, metrics: list[float], selectable: list[bool]) -> int:
    """Pure argmin/argmax over selectable columns; ties take the lowest index."""
    candidates = [j for j, ok in enumerate(selectable) if ok]
    if not candidates:
        raise NoSelectableColumn("no selectable column left")
    if strategy is Strategy.MAX_PREDICTION_CHANGE:
        best = max(candidates, key=lambda j: (metrics[j], -j))
    elif strategy in (Strategy.MIN_CERTAINTY, Strategy.MAX_ERROR):
        best = min(candidates, key=lambda j: (metrics[j], j))
    else:
        raise ValueError(f"{strategy} is not a metric strategy")
    return best


def _derived_seed(*parts: int) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1, dtype=np.uint64)[0])


def table_digest(table: Table) -> str:
    return hashlib.sha256(table_to_csv_text(table).encode("utf-8")).hexdigest()


class Session:
    """One resumable error-detection labeling session over a fixed table."""

    def __init__(self, table: Table, config: SessionConfig, ground_truth: GroundTruth | None = None):
        self.table = table
        self.config = config
        self.ground_truth = ground_truth
        self.store = LabelStore(table.n_rows, table.n_cols)
        self.labels_used = 0
        self.iteration = 0
        self.phase = "init"
        self.columns = [ColumnState(j) for j in range(table.n_cols)]
        self.convergence: list[ConvergencePoint] = []
        self.log_records: list[dict] = []
        self.rr_cursor = -1
        self.ra_draws = 0
        self.warmup_pending: list[int] = []
        self._probe_sequences = [
            build_probe_sequence(table, j, config.init_cap) for j in range(table.n_cols)
        ]
        self._init_col = 0
        self._presented = [0] * table.n_cols
        self._build_features()
        self.pending: BatchRequest | None = None
        self._advance_init()

    # ------------------------------------------------------------------ setup

    def _build_features(self) -> None:
        cfg = self.config
        vocabs: list[NGramVocabulary] | None = None
        if cfg.use_text:
            vocabs = [
                build_ngram_vocab(
                    self.table, j, n=cfg.ngram_n, cap=cfg.vocab_cap, mode=cfg.text_mode
                )
                for j in range(self.table.n_cols)
            ]
        stats = (
            [build_column_stats(self.table, j) for j in range(self.table.n_cols)]
            if cfg.use_metadata
            else None
        )
        self.embedding: EmbeddingModel | None = None
        if cfg.use_embedding:
            self.embedding = train_embedding(
                self.table, dim=cfg.embedding_dim, seed=_derived_seed(cfg.seed, 1)
            )
        self.block = (
            ErrorProbabilityBlock(self.table.n_rows, self.table.n_cols)
            if cfg.use_error_correlation
            else None
        )
        self.matrix: FeatureMatrix = assemble(
            self.table, vocabs, stats, self.embedding, self.block
        )

    # ------------------------------------------------------ label bookkeeping

    @property
    def budget_remaining(self) -> int:
        return self.config.budget - self.labels_used

    def unlabeled_rows(self, col: int) -> list[int]:
        labeled = self.store.labeled_rows(col)
        return [i for i in range(self.table.n_rows) if i not in labeled]

    def _selectable(self) -> list[bool]:
        out = []
        for j in range(self.table.n_cols):
            ok = not self.columns[j].degenerate and len(self.store.labeled_rows(j)) < self.table.n_rows
            out.append(ok)
        return out

    # ------------------------------------------------------------------- init

    def _column_init_done(self, col: int) -> bool:
        need = self.config.init_per_class
        enough = (
            self.store.erroneous_per_col[col] >= need and self.store.correct_per_col[col] >= need
        )
        exhausted = self._presented[col] >= min(self.config.init_cap, len(self._probe_sequences[col]))
        return enough or exhausted

    def _advance_init(self) -> None:
        while self._init_col < self.table.n_cols:
            col = self._init_col
            if self._column_init_done(col):
                self._init_col += 1
                continue
            remaining_cap = min(self.config.init_cap, len(self._probe_sequences[col])) - self._presented[col]
            # Small chunks keep the adaptive stop rule tight; a full batch per
            # probe round would overshoot columns that resolve in 4 cells.
            chunk = min(2 * self.config.init_per_class, self.config.batch_size)
            size = min(chunk, remaining_cap, self.budget_remaining)
            if size < 1:
                raise BudgetExhausted(
                    f"budget {self.config.budget} exhausted during initialization of column {col}"
                )
            start = self._presented[col]
            cells = self._probe_sequences[col][start : start + size]
            self._presented[col] += len(cells)
            self.pending = BatchRequest(column=col, cells=list(cells), iteration=0, kind="init")
            return
        self._finish_init()

    def _finish_init(self) -> None:
        for col in self.columns:
            err = self.store.erroneous_per_col[col.index]
            ok = self.store.correct_per_col[col.index]
            col.degenerate = err == 0 or ok == 0
        # One training pass over all columns before the loop starts; columns
        # later in the schema already see earlier columns' fresh probabilities.
        for j in range(self.table.n_cols):
            self._train_column(j)
        self.phase = "active"
        if self.config.strategy in METRIC_STRATEGIES:
            self.warmup_pending = [j for j, ok in enumerate(self._selectable()) if ok]
        self._record_iteration(None)
        self._advance_to_next_batch()

    # ------------------------------------------------------------- training

    def _labeled_data(self, col: int) -> tuple[np.ndarray, np.ndarray, list[int]]:
        labels = sorted(self.store.column_labels(col), key=lambda l: l.cell.row)
        rows = [l.cell.row for l in labels]
        y = np.array([1 if l.value is LabelValue.ERRONEOUS else 0 for l in labels], dtype=int)
        features = self.matrix.features_for_column(col, rows=rows)
        return features, y, rows

    def _train_column(self, col: int) -> None:
        state = self.columns[col]
        x, y, _ = self._labeled_data(col)
        t = state.train_count
        seed = self.config.seed
        if len(np.unique(y)) < 2:
            # Single-class training set: constant predictor, no grid search.
            committee = forest.train(x, y, self.config.hyperparam_grid()[0], _derived_seed(seed, 2, col, t))
            report = CvReport(requested_folds=self.config.cv_folds, status="single_class")
            best_hp = committee.hyperparams
        else:
            best_hp, report = forest.grid_search(
                x,
                y,
                grid=self.config.hyperparam_grid(),
                k=self.config.cv_folds,
                seed=_derived_seed(seed, 3, col, t),
            )
            committee = forest.train(x, y, best_hp, _derived_seed(seed, 2, col, t))
        full = self.matrix.features_for_column(col)
        member = committee.member_probabilities(full)
        probabilities = member.mean(axis=0)
        disagreements = forest.vote_entropy(np.mean(member >= 0.5, axis=0))

        previous = state.predictions
        state.committee = committee
        state.previous_predictions = previous
        if previous is not None:
            state.change_fraction = float(np.mean((probabilities >= 0.5) != previous))
        state.probabilities = probabilities
        state.disagreements = disagreements
        state.latest_cv = report.mean_f1
        state.cv_history.append(report.mean_f1)
        state.latest_hp = best_hp
        state.surrogate = forest.train_surrogate(x, y)
        state.train_count += 1
        if self.block is not None:
            self.block.refresh(col, probabilities)

    # ------------------------------------------------------------- selection

    def mean_certainty_unlabeled(self, col: int) -> float | None:
        state = self.columns[col]
        if state.probabilities is None:
            return None
        rows = self.unlabeled_rows(col)
        if not rows:
            return None
        return float(np.mean(certainty(state.probabilities[rows])))

    def select_column(self) -> int:
        selectable = self._selectable()
        candidates = [j for j, ok in enumerate(selectable) if ok]
        if not candidates:
            raise NoSelectableColumn("all columns are degenerate or fully labeled")
        strategy = self.config.strategy
        if strategy in METRIC_STRATEGIES:
            # One full round-robin pass gathers the metrics first.
            while self.warmup_pending:
                j = self.warmup_pending.pop(0)
                if selectable[j]:
                    return j
            if strategy is Strategy.MIN_CERTAINTY:
                metrics = [
                    self.mean_certainty_unlabeled(j) if selectable[j] else float("inf")
                    for j in range(self.table.n_cols)
                ]
                metrics = [float("inf") if m is None else m for m in metrics]
            elif strategy is Strategy.MAX_ERROR:
                metrics = [
                    float(np.mean(self.columns[j].cv_history)) if self.columns[j].cv_history else 0.0
                    for j in range(self.table.n_cols)
                ]
            else:
                metrics = [self.columns[j].change_fraction for j in range(self.table.n_cols)]
            return select_by_metric(strategy, metrics, selectable)
        if strategy is Strategy.ROUND_ROBIN:
            for step in range(1, self.table.n_cols + 1):
                j = (self.rr_cursor + step) % self.table.n_cols
                if selectable[j]:
                    self.rr_cursor = j
                    return j
            raise NoSelectableColumn("all columns are degenerate or fully labeled")
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence([self.config.seed, 4, self.ra_draws]))
        )
        self.ra_draws += 1
        return candidates[int(rng.integers(len(candidates)))]

    def generate_batch(self, col: int) -> BatchRequest:
        """Rank unlabeled cells by committee disagreement (ties: lower
        certainty, then lower row), then greedily prefer distinct values."""
        state = self.columns[col]
        rows = self.unlabeled_rows(col)
        if not rows:
            raise ColumnExhausted(f"column {col} has no unlabeled cells")
        k = min(self.config.batch_size, len(rows), self.budget_remaining)
        rows_arr = np.array(rows)
        dis = state.disagreements[rows_arr]
        cert = certainty(state.probabilities[rows_arr])
        order = np.lexsort((rows_arr, cert, -dis))
        ranked = rows_arr[order]
        values = self.table.column(col)
        chosen: list[int] = []
        seen_values: set[str] = set()
        skipped: list[int] = []
        for row in ranked:
            if len(chosen) >= k:
                break
            value = values[row]
            if value in seen_values:
                skipped.append(int(row))
                continue
            seen_values.add(value)
            chosen.append(int(row))
        for row in skipped:
            if len(chosen) >= k:
                break
            chosen.append(row)
        cells = [CellRef(r, col) for r in chosen]
        row_pos = {int(r): i for i, r in enumerate(rows_arr)}
        rationale = [
            {
                "disagreement": float(dis[row_pos[c.row]]),
                "certainty": float(cert[row_pos[c.row]]),
            }
            for c in cells
        ]
        return BatchRequest(
            column=col,
            cells=cells,
            iteration=self.iteration + 1,
            kind="active",
            rationale=rationale,
        )

    def _advance_to_next_batch(self) -> None:
        if self.budget_remaining < 1:
            self.pending = None
            self.phase = "done"
            return
        try:
            col = self.select_column()
        except NoSelectableColumn:
            self.pending = None
            self.phase = "done"
            return
        self.pending = self.generate_batch(col)

    # ------------------------------------------------------------ submission

    def submit(self, labels: list[Label]) -> IterationSummary:
        """Record labels for the pending batch and advance the state machine.

        Label iterations are normalized to the pending batch's iteration;
        value and source are taken as given.
        """
        if self.pending is None:
            raise LabelMismatch("session has no pending batch")
        batch = self.pending
        provided = {l.cell for l in labels}
        if provided != batch.cell_set() or len(labels) != len(batch.cells):
            raise LabelMismatch(
                f"labels must cover exactly the pending batch of {len(batch.cells)} cells"
            )
        normalized = [
            Label(cell=l.cell, value=l.value, source=l.source, iteration=batch.iteration)
            for l in labels
        ]
        rejected = self.store.submit(normalized)
        assert not rejected, "pending batches never contain labeled cells"
        self.labels_used += len(normalized)

        if batch.kind == "init":
            self.pending = None
            self._advance_init()
            return self._summary(column=batch.column)

        self.iteration = batch.iteration
        self._train_column(batch.column)
        self._record_iteration(batch.column)
        self._advance_to_next_batch()
        return self._summary(column=batch.column)

    def _record_iteration(self, column: int | None) -> None:
        global_metrics = None
        per_column = {str(j): self._column_metrics(j) for j in range(self.table.n_cols)}
        if self.ground_truth is not None:
            predicted = self.final_predictions()
            result = score(predicted, self.ground_truth, self.table)
            global_metrics = {
                "precision": result.precision,
                "recall": result.recall,
                "f1": result.f1,
            }
            self.convergence.append(
                ConvergencePoint(self.labels_used, result.precision, result.recall, result.f1)
            )
            for j in range(self.table.n_cols):
                col_pred = frozenset(c for c in predicted if c.col == j)
                col_actual = frozenset(
                    CellRef(i, j)
                    for i in range(self.table.n_rows)
                    if self.table.cells[i][j] != self.ground_truth.cells[i][j]
                )
                per_column[str(j)]["f1"] = DetectionResult(col_pred, col_actual).f1
        self.log_records.append(
            {
                "iteration": self.iteration,
                "column": column,
                "labels_used": self.labels_used,
                "per_column": per_column,
                "global": global_metrics,
            }
        )

    # ------------------------------------------------------------- reporting

    def _column_metrics(self, col: int) -> dict:
        state = self.columns[col]
        return {
            "mean_certainty": self.mean_certainty_unlabeled(col),
            "cv_f1": state.latest_cv,
            "prediction_change": state.change_fraction if state.train_count else None,
        }

    def column_report(self, col: int, predicted: set[CellRef] | None = None) -> dict:
        state = self.columns[col]
        entry = {
            "column": col,
            "name": self.table.schema[col],
            "labels": len(self.store.labeled_rows(col)),
            "labels_erroneous": self.store.erroneous_per_col[col],
            "labels_correct": self.store.correct_per_col[col],
            "degenerate": state.degenerate,
            "mean_certainty": self.mean_certainty_unlabeled(col),
            "cv_f1": state.latest_cv,
            "prediction_change": state.change_fraction if state.train_count else None,
        }
        if self.ground_truth is not None:
            if predicted is None:
                predicted = self.final_predictions()
            col_pred = frozenset(c for c in predicted if c.col == col)
            actual = frozenset(
                CellRef(i, col)
                for i in range(self.table.n_rows)
                if self.table.cells[i][col] != self.ground_truth.cells[i][col]
            )
            result = DetectionResult(col_pred, actual)
            entry.update(
                {"precision": result.precision, "recall": result.recall, "f1": result.f1}
            )
        return entry

    def column_reports(self) -> list[dict]:
        predicted = self.final_predictions() if self.ground_truth is not None else None
        return [self.column_report(j, predicted) for j in range(self.table.n_cols)]

    def _summary(self, column: int | None) -> IterationSummary:
        global_metrics = None
        if self.log_records:
            global_metrics = self.log_records[-1]["global"]
        return IterationSummary(
            iteration=self.iteration,
            phase=self.phase,
            column=column,
            labels_used=self.labels_used,
            budget_remaining=self.budget_remaining,
            per_column=self.column_reports(),
            global_metrics=global_metrics,
            done=self.phase == "done",
        )

    def final_predictions(self) -> set[CellRef]:
        """Labels win over model predictions; unlabeled cells are erroneous
        when the column model says p >= 0.5."""
        out: set[CellRef] = set()
        for label in self.store.labels():
            if label.value is LabelValue.ERRONEOUS:
                out.add(label.cell)
        for j, state in enumerate(self.columns):
            if state.probabilities is None:
                continue
            labeled = self.store.labeled_rows(j)
            hits = np.flatnonzero(state.probabilities >= 0.5)
            out.update(CellRef(int(i), j) for i in hits if int(i) not in labeled)
        return out

    def explain_cell(self, cell: CellRef) -> forest.Explanation:
        cell.check_bounds(self.table)
        state = self.columns[cell.col]
        if state.surrogate is None:
            raise NotTrained("no surrogate tree trained yet for this column")
        vector = self.matrix.features_for_column(cell.col, rows=[cell.row])[0]
        return forest.explain(state.surrogate, vector, self.matrix.feature_names(cell.col))

    def column_top_features(self, col: int, limit: int = 3) -> list[str]:
        state = self.columns[col]
        if state.surrogate is None:
            return []
        return forest.top_splits(state.surrogate, self.matrix.feature_names(col), limit)

    # -------------------------------------------------------------- snapshot

    def snapshot(self) -> SessionSnapshot:
        labels = [
            {
                "row": l.cell.row,
                "col": l.cell.col,
                "label": l.value.value,
                "source": l.source.value,
                "iteration": l.iteration,
            }
            for l in self.store.labels()
        ]
        columns = []
        for state in self.columns:
            columns.append(
                {
                    "degenerate": state.degenerate,
                    "train_count": state.train_count,
                    "committee": state.committee.to_dict() if state.committee else None,
                    "probabilities": floats_to_strings(state.probabilities)
                    if state.probabilities is not None
                    else None,
                    "disagreements": floats_to_strings(state.disagreements)
                    if state.disagreements is not None
                    else None,
                    "change_fraction": repr(state.change_fraction),
                    "cv_history": floats_to_strings(state.cv_history),
                    "latest_cv": repr(state.latest_cv),
                    "latest_hp": state.latest_hp.to_dict() if state.latest_hp else None,
                }
            )
        pending = None
        if self.pending is not None:
            pending = {
                "column": self.pending.column,
                "cells": [[c.row, c.col] for c in self.pending.cells],
                "iteration": self.pending.iteration,
                "kind": self.pending.kind,
                "rationale": [
                    {"disagreement": repr(r["disagreement"]), "certainty": repr(r["certainty"])}
                    for r in self.pending.rationale
                ]
                if self.pending.rationale is not None
                else None,
            }
        return SessionSnapshot(
            format_version=SNAPSHOT_FORMAT_VERSION,
            config=self.config.to_dict(),
            config_hash=self.config.digest(),
            table_hash=table_digest(self.table),
            iteration=self.iteration,
            labels_used=self.labels_used,
            phase=self.phase,
            labels=labels,
            columns=columns,
            selector={
                "rr_cursor": self.rr_cursor,
                "ra_draws": self.ra_draws,
                "warmup_pending": list(self.warmup_pending),
            },
            init_state={"col_pointer": self._init_col, "presented": list(self._presented)},
            pending=pending,
            convergence=[
                {
                    "labels_used": p.labels_used,
                    "precision": repr(p.precision),
                    "recall": repr(p.recall),
                    "f1": repr(p.f1),
                }
                for p in self.convergence
            ],
        )

    @classmethod
    def resume(
        cls,
        snapshot: SessionSnapshot,
        table: Table,
        ground_truth: GroundTruth | None = None,
    ) -> "Session":
        config = SessionConfig.from_dict(snapshot.config)
        if snapshot.config_hash != config.digest():
            raise SnapshotMismatch("snapshot config hash does not match its config payload")
        if snapshot.table_hash != table_digest(table):
            raise SnapshotMismatch("snapshot was taken over a different table")
        session = cls.__new__(cls)
        session.table = table
        session.config = config
        session.ground_truth = ground_truth
        session.store = LabelStore(table.n_rows, table.n_cols)
        session.store.submit(
            [
                Label(
                    cell=CellRef(int(l["row"]), int(l["col"])),
                    value=LabelValue(l["label"]),
                    source=LabelSource(l["source"]),
                    iteration=int(l["iteration"]),
                )
                for l in snapshot.labels
            ]
        )
        session.labels_used = snapshot.labels_used
        session.iteration = snapshot.iteration
        session.phase = snapshot.phase
        session.convergence = [
            ConvergencePoint(
                int(p["labels_used"]), float(p["precision"]), float(p["recall"]), float(p["f1"])
            )
            for p in snapshot.convergence
        ]
        session.log_records = []
        session.rr_cursor = snapshot.selector["rr_cursor"]
        session.ra_draws = snapshot.selector["ra_draws"]
        session.warmup_pending = list(snapshot.selector["warmup_pending"])
        session._probe_sequences = [
            build_probe_sequence(table, j, config.init_cap) for j in range(table.n_cols)
        ]
        session._init_col = snapshot.init_state["col_pointer"]
        session._presented = list(snapshot.init_state["presented"])
        session._build_features()
        session.columns = []
        for j, entry in enumerate(snapshot.columns):
            state = ColumnState(j)
            state.degenerate = entry["degenerate"]
            state.train_count = entry["train_count"]
            if entry["committee"] is not None:
                state.committee = Committee.from_dict(entry["committee"])
            if entry["probabilities"] is not None:
                state.probabilities = np.array(strings_to_floats(entry["probabilities"]))
            if entry["disagreements"] is not None:
                state.disagreements = np.array(strings_to_floats(entry["disagreements"]))
            state.change_fraction = float(entry["change_fraction"])
            state.cv_history = strings_to_floats(entry["cv_history"])
            state.latest_cv = float(entry["latest_cv"])
            if entry["latest_hp"] is not None:
                state.latest_hp = Hyperparams.from_dict(entry["latest_hp"])
            if state.probabilities is not None and session.block is not None:
                session.block.refresh(j, state.probabilities)
            session.columns.append(state)
        # Surrogates are cheap; rebuild for columns that have labels of both
        # classes so explanations survive a resume.
        for j, state in enumerate(session.columns):
            if state.train_count:
                x, y, _ = session._labeled_data(j)
                state.surrogate = forest.train_surrogate(x, y)
        session.pending = None
        if snapshot.pending is not None:
            p = snapshot.pending
            session.pending = BatchRequest(
                column=p["column"],
                cells=[CellRef(int(r), int(c)) for r, c in p["cells"]],
                iteration=p["iteration"],
                kind=p["kind"],
                rationale=[
                    {"disagreement": float(r["disagreement"]), "certainty": float(r["certainty"])}
                    for r in p["rationale"]
                ]
                if p["rationale"] is not None
                else None,
            )
        return session


def run_with_oracle(session: Session, dirty: Table, gt: GroundTruth) -> IterationSummary | None:
    """Drive a session to completion, answering every batch from ground truth."""
    summary = None
    while session.phase != "done" and session.pending is not None:
        labels = [oracle_label(dirty, gt, cell) for cell in session.pending.cells]
        summary = session.submit(labels)
    return summary


def build_report(session: Session) -> dict:
    """The canonical end-of-run report; shared by the CLI and the service."""
    final = session.convergence[-1] if session.convergence else None
    if final is None and session.ground_truth is not None:
        result = score(session.final_predictions(), session.ground_truth, session.table)
        final = ConvergencePoint(session.labels_used, result.precision, result.recall, result.f1)
    return {
        "final_f1": final.f1 if final else None,
        "final_precision": final.precision if final else None,
        "final_recall": final.recall if final else None,
        "labels_used": session.labels_used,
        "per_column": session.column_reports(),
        "convergence_curve": [p.to_dict() for p in session.convergence],
    }
