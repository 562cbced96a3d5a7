"""Per-cell feature assembly.

Every cell of the table gets one dense vector made of four ordered blocks:

1. character n-gram TF-IDF of every column's cell in the same row,
2. metadata features of every column's cell in the same row,
3. cell-value embedding of every column's cell in the same row,
4. the current estimated error probabilities of all *other* columns.

Blocks 1-3 depend only on the row, so they are materialized once per table;
block 4 is a live view into the mutable :class:`ErrorProbabilityBlock` that
the orchestrator refreshes after each per-column retrain.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import BadProbability, LengthDrift, OutOfBounds
from .table import CellRef, Table

TEXT_MODE_CHAR = "char"
TEXT_MODE_WORD = "word"

META_FIELDS = (
    "occurrence_count",
    "string_length",
    "type_empty",
    "type_integer",
    "type_float",
    "type_date",
    "type_text",
    "numeric_value",
    "is_numeric",
)

_INT_RE = re.compile(r"^[+-]?\d+$")
_FLOAT_RE = re.compile(r"^[+-]?(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?$")
_DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")


def detect_type(cell: str) -> str:
    """First match wins: empty, integer, float, date (ISO calendar), text."""
    if cell == "":
        return "empty"
    if _INT_RE.match(cell):
        return "integer"
    if _FLOAT_RE.match(cell):
        return "float"
    if _DATE_RE.match(cell) and _valid_date(cell):
        return "date"
    return "text"


def _valid_date(cell: str) -> bool:
    import datetime

    try:
        datetime.date.fromisoformat(cell)
        return True
    except ValueError:
        return False


def cell_grams(cell: str, n: int, mode: str = TEXT_MODE_CHAR) -> list[str]:
    """All (overlapping) character n-grams, or whitespace tokens in word mode."""
    if mode == TEXT_MODE_WORD:
        return cell.split()
    return [cell[i : i + n] for i in range(len(cell) - n + 1)]


@dataclass(frozen=True)
class NGramVocabulary:
    """Distinct grams of one column, lexicographically ordered, with document
    frequencies (count of cells containing each gram)."""

    column: int
    n: int
    mode: str
    grams: tuple[str, ...]
    df: tuple[int, ...]
    n_rows: int

    def __len__(self) -> int:
        return len(self.grams)

    def index(self) -> dict[str, int]:
        return {g: i for i, g in enumerate(self.grams)}

    def idf(self) -> np.ndarray:
        n = self.n_rows
        return np.array([math.log((1 + n) / (1 + d)) + 1.0 for d in self.df])


def build_ngram_vocab(
    table: Table,
    col: int,
    n: int = 1,
    cap: int | None = None,
    mode: str = TEXT_MODE_CHAR,
) -> NGramVocabulary:
    """Collect every gram occurring in at least one cell of the column.

    When ``cap`` is set and exceeded, only the ``cap`` grams with the highest
    document frequency are kept (ties broken lexicographically), so the
    rarest grams are dropped first.
    """
    if n < 1:
        raise ValueError("gram order must be >= 1")
    values = table.column(col)
    df: Counter[str] = Counter()
    for value in values:
        df.update(set(cell_grams(value, n, mode)))
    items = sorted(df.items())
    if cap is not None and len(items) > cap:
        items.sort(key=lambda kv: (-kv[1], kv[0]))
        items = sorted(items[:cap])
    grams = tuple(g for g, _ in items)
    counts = tuple(c for _, c in items)
    return NGramVocabulary(column=col, n=n, mode=mode, grams=grams, df=counts, n_rows=len(values))


def tfidf_vector(cell: str, vocab: NGramVocabulary, n_rows: int | None = None) -> np.ndarray:
    """Raw-count tf times smoothed idf, L2-normalized (zero vector stays zero).

    idf(g) = ln((1 + N) / (1 + df(g))) + 1.
    """
    n = vocab.n_rows if n_rows is None else n_rows
    out = np.zeros(len(vocab.grams))
    if not len(vocab.grams):
        return out
    index = vocab.index()
    for gram, count in Counter(cell_grams(cell, vocab.n, vocab.mode)).items():
        pos = index.get(gram)
        if pos is not None:
            out[pos] = count
    idf = np.array([math.log((1 + n) / (1 + d)) + 1.0 for d in vocab.df])
    out *= idf
    norm = math.sqrt(float(np.dot(out, out)))
    if norm > 0:
        out /= norm
    return out


@dataclass(frozen=True)
class ColumnStats:
    """Value-occurrence index of one column."""

    column: int
    occurrences: dict[str, int]

    def count(self, value: str) -> int:
        return self.occurrences.get(value, 0)


def build_column_stats(table: Table, col: int) -> ColumnStats:
    return ColumnStats(column=col, occurrences=dict(Counter(table.column(col))))


def metadata_vector(cell: str, col_stats: ColumnStats) -> np.ndarray:
    """[occurrence count, string length, type one-hot x5, parsed number, is_numeric]."""
    kind = detect_type(cell)
    onehot = [0.0] * 5
    onehot[("empty", "integer", "float", "date", "text").index(kind)] = 1.0
    numeric = kind in ("integer", "float")
    parsed = float(cell) if numeric else 0.0
    return np.array(
        [float(col_stats.count(cell)), float(len(cell))] + onehot + [parsed, 1.0 if numeric else 0.0]
    )


def concat_columns(per_column_vectors: list[np.ndarray], expected_lengths: list[int] | None = None) -> np.ndarray:
    """Concatenate one vector per column, in column order.

    ``expected_lengths`` lets callers detect a column whose vector length
    drifted between rows, which would silently misalign every feature.
    """
    if expected_lengths is not None:
        for k, (vec, want) in enumerate(zip(per_column_vectors, expected_lengths)):
            if len(vec) != want:
                raise LengthDrift(f"column {k} produced length {len(vec)}, expected {want}")
    if not per_column_vectors:
        return np.zeros(0)
    return np.concatenate([np.asarray(v, dtype=float) for v in per_column_vectors])


class ErrorProbabilityBlock:
    """M x N grid of current estimated per-cell error probabilities.

    Uninitialized columns read as 0.0 ("no evidence of error"). Column
    replacement is atomic: a whole column is swapped in one assignment, so
    readers never observe a half-written column.
    """

    def __init__(self, n_rows: int, n_cols: int):
        self.n_rows = n_rows
        self.n_cols = n_cols
        self.matrix = np.zeros((n_cols, n_rows))
        self.initialized = [False] * n_cols

    def refresh(self, col: int, probabilities) -> None:
        if not 0 <= col < self.n_cols:
            raise OutOfBounds(f"column {col} outside 0..{self.n_cols - 1}")
        probs = np.asarray(probabilities, dtype=float)
        if probs.shape != (self.n_rows,):
            raise BadProbability(f"expected {self.n_rows} probabilities, got shape {probs.shape}")
        if np.any(probs < 0.0) or np.any(probs > 1.0) or not np.all(np.isfinite(probs)):
            raise BadProbability("probabilities must lie in [0, 1]")
        self.matrix[col] = probs
        self.initialized[col] = True

    def copy(self) -> "ErrorProbabilityBlock":
        clone = ErrorProbabilityBlock(self.n_rows, self.n_cols)
        clone.matrix = self.matrix.copy()
        clone.initialized = list(self.initialized)
        return clone


def refresh_error_block(block: ErrorProbabilityBlock, col: int, probabilities) -> ErrorProbabilityBlock:
    block.refresh(col, probabilities)
    return block


def error_correlation_vector(block: ErrorProbabilityBlock, target: CellRef) -> np.ndarray:
    """Estimated error probabilities of all other columns, ascending column
    order, skipping the target's own column; length M - 1."""
    if not (0 <= target.row < block.n_rows and 0 <= target.col < block.n_cols):
        raise OutOfBounds(f"{target} outside block {block.n_cols}x{block.n_rows}")
    others = [k for k in range(block.n_cols) if k != target.col]
    return block.matrix[others, target.row].copy()


@dataclass(frozen=True)
class CellFeatureVector:
    """One assembled vector with its recorded block layout."""

    blocks: tuple[tuple[str, int, int], ...]  # (label, offset, length)
    values: np.ndarray

    def block(self, label: str) -> np.ndarray:
        for name, start, length in self.blocks:
            if name == label:
                return self.values[start : start + length]
        raise KeyError(label)


class FeatureMatrix:
    """Assembled per-column feature views over one table.

    The row-level blocks (n-grams, metadata, embeddings) are shared across
    all columns of the same row; only the error-correlation block differs
    per column. ``features_for_column`` therefore stitches the static matrix
    to the live error block on each call, so retraining always sees the
    latest cross-column probabilities.
    """

    def __init__(
        self,
        table: Table,
        static: np.ndarray,
        static_names: list[str],
        static_blocks: list[tuple[str, int, int]],
        block: ErrorProbabilityBlock | None,
    ):
        self.table = table
        self.static = static
        self.static_names = static_names
        self.static_blocks = static_blocks
        self.block = block
        self._names_cache: dict[int, list[str]] = {}

    @property
    def n_features(self) -> int:
        extra = self.table.n_cols - 1 if self.block is not None else 0
        return self.static.shape[1] + extra

    def feature_names(self, col: int) -> list[str]:
        if col not in self._names_cache:
            names = list(self.static_names)
            if self.block is not None:
                names += [
                    f"errprob|col={self.table.schema[k]}"
                    for k in range(self.table.n_cols)
                    if k != col
                ]
            if len(set(names)) != len(names):
                raise LengthDrift("duplicate feature names in registry")
            self._names_cache[col] = names
        return self._names_cache[col]

    def name_of(self, col: int, index: int) -> str:
        return self.feature_names(col)[index]

    def index_of(self, col: int, name: str) -> int:
        return self.feature_names(col).index(name)

    def features_for_column(self, col: int, rows=None) -> np.ndarray:
        if rows is None:
            static = self.static
        else:
            static = self.static[np.asarray(rows, dtype=int)]
        if self.block is None:
            return static.copy()
        others = [k for k in range(self.table.n_cols) if k != col]
        err = self.block.matrix[others].T  # N x (M-1)
        if rows is not None:
            err = err[np.asarray(rows, dtype=int)]
        return np.hstack([static, err])

    def cell_vector(self, cell: CellRef) -> CellFeatureVector:
        cell.check_bounds(self.table)
        values = self.features_for_column(cell.col, rows=[cell.row])[0]
        blocks = list(self.static_blocks)
        if self.block is not None:
            blocks.append(("error-correlation", self.static.shape[1], self.table.n_cols - 1))
        return CellFeatureVector(blocks=tuple(blocks), values=values)

    def registry_json(self) -> str:
        return json.dumps(
            {
                "schema": list(self.table.schema),
                "blocks": [list(b) for b in self.static_blocks],
                "columns": {str(j): self.feature_names(j) for j in range(self.table.n_cols)},
            },
            sort_keys=True,
        )


def assemble(
    table: Table,
    vocabs: list[NGramVocabulary] | None,
    stats: list[ColumnStats] | None,
    embeddings=None,
    block: ErrorProbabilityBlock | None = None,
) -> FeatureMatrix:
    """Build the feature matrix; block order is n-grams, metadata, embedding,
    error correlation. Any block may be disabled by passing None."""
    n, m = table.n_rows, table.n_cols
    parts: list[np.ndarray] = []
    names: list[str] = []
    blocks: list[tuple[str, int, int]] = []
    offset = 0

    if vocabs is not None:
        if len(vocabs) != m:
            raise LengthDrift(f"expected {m} vocabularies, got {len(vocabs)}")
        width = 0
        for k, vocab in enumerate(vocabs):
            sub = _tfidf_matrix(table, k, vocab)
            parts.append(sub)
            kind = _gram_kind(vocab)
            names += [f"col={table.schema[k]}|{kind}={g}" for g in vocab.grams]
            width += sub.shape[1]
        blocks.append(("ngram-concat", offset, width))
        offset += width

    if stats is not None:
        if len(stats) != m:
            raise LengthDrift(f"expected {m} column stats, got {len(stats)}")
        width = 0
        for k, st in enumerate(stats):
            sub = np.vstack([metadata_vector(v, st) for v in table.column(k)])
            parts.append(sub)
            names += [f"col={table.schema[k]}|meta={f}" for f in META_FIELDS]
            width += sub.shape[1]
        blocks.append(("metadata-concat", offset, width))
        offset += width

    if embeddings is not None:
        width = 0
        for k in range(m):
            sub = np.vstack([embeddings.vector(k, v) for v in table.column(k)])
            parts.append(sub)
            names += [f"col={table.schema[k]}|emb={i}" for i in range(embeddings.dim)]
            width += sub.shape[1]
        blocks.append(("embedding-concat", offset, width))
        offset += width

    static = np.hstack(parts) if parts else np.zeros((n, 0))
    if static.shape[1] != len(names):
        raise LengthDrift(f"{static.shape[1]} static features but {len(names)} names")
    return FeatureMatrix(table, static, names, blocks, block)


def _gram_kind(vocab: NGramVocabulary) -> str:
    if vocab.mode == TEXT_MODE_WORD:
        return "word"
    return "unigram" if vocab.n == 1 else f"{vocab.n}gram"


def _tfidf_matrix(table: Table, col: int, vocab: NGramVocabulary) -> np.ndarray:
    values = table.column(col)
    out = np.zeros((len(values), len(vocab.grams)))
    if not len(vocab.grams):
        return out
    index = vocab.index()
    idf = vocab.idf()
    cache: dict[str, np.ndarray] = {}
    for i, value in enumerate(values):
        row = cache.get(value)
        if row is None:
            raw = np.zeros(len(vocab.grams))
            for gram, count in Counter(cell_grams(value, vocab.n, vocab.mode)).items():
                pos = index.get(gram)
                if pos is not None:
                    raw[pos] = count
            raw *= idf
            norm = math.sqrt(float(np.dot(raw, raw)))
            if norm > 0:
                raw /= norm
            cache[value] = raw
            row = raw
        out[i] = row
    return out
