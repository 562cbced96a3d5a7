"""Data model for dirty tables, ground truth, and user labels.

Tables are immutable after load: cells are stored as tuples of tuples of
strings, so instances can be shared freely across threads. All typing of
cell contents happens downstream in the featurizer.
"""

from __future__ import annotations

import csv
import io
import json
from collections import Counter
from dataclasses import dataclass
from enum import Enum

from .errors import EmptyTable, IoError, OutOfBounds, RaggedRows, ShapeMismatch


@dataclass(frozen=True)
class Table:
    """An N x M grid of string cells plus an ordered schema."""

    schema: tuple[str, ...]
    cells: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        if len(self.cells) < 1 or len(self.schema) < 1:
            raise EmptyTable("a table needs at least one row and one column")
        m = len(self.schema)
        for row in self.cells:
            if len(row) != m:
                raise RaggedRows(0, m, len(row))

    @property
    def n_rows(self) -> int:
        return len(self.cells)

    @property
    def n_cols(self) -> int:
        return len(self.schema)

    def cell(self, row: int, col: int) -> str:
        if not (0 <= row < self.n_rows and 0 <= col < self.n_cols):
            raise OutOfBounds(f"cell ({row}, {col}) outside {self.n_rows}x{self.n_cols}")
        return self.cells[row][col]

    def column(self, col: int) -> list[str]:
        if not 0 <= col < self.n_cols:
            raise OutOfBounds(f"column {col} outside 0..{self.n_cols - 1}")
        return [r[col] for r in self.cells]

    def row(self, row: int) -> tuple[str, ...]:
        if not 0 <= row < self.n_rows:
            raise OutOfBounds(f"row {row} outside 0..{self.n_rows - 1}")
        return self.cells[row]


# A GroundTruth is a Table whose shape and schema were checked against the
# dirty table; the alias documents intent at call sites.
GroundTruth = Table


@dataclass(frozen=True, order=True)
class CellRef:
    row: int
    col: int

    def check_bounds(self, table: Table) -> "CellRef":
        if not (0 <= self.row < table.n_rows and 0 <= self.col < table.n_cols):
            raise OutOfBounds(f"{self} outside {table.n_rows}x{table.n_cols}")
        return self


class LabelValue(str, Enum):
    ERRONEOUS = "erroneous"
    CORRECT = "correct"


class LabelSource(str, Enum):
    HUMAN = "human"
    ORACLE = "oracle"


@dataclass(frozen=True)
class Label:
    cell: CellRef
    value: LabelValue
    source: LabelSource
    iteration: int


class LabelStore:
    """Accumulated labels with per-column class counters.

    At most one label per cell: later submissions for an already-labeled
    cell are rejected, never overwritten. Use :meth:`retract` followed by a
    fresh submission to correct a mislabel.
    """

    def __init__(self, n_rows: int, n_cols: int):
        self.n_rows = n_rows
        self.n_cols = n_cols
        self._by_cell: dict[CellRef, Label] = {}
        self.erroneous_per_col = [0] * n_cols
        self.correct_per_col = [0] * n_cols

    def __len__(self) -> int:
        return len(self._by_cell)

    def __contains__(self, cell: CellRef) -> bool:
        return cell in self._by_cell

    def get(self, cell: CellRef) -> Label | None:
        return self._by_cell.get(cell)

    def labels(self) -> list[Label]:
        return list(self._by_cell.values())

    def column_labels(self, col: int) -> list[Label]:
        return [l for l in self._by_cell.values() if l.cell.col == col]

    def labeled_rows(self, col: int) -> set[int]:
        return {l.cell.row for l in self._by_cell.values() if l.cell.col == col}

    def submit(self, batch: list[Label]) -> list[Label]:
        """Record all previously unlabeled cells in ``batch``.

        Returns the rejected duplicates (already-labeled cells, including
        repeats within the batch itself). Raises OutOfBounds before any
        mutation if some cell is outside the table.
        """
        for label in batch:
            c = label.cell
            if not (0 <= c.row < self.n_rows and 0 <= c.col < self.n_cols):
                raise OutOfBounds(f"{c} outside {self.n_rows}x{self.n_cols}")
        rejected = []
        for label in batch:
            if label.cell in self._by_cell:
                rejected.append(label)
                continue
            self._by_cell[label.cell] = label
            if label.value is LabelValue.ERRONEOUS:
                self.erroneous_per_col[label.cell.col] += 1
            else:
                self.correct_per_col[label.cell.col] += 1
        assert self._counters_consistent()
        return rejected

    def retract(self, cell: CellRef) -> Label | None:
        """Remove and return the label at ``cell``, if any."""
        label = self._by_cell.pop(cell, None)
        if label is not None:
            if label.value is LabelValue.ERRONEOUS:
                self.erroneous_per_col[cell.col] -= 1
            else:
                self.correct_per_col[cell.col] -= 1
        assert self._counters_consistent()
        return label

    def _counters_consistent(self) -> bool:
        err = Counter(l.cell.col for l in self._by_cell.values() if l.value is LabelValue.ERRONEOUS)
        ok = Counter(l.cell.col for l in self._by_cell.values() if l.value is LabelValue.CORRECT)
        return all(self.erroneous_per_col[j] == err.get(j, 0) for j in range(self.n_cols)) and all(
            self.correct_per_col[j] == ok.get(j, 0) for j in range(self.n_cols)
        )


def load_csv(path: str, has_header: bool = True) -> Table:
    """Load an RFC 4180 CSV file into a Table.

    The header row becomes the schema; without a header, columns are named
    col_0..col_{M-1}. Raises RaggedRows (with the 1-based record number) if
    some record's field count differs from the first record's.
    """
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            return _parse_csv(fh, has_header)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc


def parse_csv_text(text: str, has_header: bool = True) -> Table:
    return _parse_csv(io.StringIO(text), has_header)


def _parse_csv(fh, has_header: bool) -> Table:
    reader = csv.reader(fh)
    records = list(reader)
    if not records:
        raise EmptyTable("no records in input")
    m = len(records[0])
    for idx, rec in enumerate(records, start=1):
        if len(rec) != m:
            raise RaggedRows(idx, m, len(rec))
    if has_header:
        schema = tuple(records[0])
        body = records[1:]
    else:
        schema = tuple(f"col_{j}" for j in range(m))
        body = records
    if not body:
        raise EmptyTable("no data rows")
    return Table(schema=schema, cells=tuple(tuple(rec) for rec in body))


def table_to_csv_text(table: Table, include_header: bool = True) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if include_header:
        writer.writerow(table.schema)
    writer.writerows(table.cells)
    return buf.getvalue()


def write_csv(table: Table, path: str, include_header: bool = True) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(table_to_csv_text(table, include_header))
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def attach_ground_truth(dirty: Table, clean: Table) -> GroundTruth:
    """Validate that ``clean`` lines up cell-for-cell with ``dirty``.

    Schemas must match positionally and by name; silent column misalignment
    is worse than a hard error.
    """
    if clean.n_rows != dirty.n_rows:
        raise ShapeMismatch("rows", f"{clean.n_rows} ground-truth rows vs {dirty.n_rows} dirty rows")
    if clean.n_cols != dirty.n_cols:
        raise ShapeMismatch("cols", f"{clean.n_cols} ground-truth cols vs {dirty.n_cols} dirty cols")
    if clean.schema != dirty.schema:
        raise ShapeMismatch("schema", f"{clean.schema} vs {dirty.schema}")
    return clean


def export_labels_jsonl(store: LabelStore, path: str) -> None:
    """One JSON object per line, in submission order."""
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for label in store.labels():
                fh.write(label_to_json_line(label) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def label_to_json_line(label: Label) -> str:
    return json.dumps(
        {
            "row": label.cell.row,
            "col": label.cell.col,
            "label": label.value.value,
            "source": label.source.value,
            "iteration": label.iteration,
        },
        sort_keys=True,
    )


def label_from_json_line(line: str) -> Label:
    obj = json.loads(line)
    return Label(
        cell=CellRef(int(obj["row"]), int(obj["col"])),
        value=LabelValue(obj["label"]),
        source=LabelSource(obj["source"]),
        iteration=int(obj["iteration"]),
    )


def import_labels_jsonl(path: str) -> list[Label]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return [label_from_json_line(line) for line in fh if line.strip()]
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
