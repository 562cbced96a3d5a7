"""Cell-value correlation embeddings.

Each row is treated as a document and each cell value as a word, so values
that co-occur inside tuples end up close in the embedding space. Tokens are
keyed by (column index, value): the same string in two different columns is
two different tokens, which prevents accidental aliasing across columns.

Training is single-threaded skip-gram with negative sampling so that a fixed
seed reproduces bit-equal vectors; gradients for all context pairs of one
center occurrence are applied together (each ordered pair still contributes
exactly one gradient term).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DecodeError, IoError, UnknownToken, VersionMismatch
from .table import CellRef, Table

EMBEDDING_FORMAT_VERSION = 1

NEGATIVES = 5
EPOCHS = 5
INITIAL_LR = 0.025
MIN_LR_FRACTION = 1e-4
NOISE_POWER = 0.75


def token_key(col: int, value: str) -> str:
    return f"{col}={value}"


@dataclass
class EmbeddingModel:
    dim: int
    tokens: list[str]
    matrix: np.ndarray  # |V| x dim input vectors
    trained_epochs: int
    seed: int

    def __post_init__(self):
        self._index = {t: i for i, t in enumerate(self.tokens)}

    def vector(self, col: int, value: str) -> np.ndarray:
        key = token_key(col, value)
        idx = self._index.get(key)
        if idx is None:
            raise UnknownToken(f"no embedding for token {key!r}; model/table mismatch?")
        return self.matrix[idx]

    def has_token(self, col: int, value: str) -> bool:
        return token_key(col, value) in self._index


def train_embedding(table: Table, dim: int = 50, seed: int = 0, epochs: int = EPOCHS) -> EmbeddingModel:
    """Skip-gram with negative sampling; the context window is the whole row."""
    if dim < 1:
        raise ValueError("embedding dimensionality must be >= 1")
    tokens: list[str] = []
    index: dict[str, int] = {}
    counts: list[int] = []
    row_ids = np.empty((table.n_rows, table.n_cols), dtype=np.int64)
    for i, row in enumerate(table.cells):
        for j, value in enumerate(row):
            key = token_key(j, value)
            tid = index.get(key)
            if tid is None:
                tid = len(tokens)
                index[key] = tid
                tokens.append(key)
                counts.append(0)
            counts[tid] += 1
            row_ids[i, j] = tid

    vocab_size = len(tokens)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, 0xE3B])))
    w_in = (rng.random((vocab_size, dim)) - 0.5) / dim
    w_out = np.zeros((vocab_size, dim))

    noise = np.array(counts, dtype=float) ** NOISE_POWER
    noise_cdf = np.cumsum(noise / noise.sum())

    m = table.n_cols
    pairs_per_row = m * (m - 1)
    total_pairs = max(1, epochs * table.n_rows * pairs_per_row)
    processed = 0
    min_lr = INITIAL_LR * MIN_LR_FRACTION

    if m > 1:
        for _ in range(epochs):
            for i in range(table.n_rows):
                row = row_ids[i]
                for p in range(m):
                    lr = max(min_lr, INITIAL_LR * (1.0 - processed / total_pairs))
                    center = row[p]
                    contexts = np.concatenate([row[:p], row[p + 1 :]])
                    _sgns_step(w_in, w_out, center, contexts, noise_cdf, rng, lr)
                    processed += len(contexts)

    return EmbeddingModel(dim=dim, tokens=tokens, matrix=w_in, trained_epochs=epochs, seed=seed)


def _sgns_step(w_in, w_out, center, contexts, noise_cdf, rng, lr) -> None:
    # Positives: every context token of this center occurrence. Negatives:
    # NEGATIVES noise draws per pair; draws colliding with their own positive
    # are dropped rather than redrawn.
    draws = np.searchsorted(noise_cdf, rng.random(len(contexts) * NEGATIVES))
    keep = draws != np.repeat(contexts, NEGATIVES)
    negatives = draws[keep]

    ids = np.concatenate([contexts, negatives])
    labels = np.concatenate([np.ones(len(contexts)), np.zeros(len(negatives))])
    v = w_in[center]
    u = w_out[ids]
    logits = u @ v
    g = (_sigmoid(logits) - labels) * lr
    grad_v = g @ u
    np.add.at(w_out, ids, -np.outer(g, v))
    w_in[center] -= grad_v


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x, dtype=float)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def embed(model: EmbeddingModel, cell: CellRef, table: Table) -> np.ndarray:
    cell.check_bounds(table)
    return model.vector(cell.col, table.cell(cell.row, cell.col))


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = float(np.linalg.norm(a)), float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(a @ b) / (na * nb)


def save_embedding(model: EmbeddingModel, path: str) -> None:
    doc = {
        "format_version": EMBEDDING_FORMAT_VERSION,
        "dim": model.dim,
        "seed": model.seed,
        "trained_epochs": model.trained_epochs,
        "vectors": {t: [repr(float(x)) for x in model.matrix[i]] for i, t in enumerate(model.tokens)},
    }
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, sort_keys=True, separators=(",", ":"))
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def load_embedding(path: str) -> EmbeddingModel:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DecodeError(f"embedding file is not valid JSON: {exc}") from exc
    version = doc.get("format_version")
    if version != EMBEDDING_FORMAT_VERSION:
        raise VersionMismatch(version, EMBEDDING_FORMAT_VERSION)
    tokens = sorted(doc["vectors"])
    matrix = np.array([[float(x) for x in doc["vectors"][t]] for t in tokens])
    return EmbeddingModel(
        dim=int(doc["dim"]),
        tokens=tokens,
        matrix=matrix,
        trained_epochs=int(doc["trained_epochs"]),
        seed=int(doc["seed"]),
    )
