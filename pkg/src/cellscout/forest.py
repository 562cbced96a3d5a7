"""Per-column learner: a bagged committee of decision trees.

Each committee member trains on a bootstrap sample and evaluates, at every
node, the best of ceil(sqrt(F)) randomly drawn features by weighted Gini
gain, with class weights inversely proportional to class frequency (the
erroneous class is usually far smaller). Leaf probabilities are Laplace
smoothed so no member ever votes with absolute certainty, which would
freeze query-by-committee sampling.

Per-tree seeds are derived from one SeedSequence, so serial and parallel
training schedules would produce identical committees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import FeatureLengthMismatch, NotTrained, VersionMismatch

SINGLE_CLASS_ERRONEOUS_P = 0.99
SINGLE_CLASS_CORRECT_P = 0.01
COMMITTEE_FORMAT_VERSION = 1
_MIN_GAIN = 1e-12


@dataclass(frozen=True)
class Hyperparams:
    max_depth: int = 8
    min_leaf: int = 1
    n_trees: int = 25
    max_features: str = "sqrt"  # "sqrt" or "all"

    def to_dict(self) -> dict:
        return {
            "max_depth": self.max_depth,
            "min_leaf": self.min_leaf,
            "n_trees": self.n_trees,
            "max_features": self.max_features,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "Hyperparams":
        return cls(**obj)


DEFAULT_GRID = tuple(
    Hyperparams(max_depth=d, min_leaf=l) for d in (4, 8, 16) for l in (1, 5)
)


@dataclass
class Leaf:
    erroneous: int
    correct: int

    @property
    def probability(self) -> float:
        # Laplace smoothing keeps member votes off the 0/1 extremes.
        return (self.erroneous + 1) / (self.erroneous + self.correct + 2)


@dataclass
class Split:
    feature: int
    threshold: float
    left: "TreeNode"
    right: "TreeNode"


TreeNode = Split | Leaf


def node_to_dict(node: TreeNode) -> dict:
    if isinstance(node, Leaf):
        return {"leaf": [node.erroneous, node.correct]}
    return {
        "feature": node.feature,
        "threshold": repr(node.threshold),
        "left": node_to_dict(node.left),
        "right": node_to_dict(node.right),
    }


def node_from_dict(obj: dict) -> TreeNode:
    if "leaf" in obj:
        e, c = obj["leaf"]
        return Leaf(int(e), int(c))
    return Split(
        feature=int(obj["feature"]),
        threshold=float(obj["threshold"]),
        left=node_from_dict(obj["left"]),
        right=node_from_dict(obj["right"]),
    )


def _leaf_probabilities(node: TreeNode, x: np.ndarray, idx: np.ndarray, out: np.ndarray) -> None:
    if isinstance(node, Leaf):
        out[idx] = node.probability
        return
    mask = x[idx, node.feature] <= node.threshold
    if mask.any():
        _leaf_probabilities(node.left, x, idx[mask], out)
    rest = ~mask
    if rest.any():
        _leaf_probabilities(node.right, x, idx[rest], out)


def fit_tree(
    x: np.ndarray,
    y: np.ndarray,
    sample_weight: np.ndarray,
    max_depth: int,
    min_leaf: int,
    rng: np.random.Generator | None = None,
    max_features: str = "all",
) -> TreeNode:
    """Grow one tree; ``y`` is 1 for erroneous. Caller owns bootstrapping."""
    we = sample_weight * (y == 1)
    wc = sample_weight * (y == 0)
    n_feats = x.shape[1]
    if max_features == "sqrt":
        m = max(1, math.ceil(math.sqrt(n_feats)))
    else:
        m = n_feats
    return _fit_node(x, y, we, wc, np.arange(len(y)), 0, max_depth, min_leaf, m, rng)


def _fit_node(x, y, we, wc, idx, depth, max_depth, min_leaf, m, rng) -> TreeNode:
    e = int(np.sum(y[idx]))
    c = len(idx) - e
    if depth >= max_depth or e == 0 or c == 0 or len(idx) < 2 * min_leaf:
        return Leaf(e, c)
    n_feats = x.shape[1]
    if m >= n_feats or rng is None:
        feats = np.arange(n_feats)
    else:
        keys = rng.random(n_feats)
        feats = np.sort(np.argpartition(keys, m)[:m])
    best = _best_split(x, we, wc, idx, feats, min_leaf)
    if best is None:
        return Leaf(e, c)
    feature, threshold = best
    mask = x[idx, feature] <= threshold
    left = _fit_node(x, y, we, wc, idx[mask], depth + 1, max_depth, min_leaf, m, rng)
    right = _fit_node(x, y, we, wc, idx[~mask], depth + 1, max_depth, min_leaf, m, rng)
    return Split(int(feature), float(threshold), left, right)


def _best_split(x, we, wc, idx, feats, min_leaf):
    """Minimize summed weighted child Gini over all (feature, midpoint) pairs.

    Candidates are midpoints between consecutive distinct sorted values with
    at least ``min_leaf`` raw samples on each side; features with no
    variation contribute no candidates. Ties resolve to the lowest feature
    index, then the smallest threshold, and a split must strictly beat the
    parent impurity.
    """
    n = len(idx)
    sub = x[np.ix_(idx, feats)].T  # m x n, feature-major for first-hit argmin
    order = np.argsort(sub, axis=1, kind="stable")
    sx = np.take_along_axis(sub, order, axis=1)
    we_n = we[idx]
    wc_n = wc[idx]
    se = np.cumsum(we_n[order], axis=1)[:, :-1]
    sc = np.cumsum(wc_n[order], axis=1)[:, :-1]
    tot_e = float(np.sum(we_n))
    tot_c = float(np.sum(wc_n))
    total = tot_e + tot_c

    wl = se + sc
    wr = total - wl
    with np.errstate(divide="ignore", invalid="ignore"):
        left_term = wl - (se * se + sc * sc) / wl
        re_ = tot_e - se
        rc = tot_c - sc
        right_term = wr - (re_ * re_ + rc * rc) / wr
        score = left_term + right_term
    score[~np.isfinite(score)] = np.inf

    valid = sx[:, 1:] > sx[:, :-1]
    if min_leaf > 1:
        valid[:, : min_leaf - 1] = False
        valid[:, n - min_leaf :] = False
    score[~valid] = np.inf

    parent = total - (tot_e * tot_e + tot_c * tot_c) / total
    flat = int(np.argmin(score))
    best_score = score.ravel()[flat]
    if not np.isfinite(best_score) or best_score >= parent - _MIN_GAIN:
        return None
    fi, pos = divmod(flat, score.shape[1])
    threshold = (sx[fi, pos] + sx[fi, pos + 1]) / 2.0
    return int(feats[fi]), float(threshold)


@dataclass
class Committee:
    """T bagged trees plus the bookkeeping needed to reproduce them."""

    trees: list
    hyperparams: Hyperparams
    seed: int
    n_features: int
    class_weights: tuple[float, float]  # (correct, erroneous)
    single_class: str | None = None  # "erroneous" | "correct" when degenerate

    @property
    def constant_probability(self) -> float:
        if self.single_class == "erroneous":
            return SINGLE_CLASS_ERRONEOUS_P
        return SINGLE_CLASS_CORRECT_P

    def _check_width(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim != 2 or x.shape[1] != self.n_features:
            raise FeatureLengthMismatch(
                f"expected {self.n_features} features, got {x.shape[1] if x.ndim == 2 else 'non-matrix'}"
            )
        return x

    def member_probabilities(self, x: np.ndarray) -> np.ndarray:
        x = self._check_width(x)
        if self.single_class is not None:
            return np.full((1, len(x)), self.constant_probability)
        out = np.empty((len(self.trees), len(x)))
        idx = np.arange(len(x))
        for t, tree in enumerate(self.trees):
            _leaf_probabilities(tree, x, idx, out[t])
        return out

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        return self.member_probabilities(x).mean(axis=0)

    def disagreement(self, x: np.ndarray) -> np.ndarray:
        """Vote entropy: v = fraction of members whose leaf says erroneous."""
        member = self.member_probabilities(x)
        v = np.mean(member >= 0.5, axis=0)
        return vote_entropy(v)

    def to_dict(self) -> dict:
        return {
            "format_version": COMMITTEE_FORMAT_VERSION,
            "hyperparams": self.hyperparams.to_dict(),
            "seed": self.seed,
            "n_features": self.n_features,
            "class_weights": [repr(self.class_weights[0]), repr(self.class_weights[1])],
            "single_class": self.single_class,
            "trees": [node_to_dict(t) for t in self.trees],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "Committee":
        version = obj.get("format_version", COMMITTEE_FORMAT_VERSION)
        if version != COMMITTEE_FORMAT_VERSION:
            raise VersionMismatch(version, COMMITTEE_FORMAT_VERSION)
        return cls(
            trees=[node_from_dict(t) for t in obj["trees"]],
            hyperparams=Hyperparams.from_dict(obj["hyperparams"]),
            seed=int(obj["seed"]),
            n_features=int(obj["n_features"]),
            class_weights=(float(obj["class_weights"][0]), float(obj["class_weights"][1])),
            single_class=obj["single_class"],
        )


def vote_entropy(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    out = np.zeros_like(v)
    inner = (v > 0) & (v < 1)
    vi = v[inner]
    out[inner] = -vi * np.log2(vi) - (1 - vi) * np.log2(1 - vi)
    return out


def certainty(probabilities) -> np.ndarray:
    p = np.asarray(probabilities, dtype=float)
    return np.maximum(p, 1.0 - p)


def train(features: np.ndarray, labels, hyperparams: Hyperparams, seed: int) -> Committee:
    """Fit the committee; with a single-class training set no trees are grown
    and the committee becomes a constant predictor of that class."""
    x = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=int)
    if len(y) < 1:
        raise ValueError("need at least one labeled example")
    n_err = int(np.sum(y == 1))
    n_ok = int(np.sum(y == 0))
    if n_err == 0 or n_ok == 0:
        return Committee(
            trees=[],
            hyperparams=hyperparams,
            seed=seed,
            n_features=x.shape[1],
            class_weights=(1.0, 1.0),
            single_class="erroneous" if n_ok == 0 else "correct",
        )
    total = len(y)
    w_ok = total / (2.0 * n_ok)
    w_err = total / (2.0 * n_err)
    sample_weight = np.where(y == 1, w_err, w_ok)

    children = np.random.SeedSequence(seed).spawn(hyperparams.n_trees)
    # Bootstrap draws are weight-proportional (balanced bagging), so each
    # member sees roughly class-balanced samples; otherwise, with few labeled
    # errors, members that never draw an informative feature all vote with
    # the skewed base rate and drown out the members that learned something.
    draw_p = sample_weight / sample_weight.sum()
    trees = []
    for child in children:
        rng = np.random.Generator(np.random.PCG64(child))
        boot = rng.choice(total, size=total, replace=True, p=draw_p, shuffle=False)
        trees.append(
            fit_tree(
                x[boot],
                y[boot],
                sample_weight[boot],
                max_depth=hyperparams.max_depth,
                min_leaf=hyperparams.min_leaf,
                rng=rng,
                max_features=hyperparams.max_features,
            )
        )
    return Committee(
        trees=trees,
        hyperparams=hyperparams,
        seed=seed,
        n_features=x.shape[1],
        class_weights=(w_ok, w_err),
    )


def predict_proba(committee: Committee, features: np.ndarray) -> np.ndarray:
    return committee.predict_proba(features)


def disagreement(committee: Committee, features: np.ndarray) -> np.ndarray:
    return committee.disagreement(features)


@dataclass
class CvReport:
    requested_folds: int
    fold_scores: list[float] = field(default_factory=list)
    status: str = "ok"  # "ok" | "single_class" | "insufficient"

    @property
    def folds(self) -> int:
        return len(self.fold_scores)

    @property
    def mean_f1(self) -> float:
        if not self.fold_scores:
            return 0.0
        return float(np.mean(self.fold_scores))

    def to_dict(self) -> dict:
        return {
            "requested_folds": self.requested_folds,
            "fold_scores": [repr(s) for s in self.fold_scores],
            "status": self.status,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "CvReport":
        return cls(
            requested_folds=int(obj["requested_folds"]),
            fold_scores=[float(s) for s in obj["fold_scores"]],
            status=obj["status"],
        )


def _f1_erroneous(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    tp = int(np.sum((y_pred == 1) & (y_true == 1)))
    fp = int(np.sum((y_pred == 1) & (y_true == 0)))
    fn = int(np.sum((y_pred == 0) & (y_true == 1)))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    if precision + recall == 0.0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def cross_validate(
    features: np.ndarray, labels, hyperparams: Hyperparams, k: int, seed: int
) -> CvReport:
    """Stratified k-fold, F1 on the erroneous class per fold.

    k is clamped to the minority-class count. With one class absent the
    report is marked single_class; with fewer than 2 minority examples no
    folding is possible and the report is marked insufficient. Both carry
    mean F1 = 0.
    """
    x = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=int)
    n_err = int(np.sum(y == 1))
    n_ok = int(np.sum(y == 0))
    minority = min(n_err, n_ok)
    if minority == 0:
        return CvReport(requested_folds=k, status="single_class")
    eff_k = min(k, minority)
    if eff_k < 2:
        return CvReport(requested_folds=k, status="insufficient")

    root = np.random.SeedSequence([seed, 0xCF])
    shuffle_rng = np.random.Generator(np.random.PCG64(root.spawn(1)[0]))
    fold_of = np.empty(len(y), dtype=int)
    for cls in (0, 1):
        members = np.flatnonzero(y == cls)
        shuffle_rng.shuffle(members)
        fold_of[members] = np.arange(len(members)) % eff_k

    fold_seeds = [int(s.generate_state(1)[0]) for s in root.spawn(eff_k + 1)[1:]]
    scores = []
    for f in range(eff_k):
        test = fold_of == f
        committee = train(x[~test], y[~test], hyperparams, fold_seeds[f])
        preds = (committee.predict_proba(x[test]) >= 0.5).astype(int)
        scores.append(_f1_erroneous(y[test], preds))
    return CvReport(requested_folds=k, fold_scores=scores)


def grid_search(
    features: np.ndarray,
    labels,
    grid=DEFAULT_GRID,
    k: int = 4,
    seed: int = 0,
) -> tuple[Hyperparams, CvReport]:
    """Evaluate every grid point by cross-validation and return the argmax
    mean F1; ties prefer the simpler model (smaller depth, larger min_leaf)."""
    if not grid:
        raise ValueError("empty hyperparameter grid")
    best: tuple[Hyperparams, CvReport] | None = None
    for hp in grid:
        report = cross_validate(features, labels, hp, k, seed)
        if report.status != "ok":
            return grid[0], report
        if best is None or _grid_key(hp, report) > _grid_key(*best):
            best = (hp, report)
    return best


def _grid_key(hp: Hyperparams, report: CvReport):
    return (report.mean_f1, -hp.max_depth, hp.min_leaf)


@dataclass
class PathStep:
    feature: int
    name: str
    op: str  # "<=" or ">"
    threshold: float
    value: float


@dataclass
class Explanation:
    steps: list[PathStep]
    erroneous: int
    correct: int

    @property
    def erroneous_fraction(self) -> float:
        return Leaf(self.erroneous, self.correct).probability

    @property
    def verdict(self) -> str:
        return "erroneous" if self.erroneous_fraction >= 0.5 else "correct"

    def render(self) -> str:
        if not self.steps:
            return f"always {self.verdict} ({self.erroneous}/{self.erroneous + self.correct} erroneous)"
        conditions = " AND ".join(f"{s.name} {s.op} {_fmt(s.threshold)}" for s in self.steps)
        return (
            f"IF {conditions} THEN {self.verdict}"
            f" ({self.erroneous}/{self.erroneous + self.correct} erroneous)"
        )


def _fmt(value: float) -> str:
    return f"{value:g}"


def train_surrogate(features: np.ndarray, labels, max_depth: int = 4) -> TreeNode:
    """A single shallow tree on the same labels, used only for explanations."""
    x = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=int)
    n_err = int(np.sum(y == 1))
    n_ok = int(np.sum(y == 0))
    if n_err == 0 or n_ok == 0:
        return Leaf(n_err, n_ok)
    total = len(y)
    weight = np.where(y == 1, total / (2.0 * n_err), total / (2.0 * n_ok))
    return fit_tree(x, y, weight, max_depth=max_depth, min_leaf=1, rng=None, max_features="all")


def explain(surrogate: TreeNode | None, cell_features: np.ndarray, names: list[str]) -> Explanation:
    """Root-to-leaf decision path of the surrogate for one cell."""
    if surrogate is None:
        raise NotTrained("no surrogate tree trained yet")
    x = np.asarray(cell_features, dtype=float)
    steps: list[PathStep] = []
    node = surrogate
    while isinstance(node, Split):
        value = float(x[node.feature])
        goes_left = value <= node.threshold
        steps.append(
            PathStep(
                feature=node.feature,
                name=names[node.feature] if node.feature < len(names) else f"feature_{node.feature}",
                op="<=" if goes_left else ">",
                threshold=node.threshold,
                value=value,
            )
        )
        node = node.left if goes_left else node.right
    return Explanation(steps=steps, erroneous=node.erroneous, correct=node.correct)


def top_splits(surrogate: TreeNode, names: list[str], limit: int = 3) -> list[str]:
    """Breadth-first split feature names, most decisive first."""
    out: list[str] = []
    queue: list[TreeNode] = [surrogate]
    while queue and len(out) < limit:
        node = queue.pop(0)
        if isinstance(node, Split):
            name = names[node.feature] if node.feature < len(names) else f"feature_{node.feature}"
            if name not in out:
                out.append(name)
            queue.append(node.left)
            queue.append(node.right)
    return out
