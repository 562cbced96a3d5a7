"""Synthetic desk-scale benchmark tables.

Each generator returns a clean table plus the injection plan used by the
acceptance suite and the experiment scripts, so every reported number is
reproducible from a committed configuration. Value pools are seeded and
deliberately shaped: repeated values so frequency-ranked initialization has
rare and frequent ends, plus controlled amounts of legitimately rare values
so occurrence counts alone cannot separate errors.
"""

from __future__ import annotations

import datetime

import numpy as np

from .evaluation import ColumnInjection, InjectionPlan, PairInjection, inject_errors
from .learner import SessionConfig, Strategy
from .table import GroundTruth, Table

_CITIES = [
    ("Berlin", "BE"),
    ("Hamburg", "HH"),
    ("Munich", "BY"),
    ("Nuremberg", "BY"),
    ("Cologne", "NW"),
    ("Dortmund", "NW"),
    ("Essen", "NW"),
    ("Frankfurt", "HE"),
    ("Kassel", "HE"),
    ("Stuttgart", "BW"),
    ("Mannheim", "BW"),
    ("Dresden", "SN"),
    ("Leipzig", "SN"),
    ("Bremen", "HB"),
    ("Kiel", "SH"),
]

_DEPARTMENTS = [
    "Engineering",
    "Sales",
    "Marketing",
    "Support",
    "Finance",
    "Legal",
    "Research",
    "Operations",
    "Security",
    "Design",
    "Logistics",
    "Procurement",
]

_COMPANIES = [
    "Acme Corp",
    "Globex",
    "Initech",
    "Umbrella",
    "Stark Labs",
    "Wayne Tech",
    "Soylent",
    "Tyrell",
    "Cyberdyne",
    "Wonka Ltd",
]

_TEAMS = ["alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta"]

_CODE_LETTERS = "ABCDEFGHJKLMNPQRSTUVWXYZ"


def _rng(seed: int, tag: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, tag])))


def _skewed_choice(rng: np.random.Generator, pool: list[str], n: int) -> list[str]:
    # Zipf-ish weights so the pool has genuinely frequent and rare values.
    ranks = np.arange(1, len(pool) + 1, dtype=float)
    weights = 1.0 / ranks
    weights /= weights.sum()
    idx = rng.choice(len(pool), size=n, p=weights)
    return [pool[i] for i in idx]


def _code_pool(rng: np.random.Generator, size: int, prefix_len: int = 1) -> list[str]:
    pool: set[str] = set()
    while len(pool) < size:
        prefix = "".join(_CODE_LETTERS[int(rng.integers(len(_CODE_LETTERS)))] for _ in range(prefix_len))
        pool.add(f"{prefix}-{int(rng.integers(100, 9999)):04d}")
    return sorted(pool)


def _salary_pool(rng: np.random.Generator, size: int) -> list[str]:
    values = {f"{int(v) * 100}$" for v in rng.integers(180, 950, size * 2)}
    return sorted(values)[:size]


def _date_pool(rng: np.random.Generator, size: int) -> list[str]:
    base = datetime.date(2015, 1, 1)
    days = rng.integers(0, 2900, size * 2)
    values = {(base + datetime.timedelta(days=int(d))).isoformat() for d in days}
    return sorted(values)[:size]


def _time_pool(rng: np.random.Generator, size: int) -> list[str]:
    values = {
        f"{int(h):02d}:{int(m):02d}"
        for h, m in zip(rng.integers(0, 24, size * 3), rng.integers(0, 60, size * 3))
    }
    return sorted(values)[:size]


def _phone_pool(rng: np.random.Generator, size: int) -> list[str]:
    values = {str(int(v)) for v in rng.integers(2_000_000, 9_999_999, size * 2)}
    return sorted(values)[:size]


def _quantity_pool(rng: np.random.Generator, size: int) -> list[str]:
    return sorted({str(int(v)) for v in rng.integers(1, 800, size * 2)})[:size]


# --------------------------------------------------------------------------
# Criterion: synthetic convergence benchmark (2000 x 8, all five error kinds)


_BENCH_CITIES = [
    ("Berlin", "BE"),
    ("Hamburg", "HH"),
    ("Munich", "BY"),
    ("Cologne", "NW"),
    ("Frankfurt", "HE"),
    ("Stuttgart", "BW"),
    ("Dresden", "SN"),
    ("Bremen", "HB"),
]


def benchmark_clean_table(seed: int, n_rows: int = 2000) -> Table:
    rng = _rng(seed, 1)
    codes = _code_pool(rng, 220)
    salaries = _salary_pool(rng, 150)
    dates = _date_pool(rng, 180)
    phones = _phone_pool(rng, 300)
    city_idx = rng.choice(len(_BENCH_CITIES), size=n_rows, p=_zipf_weights(len(_BENCH_CITIES)))
    rows = []
    code_col = _skewed_choice(rng, codes, n_rows)
    dept_col = _skewed_choice(rng, _DEPARTMENTS, n_rows)
    salary_col = _skewed_choice(rng, salaries, n_rows)
    date_col = _skewed_choice(rng, dates, n_rows)
    company_col = _skewed_choice(rng, _COMPANIES, n_rows)
    phone_col = _skewed_choice(rng, phones, n_rows)
    for i in range(n_rows):
        city, state = _BENCH_CITIES[int(city_idx[i])]
        rows.append(
            (
                code_col[i],
                dept_col[i],
                city,
                state,
                salary_col[i],
                date_col[i],
                company_col[i],
                phone_col[i],
            )
        )
    schema = ("code", "department", "city", "state", "salary", "hire_date", "company", "phone")
    return Table(schema=schema, cells=tuple(rows))


def benchmark_plan(seed: int) -> InjectionPlan:
    return InjectionPlan(
        seed=seed,
        columns=(
            ColumnInjection(column=0, rate=0.07, kind="typo"),
            ColumnInjection(column=1, rate=0.10, kind="missing"),
            ColumnInjection(column=2, rate=0.03, kind="typo"),
            ColumnInjection(column=3, rate=0.10, kind="cross", determinant=2),
            ColumnInjection(column=4, rate=0.12, kind="format", marker="$"),
            ColumnInjection(column=5, rate=0.04, kind="format", marker="-"),
        ),
        pairs=(
            PairInjection(driver=6, dependent=7, rate=0.03, driver_kind="typo", dependent_kind="typo"),
        ),
    )


def benchmark_tables(seed: int, n_rows: int = 2000) -> tuple[Table, GroundTruth]:
    return inject_errors(benchmark_clean_table(seed, n_rows), benchmark_plan(seed))


def benchmark_session_config(seed: int, budget: int = 600) -> SessionConfig:
    # init_per_class=4 exceeds the two-per-class floor; the extra probes give
    # every column enough distinct error examples for a usable first model,
    # which the budget easily repays.
    return SessionConfig(
        batch_size=10,
        budget=budget,
        strategy=Strategy.MIN_CERTAINTY,
        seed=seed,
        embedding_dim=16,
        init_per_class=4,
    )


def _zipf_weights(n: int) -> np.ndarray:
    w = 1.0 / np.arange(1, n + 1, dtype=float)
    return w / w.sum()


# --------------------------------------------------------------------------
# Criterion: column-selection strategies on heterogeneous column difficulty


def heterogeneous_clean_table(seed: int, n_rows: int = 1000) -> Table:
    rng = _rng(seed, 2)
    salaries = _salary_pool(rng, 120)
    times = _time_pool(rng, 90)
    codes = _code_pool(rng, 150)
    city_idx = rng.choice(len(_BENCH_CITIES), size=n_rows, p=_zipf_weights(len(_BENCH_CITIES)))
    rows = []
    salary_col = _skewed_choice(rng, salaries, n_rows)
    time_col = _skewed_choice(rng, times, n_rows)
    code_col = _skewed_choice(rng, codes, n_rows)
    dept_col = _skewed_choice(rng, _DEPARTMENTS[:10], n_rows)
    for i in range(n_rows):
        city, state = _BENCH_CITIES[int(city_idx[i])]
        rows.append((salary_col[i], time_col[i], code_col[i], dept_col[i], state, city))
    schema = ("salary", "shift", "code", "department", "state", "city")
    return Table(schema=schema, cells=tuple(rows))


def heterogeneous_plan(seed: int) -> InjectionPlan:
    # Most of the error mass sits in the hard cross-column state violations,
    # so good global F1 genuinely requires feeding the slowest column.
    return InjectionPlan(
        seed=seed,
        columns=(
            ColumnInjection(column=0, rate=0.05, kind="format", marker="$"),
            ColumnInjection(column=1, rate=0.05, kind="format", marker=":"),
            ColumnInjection(column=2, rate=0.04, kind="typo"),
            ColumnInjection(column=3, rate=0.05, kind="missing"),
            ColumnInjection(column=4, rate=0.15, kind="cross", determinant=5),
        ),
    )


def heterogeneous_tables(seed: int, n_rows: int = 1000) -> tuple[Table, GroundTruth]:
    return inject_errors(heterogeneous_clean_table(seed, n_rows), heterogeneous_plan(seed))


def heterogeneous_session_config(seed: int, strategy: Strategy, budget: int = 400) -> SessionConfig:
    return SessionConfig(
        batch_size=10,
        budget=budget,
        strategy=strategy,
        seed=seed,
        embedding_dim=16,
        init_per_class=3,
    )


# --------------------------------------------------------------------------
# Criterion: character-level vs word-level text features on format errors


def format_clean_table(seed: int, n_rows: int = 1000) -> Table:
    rng = _rng(seed, 3)
    salaries = _salary_pool(rng, 140)
    times = _time_pool(rng, 110)
    products = _code_pool(rng, 20, prefix_len=2)
    quantities = _quantity_pool(rng, 60)
    rows = list(
        zip(
            _skewed_choice(rng, salaries, n_rows),
            _skewed_choice(rng, times, n_rows),
            _skewed_choice(rng, products, n_rows),
            _skewed_choice(rng, quantities, n_rows),
        )
    )
    return Table(schema=("salary", "shift", "product", "quantity"), cells=tuple(rows))


def format_plan(seed: int) -> InjectionPlan:
    return InjectionPlan(
        seed=seed,
        columns=(
            ColumnInjection(column=0, rate=0.10, kind="format", marker="$"),
            ColumnInjection(column=1, rate=0.10, kind="format", marker=":"),
        ),
    )


def format_tables(seed: int, n_rows: int = 1000) -> tuple[Table, GroundTruth]:
    return inject_errors(format_clean_table(seed, n_rows), format_plan(seed))


def format_session_config(seed: int, text_mode: str, budget: int = 200) -> SessionConfig:
    """Text features only, so the ablation isolates the text representation."""
    return SessionConfig(
        batch_size=10,
        budget=budget,
        strategy=Strategy.MIN_CERTAINTY,
        seed=seed,
        text_mode=text_mode,
        use_metadata=False,
        use_embedding=False,
        use_error_correlation=False,
    )


# --------------------------------------------------------------------------
# Criterion: error-correlation features on a correlated pair of columns


_N_SPECIAL_FRONT = 10
_N_SPECIAL_BACK = 150


def correlated_clean_table(seed: int, n_rows: int = 2000) -> Table:
    """Driver (sched) and dependent (code) columns share special rows whose
    values are legitimately rare in *both* columns, so neither occurrence
    counts nor cross-column rarity conjunctions shortcut the detection.

    The dependent column's legitimate rare codes are produced by the same
    single-character-edit operator the injector uses, so an injected code
    error is content-indistinguishable from a merely unusual code; only the
    driver column (valid-format rare times vs corrupted times) separates
    them. The driver corruption is length-preserving substitution, which
    avoids any single give-away feature. A handful of special rows sit near
    the front, so frequency-ranked initialization (which walks rare values
    in first-occurrence order) labels both injected errors and messy
    counterexamples early; the bulk sits in the back where only the model
    can tell them apart."""
    from .evaluation import typo_value

    rng = _rng(seed, 4)
    common_times = _time_pool(rng, 40)
    n_special = _N_SPECIAL_FRONT + _N_SPECIAL_BACK
    rare_times = [t for t in _time_pool(_rng(seed, 41), 2 * n_special + 60) if t not in common_times]
    common_codes = _code_pool(rng, 12)
    quantities = _quantity_pool(rng, 80)

    team_col = _skewed_choice(rng, _TEAMS, n_rows)
    time_col = _skewed_choice(rng, common_times, n_rows)
    code_col = _skewed_choice(rng, common_codes, n_rows)
    qty_col = _skewed_choice(rng, quantities, n_rows)
    front_cut = n_rows // 5
    front = 50 + rng.choice(front_cut - 50, size=_N_SPECIAL_FRONT, replace=False)
    back = front_cut + rng.choice(n_rows - front_cut, size=_N_SPECIAL_BACK, replace=False)
    special_rows = np.concatenate([front, back])
    seen_codes = set(common_codes)
    for k, r in enumerate(special_rows):
        time_col[int(r)] = rare_times[k]
        base = common_codes[int(rng.integers(len(common_codes)))]
        messy = typo_value(base, rng)
        while messy in seen_codes:
            messy = typo_value(base, rng)
        seen_codes.add(messy)
        code_col[int(r)] = messy
    rows = list(zip(team_col, time_col, code_col, qty_col))
    return Table(schema=("team", "sched", "code", "qty"), cells=tuple(rows))


def correlated_plan(seed: int) -> InjectionPlan:
    return InjectionPlan(
        seed=seed,
        columns=(
            ColumnInjection(column=1, rate=0.06, kind="substitute"),
            ColumnInjection(column=3, rate=0.04, kind="typo"),
        ),
        pairs=(
            PairInjection(
                driver=1, dependent=2, rate=0.01, driver_kind="substitute", dependent_kind="typo"
            ),
        ),
    )


def correlated_tables(seed: int, n_rows: int = 2000) -> tuple[Table, GroundTruth]:
    return inject_errors(correlated_clean_table(seed, n_rows), correlated_plan(seed))


def correlated_session_config(seed: int, use_error_correlation: bool, budget: int = 500) -> SessionConfig:
    return SessionConfig(
        batch_size=10,
        budget=budget,
        strategy=Strategy.MIN_CERTAINTY,
        seed=seed,
        embedding_dim=16,
        use_error_correlation=use_error_correlation,
        init_per_class=4,
    )
