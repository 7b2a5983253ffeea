"""Monte Carlo coverage study for the agreement-index confidence intervals.

A finite population of ratings is generated once; ``S`` samples are then
drawn by two-stage simple random sampling without replacement (raters,
then targets) and every requested interval method is scored against the
population value of the index.

Random streams: sample ``s`` uses the child ``(seed, s)`` of the master
seed. Inside it, child ``0`` draws the sample and child ``(1 + j, attempt)``
feeds the bootstrap of scheme ``j``. Samples are therefore independent of
each other and of the number of worker processes.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .index import (
    CategoryDistribution,
    DomainError,
    RatingMatrix,
    batch_estimates,
    d_max,
    per_target_dispersion,
    theoretical_d,
)
from .inference import METHODS, normal_quantile
from .resampling import (
    MAX_DROPPED_SHARE,
    SCHEMES,
    BootstrapScheme,
    _tail_quantiles,
    as_seed_sequence,
    bootstrap_distribution,
    substream,
)

__all__ = [
    "PopulationSpec",
    "Population",
    "StudyConfig",
    "CoverageCell",
    "CoverageReport",
    "generate_population",
    "population_d",
    "mix_to_dispersion",
    "draw_two_stage_sample",
    "score_intervals",
    "run_study",
    "export_report",
    "DEFAULT_P",
]

DEFAULT_P = (0.1, 0.2, 0.35, 0.25, 0.1)
MAX_RETRIES = 3
CSV_FIELDS = ("scheme", "method", "ECP", "LE", "RE", "AL")


@dataclass(frozen=True)
class PopulationSpec:
    """Size and generating distribution of a synthetic finite population."""

    N_T: int = 150
    N_R: int = 28
    p: tuple = DEFAULT_P
    seed: int | None = 0

    def __post_init__(self):
        if self.N_T < 1 or self.N_R < 2:
            raise DomainError(f"population needs N_T >= 1 and N_R >= 2, got ({self.N_T}, {self.N_R})")
        dist = self.p if isinstance(self.p, CategoryDistribution) else CategoryDistribution(self.p)
        object.__setattr__(self, "p", tuple(float(v) for v in dist.p))

    @property
    def distribution(self) -> CategoryDistribution:
        return CategoryDistribution(self.p)


@dataclass(frozen=True)
class Population:
    matrix: RatingMatrix
    d: float


def population_d(m: RatingMatrix, census_correction: bool = False) -> float:
    """Population value of the index: mean row dispersion over ``(K - 1) / 2``.

    The population is a census of raters, so by default no
    ``N_R / (N_R - 1)`` factor is applied; ``census_correction=True`` gives
    the mean over distinct rater pairs instead.
    """
    D = np.mean([per_target_dispersion(row, m.K) for row in m.cells])
    if census_correction:
        D *= m.n_R / (m.n_R - 1)
    return float(D / d_max(m.K))


def generate_population(spec: PopulationSpec, census_correction: bool = False) -> Population:
    """``N_T x N_R`` matrix of i.i.d. draws from ``spec.p`` and its index value."""
    rng = np.random.default_rng(spec.seed)
    K = len(spec.p)
    cells = rng.choice(K, size=(spec.N_T, spec.N_R), p=np.asarray(spec.p)) + 1
    m = RatingMatrix(cells, K)
    return Population(m, population_d(m, census_correction))


def mix_to_dispersion(p, target_d: float, tol: float = 1e-3) -> CategoryDistribution:
    """Shrink ``p`` toward a point mass at its mode until its ``d`` equals ``target_d``.

    The result is ``(1 - w) p + w * delta_mode`` with ``w`` found by root
    finding; only lowering ``d`` is possible this way.
    """
    dist = p if isinstance(p, CategoryDistribution) else CategoryDistribution(p)
    d0 = theoretical_d(dist)
    if not 0.0 <= target_d <= d0 + tol:
        raise DomainError(f"target d={target_d} not reachable by shrinking d={d0:.4f}")
    if abs(d0 - target_d) <= tol:
        return dist
    point = np.zeros(dist.K)
    point[int(np.argmax(dist.p))] = 1.0

    def mixed(w):
        q = (1.0 - w) * dist.p + w * point
        return q / q.sum()

    w = brentq(lambda w: theoretical_d(CategoryDistribution(mixed(w))) - target_d, 0.0, 1.0, xtol=1e-12)
    out = CategoryDistribution(mixed(w))
    if abs(theoretical_d(out) - target_d) > tol:
        raise DomainError(f"could not match d={target_d} within {tol}")
    return out


def draw_two_stage_sample(pop: RatingMatrix, n_T: int, n_R: int, rng: np.random.Generator) -> RatingMatrix:
    """SRSWOR of ``n_R`` raters, then SRSWOR of ``n_T`` targets of the reduced matrix."""
    if n_T > pop.n_T or n_R > pop.n_R:
        raise DomainError(f"cannot draw ({n_T}, {n_R}) from a population of shape {pop.shape}")
    cols = rng.choice(pop.n_R, size=n_R, replace=False)
    reduced = pop.cells[:, cols]
    rows = rng.choice(pop.n_T, size=n_T, replace=False)
    return RatingMatrix(reduced[rows, :], pop.K)


@dataclass(frozen=True)
class StudyConfig:
    """Design of a coverage study; defaults are the full-scale design."""

    S: int = 1000
    B: int = 1000
    n_T: int = 50
    n_R: int = 7
    level: float = 0.95
    methods: tuple = METHODS
    schemes: tuple = SCHEMES
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "schemes", tuple(self.schemes))
        for m in self.methods:
            if m not in METHODS:
                raise DomainError(f"unknown method {m!r}")
        for s in self.schemes:
            if s not in SCHEMES:
                raise DomainError(f"unknown scheme {s!r}")
        if self.S < 1:
            raise DomainError("S must be >= 1")
        if self.n_R < 2 or self.n_T < 1:
            raise DomainError(f"invalid sample sizes ({self.n_T}, {self.n_R})")
        if not 0.0 < self.level < 1.0:
            raise DomainError(f"level must be in (0, 1), got {self.level}")
        if self.needs_bootstrap and self.B < 2:
            raise DomainError("bootstrap methods need B >= 2")

    @property
    def needs_bootstrap(self) -> bool:
        return bool(self.schemes) and any(m != "normal" for m in self.methods)


@dataclass(frozen=True)
class CoverageCell:
    ECP: float
    LE: float
    RE: float
    AL: float


@dataclass
class CoverageReport:
    """Coverage scoreboard of a study.

    ``cells`` maps ``(scheme, method)`` to its indicators (percentages and
    average length); ``bias`` maps each scheme to the mean bootstrap ``d*``
    over samples and replicates. ``sample_estimates`` holds the ``S``
    original-sample estimates, in sample order.
    """

    cells: dict
    bias: dict
    population_d: float
    sample_estimates: np.ndarray = field(repr=False)
    config: StudyConfig
    retries: int = 0
    fallbacks: int = 0

    def rows(self) -> list[dict]:
        out = []
        for (scheme, method), c in self.cells.items():
            out.append({"scheme": scheme, "method": method, **asdict(c)})
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
        writer.writeheader()
        for row in self.rows():
            writer.writerow({k: (repr(float(v)) if isinstance(v, float) else v) for k, v in row.items()})
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "population_d": self.population_d,
            "config": asdict(self.config),
            "scoreboard": self.rows(),
            "bias": dict(self.bias),
            "mean_sample_estimate": float(np.mean(self.sample_estimates)),
            "retries": self.retries,
            "fallbacks": self.fallbacks,
        }


def score_intervals(lower, upper, d: float) -> CoverageCell:
    """Coverage, tail errors (percent) and mean length of closed intervals."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    S = lower.size
    left = int(np.sum(lower > d))
    right = int(np.sum(upper < d))
    covered = S - left - right
    return CoverageCell(
        ECP=100.0 * covered / S,
        LE=100.0 * left / S,
        RE=100.0 * right / S,
        AL=float(np.mean(upper - lower)),
    )


def _run_sample(s: int, pop_cells: np.ndarray, K: int, cfg: StudyConfig) -> dict:
    root = as_seed_sequence(cfg.seed)
    ss = np.random.SeedSequence(root.entropy, spawn_key=tuple(root.spawn_key) + (s,))
    pop = RatingMatrix(pop_cells, K)
    sample = draw_two_stage_sample(pop, cfg.n_T, cfg.n_R, substream(ss, 0))
    d_star, var_hat = batch_estimates(sample.cells, K)
    d_star, se = float(d_star), math.sqrt(float(var_hat))
    out = {"d_star": d_star, "bounds": {}, "bias": {}, "retries": 0, "fallbacks": 0}

    if "normal" in cfg.methods:
        half = normal_quantile(0.5 + cfg.level / 2.0) * se
        out["bounds"]["normal"] = (d_star - half, d_star + half)
    if not cfg.needs_bootstrap:
        return out

    N_T, N_R = pop.shape
    for j, kind in enumerate(SCHEMES):
        if kind not in cfg.schemes:
            continue
        for attempt in range(MAX_RETRIES + 1):
            child = np.random.SeedSequence(ss.entropy, spawn_key=tuple(ss.spawn_key) + (1 + j, attempt))
            reps = bootstrap_distribution(sample, BootstrapScheme(kind, (N_T, N_R)), cfg.B, seed=child)
            est, se_b = reps.estimates, reps.std_errors
            zero = int(np.sum(se_b <= 0))
            if "bootstrap_t" not in cfg.methods or se == 0 or zero <= MAX_DROPPED_SHARE * cfg.B:
                break
            if attempt < MAX_RETRIES:
                out["retries"] += 1
        out["bias"][kind] = float(est.mean())
        lo, hi = _tail_quantiles(est, cfg.level)
        if "percentile" in cfg.methods:
            out["bounds"][(kind, "percentile")] = (lo, hi)
        if "pivotal" in cfg.methods:
            out["bounds"][(kind, "pivotal")] = (2 * d_star - hi, 2 * d_star - lo)
        if "bootstrap_t" in cfg.methods:
            keep = se_b > 0
            if se == 0 or keep.sum() < 2 or (cfg.B - keep.sum()) > MAX_DROPPED_SHARE * cfg.B:
                out["fallbacks"] += 1
                out["bounds"][(kind, "bootstrap_t")] = (d_star, d_star)
            else:
                t_lo, t_hi = _tail_quantiles((est[keep] - d_star) / se_b[keep], cfg.level)
                out["bounds"][(kind, "bootstrap_t")] = (d_star - t_hi * se, d_star - t_lo * se)
    return out


def _run_chunk(args):
    samples, pop_cells, K, cfg = args
    return [_run_sample(s, pop_cells, K, cfg) for s in samples]


def run_study(pop, cfg: StudyConfig, population_value: float | None = None, workers: int = 1) -> CoverageReport:
    """Run the coverage study on a finite population.

    Parameters
    ----------
    pop : Population or RatingMatrix
        The finite population; a bare matrix is scored against
        :func:`population_d` unless ``population_value`` is given.
    cfg : StudyConfig
        Study design.
    population_value : float, optional
        Overrides the value intervals are scored against.
    workers : int
        Processes used for the sample loop; results do not depend on it.
    """
    if isinstance(pop, Population):
        matrix, d_true = pop.matrix, pop.d
    else:
        matrix, d_true = pop, None
    if population_value is not None:
        d_true = float(population_value)
    if d_true is None:
        d_true = population_d(matrix)
    if cfg.n_T > matrix.n_T or cfg.n_R > matrix.n_R:
        raise DomainError(f"sample ({cfg.n_T}, {cfg.n_R}) larger than population {matrix.shape}")

    indices = list(range(cfg.S))
    if workers > 1:
        chunk = -(-cfg.S // (workers * 4))
        jobs = [(indices[i:i + chunk], matrix.cells, matrix.K, cfg) for i in range(0, cfg.S, chunk)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = [r for part in pool.map(_run_chunk, jobs) for r in part]
    else:
        results = _run_chunk((indices, matrix.cells, matrix.K, cfg))

    cells = {}
    scheme_rows = [s for s in SCHEMES if s in cfg.schemes] or ["none"]
    for scheme in scheme_rows:
        for method in METHODS:
            if method not in cfg.methods:
                continue
            key = "normal" if method == "normal" else (scheme, method)
            if key not in results[0]["bounds"]:
                continue
            b = np.array([r["bounds"][key] for r in results])
            cells[(scheme, method)] = score_intervals(b[:, 0], b[:, 1], d_true)

    bias = {}
    for scheme in SCHEMES:
        if scheme in results[0]["bias"]:
            bias[scheme] = float(np.mean([r["bias"][scheme] for r in results]))

    return CoverageReport(
        cells=cells,
        bias=bias,
        population_d=d_true,
        sample_estimates=np.array([r["d_star"] for r in results]),
        config=cfg,
        retries=sum(r["retries"] for r in results),
        fallbacks=sum(r["fallbacks"] for r in results),
    )


def export_report(rep: CoverageReport, directory, raw: bool = True, stem: str = "coverage") -> dict:
    """Write ``<stem>.csv``, ``<stem>.json`` and optionally ``<stem>_raw.csv``.

    Returns the paths written, keyed by kind.
    """
    from .fileio import atomic_write_text

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {"csv": directory / f"{stem}.csv", "json": directory / f"{stem}.json"}
    atomic_write_text(paths["csv"], rep.to_csv())
    atomic_write_text(paths["json"], json.dumps(rep.to_dict(), indent=2) + "\n")
    if raw:
        paths["raw"] = directory / f"{stem}_raw.csv"
        lines = ["sample,d_hat_star"] + [f"{i},{v!r}" for i, v in enumerate(map(float, rep.sample_estimates))]
        atomic_write_text(paths["raw"], "\n".join(lines) + "\n")
    return paths
