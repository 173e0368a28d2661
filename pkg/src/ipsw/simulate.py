"""Seeded Monte Carlo experiments over a DgpSpec.

The default engine never materializes individual units. For Gaussian
outcomes, the per-stratum sufficient statistics of one replicate are

    Z ~ Multinomial(n, p_R),  T | Z ~ Binomial(Z, pi),
    S1 | T ~ N(T mean1, T var1),  S0 | Z, T ~ N((Z - T) mean0, (Z - T) var0),
    M ~ Multinomial(m, p_T),

and every estimator in :mod:`ipsw.estimators` is a function of (Z, T, S1, S0, M).
This is exact in distribution and vectorizes across replicates. The unit-level
path (``engine="units"``) draws full samples and calls the estimator functions
directly; it exists for cross-checks.

Replicates are cut into fixed-size blocks. Block ``b`` draws from a Philox
stream keyed by ``(seed, *stream, b)``, so the value of replicate ``r`` depends
only on the seed and ``r``, never on the number of workers.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ipsw.domain import DgpSpec, ExtendedDgpSpec, TargetSample, TrialSample, true_ate
from ipsw.errors import IpswError, ParameterOutOfRange, VariantParameterMismatch
from ipsw.estimators import Tag, evaluate, parse_tag
from ipsw.theory import (
    AsymptoticRegime,
    asymptotic_variance,
    inflation_factor,
    v_o,
    v_so,
    v_so_tilde_infty,
)

WORKERS_ENV = "IPSW_WORKERS"
MAX_BLOCK = 4096
BLOCK_CELLS = 1 << 21  # bound on reps x strata per block


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "").strip()
    if not raw:
        return 1
    try:
        w = int(raw)
    except ValueError as exc:
        raise ParameterOutOfRange(f"{WORKERS_ENV} must be an integer, got {raw!r}") from exc
    if w < 1:
        raise ParameterOutOfRange(f"{WORKERS_ENV} must be >= 1, got {w}")
    return w


def block_rng(seed: int, key: Sequence[int]) -> np.random.Generator:
    """Counter-based generator for one block of replicates."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def block_size_for(support_size: int) -> int:
    return int(max(1, min(MAX_BLOCK, BLOCK_CELLS // max(1, support_size))))


# ---------------------------------------------------------------------------
# unit-level sampling
# ---------------------------------------------------------------------------


def sample_trial(spec: DgpSpec, n: int, rng: np.random.Generator) -> TrialSample:
    """n i.i.d. units from p_R with Bernoulli(pi(x)) treatment and Gaussian outcomes."""
    if n < 1:
        raise ParameterOutOfRange(f"n must be >= 1, got {n}")
    x = rng.choice(spec.size, size=n, p=spec.p_R)
    a = (rng.random(n) < spec.pi[x]).astype(np.int64)
    noise = rng.standard_normal(n)
    mean = np.where(a == 1, spec.mean1[x], spec.mean0[x])
    sd = np.sqrt(np.where(a == 1, spec.var1[x], spec.var0[x]))
    return TrialSample(x=x, a=a, y=mean + sd * noise)


def sample_target(spec: DgpSpec, m: int, rng: np.random.Generator) -> TargetSample:
    """m i.i.d. covariate draws from p_T."""
    if m < 1:
        raise ParameterOutOfRange(f"m must be >= 1, got {m}")
    return TargetSample(x=rng.choice(spec.size, size=m, p=spec.p_T))


# ---------------------------------------------------------------------------
# sufficient statistics
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class StatsBatch:
    """Per-replicate, per-stratum sufficient statistics (arrays of shape reps x K).

    ``h`` is the stratum sum of A Y / pi - (1 - A) Y / (1 - pi) with the true pi
    of each unit, so it stays valid after strata are merged.
    """

    z: NDArray
    t: NDArray
    s1: NDArray
    s0: NDArray
    h: NDArray
    target: Optional[NDArray] = None

    @property
    def reps(self) -> int:
        return self.z.shape[0]

    def coarsen(self, groups: ArrayLike) -> "StatsBatch":
        """Merge strata: column k of the result sums the columns with groups == k."""
        g = np.asarray(groups, dtype=np.int64)
        if g.shape != (self.z.shape[1],):
            raise ValueError(f"groups must have length {self.z.shape[1]}")
        onehot = np.zeros((g.size, int(g.max()) + 1))
        onehot[np.arange(g.size), g] = 1.0
        agg = lambda a: None if a is None else a @ onehot  # noqa: E731
        return StatsBatch(
            z=agg(self.z), t=agg(self.t), s1=agg(self.s1), s0=agg(self.s0), h=agg(self.h),
            target=agg(self.target),
        )


def draw_stats(spec: DgpSpec, n: int, m: Optional[int], size: int, rng: np.random.Generator) -> StatsBatch:
    """``size`` replicates of trial (and target) sufficient statistics."""
    z = rng.multinomial(n, spec.p_R, size=size)
    t = rng.binomial(z, np.broadcast_to(spec.pi, z.shape))
    c = z - t
    s1 = t * spec.mean1 + np.sqrt(t * spec.var1) * rng.standard_normal(z.shape)
    s0 = c * spec.mean0 + np.sqrt(c * spec.var0) * rng.standard_normal(z.shape)
    h = s1 / spec.pi - s0 / (1.0 - spec.pi)
    target = None if m is None else rng.multinomial(m, spec.p_T, size=size)
    return StatsBatch(
        z=z.astype(float), t=t.astype(float), s1=s1, s0=s0, h=h,
        target=None if target is None else target.astype(float),
    )


def stats_from_samples(
    spec: DgpSpec, trials: Sequence[TrialSample], targets: Optional[Sequence[TargetSample]] = None
) -> StatsBatch:
    """Sufficient statistics of explicit unit-level samples."""
    K = spec.size
    rows = []
    for tr in trials:
        a = tr.a.astype(bool)
        pi_i = spec.pi[tr.x]
        z = np.bincount(tr.x, minlength=K)
        t = np.bincount(tr.x[a], minlength=K)
        s1 = np.bincount(tr.x[a], weights=tr.y[a], minlength=K)
        s0 = np.bincount(tr.x[~a], weights=tr.y[~a], minlength=K)
        h = np.bincount(tr.x, weights=np.where(a, tr.y / pi_i, -tr.y / (1 - pi_i)), minlength=K)
        rows.append((z, t, s1, s0, h))
    cols = [np.array([r[i] for r in rows], dtype=float) for i in range(5)]
    target = None
    if targets is not None:
        target = np.array([np.bincount(tg.x, minlength=K) for tg in targets], dtype=float)
    return StatsBatch(*cols, target=target)


def _ratio(num: NDArray, den: NDArray) -> NDArray:
    out = np.zeros_like(num, dtype=float)
    np.divide(num, den, out=out, where=den > 0)
    return out


def estimates_from_stats(
    stats: StatsBatch, p_R: NDArray, p_T: NDArray, n: int, m: Optional[int], tags: Iterable[Tag]
) -> tuple[dict[Tag, NDArray], dict[Tag, int]]:
    """Estimator values per replicate and the count of degenerate replicates.

    A replicate is degenerate for an estimator when a stratum it reweights is
    empty, or when a stratum (or, for DM, the whole trial) it splits by arm
    lacks treated or control units.
    """
    z, t, s1, s0, h = stats.z, stats.t, stats.s1, stats.s0, stats.h
    c = z - t
    dm = _ratio(s1, t) - _ratio(s0, c)
    arm_gap = np.any((z > 0) & ((t == 0) | (c == 0)), axis=1)
    empty = np.any((z == 0) & (p_T > 0), axis=1)
    values: dict[Tag, NDArray] = {}
    degenerate: dict[Tag, int] = {}
    for tag in tags:
        if tag.needs_target:
            if stats.target is None or m is None:
                raise VariantParameterMismatch(f"{tag.value} needs a target sample size m")
            w = stats.target / m
        else:
            w = np.broadcast_to(p_T, z.shape)
        if tag is Tag.HT:
            v, bad = h.sum(axis=1) / n, np.zeros(z.shape[0], bool)
        elif tag is Tag.DM:
            T, C = t.sum(axis=1), c.sum(axis=1)
            v = _ratio(s1.sum(axis=1), T) - _ratio(s0.sum(axis=1), C)
            bad = (T == 0) | (C == 0)
        elif tag is Tag.PS:
            v, bad = (z * dm).sum(axis=1) / n, arm_gap
        elif tag is Tag.IPSW_ORACLE:
            v, bad = (h * _ratio(p_T, p_R)).sum(axis=1) / n, np.zeros(z.shape[0], bool)
        elif tag in (Tag.IPSW_SEMI, Tag.IPSW_EST):
            v, bad = (w * _ratio(h, z)).sum(axis=1), empty
        else:
            v, bad = (w * dm).sum(axis=1), empty | arm_gap
        values[tag] = np.asarray(v, dtype=float)
        degenerate[tag] = int(np.count_nonzero(bad))
    return values, degenerate


# ---------------------------------------------------------------------------
# configuration and report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class McConfig:
    n: int
    m: Optional[int]
    reps: int
    seed: int
    estimators: tuple[Tag, ...] = (Tag.IPSW_EST, Tag.IPSW_EST_PIHAT)

    def __post_init__(self):
        object.__setattr__(self, "estimators", tuple(dict.fromkeys(e if isinstance(e, Tag) else parse_tag(e) for e in self.estimators)))
        if self.reps < 1:
            raise ParameterOutOfRange(f"reps must be >= 1, got {self.reps}")
        if self.n < 1:
            raise ParameterOutOfRange(f"n must be >= 1, got {self.n}")
        if not 0 <= self.seed < 2**64:
            raise ParameterOutOfRange(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.m is not None and self.m < 1:
            raise ParameterOutOfRange(f"m must be >= 1, got {self.m}")
        if self.m is None and any(t.needs_target for t in self.estimators):
            raise VariantParameterMismatch("estimated-p_T estimators need a finite m")
        if not self.estimators:
            raise ParameterOutOfRange("at least one estimator is required")


@dataclass(frozen=True)
class McRow:
    estimator: Tag
    mean: float
    bias: float
    variance: Optional[float]
    mse: float
    mc_se: Optional[float]
    variance_mc_se: Optional[float]
    degenerate_reps: int


@dataclass(frozen=True, eq=False)
class McReport:
    config: McConfig
    true_ate: float
    rows: tuple[McRow, ...]
    values: Mapping[Tag, NDArray] = field(default_factory=dict, repr=False)

    def row(self, tag: Tag) -> McRow:
        for r in self.rows:
            if r.estimator is tag:
                return r
        raise KeyError(tag)

    def __eq__(self, other):
        if not isinstance(other, McReport):
            return NotImplemented
        return self.config == other.config and self.true_ate == other.true_ate and self.rows == other.rows


def summarize(tag: Tag, values: NDArray, truth: float, degenerate: int) -> McRow:
    reps = values.size
    mean = float(np.mean(values))
    mse = float(np.mean((values - truth) ** 2))
    if reps < 2:
        var = mc_se = var_se = None
    else:
        var = float(np.var(values, ddof=1))
        mc_se = math.sqrt(var / reps)
        var_se = var * math.sqrt(2.0 / (reps - 1))
    return McRow(tag, mean, mean - truth, var, mse, mc_se, var_se, degenerate)


# ---------------------------------------------------------------------------
# engine
# ---------------------------------------------------------------------------


Views = tuple[tuple[str, Optional[NDArray]], ...]


def _view_weights(spec: DgpSpec, groups: Optional[NDArray]) -> tuple[NDArray, NDArray]:
    if groups is None:
        return spec.p_R, spec.p_T
    k = int(groups.max()) + 1
    return (
        np.bincount(groups, weights=spec.p_R, minlength=k),
        np.bincount(groups, weights=spec.p_T, minlength=k),
    )


def _run_block(spec: DgpSpec, cfg: McConfig, views: Views, stream: tuple[int, ...], block: int,
               start: int, size: int, engine: str):
    rng = block_rng(cfg.seed, (*stream, block))
    try:
        if engine == "units":
            return _run_units(spec, cfg, views, rng, size)
        stats = draw_stats(spec, cfg.n, cfg.m, size, rng)
        out = {}
        for name, groups in views:
            st = stats if groups is None else stats.coarsen(groups)
            p_R, p_T = _view_weights(spec, groups)
            out[name] = estimates_from_stats(st, p_R, p_T, cfg.n, cfg.m, cfg.estimators)
        return out
    except IpswError as exc:
        raise type(exc)(f"replicates {start}..{start + size - 1}: {exc}") from exc


def _run_units(spec: DgpSpec, cfg: McConfig, views: Views, rng: np.random.Generator, size: int):
    if any(g is not None for _, g in views):
        raise ValueError("the unit-level engine does not merge strata")
    vals = {t: np.empty(size) for t in cfg.estimators}
    for r in range(size):
        trial = sample_trial(spec, cfg.n, rng)
        target = sample_target(spec, cfg.m, rng) if cfg.m is not None else None
        for t in cfg.estimators:
            vals[t][r] = evaluate(t, spec, trial, target).value
    return {name: (vals, {t: 0 for t in cfg.estimators}) for name, _ in views}


def _block_plan(reps: int, block: int) -> list[tuple[int, int, int]]:
    return [(b, s, min(block, reps - s)) for b, s in enumerate(range(0, reps, block))]


def simulate_views(
    spec: DgpSpec,
    cfg: McConfig,
    views: Mapping[str, Optional[ArrayLike]],
    workers: Optional[int] = None,
    stream: Sequence[int] = (),
    engine: str = "stats",
    block_size: Optional[int] = None,
) -> dict[str, McReport]:
    """Run ``cfg`` once and evaluate every estimator under several stratifications.

    ``views`` maps a name to ``None`` (the spec's own strata) or to a vector
    mapping each stratum to a merged stratum id. All views share the same
    draws, so their differences carry common random numbers.
    """
    if engine not in ("stats", "units"):
        raise ValueError(f"unknown engine {engine!r}")
    v: Views = tuple(
        (name, None if g is None else np.asarray(g, dtype=np.int64)) for name, g in views.items()
    )
    for name, g in v:
        if g is not None and (g.shape != (spec.size,) or g.min() < 0):
            raise ValueError(f"view {name!r}: groups must map each of the {spec.size} strata to an id >= 0")
    workers = default_workers() if workers is None else int(workers)
    if workers < 1:
        raise ParameterOutOfRange(f"workers must be >= 1, got {workers}")
    plan = _block_plan(cfg.reps, block_size or block_size_for(spec.size))
    stream = tuple(int(s) for s in stream)
    args = [(spec, cfg, v, stream, b, s, size, engine) for b, s, size in plan]
    if workers == 1 or len(plan) == 1:
        results = [_run_block(*a) for a in args]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(plan))) as pool:
            results = list(pool.map(_run_block, *zip(*args)))
    truth = true_ate(spec)
    reports = {}
    for name, _ in v:
        rows, values = [], {}
        for tag in cfg.estimators:
            vals = np.concatenate([res[name][0][tag] for res in results])
            deg = sum(res[name][1][tag] for res in results)
            rows.append(summarize(tag, vals, truth, deg))
            values[tag] = vals
        reports[name] = McReport(cfg, truth, tuple(rows), values)
    return reports


def run_monte_carlo(
    spec: DgpSpec,
    cfg: McConfig,
    workers: Optional[int] = None,
    groups: Optional[ArrayLike] = None,
    stream: Sequence[int] = (),
    engine: str = "stats",
) -> McReport:
    """Monte Carlo bias, variance and MSE of each requested estimator."""
    return simulate_views(spec, cfg, {"main": groups}, workers, stream, engine)["main"]


def variance_difference_se(a: McRow, b: McRow) -> float:
    """Normal-theory MC-SE of var(a) - var(b), treating the two as independent."""
    if a.variance_mc_se is None or b.variance_mc_se is None:
        return math.nan
    return math.hypot(a.variance_mc_se, b.variance_mc_se)


def variance_ratio_se(a: NDArray, b: NDArray) -> float:
    """Delta-method MC-SE of var(a) / var(b) for paired replicates."""
    reps = a.size
    if reps < 2:
        return math.nan
    u = (a - a.mean()) ** 2
    w = (b - b.mean()) ** 2
    vb = w.mean()
    r = u.mean() / vb
    return float(np.std(u - r * w, ddof=1) / (vb * math.sqrt(reps)))


# ---------------------------------------------------------------------------
# regime sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FixedM:
    m: int

    def target_size(self, n: int) -> Optional[int]:
        return self.m

    @property
    def lam(self) -> float:
        return 0.0


@dataclass(frozen=True)
class Ratio:
    lam: float

    def target_size(self, n: int) -> Optional[int]:
        if math.isinf(self.lam):
            return None
        return max(1, int(round(self.lam * n)))


Regime = Union[FixedM, Ratio]

_SEMI_OF = {Tag.IPSW_EST: Tag.IPSW_SEMI, Tag.IPSW_EST_PIHAT: Tag.IPSW_SEMI_PIHAT}


@dataclass(frozen=True)
class SweepRow:
    n: int
    m: Optional[int]
    estimator: Tag
    variance: Optional[float]
    scaled_variance: Optional[float]
    scaled_variance_mc_se: Optional[float]
    theory_asymptote: float


def theory_asymptote(spec: DgpSpec, tag: Tag, regime: Regime) -> float:
    """Limit of min(n, m) Var along the regime (n Var when m plays no role)."""
    if tag is Tag.IPSW_ORACLE:
        return v_o(spec)
    if tag is Tag.IPSW_SEMI:
        return v_so(spec)
    if tag is Tag.IPSW_SEMI_PIHAT:
        return v_so_tilde_infty(spec)
    if tag.needs_target:
        return asymptotic_variance(spec, AsymptoticRegime(regime.lam), pihat=tag.estimates_pi)
    return math.nan


def regime_sweep(
    spec: DgpSpec,
    n_grid: Sequence[int],
    regime: Regime,
    reps: int,
    seed: int,
    estimators: Sequence[Tag] = (Tag.IPSW_EST, Tag.IPSW_EST_PIHAT),
    workers: Optional[int] = None,
) -> list[SweepRow]:
    """Empirical min(n, m)-scaled variance along a grid of trial sizes.

    Under ``Ratio(inf)`` the target is infinite: estimated-p_T estimators are
    replaced by their known-p_T counterparts.
    """
    if len(n_grid) == 0:
        raise ParameterOutOfRange("the n grid is empty")
    rows = []
    for i, n in enumerate(n_grid):
        m = regime.target_size(int(n))
        tags = tuple(_SEMI_OF.get(t, t) if m is None else t for t in estimators)
        cfg = McConfig(n=int(n), m=m, reps=reps, seed=seed, estimators=tags)
        rep = run_monte_carlo(spec, cfg, workers=workers, stream=(i,))
        for r in rep.rows:
            scale = min(n, m) if (r.estimator.needs_target and m is not None) else n
            rows.append(SweepRow(
                n=int(n),
                m=m,
                estimator=r.estimator,
                variance=r.variance,
                scaled_variance=None if r.variance is None else scale * r.variance,
                scaled_variance_mc_se=None if r.variance_mc_se is None else scale * r.variance_mc_se,
                theory_asymptote=theory_asymptote(spec, r.estimator, regime),
            ))
    return rows


# ---------------------------------------------------------------------------
# adjustment-set experiments
# ---------------------------------------------------------------------------


def shift_family(q_R: ArrayLike, shifts: Sequence[float], toward: int = 0) -> list[tuple[NDArray, NDArray]]:
    """(q_R, q_T) pairs with q_T = (1 - d) q_R + d e_toward.

    The inflation factor along this family is 1 + d^2 (1 / q_R[toward] - 1),
    increasing in d.
    """
    q = np.asarray(q_R, dtype=float)
    out = []
    for d in shifts:
        if not 0.0 <= d <= 1.0:
            raise ParameterOutOfRange(f"shift parameter must lie in [0, 1], got {d}")
        e = np.zeros_like(q)
        e[toward] = 1.0
        out.append((q, (1.0 - d) * q + d * e))
    return out


@dataclass(frozen=True)
class InflationRow:
    shift_param: float
    q_R: tuple[float, ...]
    q_T: tuple[float, ...]
    theory_factor: float
    empirical_factor: float
    mc_se: float
    variance_with: Optional[float]
    variance_without: Optional[float]


def inflation_experiment(
    base: DgpSpec,
    aux_shift_grid: Sequence[tuple[ArrayLike, ArrayLike]],
    n: int,
    m: Optional[int],
    reps: int,
    seed: int,
    shift_params: Optional[Sequence[float]] = None,
    estimator: Tag = Tag.IPSW_SEMI_PIHAT,
    workers: Optional[int] = None,
    common_draws: bool = True,
) -> list[InflationRow]:
    """Variance ratio from adding a shifted, non-modifying V to the adjustment set.

    Each grid point extends ``base`` with V ~ q_R in the trial and q_T in the
    target, simulates the joint (X, V) law once, and evaluates ``estimator``
    with and without V from the same draws. With ``common_draws`` every grid
    point reuses one random stream, so points sharing q_R see identical trial
    samples and the empirical curve is smooth along the grid.
    """
    if shift_params is None:
        shift_params = list(range(len(aux_shift_grid)))
    if len(shift_params) != len(aux_shift_grid):
        raise ValueError("shift_params must align with the grid")
    rows = []
    for i, ((q_R, q_T), s) in enumerate(zip(aux_shift_grid, shift_params)):
        ext = ExtendedDgpSpec(base, q_R, q_T).check()
        flat = ext.flatten()
        cfg = McConfig(n=n, m=m if estimator.needs_target else None, reps=reps, seed=seed,
                       estimators=(estimator,))
        rep = simulate_views(flat, cfg, {"with": None, "without": ext.coarsen_map()},
                             workers=workers, stream=(0,) if common_draws else (i,))
        a = rep["with"].values[estimator]
        b = rep["without"].values[estimator]
        va, vb = rep["with"].row(estimator).variance, rep["without"].row(estimator).variance
        emp = math.nan if not va or not vb else va / vb
        rows.append(InflationRow(
            shift_param=float(s),
            q_R=tuple(float(v) for v in ext.q_R),
            q_T=tuple(float(v) for v in ext.q_T),
            theory_factor=inflation_factor(ext.q_R, ext.q_T),
            empirical_factor=emp,
            mc_se=variance_ratio_se(a, b),
            variance_with=va,
            variance_without=vb,
        ))
    return rows
