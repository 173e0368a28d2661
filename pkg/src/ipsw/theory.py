"""Closed-form finite-sample and asymptotic properties of the IPSW family.

Conventions
-----------
``Z(x)``  number of trial units in stratum x, Binomial(n, p_R(x)); jointly
          multinomial across strata.
``T``     treated count inside a stratum of size k, Binomial(k, pi(x)).

Every re-weighting estimator here can be written ``sum_x w_x D_x`` where
``D_x`` is a per-stratum estimate (HT with known pi, or DM with estimated pi)
that is 0 when the stratum is empty and ``w`` is either p_T (semi-oracle) or
the target frequencies (estimated). Given the trial, the target frequencies
are multinomial, so

    Var[sum p_hat_T D] = (1 - 1/m) Var[sum p_T D] + (1/m) (sum p_T E[D^2] - (sum p_T E[D])^2)

and ``Var[sum p_T D]`` only needs per-stratum variances and the cross-stratum
covariances induced by the multinomial counts. Those covariances come from
the joint generating function

    E[a^Z(x) b^Z(y)] = (1 - p_R(x)(1 - a) - p_R(y)(1 - b))^n,   x != y.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import gammaln

from ipsw.domain import DgpSpec, ExtendedDgpSpec, true_ate
from ipsw.errors import (
    ParameterOutOfRange,
    SupportViolation,
    TauShiftNotCentered,
    VariantParameterMismatch,
)
from ipsw.estimators import Tag

INF = math.inf
MInf = Union[int, float, None]


def _is_inf(m: MInf) -> bool:
    return m is None or (isinstance(m, float) and math.isinf(m))


def _check_n(n: int, lo: int = 1) -> None:
    if int(n) != n or n < lo:
        raise ParameterOutOfRange(f"sample size must be an integer >= {lo}, got {n!r}")


def _check_p(p: float) -> None:
    if not 0 < p < 1:
        raise ParameterOutOfRange(f"probability must lie in (0, 1), got {p!r}")


# ---------------------------------------------------------------------------
# binomial utilities
# ---------------------------------------------------------------------------


def binomial_log_pmf(n: int, p: float) -> NDArray:
    """log P(B = k), k = 0..n, for B ~ Binomial(n, p), via log-gamma coefficients."""
    k = np.arange(n + 1)
    log_coef = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
    return log_coef + k * math.log(p) + (n - k) * math.log1p(-p)


def e_recip_trunc_binomial(n: int, p: float) -> float:
    """E[1{Z > 0} / Z] for Z ~ Binomial(n, p), summed exactly in log space."""
    _check_n(n)
    _check_p(p)
    k = np.arange(1, n + 1)
    terms = np.exp(binomial_log_pmf(n, p)[1:] - np.log(k))
    return math.fsum(terms)


def recip_trunc_table(n: int, p: float) -> NDArray:
    """E[1{B_k > 0} / B_k] for B_k ~ Binomial(k, p), for every k = 0..n.

    Uses f(k) = q f(k-1) + (1 - q^k) / k, which follows from writing the
    expectation as an integral of the generating function; all terms are
    positive so the recursion is stable.
    """
    q = 1.0 - p
    out = np.empty(n + 1)
    out[0] = 0.0
    qk = 1.0
    for k in range(1, n + 1):
        qk *= q
        out[k] = q * out[k - 1] + (1.0 - qk) / k
    return out


def e_recip_one_plus_binomial(n: int, p: float) -> float:
    """E[1 / (1 + B)] for B ~ Binomial(n, p)."""
    _check_n(n, lo=0)
    _check_p(p)
    return -math.expm1((n + 1) * math.log1p(-p)) / ((n + 1) * p)


def pihat_inverse_bound(n: int, pi: float, alpha: float) -> float:
    """Upper bound on E[1{pi_hat > 0} / pi_hat] with pi_hat = Binomial(n, pi) / n."""
    _check_n(n)
    _check_p(pi)
    if not 0 < alpha < 0.5:
        raise ParameterOutOfRange(f"alpha must lie in (0, 1/2), got {alpha!r}")
    e = 2.0 / (1.0 - 2.0 * alpha)
    c = 1.0 + 2.0 * (16.0 / (pi**2 * (1.0 - 2.0 * alpha))) ** e
    return (1.0 + c * n ** (-alpha)) / pi


def _gen(p: NDArray, a: NDArray, n: int) -> NDArray:
    """E[a^Z] = (1 - p (1 - a))^n for Z ~ Binomial(n, p)."""
    return (1.0 - p * (1.0 - a)) ** n


def _gen2(px: NDArray, a: NDArray, py: NDArray, b: NDArray, n: int) -> NDArray:
    """E[a^Z(x) b^Z(y)] for two distinct cells of one multinomial draw (outer over x, y)."""
    base = 1.0 - np.outer(px * (1.0 - a), np.ones_like(py)) - np.outer(np.ones_like(px), py * (1.0 - b))
    return np.clip(base, 0.0, None) ** n


# ---------------------------------------------------------------------------
# per-stratum variances
# ---------------------------------------------------------------------------


def v_ht_all(spec: DgpSpec) -> NDArray:
    pi = spec.pi
    return (spec.mean1**2 + spec.var1) / pi + (spec.mean0**2 + spec.var0) / (1 - pi) - spec.tau**2


def v_ht_stratum(spec: DgpSpec, x: int) -> float:
    return float(v_ht_all(spec)[x])


def v_dm_infty_all(spec: DgpSpec) -> NDArray:
    return spec.var1 / spec.pi + spec.var0 / (1 - spec.pi)


def v_dm_stratum_infty(spec: DgpSpec, x: int) -> float:
    return float(v_dm_infty_all(spec)[x])


def _dm_small_sample_term(mean1, mean0, pi, k):
    """Variance of E[DM | treated count] inside a stratum of size k >= 1.

    The arm indicators 1{T > 0}, 1{T < k} are never both zero for k >= 1,
    which gives Cov = -(1-pi)^k pi^k and hence the minus sign in the square.
    """
    u = (1 - pi) ** k
    v = pi**k
    return mean1**2 * u + mean0**2 * v - (mean1 * u - mean0 * v) ** 2


def v_dm_stratum_finite(spec: DgpSpec, x: int, k: int) -> float:
    """k * Var[DM on k units drawn from stratum x], exact."""
    _check_n(k)
    pi = float(spec.pi[x])
    inv1 = recip_trunc_table(k, pi)[k]
    inv0 = recip_trunc_table(k, 1 - pi)[k]
    d_k = _dm_small_sample_term(spec.mean1[x], spec.mean0[x], pi, k)
    return float(k * (inv1 * spec.var1[x] + inv0 * spec.var0[x] + d_k))


def v_dm_finite_all(spec: DgpSpec, k: int) -> NDArray:
    return np.array([v_dm_stratum_finite(spec, x, k) for x in range(spec.size)])


# ---------------------------------------------------------------------------
# asymptotic constants
# ---------------------------------------------------------------------------


def _target_var_tau(spec: DgpSpec) -> float:
    tau = spec.tau
    mean = np.dot(spec.p_T, tau)
    return float(np.dot(spec.p_T, (tau - mean) ** 2))


def v_o(spec: DgpSpec) -> float:
    w = spec.weights
    wt = w * spec.tau
    var_wt = np.dot(spec.p_R, (wt - np.dot(spec.p_R, wt)) ** 2)
    return float(var_wt + np.dot(spec.p_R, w**2 * v_ht_all(spec)))


def v_so(spec: DgpSpec) -> float:
    return float(np.sum(spec.p_T**2 / spec.p_R * v_ht_all(spec)))


def v_so_tilde_infty(spec: DgpSpec) -> float:
    return float(np.sum(spec.p_T**2 / spec.p_R * v_dm_infty_all(spec)))


def v_so_tilde(spec: DgpSpec, n: int) -> float:
    """Finite-n analogue of v_so_tilde_infty with V_DM,n in place of V_DM,inf."""
    return float(np.sum(spec.p_T**2 / spec.p_R * v_dm_finite_all(spec, n)))


# ---------------------------------------------------------------------------
# bias
# ---------------------------------------------------------------------------


def bias_semi_oracle(spec: DgpSpec, n: int) -> float:
    _check_n(n)
    return float(-np.sum(spec.p_T * (1 - spec.p_R) ** n * spec.tau))


bias_estimated = bias_semi_oracle


def bias_pihat(spec: DgpSpec, n: int) -> float:
    _check_n(n)
    p_R, p_T, pi = spec.p_R, spec.p_T, spec.pi
    return float(
        np.sum(p_T * spec.mean0 * (1 - p_R * (1 - pi)) ** n)
        - np.sum(p_T * spec.mean1 * (1 - p_R * pi) ** n)
    )


def bias_pihat_half(spec: DgpSpec, n: int) -> float:
    """Simplified bias when pi = 1/2 and the control mean is zero in every stratum."""
    _check_n(n)
    return float(-np.sum(spec.p_T * spec.tau * (1 - spec.p_R / 2) ** n))


# ---------------------------------------------------------------------------
# exact variances
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _StratumMoments:
    mean: NDArray  # E[D_x]
    second: NDArray  # E[D_x^2]
    cov: NDArray  # Cov(D_x, D_y); diagonal = Var(D_x)


def _combine(mo: _StratumMoments, p_T: NDArray, m: MInf) -> float:
    var_semi = float(p_T @ mo.cov @ p_T)
    if _is_inf(m):
        return var_semi
    m = float(m)
    spread = float(np.dot(p_T, mo.second) - np.dot(p_T, mo.mean) ** 2)
    return (1 - 1 / m) * var_semi + spread / m


def _ht_moments(spec: DgpSpec, n: int) -> _StratumMoments:
    p, tau = spec.p_R, spec.tau
    empty = (1 - p) ** n
    filled = 1.0 - empty
    sub = p < 0.5
    filled[sub] = -np.expm1(n * np.log1p(-p[sub]))
    inv = np.array([e_recip_trunc_binomial(n, float(px)) if px < 1 else 1.0 / n for px in p])
    var_within = v_ht_all(spec) * inv
    # Cov(1{Z(x)=0}, 1{Z(y)=0})
    both_empty = np.clip(1 - p[:, None] - p[None, :], 0, None) ** n
    cov_empty = both_empty - np.outer(empty, empty)
    np.fill_diagonal(cov_empty, empty * filled)
    cov = np.outer(tau, tau) * cov_empty
    cov[np.diag_indices_from(cov)] += var_within
    mean = tau * filled
    second = var_within + tau**2 * filled
    return _StratumMoments(mean, second, cov)


def _dm_moments(spec: DgpSpec, n: int) -> _StratumMoments:
    p, pi, m1, m0, tau = spec.p_R, spec.pi, spec.mean1, spec.mean0, spec.tau
    u, v = 1 - pi, pi  # C(z) = m1 u^z - m0 v^z, and E[D | Z = z] = tau - C(z)
    k_all = np.arange(n + 1)
    within = np.empty(spec.size)
    for x in range(spec.size):
        pmf = np.exp(binomial_log_pmf(n, float(p[x]))) if p[x] < 1 else np.eye(n + 1)[n]
        inv1 = recip_trunc_table(n, float(pi[x]))
        inv0 = recip_trunc_table(n, float(1 - pi[x]))
        d_k = _dm_small_sample_term(m1[x], m0[x], pi[x], k_all)
        cond_var = spec.var1[x] * inv1 + spec.var0[x] * inv0 + d_k
        cond_var[0] = 0.0
        within[x] = math.fsum(pmf * cond_var)

    e_c = m1 * _gen(p, u, n) - m0 * _gen(p, v, n)
    e_c2 = m1**2 * _gen(p, u * u, n) - 2 * m1 * m0 * _gen(p, u * v, n) + m0**2 * _gen(p, v * v, n)
    var_c = e_c2 - e_c**2
    e_cc = (
        np.outer(m1, m1) * _gen2(p, u, p, u, n)
        - np.outer(m1, m0) * _gen2(p, u, p, v, n)
        - np.outer(m0, m1) * _gen2(p, v, p, u, n)
        + np.outer(m0, m0) * _gen2(p, v, p, v, n)
    )
    cov = e_cc - np.outer(e_c, e_c)
    np.fill_diagonal(cov, within + var_c)
    mean = tau - e_c
    second = within + var_c + mean**2
    return _StratumMoments(mean, second, cov)


def var_semi_oracle_exact(spec: DgpSpec, n: int) -> float:
    _check_n(n)
    return _combine(_ht_moments(spec, n), spec.p_T, None)


def var_estimated_exact(spec: DgpSpec, n: int, m: MInf) -> float:
    """Exact variance of the estimated IPSW; ``m`` infinite gives the semi-oracle."""
    _check_n(n)
    if not _is_inf(m):
        _check_n(m)
    return _combine(_ht_moments(spec, n), spec.p_T, m)


def var_pihat_exact(spec: DgpSpec, n: int, m: MInf) -> float:
    """Exact variance of the IPSW with per-stratum estimated pi.

    ``m`` infinite gives the semi-oracle variant (p_T known).
    """
    _check_n(n)
    if not _is_inf(m):
        _check_n(m)
    return _combine(_dm_moments(spec, n), spec.p_T, m)


def var_oracle_exact(spec: DgpSpec, n: int) -> float:
    _check_n(n)
    return v_o(spec) / n


def var_semi_oracle_termwise(spec: DgpSpec, n: int) -> float:
    """Semi-oracle variance assembled term by term from the published display.

    n Var = sum_x p_T^2 V_HT E[1{Z>0} / p_hat_R] + n Var[E_T[tau 1{Z=0} | X_n]]
    """
    _check_n(n)
    p, tau, p_T = spec.p_R, spec.tau, spec.p_T
    inv = np.array([n * e_recip_trunc_binomial(n, float(px)) if px < 1 else 1.0 for px in p])
    term1 = float(np.sum(p_T**2 * v_ht_all(spec) * inv))
    empty = (1 - p) ** n
    joint = np.clip(1 - p[:, None] - p[None, :], 0, None) ** n
    np.fill_diagonal(joint, empty)
    a = p_T * tau
    term2 = float(a @ (joint - np.outer(empty, empty)) @ a)
    return term1 / n + term2


# ---------------------------------------------------------------------------
# asymptotics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AsymptoticRegime:
    """lambda = lim m / n; ``math.inf`` and 0.0 are the two limiting regimes."""

    lam: float

    def __post_init__(self):
        if not (self.lam >= 0):
            raise ParameterOutOfRange(f"lambda must be >= 0, got {self.lam!r}")

    @classmethod
    def parse(cls, token: Union[str, float]) -> "AsymptoticRegime":
        if isinstance(token, str) and token.strip().lower() in ("inf", "infinity", "∞"):
            return cls(INF)
        return cls(float(token))

    @property
    def is_inf(self) -> bool:
        return math.isinf(self.lam)


def asymptotic_variance(spec: DgpSpec, regime: AsymptoticRegime, pihat: bool = False) -> float:
    """lim min(n, m) Var of the estimated IPSW for m / n -> lambda."""
    v = v_so_tilde_infty(spec) if pihat else v_so(spec)
    var_tau = _target_var_tau(spec)
    lam = regime.lam
    if math.isinf(lam):
        return v
    if lam == 0:
        return var_tau
    return min(1.0, lam) * (var_tau / lam + v)


# ---------------------------------------------------------------------------
# variance and risk bounds
# ---------------------------------------------------------------------------


def _e_t_tau2(spec: DgpSpec) -> float:
    return float(np.dot(spec.p_T, spec.tau**2))


def _e_t_second_moments(spec: DgpSpec) -> float:
    return float(np.dot(spec.p_T, spec.mean1**2 + spec.var1 + spec.mean0**2 + spec.var0))


def _cross_term(spec: DgpSpec, v: NDArray) -> float:
    """E_R[p_T (1 - p_T) / p_R^2 V(X)]."""
    return float(np.sum(spec.p_T * (1 - spec.p_T) / spec.p_R * v))


def variance_bound(spec: DgpSpec, tag: Tag, n: int, m: MInf = None) -> float:
    _check_n(n)
    min_pr = float(spec.p_R.min())
    if tag is Tag.IPSW_ORACLE:
        return v_o(spec) / n
    if tag is Tag.IPSW_SEMI:
        return 2 * v_so(spec) / (n + 1) + (1 - min_pr) ** n * _e_t_tau2(spec)
    if tag is Tag.IPSW_EST:
        _require_m(tag, m)
        return (
            2 * v_so(spec) / (n + 1)
            + _target_var_tau(spec) / m
            + 2 / (m * (n + 1)) * _cross_term(spec, v_ht_all(spec))
            + (1 - min_pr) ** (n / 2) * _e_t_tau2(spec) * (1 + 4 / m)
        )
    if tag in (Tag.IPSW_EST_PIHAT, Tag.IPSW_SEMI_PIHAT):
        v_dm_n = v_dm_finite_all(spec, n)
        pt = np.maximum(spec.pi, 1 - spec.pi)
        decay = (1 - float(np.min((1 - pt**2) * spec.p_R))) ** (n / 2)
        base = 2 * float(np.sum(spec.p_T**2 / spec.p_R * v_dm_n)) / (n + 1)
        if tag is Tag.IPSW_SEMI_PIHAT:
            return base + 2 * decay * _e_t_second_moments(spec)
        _require_m(tag, m)
        return (
            base
            + _target_var_tau(spec) / m
            + 2 / ((n + 1) * m) * _cross_term(spec, v_dm_n)
            + 2 * (1 + 3 / m) * decay * _e_t_second_moments(spec)
        )
    raise VariantParameterMismatch(f"no variance bound for {tag.value}")


def _require_m(tag: Tag, m: MInf) -> None:
    if _is_inf(m):
        raise VariantParameterMismatch(f"{tag.value} needs a finite target size m")
    _check_n(m)


def risk_bounds(spec: DgpSpec, n: int, m: MInf, variant: Tag) -> float:
    """Upper bound on the quadratic risk (exact risk for the oracle)."""
    _check_n(n)
    min_pr = float(spec.p_R.min())
    if variant is Tag.IPSW_ORACLE:
        return v_o(spec) / n
    if variant is Tag.IPSW_SEMI:
        return 2 * v_so(spec) / (n + 1) + 2 * (1 - min_pr) ** n * _e_t_tau2(spec)
    if variant is Tag.IPSW_EST:
        _require_m(variant, m)
        return (
            2 * v_so(spec) / (n + 1)
            + _target_var_tau(spec) / m
            + 2 / (m * (n + 1)) * _cross_term(spec, v_ht_all(spec))
            + 2 * (1 - min_pr) ** n * _e_t_tau2(spec) * (1 + 2 / m)
        )
    if variant in (Tag.IPSW_EST_PIHAT, Tag.IPSW_SEMI_PIHAT):
        v_dm_n = v_dm_finite_all(spec, n)
        pt = np.maximum(spec.pi, 1 - spec.pi)
        decay = (1 - float(np.min((1 - pt) * spec.p_R))) ** (n / 2)
        base = 2 * float(np.sum(spec.p_T**2 / spec.p_R * v_dm_n)) / (n + 1)
        if variant is Tag.IPSW_SEMI_PIHAT:
            return base + 2 * 2 * decay * _e_t_second_moments(spec)
        _require_m(variant, m)
        return (
            base
            + _target_var_tau(spec) / m
            + 2 / (m * (n + 1)) * _cross_term(spec, v_dm_n)
            + 2 * (2 + 3 / m) * decay * _e_t_second_moments(spec)
        )
    raise VariantParameterMismatch(f"no risk bound for {variant.value}")


# ---------------------------------------------------------------------------
# exact bias / variance dispatch
# ---------------------------------------------------------------------------


def exact_bias(spec: DgpSpec, tag: Tag, n: int) -> float:
    if tag is Tag.IPSW_ORACLE:
        return 0.0
    if tag in (Tag.IPSW_SEMI, Tag.IPSW_EST):
        return bias_semi_oracle(spec, n)
    if tag in (Tag.IPSW_SEMI_PIHAT, Tag.IPSW_EST_PIHAT):
        return bias_pihat(spec, n)
    raise VariantParameterMismatch(f"no exact bias for {tag.value}")


def exact_variance(spec: DgpSpec, tag: Tag, n: int, m: MInf = None) -> float:
    if tag is Tag.IPSW_ORACLE:
        return var_oracle_exact(spec, n)
    if tag is Tag.IPSW_SEMI:
        return var_semi_oracle_exact(spec, n)
    if tag is Tag.IPSW_SEMI_PIHAT:
        return var_pihat_exact(spec, n, None)
    _require_m(tag, m)
    if tag is Tag.IPSW_EST:
        return var_estimated_exact(spec, n, m)
    if tag is Tag.IPSW_EST_PIHAT:
        return var_pihat_exact(spec, n, m)
    raise VariantParameterMismatch(f"no exact variance for {tag.value}")


@dataclass(frozen=True)
class TheoryReport:
    estimator_tag: str
    n: int
    m: Union[int, str]
    bias: float
    variance_exact: Optional[float]
    variance_bound: float
    risk_bound: float
    asymptotic_variance: float
    regime_lambda: Union[float, str]
    true_ate: float

    def to_json(self) -> dict:
        return {k: _json_number(v) for k, v in asdict(self).items()}


def _json_number(v):
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    return v


def theory_report(
    spec: DgpSpec,
    tag: Tag,
    n: int,
    m: MInf = None,
    regime: Optional[AsymptoticRegime] = None,
    exact: bool = True,
) -> TheoryReport:
    """Bias, exact variance, bounds and asymptotic variance for one estimator.

    Semi-oracle tags take ``m`` as infinite; estimated tags require finite m.
    The asymptotic regime defaults to lambda = m / n.
    """
    if tag.needs_target:
        _require_m(tag, m)
    elif not _is_inf(m) and tag is not Tag.IPSW_ORACLE:
        raise VariantParameterMismatch(f"{tag.value} uses a known p_T; pass m = inf")
    m_eff = None if _is_inf(m) or tag is Tag.IPSW_ORACLE else int(m)
    if regime is None:
        regime = AsymptoticRegime(INF if m_eff is None else m_eff / n)
    if tag is Tag.IPSW_ORACLE:
        asym = v_o(spec)
    else:
        asym = asymptotic_variance(spec, regime, pihat=tag.estimates_pi)
    return TheoryReport(
        estimator_tag=tag.value,
        n=int(n),
        m="inf" if m_eff is None else m_eff,
        bias=exact_bias(spec, tag, n),
        variance_exact=exact_variance(spec, tag, n, m_eff) if exact else None,
        variance_bound=variance_bound(spec, tag, n, m_eff),
        risk_bound=risk_bounds(spec, n, m_eff, tag),
        asymptotic_variance=asym,
        regime_lambda=regime.lam,
        true_ate=true_ate(spec),
    )


# ---------------------------------------------------------------------------
# adjustment-set analysis
# ---------------------------------------------------------------------------


def inflation_factor(q_R: ArrayLike, q_T: ArrayLike) -> float:
    """Multiplier on the asymptotic variance from adjusting on an extra shifted covariate."""
    q_R = np.asarray(q_R, float)
    q_T = np.asarray(q_T, float)
    if np.any((q_T > 0) & (q_R <= 0)):
        raise SupportViolation("q_T > 0 where q_R = 0")
    keep = q_R > 0
    return float(np.sum(q_T[keep] ** 2 / q_R[keep]))


@dataclass(frozen=True)
class AdjustmentSetReport:
    inflation_factor: float
    variance_reduction: float
    base_asymptotic_variance: float
    extended_asymptotic_variance: float

    def to_json(self) -> dict:
        return asdict(self)


def effect_modifier_reduction(ext: ExtendedDgpSpec) -> AdjustmentSetReport:
    """Asymptotic variance gain from adding a non-shifted effect modifier V.

    The reduction is E_R[(p_T / p_R)^2 Var[tau(X, V) | X]]. Base and extended
    variances are the semi-oracle pi-hat constants of the X-only law and the
    flattened (X, V) law respectively.
    """
    ext.require_non_shifted()
    if np.max(np.abs(ext.tau_shift @ ext.q_T)) > 1e-12:
        raise TauShiftNotCentered("tau_shift must average to zero over V for every x")
    b = ext.base
    spread = (ext.tau_shift**2) @ ext.q_T
    reduction = float(np.sum(b.p_T**2 / b.p_R * spread))
    return AdjustmentSetReport(
        inflation_factor=inflation_factor(ext.q_R, ext.q_T),
        variance_reduction=reduction,
        base_asymptotic_variance=v_so_tilde_infty(ext.collapse()),
        extended_asymptotic_variance=v_so_tilde_infty(ext.flatten()),
    )


def shifted_covariate_report(ext: ExtendedDgpSpec) -> AdjustmentSetReport:
    """Asymptotic variance inflation from adding a shifted non-modifier V."""
    if ext.is_modifier:
        raise TauShiftNotCentered("V must not modify the treatment effect here")
    base = v_so_tilde_infty(ext.base)
    return AdjustmentSetReport(
        inflation_factor=inflation_factor(ext.q_R, ext.q_T),
        variance_reduction=0.0,
        base_asymptotic_variance=base,
        extended_asymptotic_variance=v_so_tilde_infty(ext.flatten()),
    )
