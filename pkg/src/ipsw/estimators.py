"""ATE estimators as pure functions of trial (and target) samples.

Every sum over an empty stratum or an empty treatment arm uses the 0/0 = 0
convention. Only :func:`ipsw_oracle` reads the data-generating process.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ipsw.domain import DgpSpec, TargetSample, TrialSample, check_ids
from ipsw.errors import PiOutOfRange, SupportViolation


class Tag(str, enum.Enum):
    HT = "HT"
    DM = "DM"
    PS = "PS"
    IPSW_ORACLE = "IPSW_ORACLE"
    IPSW_SEMI = "IPSW_SEMI"
    IPSW_EST = "IPSW_EST"
    IPSW_SEMI_PIHAT = "IPSW_SEMI_PIHAT"
    IPSW_EST_PIHAT = "IPSW_EST_PIHAT"

    @property
    def cli_name(self) -> str:
        return CLI_NAMES[self]

    @property
    def needs_target(self) -> bool:
        return self in (Tag.IPSW_EST, Tag.IPSW_EST_PIHAT)

    @property
    def estimates_pi(self) -> bool:
        return self in (Tag.DM, Tag.PS, Tag.IPSW_SEMI_PIHAT, Tag.IPSW_EST_PIHAT)


CLI_NAMES = {
    Tag.HT: "ht",
    Tag.DM: "dm",
    Tag.PS: "ps",
    Tag.IPSW_ORACLE: "ipsw_oracle",
    Tag.IPSW_SEMI: "semi_oracle",
    Tag.IPSW_EST: "ipsw_est",
    Tag.IPSW_SEMI_PIHAT: "semi_oracle_pihat",
    Tag.IPSW_EST_PIHAT: "ipsw_est_pihat",
}


def parse_tag(name: str) -> Tag:
    key = name.strip()
    for tag, cli in CLI_NAMES.items():
        if key.lower() == cli or key.upper() == tag.value:
            return tag
    raise ValueError(f"unknown estimator {name!r}; valid: {', '.join(CLI_NAMES.values())}")


@dataclass(frozen=True)
class Estimate:
    value: float
    estimator_tag: Tag
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class EmpiricalFrequencies:
    counts: NDArray
    total: int
    probs: NDArray


@dataclass(frozen=True)
class StratumTreatmentFreq:
    treated_counts: NDArray
    stratum_counts: NDArray
    pi_hat: NDArray  # NaN where the stratum is empty


def empirical_frequencies(x: ArrayLike, support_size: int) -> EmpiricalFrequencies:
    x = np.asarray(x, dtype=np.int64)
    if x.size == 0:
        raise ValueError("empty sample")
    check_ids(x, support_size)
    counts = np.bincount(x, minlength=support_size)
    return EmpiricalFrequencies(counts, int(x.size), counts / x.size)


def stratum_treatment_freq(sample: TrialSample, support_size: int) -> StratumTreatmentFreq:
    check_ids(sample.x, support_size)
    n_x = np.bincount(sample.x, minlength=support_size)
    n_x1 = np.bincount(sample.x, weights=sample.a, minlength=support_size).astype(np.int64)
    with np.errstate(invalid="ignore", divide="ignore"):
        pi_hat = np.where(n_x > 0, n_x1 / np.maximum(n_x, 1), np.nan)
    return StratumTreatmentFreq(n_x1, n_x, pi_hat)


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _support_size(*arrays: NDArray, hint: Optional[int] = None) -> int:
    k = max(int(a.max()) + 1 for a in arrays)
    if hint is not None:
        if k > hint:
            raise SupportViolation(f"stratum id {k - 1} outside 0..{hint - 1}")
        return hint
    return k


def _pi_vector(pi: ArrayLike, k: int) -> NDArray:
    p = np.asarray(pi, dtype=float)
    p = np.full(k, float(p)) if p.ndim == 0 else p
    if p.shape[0] < k:
        raise SupportViolation(f"pi given for {p.shape[0]} strata, sample uses {k}")
    if np.any((p <= 0) | (p >= 1)):
        raise PiOutOfRange("propensity must lie strictly in (0, 1)")
    return p


def _ratio(num: NDArray, den: NDArray) -> NDArray:
    """Elementwise num / den with 0/0 -> 0."""
    out = np.zeros(np.broadcast(num, den).shape)
    np.divide(num, den, out=out, where=den != 0)
    return out


def _diagnostics(sample: TrialSample, k: int, relevant: Optional[NDArray] = None) -> dict:
    n_x = np.bincount(sample.x, minlength=k)
    n_x1 = np.bincount(sample.x, weights=sample.a, minlength=k)
    relevant = np.ones(k, bool) if relevant is None else relevant
    empty = int(np.sum((n_x == 0) & relevant))
    zero_arm = int(np.sum((n_x > 0) & ((n_x1 == 0) | (n_x1 == n_x)) & relevant))
    return {"empty_strata": empty, "zero_arm_strata": zero_arm}


def _ht_terms(sample: TrialSample, pi_i: NDArray) -> NDArray:
    a, y = sample.a, sample.y
    return a * y / pi_i - (1 - a) * y / (1 - pi_i)


def _pihat_terms(sample: TrialSample, k: int) -> NDArray:
    """Per-unit A Y / pi_hat(X) - (1 - A) Y / (1 - pi_hat(X)) with 0/0 = 0."""
    f = stratum_treatment_freq(sample, k)
    n_x1 = f.treated_counts[sample.x].astype(float)
    n_x0 = (f.stratum_counts - f.treated_counts)[sample.x].astype(float)
    n_x = f.stratum_counts[sample.x].astype(float)
    a, y = sample.a, sample.y
    # A/pi_hat = A n_x / n_x1 ; only evaluated where the arm is non-empty
    return _ratio(a * y * n_x, n_x1) - _ratio((1 - a) * y * n_x, n_x0)


# ---------------------------------------------------------------------------
# within-trial estimators
# ---------------------------------------------------------------------------


def horvitz_thompson(sample: TrialSample, pi: ArrayLike) -> Estimate:
    p = np.asarray(pi, dtype=float)
    if p.ndim == 0:
        k = _support_size(sample.x)
    else:
        k = p.shape[0]
        check_ids(sample.x, k)
    pv = _pi_vector(pi, k)
    value = float(np.mean(_ht_terms(sample, pv[sample.x])))
    return Estimate(value, Tag.HT, _diagnostics(sample, k))


def difference_in_means(sample: TrialSample) -> Estimate:
    a, y = sample.a, sample.y
    n1 = a.sum()
    n0 = sample.n - n1
    value = float(_ratio(np.sum(a * y), n1) - _ratio(np.sum((1 - a) * y), n0))
    diag = {"empty_strata": 0, "zero_arm_strata": int(n1 == 0 or n0 == 0)}
    return Estimate(value, Tag.DM, diag)


def post_stratification(sample: TrialSample, support_size: Optional[int] = None) -> Estimate:
    k = _support_size(sample.x, hint=support_size)
    value = float(np.mean(_pihat_terms(sample, k)))
    return Estimate(value, Tag.PS, _diagnostics(sample, k))


# ---------------------------------------------------------------------------
# re-weighting estimators
# ---------------------------------------------------------------------------


def ipsw_oracle(sample: TrialSample, spec: DgpSpec) -> Estimate:
    check_ids(sample.x, spec.size)
    if np.any(spec.p_R[sample.x] <= 0):
        raise SupportViolation("sampled stratum has p_R = 0")
    w = spec.weights[sample.x]
    value = float(np.mean(w * _ht_terms(sample, spec.pi[sample.x])))
    return Estimate(value, Tag.IPSW_ORACLE, _diagnostics(sample, spec.size, spec.p_T > 0))


def _semi_weights(sample: TrialSample, p_T: NDArray) -> NDArray:
    """p_T(X_i) / p_hat_R(X_i) per unit."""
    p_hat_R = empirical_frequencies(sample.x, len(p_T)).probs
    return p_T[sample.x] / p_hat_R[sample.x]


def ipsw_semi_oracle(sample: TrialSample, p_T: ArrayLike, pi: ArrayLike) -> Estimate:
    p_T = np.asarray(p_T, dtype=float)
    k = len(p_T)
    check_ids(sample.x, k)
    pv = _pi_vector(pi, k)
    value = float(np.mean(_semi_weights(sample, p_T) * _ht_terms(sample, pv[sample.x])))
    return Estimate(value, Tag.IPSW_SEMI, _diagnostics(sample, k, p_T > 0))


def ipsw_estimated(trial: TrialSample, target: TargetSample, pi: ArrayLike) -> Estimate:
    p = np.asarray(pi, dtype=float)
    hint = None if p.ndim == 0 else p.shape[0]
    k = _support_size(trial.x, target.x, hint=hint)
    p_hat_T = empirical_frequencies(target.x, k).probs
    pv = _pi_vector(pi, k)
    value = float(np.mean(_semi_weights(trial, p_hat_T) * _ht_terms(trial, pv[trial.x])))
    return Estimate(value, Tag.IPSW_EST, _diagnostics(trial, k, p_hat_T > 0))


def ipsw_semi_oracle_pihat(sample: TrialSample, p_T: ArrayLike) -> Estimate:
    p_T = np.asarray(p_T, dtype=float)
    k = len(p_T)
    check_ids(sample.x, k)
    value = float(np.mean(_semi_weights(sample, p_T) * _pihat_terms(sample, k)))
    return Estimate(value, Tag.IPSW_SEMI_PIHAT, _diagnostics(sample, k, p_T > 0))


def ipsw_estimated_pihat(
    trial: TrialSample, target: TargetSample, support_size: Optional[int] = None
) -> Estimate:
    k = _support_size(trial.x, target.x, hint=support_size)
    p_hat_T = empirical_frequencies(target.x, k).probs
    value = float(np.mean(_semi_weights(trial, p_hat_T) * _pihat_terms(trial, k)))
    return Estimate(value, Tag.IPSW_EST_PIHAT, _diagnostics(trial, k, p_hat_T > 0))


# ---------------------------------------------------------------------------
# stratum-aggregated rewritings
# ---------------------------------------------------------------------------


def stratum_ht(sample: TrialSample, pi: ArrayLike, support_size: int) -> NDArray:
    """Horvitz-Thompson estimate inside each stratum (0 for empty strata)."""
    pv = _pi_vector(pi, support_size)
    terms = _ht_terms(sample, pv[sample.x])
    sums = np.bincount(sample.x, weights=terms, minlength=support_size)
    return _ratio(sums, np.bincount(sample.x, minlength=support_size))


def stratum_dm(sample: TrialSample, support_size: int) -> NDArray:
    """Difference-in-means inside each stratum (0/0 = 0 for empty arms)."""
    k = support_size
    x, a, y = sample.x, sample.a, sample.y
    n1 = np.bincount(x, weights=a, minlength=k)
    n0 = np.bincount(x, weights=1 - a, minlength=k)
    s1 = np.bincount(x, weights=a * y, minlength=k)
    s0 = np.bincount(x, weights=(1 - a) * y, minlength=k)
    return _ratio(s1, n1) - _ratio(s0, n0)


def reweighted(per_stratum: NDArray, weights: ArrayLike) -> float:
    """sum_x weight_x * estimate_x."""
    return float(np.dot(np.asarray(weights, float), per_stratum))


ESTIMATOR_FUNCS = {
    Tag.HT: horvitz_thompson,
    Tag.DM: difference_in_means,
    Tag.PS: post_stratification,
    Tag.IPSW_ORACLE: ipsw_oracle,
    Tag.IPSW_SEMI: ipsw_semi_oracle,
    Tag.IPSW_EST: ipsw_estimated,
    Tag.IPSW_SEMI_PIHAT: ipsw_semi_oracle_pihat,
    Tag.IPSW_EST_PIHAT: ipsw_estimated_pihat,
}


def evaluate(tag: Tag, spec: DgpSpec, trial: TrialSample, target: Optional[TargetSample]) -> Estimate:
    """Run estimator ``tag`` with whatever oracle quantities its definition allows."""
    if tag is Tag.HT:
        return horvitz_thompson(trial, spec.pi)
    if tag is Tag.DM:
        return difference_in_means(trial)
    if tag is Tag.PS:
        return post_stratification(trial, spec.size)
    if tag is Tag.IPSW_ORACLE:
        return ipsw_oracle(trial, spec)
    if tag is Tag.IPSW_SEMI:
        return ipsw_semi_oracle(trial, spec.p_T, spec.pi)
    if tag is Tag.IPSW_SEMI_PIHAT:
        return ipsw_semi_oracle_pihat(trial, spec.p_T)
    if target is None:
        raise ValueError(f"{tag.value} needs a target sample")
    if tag is Tag.IPSW_EST:
        return ipsw_estimated(trial, target, spec.pi)
    return ipsw_estimated_pihat(trial, target, spec.size)
