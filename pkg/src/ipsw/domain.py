"""Categorical covariate universe, data-generating process and sampled datasets.

Everything here is a flat categorical support indexed ``0..K-1``. Multi-covariate
setups are flattened into that index by :mod:`ipsw.scenarios`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ipsw.errors import (
    InvalidStratumId,
    IpswError,
    NegativeVariance,
    NotNonShifted,
    PiOutOfRange,
    ProbabilityNotNormalized,
    SupportViolation,
    TauShiftNotCentered,
    ValidationError,
)

NORMALIZATION_TOL = 1e-12


def _frozen(a: ArrayLike, dtype=float) -> NDArray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Stratum:
    id: int
    label: str = ""


@dataclass(frozen=True)
class StratumOutcomeModel:
    mean0: float
    mean1: float
    var0: float = 1.0
    var1: float = 1.0
    noise_family: str = "gaussian"

    @property
    def tau(self) -> float:
        return self.mean1 - self.mean0


@dataclass(frozen=True, eq=False)
class DgpSpec:
    """Full data-generating process over a categorical support.

    Per-stratum arrays: trial and target covariate probabilities, treatment
    probability and the first two moments of both potential outcomes. Strata
    absent from both populations are dropped at construction.
    """

    p_R: NDArray
    p_T: NDArray
    pi: NDArray
    mean0: NDArray
    mean1: NDArray
    var0: NDArray
    var1: NDArray
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        p_R = np.atleast_1d(np.asarray(self.p_R, dtype=float))
        k = p_R.shape[0]

        def vec(v):
            a = np.asarray(v, dtype=float)
            return np.full(k, float(a)) if a.ndim == 0 else a.astype(float)

        arrays = {
            "p_R": p_R,
            "p_T": vec(self.p_T),
            "pi": vec(self.pi),
            "mean0": vec(self.mean0),
            "mean1": vec(self.mean1),
            "var0": vec(self.var0),
            "var1": vec(self.var1),
        }
        for name, a in arrays.items():
            if a.shape != (k,):
                raise ValueError(f"{name} has shape {a.shape}, expected ({k},)")
        labels = tuple(self.labels) if self.labels else tuple(str(i) for i in range(k))
        if len(labels) != k:
            raise ValueError(f"got {len(labels)} labels for {k} strata")

        keep = (arrays["p_R"] != 0) | (arrays["p_T"] != 0)
        for name, a in arrays.items():
            object.__setattr__(self, name, _frozen(a[keep]))
        object.__setattr__(self, "labels", tuple(l for l, kp in zip(labels, keep) if kp))

    # -- construction helpers -------------------------------------------------

    @classmethod
    def from_strata(
        cls,
        strata: Sequence[Stratum],
        p_R: ArrayLike,
        p_T: ArrayLike,
        pi: ArrayLike,
        outcomes: Sequence[StratumOutcomeModel],
    ) -> "DgpSpec":
        return cls(
            p_R=p_R,
            p_T=p_T,
            pi=pi,
            mean0=[o.mean0 for o in outcomes],
            mean1=[o.mean1 for o in outcomes],
            var0=[o.var0 for o in outcomes],
            var1=[o.var1 for o in outcomes],
            labels=tuple(s.label or str(s.id) for s in strata),
        )

    def replace(self, **changes) -> "DgpSpec":
        fields = {
            "p_R": self.p_R,
            "p_T": self.p_T,
            "pi": self.pi,
            "mean0": self.mean0,
            "mean1": self.mean1,
            "var0": self.var0,
            "var1": self.var1,
            "labels": self.labels,
        }
        fields.update(changes)
        return DgpSpec(**fields)

    # -- views ----------------------------------------------------------------

    @property
    def size(self) -> int:
        return int(self.p_R.shape[0])

    @property
    def strata(self) -> list[Stratum]:
        return [Stratum(i, l) for i, l in enumerate(self.labels)]

    @property
    def outcomes(self) -> list[StratumOutcomeModel]:
        return [
            StratumOutcomeModel(*map(float, v))
            for v in zip(self.mean0, self.mean1, self.var0, self.var1)
        ]

    @property
    def tau(self) -> NDArray:
        """Conditional average treatment effect per stratum."""
        return self.mean1 - self.mean0

    @property
    def weights(self) -> NDArray:
        """p_T / p_R per stratum."""
        return self.p_T / self.p_R

    def check(self) -> "DgpSpec":
        violations = validate_dgp(self)
        if violations:
            raise ValidationError(violations)
        return self

    def __eq__(self, other):
        if not isinstance(other, DgpSpec):
            return NotImplemented
        names = ("p_R", "p_T", "pi", "mean0", "mean1", "var0", "var1")
        return self.labels == other.labels and all(
            np.array_equal(getattr(self, n), getattr(other, n)) for n in names
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class TrialSample:
    x: NDArray
    a: NDArray
    y: NDArray

    def __post_init__(self):
        x = np.asarray(self.x)
        if x.size and not np.issubdtype(x.dtype, np.integer):
            if not np.all(np.equal(np.mod(x, 1), 0)):
                raise InvalidStratumId("stratum ids must be integers")
        x = _frozen(x, dtype=np.int64)
        a = _frozen(self.a, dtype=np.int64)
        y = _frozen(self.y, dtype=float)
        if not (x.ndim == a.ndim == y.ndim == 1) or not (len(x) == len(a) == len(y)):
            raise ValueError("x, a and y must be 1-d vectors of equal length")
        if len(x) < 1:
            raise ValueError("a trial sample needs at least one unit")
        if np.any((a != 0) & (a != 1)):
            raise ValueError("treatment indicators must be 0 or 1")
        if np.any(x < 0):
            raise InvalidStratumId(f"negative stratum id {int(x.min())}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return len(self.x)


@dataclass(frozen=True, eq=False)
class TargetSample:
    x: NDArray

    def __post_init__(self):
        x = _frozen(self.x, dtype=np.int64)
        if x.ndim != 1 or len(x) < 1:
            raise ValueError("a target sample needs at least one unit")
        if np.any(x < 0):
            raise InvalidStratumId(f"negative stratum id {int(x.min())}")
        object.__setattr__(self, "x", x)

    @property
    def m(self) -> int:
        return len(self.x)


def check_ids(x: NDArray, support_size: int) -> None:
    if x.size and (x.min() < 0 or x.max() >= support_size):
        bad = x[(x < 0) | (x >= support_size)][0]
        raise InvalidStratumId(f"stratum id {int(bad)} outside 0..{support_size - 1}")


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def validate_dgp(spec: DgpSpec) -> list[IpswError]:
    """Return every violated invariant of ``spec``; an empty list means valid."""
    out: list[IpswError] = []
    for name in ("p_R", "p_T"):
        p = getattr(spec, name)
        if np.any(p < 0):
            out.append(ProbabilityNotNormalized(f"{name} has negative entries"))
        if abs(p.sum() - 1.0) > NORMALIZATION_TOL:
            out.append(ProbabilityNotNormalized(f"{name} sums to {p.sum()!r}, not 1"))
    bad = np.flatnonzero((spec.p_T > 0) & (spec.p_R <= 0))
    if bad.size:
        out.append(SupportViolation(f"p_T > 0 but p_R = 0 on strata {bad.tolist()}"))
    bad = np.flatnonzero(~((spec.pi > 0) & (spec.pi < 1)))
    if bad.size:
        out.append(PiOutOfRange(f"pi outside (0, 1) on strata {bad.tolist()}"))
    for name in ("var0", "var1"):
        bad = np.flatnonzero(getattr(spec, name) < 0)
        if bad.size:
            out.append(NegativeVariance(f"{name} negative on strata {bad.tolist()}"))
    moments = np.concatenate([spec.mean0, spec.mean1, spec.var0, spec.var1])
    if not np.all(np.isfinite(moments)):
        out.append(NegativeVariance("outcome moments must be finite"))
    return out


def probability_ratio(spec: DgpSpec, x: int) -> float:
    if not 0 <= x < spec.size:
        raise InvalidStratumId(f"stratum id {x} outside 0..{spec.size - 1}")
    return float(spec.p_T[x] / spec.p_R[x])


def true_ate(spec: DgpSpec) -> float:
    """Target-population ATE, sum_x p_T(x) tau(x)."""
    return float(np.dot(spec.p_T, spec.tau))


def trial_ate(spec: DgpSpec) -> float:
    return float(np.dot(spec.p_R, spec.tau))


# ---------------------------------------------------------------------------
# Extended adjustment set
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ExtendedDgpSpec:
    """A base spec over X plus an auxiliary categorical covariate V independent of X.

    ``tau_shift[x, v]`` is added to the CATE of cell (x, v). It is split across
    the two potential outcomes as ``+pi(x) * shift`` on Y(1) and
    ``-(1 - pi(x)) * shift`` on Y(0), so the base moments are the within-cell
    means averaged over V under ``q_T``. The base variances are within-cell
    noise variances.
    """

    base: DgpSpec
    q_R: NDArray
    q_T: NDArray
    tau_shift: Optional[NDArray] = None
    aux_labels: tuple[str, ...] = ()

    def __post_init__(self):
        q_R = _frozen(self.q_R)
        q_T = _frozen(self.q_T)
        if q_R.shape != q_T.shape or q_R.ndim != 1:
            raise ValueError("q_R and q_T must be vectors of equal length")
        shape = (self.base.size, q_R.shape[0])
        shift = np.zeros(shape) if self.tau_shift is None else np.asarray(self.tau_shift, float)
        if shift.shape != shape:
            raise ValueError(f"tau_shift has shape {shift.shape}, expected {shape}")
        object.__setattr__(self, "q_R", q_R)
        object.__setattr__(self, "q_T", q_T)
        object.__setattr__(self, "tau_shift", _frozen(shift))
        labels = self.aux_labels or tuple(str(v) for v in range(shape[1]))
        object.__setattr__(self, "aux_labels", tuple(labels))

    def __eq__(self, other):
        if not isinstance(other, ExtendedDgpSpec):
            return NotImplemented
        return (
            self.base == other.base
            and self.aux_labels == other.aux_labels
            and all(np.array_equal(getattr(self, f), getattr(other, f)) for f in ("q_R", "q_T", "tau_shift"))
        )

    __hash__ = None  # type: ignore[assignment]

    @property
    def aux_size(self) -> int:
        return int(self.q_R.shape[0])

    @property
    def is_modifier(self) -> bool:
        return bool(np.any(self.tau_shift != 0))

    @property
    def is_shifted(self) -> bool:
        return not np.array_equal(self.q_R, self.q_T)

    def validate(self) -> list[IpswError]:
        out = validate_dgp(self.base)
        for name in ("q_R", "q_T"):
            q = getattr(self, name)
            if np.any(q < 0) or abs(q.sum() - 1.0) > NORMALIZATION_TOL:
                out.append(ProbabilityNotNormalized(f"{name} is not a probability vector"))
        if np.any(self.q_R <= 0):
            out.append(SupportViolation("every level of V must have q_R > 0"))
        centered = self.tau_shift @ self.q_T
        if np.max(np.abs(centered)) > 1e-12:
            out.append(TauShiftNotCentered("sum_v q_T(v) tau_shift(x, v) must vanish for every x"))
        return out

    def check(self) -> "ExtendedDgpSpec":
        v = self.validate()
        if v:
            raise ValidationError(v)
        return self

    def require_non_shifted(self) -> None:
        if self.is_shifted:
            raise NotNonShifted("q_R differs from q_T")

    def flat_index(self, x: int, v: int) -> int:
        return x * self.aux_size + v

    def flatten(self) -> DgpSpec:
        """The spec over the joint (X, V) support, cell id ``x * L + v``."""
        b = self.base
        L = self.aux_size
        pi = np.repeat(b.pi, L)
        shift = self.tau_shift.ravel()
        labels = tuple(f"{bl}|{vl}" for bl in b.labels for vl in self.aux_labels)
        return DgpSpec(
            p_R=np.outer(b.p_R, self.q_R).ravel(),
            p_T=np.outer(b.p_T, self.q_T).ravel(),
            pi=pi,
            mean0=np.repeat(b.mean0, L) - (1 - pi) * shift,
            mean1=np.repeat(b.mean1, L) + pi * shift,
            var0=np.repeat(b.var0, L),
            var1=np.repeat(b.var1, L),
            labels=labels,
        )

    def collapse(self) -> DgpSpec:
        """The exact law seen when adjusting on X only (V marginalized out).

        Requires V non-shifted when it modifies the effect, so that the
        within-x mixture over V is the same in both populations.
        """
        b = self.base
        if self.is_modifier:
            self.require_non_shifted()
        spread = (self.tau_shift**2) @ self.q_T  # Var_V[tau_shift(x, V)], centered
        return b.replace(var1=b.var1 + b.pi**2 * spread, var0=b.var0 + (1 - b.pi) ** 2 * spread)

    def coarsen_map(self) -> NDArray:
        """Flat (x, v) cell id -> x."""
        return np.repeat(np.arange(self.base.size), self.aux_size)
