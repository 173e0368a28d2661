"""Named experimental setups and the TOML config format.

Three families of data-generating processes are provided:

* the two-stratum toy example, where the stratum with the larger effect is
  over-represented in the trial;
* its extension with an auxiliary binary covariate V, either shifted but not
  modifying the effect, or modifying the effect but not shifted;
* a semi-synthetic critical-care setup with six categorical covariates and a
  heteroscedastic outcome, optionally extended with a synthetic non-shifted
  effect modifier ``xsup``.

Config documents hold exactly one of ``[[strata]]``, ``[toy]`` or
``[semi_synthetic]``, optionally followed by an ``[extended]`` section that
adds V to the toy or flat spec.
"""

from __future__ import annotations

import csv
import hashlib
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence, Union

import numpy as np
from numpy.typing import NDArray

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib
import tomli_w

from ipsw.domain import DgpSpec, ExtendedDgpSpec
from ipsw.errors import ParameterOutOfRange, ParseError, ValidationError

# ---------------------------------------------------------------------------
# toy example
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ToyParams:
    """Stratum 1 has the larger effect and is over-represented in the trial."""

    p_R1: float = 0.75
    p_T1: float = 0.30
    tau1: float = 10.0
    tau0: float = 3.0
    baseline_var: float = 1.0
    pi: float = 0.5

    def __post_init__(self):
        for name in ("p_R1", "p_T1", "pi"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ParameterOutOfRange(f"{name} must lie in (0, 1), got {v}")
        if not self.baseline_var >= 0:
            raise ParameterOutOfRange(f"baseline_var must be >= 0, got {self.baseline_var}")


def toy_dgp(params: ToyParams = ToyParams()) -> DgpSpec:
    """Two strata, control mean 0 everywhere, treated mean equal to the CATE."""
    return DgpSpec(
        p_R=[1.0 - params.p_R1, params.p_R1],
        p_T=[1.0 - params.p_T1, params.p_T1],
        pi=params.pi,
        mean0=0.0,
        mean1=[params.tau0, params.tau1],
        var0=params.baseline_var,
        var1=params.baseline_var,
        labels=("x=0", "x=1"),
    ).check()


BALANCED_Q_R = (0.5, 0.5)
IMBALANCED_Q_R = (0.25, 0.75)


@dataclass(frozen=True)
class ShiftedNonModifier:
    """V shifted between trial and target, no effect on the CATE.

    ``q_R`` overrides the balanced / imbalanced preset when given.
    """

    q_T: tuple[float, ...] = (0.7, 0.3)
    balanced: bool = True
    q_R: Optional[tuple[float, ...]] = None

    def trial_law(self) -> tuple[float, ...]:
        if self.q_R is not None:
            return tuple(self.q_R)
        return BALANCED_Q_R if self.balanced else IMBALANCED_Q_R


@dataclass(frozen=True)
class NonshiftedModifier:
    """V with the same law q in both populations, adding ``tau_shift[v]`` to the CATE.

    ``tau_shift`` is either one row applied to every x, or a full K x L table.
    """

    q: tuple[float, ...] = (0.5, 0.5)
    tau_shift: Any = (-2.0, 2.0)


ExtendedMode = Union[ShiftedNonModifier, NonshiftedModifier]


def _extend(base: DgpSpec, mode: ExtendedMode) -> ExtendedDgpSpec:
    if isinstance(mode, ShiftedNonModifier):
        return ExtendedDgpSpec(base, mode.trial_law(), mode.q_T).check()
    if isinstance(mode, NonshiftedModifier):
        shift = np.asarray(mode.tau_shift, dtype=float)
        if shift.ndim == 1:
            shift = np.tile(shift, (base.size, 1))
        return ExtendedDgpSpec(base, mode.q, mode.q, tau_shift=shift).check()
    raise TypeError(f"unknown extension mode {mode!r}")


def toy_extended_dgp(params: ToyParams = ToyParams(), mode: ExtendedMode = ShiftedNonModifier()) -> ExtendedDgpSpec:
    return _extend(toy_dgp(params), mode)


def heteroscedastic_dgp() -> DgpSpec:
    """Noisy stratum common in the trial but rare in the target.

    Reweighting moves mass away from the noisy stratum, so the reweighted
    estimator is less variable than the trial difference in means.
    """
    return DgpSpec(
        p_R=[0.9, 0.1],
        p_T=[0.1, 0.9],
        pi=0.5,
        mean0=[0.0, 0.0],
        mean1=[2.0, 4.0],
        var0=[100.0, 1.0],
        var1=[100.0, 1.0],
        labels=("noisy", "quiet"),
    ).check()


# ---------------------------------------------------------------------------
# semi-synthetic setup
# ---------------------------------------------------------------------------

COVARIATES = ("glasgow", "gender", "pupil", "age", "bp", "ttt")
LEVELS = {"glasgow": 3, "gender": 2, "pupil": 3, "age": 3, "bp": 3, "ttt": 4}
XSUP = "xsup"
GIRL = 2  # gender level encoding: 1 boy, 2 girl

DEFAULT_TRIAL = {
    "glasgow": (0.2, 0.3, 0.5),
    "gender": (0.8, 0.2),
    "pupil": (0.8, 0.1, 0.1),
    "age": (0.3, 0.4, 0.3),
    "bp": (0.25, 0.55, 0.2),
    "ttt": (0.2, 0.3, 0.3, 0.2),
}
DEFAULT_TARGET = {
    "glasgow": (0.5, 0.3, 0.2),
    "gender": (0.7, 0.3),
    "pupil": (0.7, 0.15, 0.15),
    "age": (0.35, 0.35, 0.3),
    "bp": (0.3, 0.5, 0.2),
    "ttt": (0.4, 0.3, 0.2, 0.1),
}

ADJUSTMENT_SETS = {
    "minimal": ("ttt", "bp"),
    "minimal+glasgow": ("ttt", "bp", "glasgow"),
    "minimal+xsup": ("ttt", "bp", XSUP),
}


def _freeze_table(t: Mapping[str, Sequence[float]]) -> dict[str, tuple[float, ...]]:
    missing = [k for k in COVARIATES if k not in t]
    extra = [k for k in t if k not in LEVELS]
    if missing or extra:
        raise ParameterOutOfRange(f"marginal tables need exactly {list(COVARIATES)}; missing {missing}, unknown {extra}")
    return {k: tuple(float(v) for v in t[k]) for k in COVARIATES}


@dataclass(frozen=True)
class SemiSynthParams:
    """Covariate laws and outcome noise of the semi-synthetic setup.

    Levels are 1-based in covariate order. ``xsup_scale`` > 0 adds an
    independent, uniformly distributed covariate with ``xsup_levels`` levels
    that shifts the CATE by ``xsup_scale * (level - centre)``.
    """

    trial: Mapping[str, tuple[float, ...]] = field(default_factory=lambda: dict(DEFAULT_TRIAL))
    target: Mapping[str, tuple[float, ...]] = field(default_factory=lambda: dict(DEFAULT_TARGET))
    noise_scale: tuple[float, ...] = (2.0, 6.0, 10.0, 14.0)
    pi: float = 0.5
    xsup_levels: int = 5
    xsup_scale: float = 8.0
    joint_csv: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "trial", _freeze_table(self.trial))
        object.__setattr__(self, "target", _freeze_table(self.target))
        object.__setattr__(self, "noise_scale", tuple(float(v) for v in self.noise_scale))
        problems = []
        for pop in ("trial", "target"):
            for name in COVARIATES:
                q = np.asarray(getattr(self, pop)[name])
                if q.shape != (LEVELS[name],):
                    problems.append(f"{pop}.{name} needs {LEVELS[name]} levels, got {q.size}")
                elif np.any(q < 0) or abs(q.sum() - 1.0) > 1e-12:
                    problems.append(f"{pop}.{name} is not a probability vector")
        for name in COVARIATES:
            tr, tg = np.asarray(self.trial[name]), np.asarray(self.target[name])
            if tr.shape == tg.shape and np.any((tg > 0) & (tr <= 0)):
                problems.append(f"target.{name} puts mass where trial.{name} has none")
        ns = np.asarray(self.noise_scale)
        if ns.shape != (LEVELS["ttt"],) or np.any(ns < 0) or np.any(np.diff(ns) < 0):
            problems.append("noise_scale must hold 4 nonnegative, nondecreasing values")
        if not 0.0 < self.pi < 1.0:
            problems.append(f"pi must lie in (0, 1), got {self.pi}")
        if self.xsup_levels < 2 or self.xsup_scale < 0:
            problems.append("xsup needs at least 2 levels and a nonnegative scale")
        if problems:
            raise ParameterOutOfRange("; ".join(problems))

    @property
    def with_xsup(self) -> bool:
        return self.xsup_scale > 0


@dataclass(frozen=True, eq=False)
class CovariateDesign:
    """A flat spec together with the covariate levels of each stratum."""

    spec: DgpSpec
    names: tuple[str, ...]
    levels: NDArray  # strata x covariates, 1-based

    def column(self, name: str) -> NDArray:
        return self.levels[:, self.names.index(name)]

    def groups(self, covariates: Sequence[str]) -> NDArray:
        """Stratum -> merged-stratum id when adjusting on ``covariates`` only."""
        unknown = [c for c in covariates if c not in self.names]
        if unknown:
            raise ParameterOutOfRange(f"unknown covariates {unknown}; available: {list(self.names)}")
        if not covariates:
            return np.zeros(self.spec.size, dtype=np.int64)
        cols = self.levels[:, [self.names.index(c) for c in covariates]]
        _, inverse = np.unique(cols, axis=0, return_inverse=True)
        return inverse.reshape(-1).astype(np.int64)


def parse_adjustment(token: str, design: CovariateDesign) -> tuple[str, ...]:
    """A named set (``minimal``, ``minimal+glasgow``, ...), ``full``, or covariates joined by '+'."""
    if token == "full":
        return design.names
    if token in ADJUSTMENT_SETS:
        return ADJUSTMENT_SETS[token]
    parts = tuple(p.strip() for p in token.split("+") if p.strip())
    if parts and parts[0] in ADJUSTMENT_SETS:
        parts = ADJUSTMENT_SETS[parts[0]] + parts[1:]
    unknown = [p for p in parts if p not in design.names]
    if not parts or unknown:
        raise ParameterOutOfRange(
            f"unknown adjustment set {token!r}; use full, {', '.join(ADJUSTMENT_SETS)} "
            f"or covariates from {list(design.names)} joined by '+'"
        )
    return parts


def _semi_outcomes(levels: NDArray, names: Sequence[str], noise_scale: NDArray):
    col = {n: levels[:, i] for i, n in enumerate(names)}
    mean0 = 10.0 - col["glasgow"] - 5.0 * (col["gender"] == GIRL)
    tau = 15.0 * (6 - col["ttt"]) + 3.0 * (col["bp"] - 1) ** 2
    var = noise_scale[col["ttt"] - 1] ** 2
    return mean0.astype(float), tau.astype(float), var


def _independent_joint(params: SemiSynthParams) -> tuple[NDArray, NDArray, NDArray]:
    grids = np.meshgrid(*[np.arange(1, LEVELS[c] + 1) for c in COVARIATES], indexing="ij")
    levels = np.stack([g.ravel() for g in grids], axis=1)

    def joint(table):
        out = np.ones(1)
        for c in COVARIATES:
            out = np.outer(out, table[c]).ravel()
        return out

    return levels, joint(params.trial), joint(params.target)


def read_joint_csv(path: Union[str, Path]) -> tuple[NDArray, NDArray, NDArray]:
    """Rows ``combo_id,<six covariates>,p_R,p_T`` with 1-based levels."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in ("combo_id", *COVARIATES, "p_R", "p_T") if c not in header]
        if missing:
            raise ParseError(f"{path}: missing columns {missing}")
        levels, p_R, p_T = [], [], []
        for line, row in enumerate(reader, start=2):
            try:
                lv = [int(row[c]) for c in COVARIATES]
                p_R.append(float(row["p_R"]))
                p_T.append(float(row["p_T"]))
            except (TypeError, ValueError) as exc:
                raise ParseError(f"{path}:{line}: {exc}") from exc
            for c, v in zip(COVARIATES, lv):
                if not 1 <= v <= LEVELS[c]:
                    raise ParseError(f"{path}:{line}: {c}={v} outside 1..{LEVELS[c]}")
            levels.append(lv)
    if not levels:
        raise ParseError(f"{path}: no rows")
    return np.asarray(levels, dtype=np.int64), np.asarray(p_R), np.asarray(p_T)


def semi_synthetic_design(params: SemiSynthParams = SemiSynthParams(), base_dir: Optional[Path] = None,
                          include_xsup: Optional[bool] = None) -> CovariateDesign:
    """Flattened semi-synthetic law with per-stratum covariate levels.

    ``include_xsup`` defaults to ``params.with_xsup``.
    """
    if params.joint_csv:
        p = Path(params.joint_csv)
        if base_dir is not None and not p.is_absolute():
            p = base_dir / p
        levels, p_R, p_T = read_joint_csv(p)
    else:
        levels, p_R, p_T = _independent_joint(params)
    keep = (p_R != 0) | (p_T != 0)
    levels, p_R, p_T = levels[keep], p_R[keep], p_T[keep]
    mean0, tau, var = _semi_outcomes(levels, COVARIATES, np.asarray(params.noise_scale))
    labels = tuple(";".join(f"{c}={v}" for c, v in zip(COVARIATES, row)) for row in levels)
    base = DgpSpec(p_R=p_R, p_T=p_T, pi=params.pi, mean0=mean0, mean1=mean0 + tau,
                   var0=var, var1=var, labels=labels).check()
    if include_xsup is None:
        include_xsup = params.with_xsup
    if not include_xsup:
        return CovariateDesign(base, COVARIATES, levels)
    L = params.xsup_levels
    q = np.full(L, 1.0 / L)
    row = params.xsup_scale * (np.arange(L) - (L - 1) / 2.0)
    ext = ExtendedDgpSpec(base, q, q, tau_shift=np.tile(row, (base.size, 1)),
                          aux_labels=tuple(f"{XSUP}={v}" for v in range(1, L + 1))).check()
    flat = ext.flatten().check()
    ext_levels = np.column_stack([np.repeat(levels, L, axis=0), np.tile(np.arange(1, L + 1), base.size)])
    return CovariateDesign(flat, COVARIATES + (XSUP,), ext_levels)


def semi_synthetic_dgp(params: SemiSynthParams = SemiSynthParams()) -> DgpSpec:
    """The six-covariate semi-synthetic law (without ``xsup``)."""
    return semi_synthetic_design(params, include_xsup=False).spec


# ---------------------------------------------------------------------------
# config documents
# ---------------------------------------------------------------------------

STRATA_COLUMNS = ("p_R", "p_T", "pi", "mean0", "mean1", "var0", "var1")


@dataclass(frozen=True, eq=False)
class LoadedConfig:
    """Everything a config document describes.

    ``spec`` is the law to simulate from; ``design`` carries covariate levels
    when the document names a covariate-structured scenario; ``extended`` is
    set when the document adds V.
    """

    kind: str
    spec: DgpSpec
    extended: Optional[ExtendedDgpSpec] = None
    design: Optional[CovariateDesign] = None
    document: Mapping[str, Any] = field(default_factory=dict)


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _vector(value: Any, where: str) -> tuple[float, ...]:
    if not isinstance(value, list) or not value:
        raise ParseError(f"{where}: expected a nonempty list of numbers")
    return tuple(_number(v, f"{where}[{i}]") for i, v in enumerate(value))


def _parse_strata(rows: Any) -> DgpSpec:
    if not isinstance(rows, list) or not rows:
        raise ParseError("strata: expected at least one [[strata]] table")
    cols: dict[str, list[float]] = {c: [] for c in STRATA_COLUMNS}
    labels, ids = [], []
    for i, row in enumerate(rows):
        if not isinstance(row, dict):
            raise ParseError(f"strata[{i}]: expected a table")
        unknown = set(row) - set(STRATA_COLUMNS) - {"id", "label"}
        if unknown:
            raise ParseError(f"strata[{i}]: unknown fields {sorted(unknown)}")
        for c in STRATA_COLUMNS:
            if c in row:
                cols[c].append(_number(row[c], f"strata[{i}].{c}"))
            elif c in ("p_R", "p_T", "pi", "mean0", "mean1"):
                raise ParseError(f"strata[{i}]: missing field {c}")
            else:
                cols[c].append(1.0)
        sid = row.get("id", i)
        if isinstance(sid, bool) or not isinstance(sid, int):
            raise ParseError(f"strata[{i}].id: expected an integer")
        ids.append(sid)
        label = row.get("label", str(sid))
        if not isinstance(label, str):
            raise ParseError(f"strata[{i}].label: expected a string")
        labels.append(label)
    if sorted(ids) != list(range(len(ids))):
        raise ParseError("strata: ids must be 0..K-1, each used once")
    order = np.argsort(ids)
    arrays = {c: np.asarray(v)[order] for c, v in cols.items()}
    spec = DgpSpec(**arrays, labels=tuple(labels[j] for j in order))
    return spec.check()


def _parse_params(cls, table: Any, section: str, overrides: Mapping[str, Any] = ()):
    if not isinstance(table, dict):
        raise ParseError(f"[{section}]: expected a table")
    names = {f.name for f in fields(cls)}
    unknown = set(table) - names
    if unknown:
        raise ParseError(f"[{section}]: unknown fields {sorted(unknown)}")
    try:
        return cls(**{**table, **dict(overrides)})
    except ParameterOutOfRange as exc:
        raise ValidationError([exc]) from exc
    except (TypeError, ValueError) as exc:
        raise ParseError(f"[{section}]: {exc}") from exc


def _parse_toy(table: Any) -> ToyParams:
    if not isinstance(table, dict):
        raise ParseError("[toy]: expected a table")
    clean = {k: _number(v, f"toy.{k}") for k, v in table.items()}
    return _parse_params(ToyParams, clean, "toy")


def _parse_semi(table: Any) -> SemiSynthParams:
    if not isinstance(table, dict):
        raise ParseError("[semi_synthetic]: expected a table")
    clean: dict[str, Any] = {}
    for k, v in table.items():
        if k in ("trial", "target"):
            if not isinstance(v, dict):
                raise ParseError(f"semi_synthetic.{k}: expected a table of covariate marginals")
            merged = dict(DEFAULT_TRIAL if k == "trial" else DEFAULT_TARGET)
            for c, q in v.items():
                if c not in LEVELS:
                    raise ParseError(f"semi_synthetic.{k}.{c}: unknown covariate")
                merged[c] = _vector(q, f"semi_synthetic.{k}.{c}")
            clean[k] = merged
        elif k == "noise_scale":
            clean[k] = _vector(v, "semi_synthetic.noise_scale")
        elif k == "joint_csv":
            if not isinstance(v, str):
                raise ParseError("semi_synthetic.joint_csv: expected a path string")
            clean[k] = v
        elif k == "xsup_levels":
            if isinstance(v, bool) or not isinstance(v, int):
                raise ParseError("semi_synthetic.xsup_levels: expected an integer")
            clean[k] = v
        else:
            clean[k] = _number(v, f"semi_synthetic.{k}")
    return _parse_params(SemiSynthParams, clean, "semi_synthetic")


def _parse_extended(table: Any, base: DgpSpec) -> ExtendedDgpSpec:
    if not isinstance(table, dict):
        raise ParseError("[extended]: expected a table")
    mode = table.get("mode")
    if mode == "shifted_non_modifier":
        allowed = {"mode", "q_T", "q_R", "balanced"}
        q_T = _vector(table.get("q_T", [0.7, 0.3]), "extended.q_T")
        balanced = table.get("balanced", True)
        if not isinstance(balanced, bool):
            raise ParseError("extended.balanced: expected true or false")
        q_R = _vector(table["q_R"], "extended.q_R") if "q_R" in table else None
        m: ExtendedMode = ShiftedNonModifier(q_T=q_T, balanced=balanced, q_R=q_R)
    elif mode == "nonshifted_modifier":
        allowed = {"mode", "q", "tau_shift"}
        q = _vector(table.get("q", [0.5, 0.5]), "extended.q")
        raw = table.get("tau_shift", [-2.0, 2.0])
        if isinstance(raw, list) and raw and isinstance(raw[0], list):
            shift: Any = [_vector(r, f"extended.tau_shift[{i}]") for i, r in enumerate(raw)]
        else:
            shift = _vector(raw, "extended.tau_shift")
        m = NonshiftedModifier(q=q, tau_shift=shift)
    else:
        raise ParseError(
            f"extended.mode: expected 'shifted_non_modifier' or 'nonshifted_modifier', got {mode!r}"
        )
    unknown = set(table) - allowed
    if unknown:
        raise ParseError(f"[extended]: unknown fields {sorted(unknown)} for mode {mode}")
    try:
        return _extend(base, m)
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ParseError(f"[extended]: {exc}") from exc


def parse_document(doc: Mapping[str, Any], base_dir: Optional[Path] = None) -> LoadedConfig:
    """Build the spec described by an already-parsed config document."""
    sections = [k for k in ("strata", "toy", "semi_synthetic") if k in doc]
    unknown = set(doc) - {"strata", "toy", "semi_synthetic", "extended"}
    if unknown:
        raise ParseError(f"unknown top-level keys {sorted(unknown)}")
    if len(sections) != 1:
        raise ParseError("a config needs exactly one of [[strata]], [toy], [semi_synthetic]")
    kind = sections[0]
    design = None
    if kind == "strata":
        spec = _parse_strata(doc["strata"])
    elif kind == "toy":
        spec = toy_dgp(_parse_toy(doc["toy"]))
    else:
        if "extended" in doc:
            raise ParseError("[extended] applies to [toy] or [[strata]]; use xsup_* for the semi-synthetic setup")
        design = semi_synthetic_design(_parse_semi(doc["semi_synthetic"]), base_dir=base_dir)
        spec = design.spec
    extended = None
    if "extended" in doc:
        extended = _parse_extended(doc["extended"], spec)
        spec = extended.flatten().check()
        kind = f"{kind}+extended"
    return LoadedConfig(kind=kind, spec=spec, extended=extended, design=design, document=dict(doc))


def read_document(path: Union[str, Path]) -> dict[str, Any]:
    """Parse TOML; OSError propagates, syntax errors become ParseError."""
    path = Path(path)
    with path.open("rb") as fh:
        raw = fh.read()
    try:
        return tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc


def load_config(path: Union[str, Path]) -> LoadedConfig:
    path = Path(path)
    return parse_document(read_document(path), base_dir=path.parent)


def load_spec(path: Union[str, Path]) -> Union[DgpSpec, ExtendedDgpSpec]:
    """The validated spec of a config file; the extended spec when V is declared."""
    cfg = load_config(path)
    return cfg.extended if cfg.extended is not None else cfg.spec


# -- serialization ------------------------------------------------------------


def spec_document(spec: DgpSpec) -> dict[str, Any]:
    rows = []
    for i in range(spec.size):
        row: dict[str, Any] = {"id": i, "label": spec.labels[i]}
        for c in STRATA_COLUMNS:
            row[c] = float(getattr(spec, c)[i])
        rows.append(row)
    return {"strata": rows}


def params_document(params: Union[ToyParams, SemiSynthParams]) -> dict[str, Any]:
    if isinstance(params, ToyParams):
        return {"toy": asdict(params)}
    d = asdict(params)
    d["trial"] = {k: list(v) for k, v in params.trial.items()}
    d["target"] = {k: list(v) for k, v in params.target.items()}
    d["noise_scale"] = list(params.noise_scale)
    if d["joint_csv"] is None:
        del d["joint_csv"]
    return {"semi_synthetic": d}


def extended_document(mode: ExtendedMode) -> dict[str, Any]:
    if isinstance(mode, ShiftedNonModifier):
        d: dict[str, Any] = {"mode": "shifted_non_modifier", "q_T": list(mode.q_T), "balanced": mode.balanced}
        if mode.q_R is not None:
            d["q_R"] = list(mode.q_R)
        return {"extended": d}
    shift = np.asarray(mode.tau_shift, dtype=float).tolist()
    return {"extended": {"mode": "nonshifted_modifier", "q": list(mode.q), "tau_shift": shift}}


def dumps(doc: Mapping[str, Any]) -> str:
    return tomli_w.dumps(dict(doc))


def serialize_spec(spec: DgpSpec) -> str:
    return dumps(spec_document(spec))


def write_document(doc: Mapping[str, Any], path: Union[str, Path]) -> str:
    text = dumps(doc)
    Path(path).write_text(text, encoding="utf-8")
    return text


def config_hash(raw: bytes) -> str:
    return hashlib.sha256(raw).hexdigest()
