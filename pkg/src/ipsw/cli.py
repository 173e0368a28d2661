"""Command-line front end.

Subcommands read a TOML config, run theory evaluations or seeded Monte Carlo
experiments, and write CSV or JSON. Each written file gets a sibling
``<stem>.manifest.json`` recording how to reproduce it.

Exit codes: 0 success, 1 I/O failure, 2 invalid input or usage.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional, Sequence

from ipsw import __version__
from ipsw.errors import IpswError, ParseError
from ipsw.estimators import CLI_NAMES, Tag, parse_tag
from ipsw.scenarios import (
    LoadedConfig,
    SemiSynthParams,
    ShiftedNonModifier,
    ToyParams,
    config_hash,
    dumps,
    extended_document,
    load_config,
    params_document,
    parse_adjustment,
)
from ipsw.simulate import (
    WORKERS_ENV,
    FixedM,
    McConfig,
    Ratio,
    inflation_experiment,
    regime_sweep,
    shift_family,
    simulate_views,
)
from ipsw.theory import AsymptoticRegime, _target_var_tau, theory_report, v_o, v_so, v_so_tilde_infty
from ipsw.domain import true_ate, trial_ate

SIMULATE_COLUMNS = ("estimator", "mean", "bias", "variance", "mse", "mc_se", "degenerate_reps")
SWEEP_COLUMNS = ("n", "m", "estimator", "scaled_variance", "theory_asymptote")
INFLATION_COLUMNS = ("shift_param", "theory_factor", "empirical_factor", "mc_se")
SCENARIOS = ("toy", "toy-extended", "semi-synthetic")


class UsageError(Exception):
    """Bad flag values detected after argparse."""


# ---------------------------------------------------------------------------
# formatting
# ---------------------------------------------------------------------------


def fmt(v: Any) -> str:
    if v is None:
        return "NA"
    if isinstance(v, float):
        if math.isnan(v):
            return "NA"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


def json_value(v: Any) -> Any:
    if isinstance(v, float):
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
    if isinstance(v, dict):
        return {str(k): json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [json_value(x) for x in v]
    if isinstance(v, Tag):
        return v.cli_name
    return v


def csv_text(columns: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def json_text(obj: Any) -> str:
    return json.dumps(json_value(obj), indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# manifest and output
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunManifest:
    command_line: list[str]
    config_hash: Optional[str]
    seed: Optional[int]
    tool_version: str
    timestamp: str
    outputs: list[str]

    def to_json(self) -> str:
        return json_text(asdict(self))


def manifest_path(out: Path) -> Path:
    return out.with_name(out.stem + ".manifest.json")


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class Output:
    """Collects named outputs and writes them with a manifest."""

    def __init__(self, args: argparse.Namespace, raw_config: Optional[bytes]):
        self.args = args
        self.raw_config = raw_config

    def emit(self, files: dict[str, str]) -> None:
        """``files`` maps a path suffix ('' for the primary file) to its text."""
        out = getattr(self.args, "out", None)
        if out is None:
            for text in files.values():
                sys.stdout.write(text)
            return
        out = Path(out)
        written = []
        for suffix, text in files.items():
            path = out if not suffix else out.with_suffix(suffix)
            _atomic_write(path, text)
            written.append(str(path))
        manifest = RunManifest(
            command_line=list(getattr(self.args, "argv", sys.argv)),
            config_hash=None if self.raw_config is None else config_hash(self.raw_config),
            seed=getattr(self.args, "seed", None),
            tool_version=__version__,
            timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
            outputs=written,
        )
        _atomic_write(manifest_path(out), manifest.to_json())


# ---------------------------------------------------------------------------
# argument parsing helpers
# ---------------------------------------------------------------------------


def parse_m(token: Optional[str]) -> Optional[int]:
    """``None`` stands for an infinite target sample."""
    if token is None:
        return None
    t = token.strip().lower()
    if t in ("inf", "infinity"):
        return None
    try:
        m = int(t)
    except ValueError as exc:
        raise UsageError(f"--m expects a positive integer or 'inf', got {token!r}") from exc
    if m < 1:
        raise UsageError(f"--m must be >= 1, got {m}")
    return m


def parse_int_list(token: str, flag: str) -> list[int]:
    try:
        vals = [int(v) for v in token.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"{flag} expects comma-separated integers, got {token!r}") from exc
    if not vals:
        raise UsageError(f"{flag} is empty")
    if any(v < 1 for v in vals):
        raise UsageError(f"{flag} values must be >= 1")
    return vals


def parse_float_list(token: str, flag: str) -> list[float]:
    try:
        vals = [float(v) for v in token.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"{flag} expects comma-separated numbers, got {token!r}") from exc
    if not vals:
        raise UsageError(f"{flag} is empty")
    return vals


def parse_estimators(token: Optional[str], m: Optional[int]) -> tuple[Tag, ...]:
    if token is None:
        return tuple(t for t in Tag if m is not None or not t.needs_target)
    try:
        return tuple(parse_tag(t) for t in token.split(",") if t.strip())
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def load(args: argparse.Namespace) -> tuple[LoadedConfig, bytes]:
    path = Path(args.config)
    raw = path.read_bytes()
    return load_config(path), raw


def view_groups(cfg: LoadedConfig, adjust: Optional[str]):
    if adjust is None:
        return None
    if cfg.design is None:
        raise UsageError("--adjust needs a covariate-structured config ([semi_synthetic])")
    return cfg.design.groups(parse_adjustment(adjust, cfg.design))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_theory(args: argparse.Namespace) -> None:
    cfg, raw = load(args)
    m = parse_m(args.m)
    tags = parse_estimators(args.est, m) if args.est else (
        (Tag.IPSW_ORACLE, Tag.IPSW_EST, Tag.IPSW_EST_PIHAT) if m is not None
        else (Tag.IPSW_ORACLE, Tag.IPSW_SEMI, Tag.IPSW_SEMI_PIHAT)
    )
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    spec = cfg.spec
    reports = []
    for tag in tags:
        if tag in (Tag.HT, Tag.DM, Tag.PS):
            raise UsageError(f"no theory for {tag.cli_name}; use an ipsw estimator")
        tag_m = None if tag is Tag.IPSW_ORACLE else m
        reports.append(theory_report(spec, tag, args.n, tag_m, exact=not args.no_exact).to_json())
    doc = {
        "constants": {
            "true_ate": true_ate(spec),
            "trial_ate": trial_ate(spec),
            "v_o": v_o(spec),
            "v_so": v_so(spec),
            "v_so_tilde_infty": v_so_tilde_infty(spec),
            "target_var_tau": _target_var_tau(spec),
        },
        "reports": reports,
    }
    Output(args, raw).emit({"": json_text(doc)})


def cmd_simulate(args: argparse.Namespace) -> None:
    cfg, raw = load(args)
    m = parse_m(args.m)
    tags = parse_estimators(args.est, m)
    groups = view_groups(cfg, args.adjust)
    mc = McConfig(n=args.n, m=m, reps=args.reps, seed=args.seed, estimators=tags)
    rep = simulate_views(cfg.spec, mc, {"main": groups}, workers=args.workers)["main"]
    rows = [
        (r.estimator.cli_name, r.mean, r.bias, r.variance, r.mse, r.mc_se, r.degenerate_reps)
        for r in rep.rows
    ]
    Output(args, raw).emit({"": csv_text(SIMULATE_COLUMNS, rows)})


def cmd_sweep(args: argparse.Namespace) -> None:
    cfg, raw = load(args)
    grid = parse_int_list(args.n_grid, "--n-grid")
    if (args.fixed_m is None) == (args.ratio is None):
        raise UsageError("give exactly one of --fixed-m or --ratio")
    if args.fixed_m is not None:
        if args.fixed_m < 1:
            raise UsageError("--fixed-m must be >= 1")
        regime = FixedM(args.fixed_m)
        label = {"fixed_m": args.fixed_m}
    else:
        try:
            lam = AsymptoticRegime.parse(args.ratio).lam
        except (ValueError, IpswError) as exc:
            raise UsageError(f"--ratio expects a positive number or 'inf', got {args.ratio!r}") from exc
        if lam <= 0:
            raise UsageError("--ratio must be > 0")
        regime = Ratio(lam)
        label = {"ratio": lam}
    tags = parse_estimators(args.est, 1) if args.est else (Tag.IPSW_EST, Tag.IPSW_EST_PIHAT)
    rows = regime_sweep(cfg.spec, grid, regime, args.reps, args.seed, tags, workers=args.workers)
    table = [(r.n, "inf" if r.m is None else r.m, r.estimator.cli_name, r.scaled_variance, r.theory_asymptote)
             for r in rows]
    spec = cfg.spec
    doc = {
        "regime": label,
        "reps": args.reps,
        "seed": args.seed,
        "constants": {
            "v_o": v_o(spec), "v_so": v_so(spec), "v_so_tilde_infty": v_so_tilde_infty(spec),
            "target_var_tau": _target_var_tau(spec),
        },
        "rows": [
            {"n": r.n, "m": "inf" if r.m is None else r.m, "estimator": r.estimator.cli_name,
             "variance": r.variance, "scaled_variance": r.scaled_variance,
             "scaled_variance_mc_se": r.scaled_variance_mc_se, "theory_asymptote": r.theory_asymptote}
            for r in rows
        ],
    }
    Output(args, raw).emit({"": csv_text(SWEEP_COLUMNS, table), ".json": json_text(doc)})


def cmd_inflation(args: argparse.Namespace) -> None:
    cfg, raw = load(args)
    shifts = parse_float_list(args.shifts, "--shifts")
    base = cfg.spec
    q_R: Sequence[float] = (0.5, 0.5)
    if cfg.extended is not None:
        base, q_R = cfg.extended.base, tuple(cfg.extended.q_R)
    if args.q_r is not None:
        q_R = parse_float_list(args.q_r, "--q-r")
    if not 0 <= args.toward < len(q_R):
        raise UsageError(f"--toward must index a level of V (0..{len(q_R) - 1})")
    m = parse_m(args.m)
    if args.est:
        tag = parse_tag(args.est)
    else:
        tag = Tag.IPSW_SEMI_PIHAT if m is None else Tag.IPSW_EST_PIHAT
    if tag.needs_target and m is None:
        raise UsageError(f"{tag.cli_name} needs a finite --m")
    grid = shift_family(q_R, shifts, toward=args.toward)
    rows = inflation_experiment(base, grid, args.n, m, args.reps, args.seed, shift_params=shifts,
                                estimator=tag, workers=args.workers)
    table = [(r.shift_param, r.theory_factor, r.empirical_factor, r.mc_se) for r in rows]
    Output(args, raw).emit({"": csv_text(INFLATION_COLUMNS, table)})


# -- scenarios -----------------------------------------------------------------


def _parse_override(item: str) -> tuple[list[str], Any]:
    if "=" not in item:
        raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
    key, value = item.split("=", 1)
    try:
        parsed = read_value(value)
    except ParseError:
        parsed = value
    return key.strip().split("."), parsed


def read_value(text: str) -> Any:
    from ipsw.scenarios import tomllib

    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(str(exc)) from exc


def scenario_document(name: str, overrides: Sequence[str]) -> dict[str, Any]:
    if name == "toy":
        doc = params_document(ToyParams())
    elif name == "toy-extended":
        doc = {**params_document(ToyParams()), **extended_document(ShiftedNonModifier())}
    elif name == "semi-synthetic":
        doc = params_document(SemiSynthParams())
    else:
        raise UsageError(f"unknown scenario {name!r}; valid: {', '.join(SCENARIOS)}")
    section = next(iter(doc))
    for item in overrides:
        path, value = _parse_override(item)
        if len(path) == 1 or path[0] not in doc:
            path = [section] + path
        node = doc
        for p in path[:-1]:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise UsageError(f"--set {item}: {p} is not a table")
        node[path[-1]] = value
    return doc


def cmd_scenario(args: argparse.Namespace) -> None:
    if args.name not in SCENARIOS:
        raise UsageError(f"unknown scenario {args.name!r}; valid: {', '.join(SCENARIOS)}")
    doc = scenario_document(args.name, args.set or [])
    text = dumps(doc)
    if args.out is not None:
        cfg_path = Path(args.out).with_name(Path(args.out).stem + ".config.toml")
    else:
        cfg_path = Path(tempfile.mkdtemp(prefix="ipsw-")) / f"{args.name}.toml"
    _atomic_write(cfg_path, text)
    args.config = str(cfg_path)
    COMMANDS[args.sub](args)


COMMANDS = {
    "theory": cmd_theory,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "inflation": cmd_inflation,
}


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, config: bool = True) -> None:
    if config:
        p.add_argument("--config", required=True, help="TOML config file")
    p.add_argument("--out", help="output file (stdout when omitted)")


def _add_mc(p: argparse.ArgumentParser) -> None:
    p.add_argument("--reps", type=int, default=1000, help="Monte Carlo replicates (default: 1000)")
    p.add_argument("--seed", type=int, default=0, help="64-bit seed (default: 0)")
    p.add_argument("--workers", type=int, default=None,
                   help=f"worker processes (default: ${WORKERS_ENV} or 1)")


def _add_theory_args(p, config=True):
    _add_common(p, config)
    p.add_argument("--n", type=int, required=True, help="trial size")
    p.add_argument("--m", default="inf", help="target size or 'inf' (default: inf)")
    p.add_argument("--est", help=f"comma-separated estimators: {', '.join(CLI_NAMES.values())}")
    p.add_argument("--no-exact", action="store_true", help="skip the exact finite-sample variance")


def _add_simulate_args(p, config=True):
    _add_common(p, config)
    p.add_argument("--n", type=int, required=True, help="trial size")
    p.add_argument("--m", default=None, help="target size or 'inf' (default: inf)")
    p.add_argument("--est", help=f"comma-separated estimators: {', '.join(CLI_NAMES.values())}")
    p.add_argument("--adjust", help="adjustment set: minimal, minimal+glasgow, minimal+xsup, full, or a+b+...")
    _add_mc(p)


def _add_sweep_args(p, config=True):
    _add_common(p, config)
    p.add_argument("--n-grid", required=True, help="comma-separated trial sizes")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--fixed-m", type=int, help="hold the target size fixed")
    g.add_argument("--ratio", help="m = ratio * n; 'inf' for a known target law")
    p.add_argument("--est", help="comma-separated estimators (default: ipsw_est,ipsw_est_pihat)")
    _add_mc(p)


def _add_inflation_args(p, config=True):
    _add_common(p, config)
    p.add_argument("--shifts", required=True, help="comma-separated shift parameters in [0, 1]")
    p.add_argument("--q-r", help="trial law of V (default: from config, else 0.5,0.5)")
    p.add_argument("--toward", type=int, default=0, help="level of V the target law moves toward")
    p.add_argument("--n", type=int, default=150)
    p.add_argument("--m", default=None, help="target size; when given the default estimator is ipsw_est_pihat")
    p.add_argument("--est", help="estimator (default: semi_oracle_pihat, or ipsw_est_pihat with --m)")
    _add_mc(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ipsw",
        description="Theory and Monte Carlo for trial-to-target reweighting estimators.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_theory_args(sub.add_parser("theory", help="bias, variance and bounds as JSON"))
    _add_simulate_args(sub.add_parser("simulate", help="Monte Carlo summary as CSV"))
    _add_sweep_args(sub.add_parser("sweep", help="scaled variance along a grid of trial sizes"))
    _add_inflation_args(sub.add_parser("inflation", help="variance inflation from a shifted covariate"))

    sc = sub.add_parser("scenario", help="materialize a named setup and run a command on it")
    sc.add_argument("name", help=f"one of: {', '.join(SCENARIOS)}")
    sc.add_argument("--set", action="append", metavar="KEY=VALUE",
                    help="override a scenario parameter (dotted keys reach nested tables)")
    scsub = sc.add_subparsers(dest="sub", required=True)
    _add_theory_args(scsub.add_parser("theory"), config=False)
    _add_simulate_args(scsub.add_parser("simulate"), config=False)
    _add_sweep_args(scsub.add_parser("sweep"), config=False)
    _add_inflation_args(scsub.add_parser("inflation"), config=False)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.argv = ["ipsw", *argv]
    handler = cmd_scenario if args.command == "scenario" else COMMANDS[args.command]
    try:
        handler(args)
    except (UsageError, ValueError) as exc:
        print(f"ipsw: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"ipsw: I/O error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
