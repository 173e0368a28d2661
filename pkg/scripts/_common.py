"""Shared argument parsing and CSV output for the experiment scripts."""

from __future__ import annotations

import argparse
import csv
import math
from pathlib import Path
from typing import Any, Iterable, Sequence


def parser(description: str, reps: int, seed: int = 2023) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--out-dir", type=Path, default=Path(__file__).parent / "output")
    p.add_argument("--reps", type=int, default=reps)
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--workers", type=int, default=None, help="worker processes (default: IPSW_WORKERS or 1)")
    return p


def _cell(v: Any) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return "NA"
    if isinstance(v, float):
        return "inf" if math.isinf(v) else repr(v)
    return str(v)


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(v) for v in r])
    print(f"wrote {path}")
    return path
