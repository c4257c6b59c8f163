"""Residual reports over sample points, with a stable JSON layout."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .conformal import POINT_ERRORS
from .conventions import conventions_hash

SCHEMA_VERSION = 1
REPORT_KEYS = ("check", "tolerance", "max_residual", "evaluated", "skipped", "pass",
               "conventions", "points", "details")
POINT_KEYS = ("index", "coords", "residual", "skipped", "reason", "values")


@dataclass
class PointRecord:
    index: int
    coords: tuple
    residual: float | None = None
    skipped: bool = False
    reason: str | None = None
    values: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"index": self.index, "coords": [float(x) for x in self.coords],
                "residual": _num(self.residual), "skipped": self.skipped,
                "reason": self.reason, "values": _jsonable(self.values)}


@dataclass
class ResidualReport:
    """One check over a set of points.

    ``residual`` of ``None`` marks an informational record that never fails.
    The report passes when at least one point was evaluated and every
    residual is below ``tolerance``.
    """

    check: str
    tolerance: float
    records: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def evaluated(self) -> int:
        return sum(1 for r in self.records if not r.skipped)

    @property
    def skipped(self) -> int:
        return sum(1 for r in self.records if r.skipped)

    @property
    def max_residual(self) -> float | None:
        vals = [r.residual for r in self.records if not r.skipped and r.residual is not None]
        return max(vals) if vals else None

    @property
    def passed(self) -> bool:
        if self.evaluated == 0:
            return False
        m = self.max_residual
        return m is None or (math.isfinite(m) and m < self.tolerance)

    def to_dict(self) -> dict:
        recs = sorted(self.records, key=lambda r: r.index)
        return {"check": self.check, "tolerance": self.tolerance,
                "max_residual": _num(self.max_residual), "evaluated": self.evaluated,
                "skipped": self.skipped, "pass": self.passed, "conventions": conventions_hash(),
                "points": [r.to_dict() for r in recs], "details": _jsonable(self.details)}

    def text(self, verbose: bool = False) -> str:
        m = self.max_residual
        head = (f"[{'PASS' if self.passed else 'FAIL'}] {self.check}: "
                f"max residual {'n/a' if m is None else f'{m:.3e}'} "
                f"(tolerance {self.tolerance:.1e}), {self.evaluated} evaluated, "
                f"{self.skipped} skipped")
        lines = [head]
        for k, v in self.details.items():
            lines.append(f"    {k}: {_short(v)}")
        for r in sorted(self.records, key=lambda r: r.index):
            if r.skipped:
                lines.append(f"    skipped {_fmt_pt(r.coords)}: {r.reason}")
            elif verbose:
                res = "" if r.residual is None else f" residual {r.residual:.3e}"
                vals = " ".join(f"{k}={_short(v)}" for k, v in r.values.items())
                lines.append(f"    {_fmt_pt(r.coords)}{res} {vals}".rstrip())
        return "\n".join(lines)


def run_check(check: str, points, fn: Callable, tolerance: float, details: dict | None = None) -> ResidualReport:
    """Evaluate ``fn(point)`` everywhere; point-level geometric failures are skipped.

    ``fn`` returns a residual, ``None`` or ``(residual, values)``.
    """
    rep = ResidualReport(check, tolerance, details=dict(details or {}))
    for i, p in enumerate(points):
        p = tuple(float(x) for x in p)
        try:
            out = fn(p)
        except POINT_ERRORS as exc:
            rep.records.append(PointRecord(i, p, skipped=True, reason=str(exc)))
            continue
        values = {}
        if isinstance(out, tuple):
            out, values = out
        res = None if out is None else float(out)
        if res is not None and not math.isfinite(res):
            rep.records.append(PointRecord(i, p, skipped=True, reason="non-finite residual"))
            continue
        rep.records.append(PointRecord(i, p, res, values=values))
    return rep


def grid_points(bounds, n: int = 5) -> list[tuple]:
    """``n`` evenly spaced values per coordinate over ``bounds`` (Cartesian product)."""
    axes = [np.linspace(lo, hi, n) if n > 1 else np.array([0.5 * (lo + hi)]) for lo, hi in bounds]
    return [tuple(float(x) for x in p) for p in itertools.product(*axes)]


def random_points(bounds, count: int, seed: int) -> list[tuple]:
    rng = np.random.default_rng(seed)
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    return [tuple(float(x) for x in lo + (hi - lo) * rng.random(len(bounds))) for _ in range(count)]


def document(command: str, source: str | None, reports, exit_code: int, notes=()) -> dict:
    return {"schema": SCHEMA_VERSION, "command": command, "source": source,
            "conventions": conventions_hash(), "exit_code": exit_code,
            "pass": exit_code == 0, "notes": list(notes),
            "reports": [r.to_dict() for r in reports]}


def write_json(doc: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=False)
        fh.write("\n")


def _num(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (np.floating, float)):
        return _num(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    return v


def _short(v) -> str:
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.10g}"
    if isinstance(v, np.ndarray):
        return np.array2string(v, precision=6, suppress_small=True)
    if isinstance(v, (list, tuple)) and v and all(isinstance(x, (float, int, np.floating)) for x in v):
        return "(" + ", ".join(f"{float(x):.6g}" for x in v) + ")"
    return str(v)


def _fmt_pt(p) -> str:
    return "(" + ", ".join(f"{x:.4g}" for x in p) + ")"
