"""Slope fitting, convergence reports and their text outputs."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..io import write_csv

__all__ = ["fit_slope", "ConvergenceRow", "ConvergenceReport", "CSV_HEADER", "format_float"]

CSV_HEADER = ("c", "T", "error", "norm", "slope_running")


def format_float(x: float) -> str:
    """Fixed, platform-stable float text (17 significant digits)."""
    if x is None or (isinstance(x, float) and np.isnan(x)):
        return "nan"
    return f"{float(x):.17g}"


def fit_slope(c, err) -> tuple[float, float]:
    """Least-squares slope of ``log2(err)`` against ``log2(c)`` and the RMS residual."""
    x = np.log2(np.asarray(c, dtype=float))
    e = np.asarray(err, dtype=float)
    if len(x) < 2 or len(e) != len(x):
        raise ValueError("need at least two matching points to fit a slope")
    if not np.all(np.isfinite(e) & (e > 0)):
        raise ValueError("errors must be positive and finite")
    y = np.log2(e)
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    return float(coef[0]), float(np.sqrt(np.mean(resid**2)))


@dataclass
class ConvergenceRow:
    c: float
    T: float
    error: float
    norm: str
    dt: float = 0.0
    temporal_error: float = 0.0
    valid: bool = True
    note: str = ""


@dataclass
class ConvergenceReport:
    """Rows of one c-sweep plus the fitted slope and verdict."""

    experiment: str
    rows: list
    expected: float
    tolerance: float
    residual_max: float = 0.25
    extra: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)

    @property
    def slope(self) -> float:
        return fit_slope([r.c for r in self.rows], [r.error for r in self.rows])[0]

    @property
    def residual(self) -> float:
        return fit_slope([r.c for r in self.rows], [r.error for r in self.rows])[1]

    @property
    def temporal_valid(self) -> bool:
        """Each row's step-halving estimate is below 10% of the smallest model error."""
        smallest = min(r.error for r in self.rows)
        return all(r.valid and r.temporal_error < 0.1 * smallest for r in self.rows)

    @property
    def slope_ok(self) -> bool:
        return abs(self.slope - self.expected) <= self.tolerance and self.residual <= self.residual_max

    @property
    def passed(self) -> bool:
        return self.slope_ok and self.temporal_valid and all(self.checks.values())

    def running_slopes(self) -> list:
        out = []
        for i in range(len(self.rows)):
            if i == 0:
                out.append(float("nan"))
            else:
                sub = self.rows[: i + 1]
                out.append(fit_slope([r.c for r in sub], [r.error for r in sub])[0])
        return out

    def csv_rows(self) -> list:
        return [
            (format_float(r.c), format_float(r.T), format_float(r.error), r.norm, format_float(s))
            for r, s in zip(self.rows, self.running_slopes())
        ]

    def to_csv(self, path=None) -> str:
        return write_csv(self.csv_rows(), CSV_HEADER, path)

    def to_dat(self, path) -> None:
        """gnuplot-friendly columns: log2 c, log2 error, c, error."""
        lines = [f"# {self.experiment}: slope {self.slope:.6f} (expected {self.expected} +- {self.tolerance})",
                 "# log2(c) log2(error) c error"]
        for r in self.rows:
            lines.append(f"{np.log2(r.c):.17g} {np.log2(r.error):.17g} {r.c:.17g} {r.error:.17g}")
        Path(path).write_text("\n".join(lines) + "\n")

    def summary_line(self) -> str:
        return f"SLOPE={self.slope:.6f} RESIDUAL={self.residual:.6f} PASS={self.passed}"

    def diagnostics(self) -> list:
        out = []
        for r in self.rows:
            out.append(f"# c={r.c:g} T={r.T:g} error={r.error:.6e} dt={r.dt:.4e} "
                       f"temporal_error={r.temporal_error:.3e} valid={r.valid}" + (f" {r.note}" if r.note else ""))
        out.append(f"# temporal_valid={self.temporal_valid} slope_ok={self.slope_ok}")
        for k, v in self.extra.items():
            out.append(f"# {k}={v}")
        for k, v in self.checks.items():
            out.append(f"# check {k}: {'ok' if v else 'FAILED'}")
        return out
