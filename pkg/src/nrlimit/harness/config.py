"""Flat ``key = value`` experiment configuration.

Lines are ``key = value``; ``#`` starts a comment; blank lines are ignored.
Unknown keys are an error.  Lists are comma separated.  The datum is a list
of ``mode:coefficient`` entries scaled by ``amplitude``; in more than one
dimension a mode is written ``i;j`` or ``i;j;k``.
"""
from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from ..grid import Field, Grid, make_grid

__all__ = ["ExperimentConfig", "EXPERIMENTS", "parse_config", "load_config", "ConfigError", "DEFAULTS"]

EXPERIMENTS = (
    "linear_longtime",
    "nonlinear_locuniform",
    "transform_gain",
    "global_bound",
    "scaling_identity",
    "galerkin_tail",
    "evolve",
)
_SLOPE_EXPERIMENTS = ("linear_longtime", "nonlinear_locuniform", "transform_gain")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    """All knobs of one experiment run.  ``None`` means "experiment default"."""

    experiment: str = "nonlinear_locuniform"
    c: tuple = (4.0, 8.0, 16.0, 32.0)
    r: int = 1
    l: int = 2
    lam: float = 1.0
    dim: int = 1
    n: int = 256
    length: float = 2.0 * np.pi
    k: float = 2.0
    T0: float = 1.0
    samples: int = 200
    dt: float = 5e-3
    dt_policy: str = "auto"
    kappa: float = 0.5
    dt_tol: float = 1e-11
    seed: int = 0
    output: str = ""
    dat: str = ""
    amplitude: float = 0.1
    modes: tuple = (((1,), 1.0), ((-2,), 0.5))
    expected_slope: float | None = None
    tolerance: float | None = None
    residual_max: float = 0.25
    t_end: float = 50.0
    sigma: tuple = (1.0, 2.0)
    fault: str = "none"
    fault_factor: float = 1.5
    workers: int = 1
    system: str = "nlkg"
    snapshot: str = ""
    guard: float = 1e-6

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        cs = tuple(float(x) for x in self.c)
        object.__setattr__(self, "c", cs)
        if any(b <= a for a, b in zip(cs, cs[1:])):
            raise ConfigError("c list must be strictly increasing")
        if self.experiment in _SLOPE_EXPERIMENTS and len(cs) < 3:
            raise ConfigError("slope experiments need at least 3 values of c")
        if any(x <= 0 for x in cs):
            raise ConfigError("c values must be positive")
        if self.dt_policy not in ("auto", "fixed"):
            raise ConfigError("dt_policy must be 'auto' or 'fixed'")
        if self.fault not in ("none", "dispersion", "derivative", "sextic", "paper", "all"):
            raise ConfigError(f"unknown fault {self.fault!r}")
        if self.samples < 1:
            raise ConfigError("samples must be positive")
        if self.r < 1 or self.l < 2:
            raise ConfigError("need r >= 1 and l >= 2")
        for m, _ in self.modes:
            if len(m) != self.dim:
                raise ConfigError(f"mode {m} does not match dim={self.dim}")

    # -- derived objects ------------------------------------------------------

    @property
    def grid(self) -> Grid:
        return make_grid(self.dim, self.n, self.length)

    def datum(self, grid: Grid | None = None) -> Field:
        """``amplitude * sum coef * exp(i k.x)`` sampled on the grid."""
        g = grid or self.grid
        x = g.points
        vals = np.zeros(g.shape, dtype=complex)
        for mode, coef in self.modes:
            phase = sum(2.0 * np.pi / g.length * m * x[a] for a, m in enumerate(mode))
            vals += coef * np.exp(1j * phase)
        return Field(g, self.amplitude * vals)

    def slope_target(self) -> tuple[float, float]:
        defaults = {
            "linear_longtime": (-2.0, 0.25),
            "nonlinear_locuniform": (-2.0, 0.3),
            "transform_gain": (-4.0, 0.4),
        }
        e, t = defaults.get(self.experiment, (float("nan"), float("nan")))
        return (e if self.expected_slope is None else self.expected_slope,
                t if self.tolerance is None else self.tolerance)

    def with_(self, **kw) -> "ExperimentConfig":
        return replace(self, **kw)

    @classmethod
    def for_experiment(cls, tag: str, **kw) -> "ExperimentConfig":
        """Config with the experiment's defaults, then ``kw`` on top."""
        return cls(**{**DEFAULTS.get(tag, {}), **kw, "experiment": tag})


DEFAULTS = {
    "linear_longtime": dict(c=(4.0, 8.0, 16.0, 32.0, 64.0)),
    "nonlinear_locuniform": {},
    "transform_gain": dict(r=2, modes=(((0,), 1.0), ((1,), 0.5)), fault="all"),
    "global_bound": dict(c=(4.0, 16.0, 64.0), amplitude=0.05, n=64, t_end=50.0),
    "scaling_identity": dict(c=(2.0, 4.0), n=32),
    "galerkin_tail": {},
    "evolve": dict(c=(8.0,), t_end=1.0),
}

_FIELD_TYPES = {f.name: f for f in fields(ExperimentConfig)}


def _parse_modes(text: str):
    out = []
    for item in text.replace(",", " ").split():
        if ":" not in item:
            raise ConfigError(f"mode entry {item!r} must look like mode:coefficient")
        m, coef = item.split(":", 1)
        mode = tuple(int(v) for v in m.split(";"))
        out.append((mode, complex(coef) if "j" in coef else float(coef)))
    if not out:
        raise ConfigError("modes must not be empty")
    return tuple(out)


def _convert(key: str, raw: str):
    raw = raw.strip()
    if key in ("c", "sigma"):
        return tuple(float(x) for x in raw.split(",") if x.strip())
    if key == "modes":
        return _parse_modes(raw)
    if key in ("expected_slope", "tolerance"):
        return None if raw.lower() in ("", "none") else float(raw)
    if key in ("r", "l", "dim", "n", "samples", "seed", "workers"):
        return int(raw)
    if key in ("experiment", "dt_policy", "output", "dat", "fault", "system", "snapshot"):
        return raw
    if key == "length" and raw.lower() in ("2pi", "2*pi"):
        return 2.0 * np.pi
    return float(raw)


def parse_config(text: str, experiment: str | None = None) -> ExperimentConfig:
    """Parse ``key = value`` text; ``experiment`` supplies a default tag."""
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _convert(key, raw)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from exc
    tag = values.get("experiment", experiment or ExperimentConfig.experiment)
    merged = {**DEFAULTS.get(tag, {}), **values, "experiment": tag}
    return ExperimentConfig(**merged)


def load_config(path, experiment: str | None = None) -> ExperimentConfig:
    return parse_config(Path(path).read_text(), experiment)
