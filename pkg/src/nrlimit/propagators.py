"""Time evolution: exact linear flows, Lawson RK4 steppers and Lie transforms.

All solvers run in physical time.  States are kept as stacked spectral arrays
of shape ``(ncomp, *grid.shape)``; component 2 (when present) rotates with the
opposite phase.  The Lawson scheme integrates ``u' = L u + N(u)`` with the
linear part ``L`` (diagonal) applied exactly:

    k1 = N(u)
    k2 = N(E u + dt/2 E k1)
    k3 = N(E u + dt/2 k2)
    k4 = N(E^2 u + dt E k3)
    u+ = E^2 u + dt/6 (E^2 k1 + 2 E (k2 + k3) + k4),      E = exp(L dt/2).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .grid import Field, FieldPair, Grid, norm_hk
from .hamalg import binomial, normal_form
from .hamalg.compile import CompiledHamiltonian, quadratic_symbol
from .multipliers import PhysicalParams

__all__ = [
    "SYSTEMS",
    "EvolutionSpec",
    "Trajectory",
    "StepRejected",
    "kg_symbol",
    "ur_symbol",
    "symbol_difference",
    "kg_linear_flow",
    "ur_linear_flow",
    "build_system",
    "lawson_step",
    "evolve",
    "select_dt",
    "DtSelection",
    "lie_transform",
    "LieTransform",
    "initial_dt",
    "fast_frequency",
]

SYSTEMS = ("kg_linear", "u_r_linear", "nlkg", "nf_order1", "nf_order2", "nlkg_complex", "nf_complex_order1")
_TWO_COMPONENT = ("nlkg_complex", "nf_complex_order1")


class StepRejected(RuntimeError):
    """Raised when the conserved-quantity guard trips; ``time`` is where."""

    def __init__(self, message: str, time: float):
        super().__init__(f"{message} (t = {time:.6g})")
        self.time = time


# -- linear symbols -----------------------------------------------------------


def kg_symbol(c: float, k2: np.ndarray) -> np.ndarray:
    """``c <xi>_c = c (c^2 + |xi|^2)^(1/2)``."""
    return c * np.hypot(c, np.sqrt(k2))


def ur_symbol(c: float, r: int, k2: np.ndarray) -> np.ndarray:
    """``sigma_r = c^2 sum_{j<=r} binom(1/2, j) (|xi|^2 / c^2)^j``."""
    if r < 1:
        raise ValueError("r must be at least 1")
    x = np.asarray(k2, dtype=float) / c**2
    total = np.zeros_like(x)
    for j in range(r, -1, -1):
        total = total * x + float(binomial(Fraction(1, 2), j))
    return c**2 * total


def symbol_difference(c: float, r: int, k2: np.ndarray, terms: int = 80) -> np.ndarray:
    """``c <xi>_c - sigma_r`` without cancellation.

    For ``|xi|^2 / c^2 < 1/4`` the Taylor tail ``c^2 sum_{j>r} binom(1/2,j) x^j`` is
    summed directly; elsewhere the plain difference is accurate enough.
    """
    x = np.asarray(k2, dtype=float) / c**2
    tail = np.zeros_like(x)
    for j in range(r + terms, r, -1):
        tail = (tail + float(binomial(Fraction(1, 2), j))) * x
    tail = tail * x**r
    direct = kg_symbol(c, k2) - ur_symbol(c, r, k2)
    return np.where(x < 0.25, c**2 * tail, direct)


def kg_linear_flow(psi0: Field, c: float, t: float) -> Field:
    """Exact flow of ``-i psi_t = c <nabla>_c psi``."""
    g = psi0.grid
    return Field.from_spectral(g, np.exp(1j * t * kg_symbol(c, g.k2)) * psi0.spectral)


def ur_linear_flow(psi0: Field, c: float, r: int, t: float) -> Field:
    """Exact flow of the order-r truncated dispersion."""
    g = psi0.grid
    return Field.from_spectral(g, np.exp(1j * t * ur_symbol(c, r, g.k2)) * psi0.spectral)


# -- systems ------------------------------------------------------------------


@dataclass(frozen=True)
class EvolutionSpec:
    """What to integrate and how.

    ``hamiltonian`` optionally overrides the normal-form Hamiltonian of the
    ``nf_*`` systems (``{order: HamPoly}``, orders >= 1); it is how fault
    injection swaps coefficients.  ``sample_every`` defaults to ``t_end``.
    ``guard`` bounds the relative Hamiltonian change between samples.
    """

    system: str
    params: PhysicalParams
    dt: float
    t_end: float
    r: int = 1
    gauge_peeled: bool = False
    sample_every: float | None = None
    guard: float = 1e-6
    dealias: bool = True
    hamiltonian: dict | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.system not in SYSTEMS:
            raise ValueError(f"unknown system {self.system!r}")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.t_end < 0:
            raise ValueError("t_end must be non-negative")
        if self.t_end > 0:
            _whole(self.t_end / self.dt, "dt must divide t_end")
        if self.sample_every is not None and self.t_end > 0:
            _whole(self.sample_every / self.dt, "dt must divide sample_every")
            _whole(self.t_end / self.sample_every, "sample_every must divide t_end")

    @property
    def ncomp(self) -> int:
        return 2 if self.system in _TWO_COMPONENT else 1

    @property
    def steps(self) -> int:
        return int(round(self.t_end / self.dt))

    @property
    def sample_stride(self) -> int:
        if self.sample_every is None or self.t_end == 0:
            return max(self.steps, 1)
        return int(round(self.sample_every / self.dt))

    def with_dt(self, dt: float) -> "EvolutionSpec":
        return EvolutionSpec(
            self.system, self.params, dt, self.t_end, self.r, self.gauge_peeled,
            self.sample_every, self.guard, self.dealias, self.hamiltonian,
        )


def _whole(x: float, msg: str) -> int:
    k = int(round(x))
    if k < 1 or abs(x - k) > 1e-9 * max(1.0, x):
        raise ValueError(msg)
    return k


class _System:
    """Linear symbol, nonlinearity and monitors for one system on one grid."""

    def __init__(self, spec: EvolutionSpec, grid: Grid):
        self.spec = spec
        self.grid = grid
        p = spec.params
        c = p.c
        self.axes = tuple(range(1, grid.dim + 1))
        self.mask = grid.dealias_mask if spec.dealias else np.ones(grid.shape, dtype=bool)
        sys = spec.system
        self.compiled = None
        if sys in ("kg_linear", "nlkg", "nlkg_complex"):
            lin = kg_symbol(c, grid.k2)
        elif sys == "u_r_linear":
            lin = ur_symbol(c, spec.r, grid.k2)
        else:
            lin = self._setup_normal_form(spec, grid)
        signs = (1.0, -1.0)[: spec.ncomp]
        self.L = np.stack([1j * s * lin for s in signs])
        self.s = np.sqrt(c / np.hypot(c, grid.kabs))

    def _setup_normal_form(self, spec, grid):
        p = spec.params
        complex_case = spec.system == "nf_complex_order1"
        order = {"nf_order1": 1, "nf_order2": 2, "nf_complex_order1": 1}[spec.system]
        if spec.hamiltonian is not None:
            Z = {j: h for j, h in spec.hamiltonian.items() if 1 <= j <= order}
        else:
            Z = normal_form(p.l, order, complex_case).Z
        self.Z = Z
        weights = [(Z[j].nonquadratic_part(), p.eps ** (j - 1)) for j in sorted(Z)]
        self.compiled = CompiledHamiltonian(weights, grid, lam=p.lam, dealias=spec.dealias)
        self.quad = [(Z[j].quadratic_part(), p.eps ** (j - 1)) for j in sorted(Z)]
        lin = np.full(grid.shape, p.c**2)
        for h, w in self.quad:
            lin = lin + w * quadratic_symbol(h, grid, 1, p.lam)
        if complex_case:
            lin2 = np.full(grid.shape, p.c**2)
            for h, w in self.quad:
                lin2 = lin2 + w * quadratic_symbol(h, grid, 2, p.lam)
            if not np.allclose(lin, lin2):
                raise ValueError("components with different dispersion are not supported")
        return lin

    # -- right-hand sides ---------------------------------------------------

    def N(self, u: np.ndarray) -> np.ndarray:
        sys = self.spec.system
        if sys in ("kg_linear", "u_r_linear"):
            return np.zeros_like(u)
        if sys == "nlkg":
            return self._nlkg(u)
        if sys == "nlkg_complex":
            return self._nlkg_complex(u)
        phi = u[1] if u.shape[0] == 2 else None
        vpsi, vphi = self.compiled.vector_field_arrays(u[0], phi)
        return np.stack([vpsi] if vphi is None else [vpsi, vphi])

    def _real_part_smoothed(self, a):
        return 2.0 * np.fft.ifftn(self.s * a * self.mask, norm="ortho").real

    def _nlkg(self, u):
        p = self.spec.params
        w = self._real_part_smoothed(u[0])
        out = 1j * (p.lam / 2**p.l) * self.s * np.fft.fftn(w ** (2 * p.l - 1), norm="ortho")
        return (out * self.mask)[None]

    def _nlkg_complex(self, u):
        p = self.spec.params
        w1 = self._real_part_smoothed(u[0])
        w2 = self._real_part_smoothed(u[1])
        P = (w1 * w1 + w2 * w2) ** (p.l - 1)
        k = (p.lam / 2**p.l) * self.s * self.mask
        a = 1j * k * np.fft.fftn(P * w1, norm="ortho")
        b = -1j * k * np.fft.fftn(P * w2, norm="ortho")
        return np.stack([a, b])

    # -- monitors -----------------------------------------------------------

    def hamiltonian(self, u: np.ndarray) -> float:
        g, p = self.grid, self.spec.params
        sys = self.spec.system
        lin = (self.L / 1j).real
        quad = 0.0
        for comp in range(u.shape[0]):
            sign = 1.0 if comp == 0 else -1.0
            quad += float(g.weight * np.sum(sign * lin[comp] * np.abs(u[comp]) ** 2))
        if sys in ("kg_linear", "u_r_linear"):
            return quad
        if sys in ("nlkg", "nlkg_complex"):
            # the masked field enters, matching the Galerkin-truncated dynamics
            w2sum = sum(self._real_part_smoothed(a) ** 2 for a in u)
            pref = p.lam / (2 ** (p.l + 1) * p.l)
            return quad + pref * float(g.weight * np.sum(w2sum**p.l))
        phi = u[1] if u.shape[0] == 2 else None
        return quad + self.compiled.energy_arrays(u[0], phi).real

    def mass(self, u: np.ndarray) -> float:
        return float(self.grid.weight * np.sum(np.abs(u) ** 2))

    def fast_frequency(self) -> float:
        return fast_frequency(self.spec)


def fast_frequency(spec: EvolutionSpec) -> float:
    """Largest non-resonant phase speed left in the rotated-frame nonlinearity."""
    c, l = spec.params.c, spec.params.l
    if spec.system in ("nlkg", "nlkg_complex"):
        return 2.0 * l * c**2
    return 0.0


def build_system(spec: EvolutionSpec, grid: Grid) -> _System:
    return _System(spec, grid)


def lawson_step(u: np.ndarray, dt: float, E: np.ndarray, N) -> np.ndarray:
    """One Lawson RK4 step; ``E = exp(L dt / 2)``."""
    k1 = N(u)
    Eu = E * u
    k2 = N(Eu + 0.5 * dt * E * k1)
    k3 = N(Eu + 0.5 * dt * k2)
    E2 = E * E
    k4 = N(E2 * u + dt * E * k3)
    return E2 * u + dt / 6.0 * (E2 * k1 + 2.0 * E * (k2 + k3) + k4)


# -- trajectories -------------------------------------------------------------


@dataclass
class Trajectory:
    """Samples of one evolution; ``states[k]`` has shape ``(ncomp, *grid.shape)``."""

    grid: Grid
    times: np.ndarray
    states: list
    hamiltonian: np.ndarray
    mass: np.ndarray
    spec: EvolutionSpec | None = None

    def field(self, k: int, comp: int = 0) -> Field:
        return Field.from_spectral(self.grid, self.states[k][comp])

    def fields(self, comp: int = 0) -> list[Field]:
        return [self.field(k, comp) for k in range(len(self.states))]

    @property
    def final(self) -> Field:
        return self.field(len(self.states) - 1)

    def max_drift(self) -> float:
        h = self.hamiltonian
        return float(np.max(np.abs(h - h[0])) / max(abs(h[0]), 1e-300))


def _as_array(psi0, ncomp: int) -> tuple[Grid, np.ndarray]:
    if isinstance(psi0, Field):
        if ncomp != 1:
            raise ValueError("this system needs a (psi, phi) pair")
        return psi0.grid, psi0.spectral[None].copy()
    psi, phi = psi0 if not isinstance(psi0, FieldPair) else (psi0.psi, psi0.phi)
    if ncomp != 2:
        raise ValueError("this system takes a single field")
    if psi.grid != phi.grid:
        raise ValueError("psi and phi must share one grid")
    return psi.grid, np.stack([psi.spectral, phi.spectral])


def _peel(u, t, c, peeled):
    if not peeled:
        return u
    ph = np.exp(-1j * c**2 * t)
    signs = np.array([ph, np.conj(ph)])[: u.shape[0]]
    return u * signs.reshape((-1,) + (1,) * (u.ndim - 1))


def evolve(spec: EvolutionSpec, psi0) -> Trajectory:
    """Step ``psi0`` to ``spec.t_end``, sampling every ``spec.sample_every``."""
    grid, u = _as_array(psi0, spec.ncomp)
    system = build_system(spec, grid)
    c = spec.params.c
    times = [0.0]
    states = [_peel(u, 0.0, c, spec.gauge_peeled)]
    H0 = system.hamiltonian(u)
    hams = [H0]
    masses = [system.mass(u)]
    if spec.steps == 0 or spec.t_end == 0:
        return Trajectory(grid, np.array(times), states, np.array(hams), np.array(masses), spec)
    E = np.exp(system.L * spec.dt / 2.0)
    linear = spec.system in ("kg_linear", "u_r_linear")
    E2 = E * E
    stride = spec.sample_stride
    scale = max(abs(H0), 1e-300)
    for step in range(1, spec.steps + 1):
        u = E2 * u if linear else lawson_step(u, spec.dt, E, system.N)
        if step % stride == 0 or step == spec.steps:
            t = step * spec.dt
            if not np.all(np.isfinite(u)):
                raise StepRejected("non-finite state", t)
            H = system.hamiltonian(u)
            if abs(H - hams[-1]) > spec.guard * scale:
                raise StepRejected(
                    f"relative Hamiltonian change {abs(H - hams[-1]) / scale:.3e} exceeds guard {spec.guard:.1e}", t
                )
            times.append(t)
            states.append(_peel(u, t, c, spec.gauge_peeled))
            hams.append(H)
            masses.append(system.mass(u))
    return Trajectory(grid, np.array(times), states, np.array(hams), np.array(masses), spec)


# -- automatic step selection -------------------------------------------------


@dataclass
class DtSelection:
    """Outcome of :func:`select_dt`: the accepted (fine) trajectory and its error estimate."""

    dt: float
    estimate: float
    trajectory: Trajectory
    halvings: int
    valid: bool


def _sup_hk(a: list, b: list, grid: Grid, k: float) -> float:
    best = 0.0
    for x, y in zip(a, b):
        for comp in range(x.shape[0]):
            best = max(best, norm_hk(Field.from_spectral(grid, x[comp] - y[comp]), k))
    return best


def initial_dt(spec: EvolutionSpec, psi0, kappa: float = 0.2) -> float:
    """``min(dt_user, 0.1 / ||N(psi0)||_inf, kappa / omega_fast)``, snapped to divide the stride."""
    grid, u = _as_array(psi0, spec.ncomp)
    system = build_system(spec, grid)
    nl = system.N(u)
    amp = max(np.abs(np.fft.ifftn(nl, axes=system.axes, norm="ortho")).max(), 1e-300)
    dt = min(spec.dt, 0.1 / amp)
    omega = fast_frequency(spec)
    if omega > 0:
        dt = min(dt, kappa / omega)
    stride = spec.sample_every if spec.sample_every else spec.t_end
    if stride <= 0:
        return dt
    m = int(np.ceil(stride / dt - 1e-9))
    return stride / m


def select_dt(
    spec: EvolutionSpec,
    psi0,
    tol: float,
    k: float = 2.0,
    kappa: float = 0.2,
    max_halvings: int = 8,
) -> DtSelection:
    """Halve ``dt`` until the step-halving error estimate is below ``tol``.

    The estimate is ``sup_t ||u_dt - u_{dt/2}||_{H^k} / 15`` over the sample
    times (fourth order).  Returns the finer trajectory.
    """
    dt = initial_dt(spec, psi0, kappa)
    coarse = evolve(spec.with_dt(dt), psi0)
    est = np.inf
    for h in range(max_halvings + 1):
        fine = evolve(spec.with_dt(dt / 2), psi0)
        est = _sup_hk(coarse.states, fine.states, coarse.grid, k) / 15.0
        if est < tol:
            return DtSelection(dt / 2, est, fine, h, True)
        dt, coarse = dt / 2, fine
    return DtSelection(dt, est, coarse, max_halvings, False)


# -- Lie transform ------------------------------------------------------------


def _rk4(u, h, f):
    k1 = f(u)
    k2 = f(u + 0.5 * h * k1)
    k3 = f(u + 0.5 * h * k2)
    k4 = f(u + h * k3)
    return u + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _flow(u, X, sign, substeps):
    h = sign / substeps
    for _ in range(substeps):
        u = _rk4(u, h, X)
    return u


class LieTransform:
    """Compiled ``T = Phi_1 o ... o Phi_r`` on one grid.

    ``Phi_m`` is the time-1 flow of ``eps^m chi_m``; ``chis`` defaults to the
    generators of :func:`normal_form`.  Each application doubles the RK4
    substep count until two successive refinements agree to ``tol``
    (relative, sup norm).
    """

    def __init__(self, grid: Grid, params: PhysicalParams, r: int = 1, chis: dict | None = None,
                 substeps: int = 4, tol: float = 1e-13, max_refine: int = 8):
        if chis is None:
            chis = normal_form(params.l, r).chi
        self.grid, self.params, self.r = grid, params, r
        self.substeps, self.tol, self.max_refine = substeps, tol, max_refine
        self.orders = sorted(j for j in chis if j <= r)
        self._compiled = {
            m: CompiledHamiltonian([(chis[m], params.eps**m)], grid, lam=params.lam, dealias=False)
            for m in self.orders
        }

    def _one(self, u, m, sign):
        comp = self._compiled[m]

        def X(a):
            return comp.vector_field_arrays(a)[0]

        M = self.substeps
        prev = _flow(u, X, sign, M)
        scale = max(np.abs(prev).max(), 1e-300)
        for _ in range(self.max_refine):
            M *= 2
            cur = _flow(u, X, sign, M)
            if np.abs(cur - prev).max() <= self.tol * scale:
                return cur
            prev = cur
        raise RuntimeError("Lie transform substep refinement did not converge")

    def apply(self, psi: Field, direction: str = "forward") -> Field:
        if direction not in ("forward", "inverse"):
            raise ValueError("direction must be 'forward' or 'inverse'")
        if psi.grid != self.grid:
            raise ValueError("field lives on a different grid")
        u = psi.spectral.copy()
        # forward applies Phi_r first and Phi_1 last; the inverse reverses order and time
        if direction == "forward":
            seq, sign = list(reversed(self.orders)), 1.0
        else:
            seq, sign = self.orders, -1.0
        for m in seq:
            u = self._one(u, m, sign)
        return Field.from_spectral(self.grid, u)

    def forward(self, psi: Field) -> Field:
        return self.apply(psi, "forward")

    def inverse(self, psi: Field) -> Field:
        return self.apply(psi, "inverse")


def lie_transform(psi: Field, params: PhysicalParams, direction: str = "forward",
                  chis: dict | None = None, r: int = 1, **kw) -> Field:
    """Apply the normal-form transformation (or its inverse) to ``psi``."""
    return LieTransform(psi.grid, params, r, chis, **kw).apply(psi, direction)
