"""Finite-difference eigensolver for the full two-dimensional Hamiltonian.

Kinetic terms use masses C (flux) and I_m (angle); the potential is the exact
V(Phi, theta) unless a replacement is supplied. Coordinates and energies are
rescaled before assembly so that the operator is well conditioned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from . import _kernels
from .groundstate import ground_state_phidelta
from .harmonic import modes_from_hessian
from .model import DerivedQuantities, DeviceParams, derive
from .potential import (Regime, StationaryPoint, barrier, classify_landscape,
                        enumerate_candidate_minima, potential)

BOUNDARY_CELLS = 3
BOUNDARY_MASS_TOL = 1e-6


class SchrodingerError(RuntimeError):
    pass


class BoundaryContaminationError(SchrodingerError):
    pass


class ClassificationMismatchError(SchrodingerError):
    pass


@dataclass(frozen=True)
class GridSpec:
    """Interior nodes of a Dirichlet box ``window = ((phi_lo, phi_hi), (theta_lo, theta_hi))``.

    ``scaling`` = (flux unit, angle unit, energy unit); defaults to the window
    widths and the flux-direction kinetic scale.
    """

    window: tuple
    n_phi: int
    n_theta: int
    scaling: tuple | None = None

    def __post_init__(self):
        if self.n_phi < 16 or self.n_theta < 16:
            raise ValueError("need at least 16 points per axis")
        (a, b), (c, d) = self.window
        if not (b > a and d > c):
            raise ValueError("degenerate window")

    @property
    def phi_axis(self) -> np.ndarray:
        (a, b), _ = self.window
        return a + (b - a) * np.arange(1, self.n_phi + 1) / (self.n_phi + 1)

    @property
    def theta_axis(self) -> np.ndarray:
        _, (c, d) = self.window
        return c + (d - c) * np.arange(1, self.n_theta + 1) / (self.n_theta + 1)

    @property
    def spacing(self) -> tuple[float, float]:
        (a, b), (c, d) = self.window
        return (b - a) / (self.n_phi + 1), (d - c) / (self.n_theta + 1)

    def with_resolution(self, n_phi: int, n_theta: int | None = None) -> "GridSpec":
        return GridSpec(self.window, n_phi, n_phi if n_theta is None else n_theta, self.scaling)

    def to_dict(self) -> dict:
        return {"window": [list(self.window[0]), list(self.window[1])],
                "n_phi": self.n_phi, "n_theta": self.n_theta,
                "scaling": None if self.scaling is None else list(self.scaling)}


@dataclass
class DiscreteHamiltonian:
    matrix: sp.csr_matrix
    grid: GridSpec
    energy_unit: float
    v_min: float  # lowest diagonal potential value, scaled units


@dataclass
class EigenSolution:
    energies: np.ndarray  # J, ascending
    states: np.ndarray  # (k, n_phi, n_theta), sum |psi|^2 dPhi dtheta = 1
    residuals: np.ndarray  # J
    grid: GridSpec = field(repr=False)

    def to_manifest(self) -> dict:
        return {"energies_J": [float(e) for e in self.energies],
                "residuals_J": [float(r) for r in self.residuals],
                "grid": self.grid.to_dict()}


def _scaling(grid: GridSpec, params: DeviceParams, hbar: float):
    if grid.scaling is not None:
        return grid.scaling
    (a, b), (c, d) = grid.window
    s_phi, s_theta = b - a, d - c
    return s_phi, s_theta, hbar**2 / (2 * params.C * s_phi**2)


def discretize(params: DeviceParams, grid: GridSpec, dq: DerivedQuantities | None = None,
               potential_fn: Callable | None = None, numba: bool | None = None) -> DiscreteHamiltonian:
    """Five-point Laplacian plus diagonal potential, zero Dirichlet boundary.

    ``potential_fn(Phi, theta)`` (J, broadcasting) replaces V when given.
    """
    dq = derive(params) if dq is None else dq
    s_phi, s_theta, e_unit = _scaling(grid, params, dq.hbar)
    h_phi, h_theta = grid.spacing
    hx, hy = h_phi / s_phi, h_theta / s_theta
    cx = dq.hbar**2 / (2 * params.C * s_phi**2 * e_unit) / hx**2
    cy = dq.hbar**2 / (2 * params.I_m * s_theta**2 * e_unit) / hy**2
    P, T = grid.phi_axis, grid.theta_axis
    if potential_fn is None:
        V = _kernels.potential_grid(P, T, dq.flux_scale, params.L, dq.E_j, dq.flux_quantum,
                                    params.I_m * params.omega_i**2, params.theta_0, numba=numba)
    else:
        V = np.broadcast_to(potential_fn(P[:, None], T[None, :]), (P.size, T.size))
    v = np.ascontiguousarray(V, dtype=float) / e_unit
    rows, cols, vals = _kernels.stencil(grid.n_phi, grid.n_theta, cx, cy, v, numba=numba)
    n = grid.n_phi * grid.n_theta
    A = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    A.sum_duplicates()
    A.sort_indices()
    return DiscreteHamiltonian(A, grid, e_unit, float(v.min()))


def solve_lowest(ham: DiscreteHamiltonian, k: int = 2, seed: int = 0, tol: float = 0.0,
                 check_boundary: bool = True) -> EigenSolution:
    """Lowest ``k`` eigenpairs by shift-invert Lanczos at the bottom of the potential."""
    if k < 1:
        raise ValueError("k must be >= 1")
    A = ham.matrix
    n = A.shape[0]
    v0 = np.random.default_rng(seed).standard_normal(n)
    # H >= min V, so every eigenvalue lies above this shift
    sigma = ham.v_min - 1e-3 * max(abs(ham.v_min), 1.0)
    try:
        w, U = eigsh(A, k=k, sigma=sigma, which="LM", v0=v0, tol=tol, maxiter=10 * n)
    except Exception as exc:  # ArpackNoConvergence and factorisation failures
        raise SchrodingerError(f"eigensolver failed: {exc}") from exc
    order = np.argsort(w)
    w, U = w[order], U[:, order]
    res = np.linalg.norm(A @ U - U * w, axis=0)
    grid = ham.grid
    h_phi, h_theta = grid.spacing
    states = U.T.reshape(k, grid.n_phi, grid.n_theta) / math.sqrt(h_phi * h_theta)
    # fix sign: largest-magnitude entry positive
    for i in range(k):
        flat = states[i].ravel()
        if flat[np.argmax(np.abs(flat))] < 0:
            states[i] = -states[i]
    sol = EigenSolution(w * ham.energy_unit, states, res * ham.energy_unit, grid)
    if check_boundary:
        for i in range(k):
            m = boundary_mass(states[i], grid)
            if m > BOUNDARY_MASS_TOL:
                raise BoundaryContaminationError(
                    f"state {i} has {m:.2e} of its probability within {BOUNDARY_CELLS} cells of the edge")
    return sol


def boundary_mass(state: np.ndarray, grid: GridSpec, cells: int = BOUNDARY_CELLS) -> float:
    p = np.abs(state) ** 2
    total = p.sum()
    inner = p[cells:-cells, cells:-cells].sum()
    return float((total - inner) / total)


def reflect(state: np.ndarray) -> np.ndarray:
    """Point reflection through the grid centre."""
    return state[::-1, ::-1]


def parity(state: np.ndarray, grid: GridSpec) -> float:
    h_phi, h_theta = grid.spacing
    return float((state * reflect(state)).sum() * h_phi * h_theta)


def well_window(points, params: DeviceParams, dq: DerivedQuantities, center=None,
                n_sigma: float = 8.0) -> tuple:
    """Rectangle enclosing ``points`` with ``n_sigma`` harmonic widths of margin, symmetric about ``center``."""
    widths = []
    for pt in points:
        g = ground_state_phidelta(modes_from_hessian(pt.hessian, params, dq))
        widths.append(g.natural_scales())
    wp = max(w[0] for w in widths)
    wt = max(w[1] for w in widths)
    P = np.array([pt.phi for pt in points])
    T = np.array([pt.theta for pt in points])
    if center is None:
        center = (0.5 * (P.min() + P.max()), 0.5 * (T.min() + T.max()))
    half_p = np.abs(P - center[0]).max() + n_sigma * wp
    half_t = np.abs(T - center[1]).max() + n_sigma * wt
    return ((center[0] - half_p, center[0] + half_p), (center[1] - half_t, center[1] + half_t))


@dataclass
class TunnelSplitting:
    E0: float
    E1: float
    delta_E: float
    frequency: float
    parity0: float
    parity1: float
    left_mass: float
    solution: EigenSolution = field(repr=False)

    def to_manifest(self) -> dict:
        return {"E0_J": self.E0, "E1_J": self.E1, "delta_E_J": self.delta_E,
                "splitting_hz": self.frequency, "parity0": self.parity0, "parity1": self.parity1,
                "left_well_mass": self.left_mass}


def _two_lowest_minima(params, dq):
    minima = sorted(enumerate_candidate_minima(params, dq), key=lambda p: p.value)
    if len(minima) < 2:
        raise ClassificationMismatchError("fewer than two minima: not a double well")
    return sorted(minima[:2], key=lambda p: p.phi)


def double_well_grid(params: DeviceParams, n_phi: int, n_theta: int | None = None,
                     dq: DerivedQuantities | None = None, n_sigma: float = 8.0) -> GridSpec:
    """Grid centred on the saddle between the two lowest wells."""
    dq = derive(params) if dq is None else dq
    left, right = _two_lowest_minima(params, dq)
    saddle = barrier(params, left, right, dq).saddle
    window = well_window([left, right], params, dq, center=(saddle.phi, saddle.theta), n_sigma=n_sigma)
    return GridSpec(window, n_phi, n_phi if n_theta is None else n_theta)


def tunnel_splitting(params: DeviceParams, grid: GridSpec, dq: DerivedQuantities | None = None,
                     require_symmetric: bool = True, seed: int = 0) -> TunnelSplitting:
    """Two lowest levels of a double well, their splitting and exchange parities.

    The exchange parity uses point reflection through the grid centre, so the
    grid should be centred on the saddle (see :func:`double_well_grid`).
    """
    dq = derive(params) if dq is None else dq
    if require_symmetric:
        regime = classify_landscape(params, dq).regime
        if regime is not Regime.SYMMETRIC_DOUBLE_WELL:
            raise ClassificationMismatchError(f"landscape is {regime.value}, not a symmetric double well")
    left, right = _two_lowest_minima(params, dq)
    sol = solve_lowest(discretize(params, grid, dq), k=2, seed=seed)
    E0, E1 = sol.energies
    h = 2 * math.pi * dq.hbar
    # mass on the left of the line through the saddle, perpendicular to the inter-well axis
    saddle = barrier(params, left, right, dq).saddle
    P, T = np.meshgrid(grid.phi_axis, grid.theta_axis, indexing="ij")
    d = np.array([right.phi - left.phi, right.theta - left.theta])
    scale = np.array([grid.window[0][1] - grid.window[0][0], grid.window[1][1] - grid.window[1][0]])
    proj = ((P - saddle.phi) * d[0] / scale[0] ** 2 + (T - saddle.theta) * d[1] / scale[1] ** 2)
    p0 = np.abs(sol.states[0]) ** 2
    left_mass = float(p0[proj < 0].sum() / p0.sum())
    return TunnelSplitting(float(E0), float(E1), float(E1 - E0), float((E1 - E0) / h),
                           parity(sol.states[0], grid), parity(sol.states[1], grid), left_mass, sol)


def cat_state_fidelity(params: DeviceParams, grid: GridSpec, dq: DerivedQuantities | None = None,
                       solution: EigenSolution | None = None, wells: list | None = None) -> float:
    """Overlap of the numeric ground state with the even superposition of the wells' Gaussians.

    With a single well in ``wells`` this is the fidelity against that well's Gaussian.
    """
    dq = derive(params) if dq is None else dq
    if wells is None:
        wells = _two_lowest_minima(params, dq)
    if solution is None:
        solution = solve_lowest(discretize(params, grid, dq), k=1)
    P, T = np.meshgrid(grid.phi_axis, grid.theta_axis, indexing="ij")
    built = np.zeros_like(P)
    for w in wells:
        g = ground_state_phidelta(modes_from_hessian(w.hessian, params, dq), center=(w.phi, w.theta))
        built += g.at(P, T)
    psi = solution.states[0]
    overlap = (psi * built).sum()
    return float(overlap**2 / ((psi**2).sum() * (built**2).sum()))


def synthetic_params(base: DeviceParams, kinetic_phi: float, kinetic_theta: float,
                     tilt: float | None = None, dq: DerivedQuantities | None = None) -> DeviceParams:
    """Rescale masses (and omega_i) so quantum effects are visible on a desk-sized grid.

    ``kinetic_phi = hbar^2 / (2 C Phi0^2 Ej)`` and
    ``kinetic_theta = hbar^2 s^2 / (2 I_m Ej)`` with ``s = Bx A sin(theta_0) / Phi0``
    are the dimensionless kinetic coefficients in flux-quantum units. ``tilt``
    fixes ``I_m omega_i^2 / (2 Ej s^2)``; by default the value of ``base`` is kept.
    """
    dq = derive(base) if dq is None else dq
    s = dq.flux_scale * abs(math.sin(base.theta_0)) / dq.flux_quantum
    if s == 0:
        raise ValueError("synthetic scaling needs Bx A sin(theta_0) > 0")
    if tilt is None:
        tilt = base.I_m * base.omega_i**2 / (2 * dq.E_j * s * s)
    C = dq.hbar**2 / (2 * kinetic_phi * dq.flux_quantum**2 * dq.E_j)
    I_m = dq.hbar**2 * s * s / (2 * kinetic_theta * dq.E_j)
    omega_i = math.sqrt(2 * tilt * dq.E_j * s * s / I_m)
    return base.replace(C=C, I_m=I_m, omega_i=omega_i, mass=0.0)
