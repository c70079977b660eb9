"""Potential energy landscape V(Phi, theta) of the flux-qubit-cantilever.

V(Phi, theta) = (Phi - Bx A cos theta)^2 / 2L + Ej (1 - cos(2 pi Phi / Phi0))
                + I_m omega_i^2 (theta - theta_0)^2 / 2
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import _kernels
from .model import CODATA2018, DerivedQuantities, DeviceParams, derive

log = logging.getLogger(__name__)

GRADIENT_TOL = 1e-12
MAX_NEWTON_ITER = 100
DEGENERACY_TOL = 1e-9  # in units of 2 Ej


class LandscapeError(RuntimeError):
    """Base class for failures while analysing the landscape."""


class NonConvergenceError(LandscapeError):
    pass


class DegenerateLandscapeError(LandscapeError):
    pass


class SaddleNotFoundError(LandscapeError):
    pass


class Kind(str, enum.Enum):
    MINIMUM = "minimum"
    SADDLE = "saddle"
    MAXIMUM = "maximum"


class Branch(str, enum.Enum):
    PLUS = "plus"
    MINUS = "minus"


class Regime(str, enum.Enum):
    SINGLE_GLOBAL_WELL = "single_global_well"
    SYMMETRIC_DOUBLE_WELL = "symmetric_double_well"
    ASYMMETRIC_DOUBLE_WELL = "asymmetric_double_well"
    MULTI_WELL_LATTICE = "multi_well_lattice"


@dataclass(frozen=True)
class StationaryPoint:
    phi: float
    theta: float
    value: float
    kind: Kind
    hessian: np.ndarray = field(repr=False, compare=False)
    n_index: int
    branch: Branch

    @property
    def location(self) -> tuple[float, float]:
        return (self.phi, self.theta)


@dataclass(frozen=True)
class Barrier:
    saddle: StationaryPoint
    height: float


@dataclass(frozen=True)
class LandscapeClass:
    regime: Regime
    global_minima: list
    barrier: Barrier | None = None
    minima: list = field(default_factory=list, repr=False)


@dataclass(frozen=True)
class PotentialGrid:
    phi_axis: np.ndarray
    theta_axis: np.ndarray
    values: np.ndarray  # V/h in Hz, shape (len(phi_axis), len(theta_axis))
    contour_interval: float
    params: DeviceParams
    n_contours: int


def _dq(params: DeviceParams, dq: DerivedQuantities | None) -> DerivedQuantities:
    return derive(params) if dq is None else dq


def flux_qubit_potential(Phi, Phi_a, L: float, E_j: float, flux_quantum: float = CODATA2018.flux_quantum):
    """Static potential of the bare single-junction loop under applied flux ``Phi_a``."""
    if not L > 0:
        raise ValueError("L must be positive")
    Phi = np.asarray(Phi, dtype=float)
    return (Phi - Phi_a) ** 2 / (2 * L) + E_j * (1 - np.cos(2 * np.pi * Phi / flux_quantum))


def potential(Phi, theta, params: DeviceParams, dq: DerivedQuantities | None = None):
    dq = _dq(params, dq)
    Phi = np.asarray(Phi, dtype=float)
    theta = np.asarray(theta, dtype=float)
    r = Phi - dq.flux_scale * np.cos(theta)
    k = params.I_m * params.omega_i**2
    return (r * r / (2 * params.L)
            + dq.E_j * (1 - np.cos(2 * np.pi * Phi / dq.flux_quantum))
            + 0.5 * k * (theta - params.theta_0) ** 2)


def gradient(Phi, theta, params: DeviceParams, dq: DerivedQuantities | None = None):
    """Analytic ``(dV/dPhi, dV/dtheta)``; broadcasts over array inputs."""
    dq = _dq(params, dq)
    Phi = np.asarray(Phi, dtype=float)
    theta = np.asarray(theta, dtype=float)
    q = 2 * np.pi / dq.flux_quantum
    ba = dq.flux_scale
    r = (Phi - ba * np.cos(theta)) / params.L
    dphi = r + dq.E_j * q * np.sin(q * Phi)
    dtheta = r * ba * np.sin(theta) + params.I_m * params.omega_i**2 * (theta - params.theta_0)
    return dphi, dtheta


def hessian(Phi, theta, params: DeviceParams, dq: DerivedQuantities | None = None) -> np.ndarray:
    """Analytic second partials, shape ``(..., 2, 2)`` ordered (Phi, theta)."""
    dq = _dq(params, dq)
    Phi = np.asarray(Phi, dtype=float)
    theta = np.asarray(theta, dtype=float)
    q = 2 * np.pi / dq.flux_quantum
    ba = dq.flux_scale
    s, c = np.sin(theta), np.cos(theta)
    r = (Phi - ba * c) / params.L
    h11 = 1 / params.L + dq.E_j * q * q * np.cos(q * Phi)
    h12 = ba * s / params.L
    h22 = (ba * s) ** 2 / params.L + r * ba * c + params.I_m * params.omega_i**2
    h11, h12, h22 = np.broadcast_arrays(h11, h12, h22)
    out = np.empty(h11.shape + (2, 2))
    out[..., 0, 0] = h11
    out[..., 0, 1] = h12
    out[..., 1, 0] = h12
    out[..., 1, 1] = h22
    return out


def classify_hessian(H: np.ndarray) -> Kind:
    # sign pattern from det and a diagonal entry is independent of the mixed units
    det = H[0, 0] * H[1, 1] - H[0, 1] * H[1, 0]
    if det < 0:
        return Kind.SADDLE
    if det > 0 and H[0, 0] > 0:
        return Kind.MINIMUM
    if det > 0 and H[0, 0] < 0:
        return Kind.MAXIMUM
    # singular Hessian: report by trace, never as a minimum
    return Kind.SADDLE if H[0, 0] + H[1, 1] >= 0 else Kind.MAXIMUM


def _make_point(Phi, theta, params, dq) -> StationaryPoint:
    H = hessian(Phi, theta, params, dq)
    return StationaryPoint(
        phi=float(Phi), theta=float(theta),
        value=float(potential(Phi, theta, params, dq)),
        kind=classify_hessian(H), hessian=H,
        n_index=int(round(Phi / dq.flux_quantum)),
        branch=Branch.PLUS if theta >= 0 else Branch.MINUS,
    )


def _step_limits(dq: DerivedQuantities) -> tuple[float, float]:
    theta_spacing = dq.flux_quantum / dq.flux_scale if dq.flux_scale > dq.flux_quantum else 1.0
    return 0.25 * dq.flux_quantum, 0.25 * theta_spacing


def _newton(Phi, theta, params, dq, numba=None):
    max_phi, max_theta = _step_limits(dq)
    return _kernels.newton_refine(
        np.atleast_1d(Phi), np.atleast_1d(theta), dq.flux_scale, params.L, dq.E_j,
        dq.flux_quantum, params.I_m * params.omega_i**2, params.theta_0,
        max_iter=MAX_NEWTON_ITER, gtol=GRADIENT_TOL,
        max_step_phi=max_phi, max_step_theta=max_theta, numba=numba)


def refine_stationary_point(Phi, theta, params: DeviceParams, dq: DerivedQuantities | None = None) -> StationaryPoint:
    """Newton iteration on the gradient from ``(Phi, theta)``."""
    dq = _dq(params, dq)
    P, T, status, _ = _newton(Phi, theta, params, dq)
    if status[0] == _kernels.FAILED:
        raise NonConvergenceError(f"Newton did not converge from ({Phi!r}, {theta!r})")
    return _make_point(P[0], T[0], params, dq)


def analytic_candidates(params: DeviceParams, dq: DerivedQuantities | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Lattice points ``(n Phi0, +-acos(n Phi0 / Bx A))`` for ``|n| <= m_max``."""
    dq = _dq(params, dq)
    if dq.flux_scale == 0:
        return np.array([0.0]), np.array([params.theta_0])
    n = np.arange(-dq.m_max, dq.m_max + 1)
    ratio = n * dq.flux_quantum / dq.flux_scale
    ok = np.abs(ratio) <= 1
    n, ratio = n[ok], ratio[ok]
    t = np.arccos(ratio)
    Phi = np.concatenate([n, n]) * dq.flux_quantum
    theta = np.concatenate([t, -t])
    # boundary |n Phi0| = Bx A has a single candidate
    keep = ~((np.abs(np.concatenate([ratio, ratio])) == 1) & (np.arange(theta.size) >= t.size))
    return Phi[keep], theta[keep]


def _dedupe(points: list[StationaryPoint], dq: DerivedQuantities) -> list[StationaryPoint]:
    if not points:
        return []
    tol_phi = 1e-6 * dq.flux_quantum
    tol_theta = 1e-6 * (dq.flux_quantum / dq.flux_scale if dq.flux_scale > dq.flux_quantum else 1.0)
    P = np.array([p.phi for p in points])
    T = np.array([p.theta for p in points])
    order = np.lexsort((T, P))
    kept: list[int] = []
    for i in order:
        if kept:
            kp = np.array(kept)
            if np.any((np.abs(P[kp] - P[i]) < tol_phi) & (np.abs(T[kp] - T[i]) < tol_theta)):
                continue
        kept.append(int(i))
    return [points[i] for i in kept]


def enumerate_candidate_minima(params: DeviceParams, dq: DerivedQuantities | None = None,
                               numba: bool | None = None) -> list[StationaryPoint]:
    """Refine every analytic lattice candidate and keep those that are true minima.

    Candidates that fail to converge, or converge to a saddle or maximum, are
    dropped and logged.
    """
    dq = _dq(params, dq)
    Phi0, T0 = analytic_candidates(params, dq)
    P, T, status, _ = _newton(Phi0, T0, params, dq, numba=numba)
    ok = status != _kernels.FAILED
    failed = int((~ok).sum())
    if failed:
        log.info("%d of %d candidates did not converge", failed, ok.size)
    P, T = P[ok], T[ok]
    if P.size == 0:
        return []
    H = hessian(P, T, params, dq)
    V = potential(P, T, params, dq)
    points = []
    non_min = 0
    for i in range(P.size):
        kind = classify_hessian(H[i])
        if kind is not Kind.MINIMUM:
            non_min += 1
            continue
        points.append(StationaryPoint(
            phi=float(P[i]), theta=float(T[i]), value=float(V[i]), kind=kind, hessian=H[i],
            n_index=int(round(P[i] / dq.flux_quantum)),
            branch=Branch.PLUS if T[i] >= 0 else Branch.MINUS))
    if non_min:
        log.info("%d candidates refined to saddles or maxima", non_min)
    return _dedupe(points, dq)


def barrier(params: DeviceParams, left: StationaryPoint, right: StationaryPoint,
            dq: DerivedQuantities | None = None) -> Barrier:
    """Saddle between two minima, seeded at their midpoint.

    The height is measured from the higher of the two minima.
    """
    dq = _dq(params, dq)
    if left.location == right.location:
        raise ValueError("left and right must be distinct minima")
    seeds = [0.5] + [t for t in np.linspace(0.1, 0.9, 9) if t != 0.5]
    for t in seeds:
        P = left.phi + t * (right.phi - left.phi)
        T = left.theta + t * (right.theta - left.theta)
        P, T, status, _ = _newton(P, T, params, dq)
        if status[0] == _kernels.FAILED:
            continue
        sp = _make_point(P[0], T[0], params, dq)
        if sp.kind is Kind.SADDLE:
            return Barrier(saddle=sp, height=sp.value - max(left.value, right.value))
    raise SaddleNotFoundError("no saddle found between the given minima")


def classify_landscape(params: DeviceParams, dq: DerivedQuantities | None = None,
                       energy_tol: float | None = None) -> LandscapeClass:
    """Decide between single well, symmetric/asymmetric double well and lattice.

    ``energy_tol`` defaults to ``1e-9 * 2 Ej``.
    """
    dq = _dq(params, dq)
    tol = DEGENERACY_TOL * 2 * dq.E_j if energy_tol is None else energy_tol
    minima = sorted(enumerate_candidate_minima(params, dq), key=lambda p: (p.value, p.phi, p.theta))
    if not minima:
        raise LandscapeError("no minima found")
    v0 = minima[0].value
    degenerate = [p for p in minima if p.value - v0 < tol]

    if params.omega_i == 0:
        return LandscapeClass(Regime.MULTI_WELL_LATTICE, degenerate, None, minima)
    if len(degenerate) == 2:
        left, right = sorted(degenerate, key=lambda p: p.phi)
        return LandscapeClass(Regime.SYMMETRIC_DOUBLE_WELL, [left, right],
                              barrier(params, left, right, dq), minima)
    if len(degenerate) > 2:
        raise DegenerateLandscapeError(
            f"{len(degenerate)} minima within {tol:.3e} J of the global minimum")

    single = LandscapeClass(Regime.SINGLE_GLOBAL_WELL, [minima[0]], None, minima)
    if len(minima) == 1 or abs(v0) < tol:
        return single
    gap01 = minima[1].value - v0
    gap12 = minima[2].value - minima[1].value if len(minima) > 2 else math.inf
    if gap12 > tol and gap12 > gap01:
        left, right = sorted(minima[:2], key=lambda p: p.phi)
        return LandscapeClass(Regime.ASYMMETRIC_DOUBLE_WELL, [minima[0]],
                              barrier(params, left, right, dq), minima)
    return single


def degenerate_equilibrium_angle(params: DeviceParams, n: int = 0,
                                 dq: DerivedQuantities | None = None) -> float:
    """Equilibrium angle at which the wells at ``n`` and ``n+1`` are exactly degenerate.

    ``acos((2n+1) Phi0 / 2 Bx A)`` is the linearised answer; the curvature of
    ``cos(theta)`` leaves a small residual asymmetry there which this removes.
    """
    dq = _dq(params, dq)
    guess = math.acos((2 * n + 1) * dq.flux_quantum / (2 * dq.flux_scale))
    P0 = np.array([n, n + 1]) * dq.flux_quantum
    T0 = np.arccos(P0 / dq.flux_scale)

    def imbalance(theta_0):
        p = params.replace(theta_0=theta_0)
        P, T, status, _ = _newton(P0, T0, p, dq)
        if np.any(status == _kernels.FAILED):
            raise NonConvergenceError("well refinement failed while tuning theta_0")
        V = potential(P, T, p, dq)
        return (V[1] - V[0]) / dq.E_j

    span = 0.05 * dq.flux_quantum / dq.flux_scale
    return brentq(imbalance, guess - span, guess + span, xtol=1e-16, rtol=4 * np.finfo(float).eps)


def export_grid(params: DeviceParams, window, resolution, n_contours: int = 20,
                dq: DerivedQuantities | None = None, numba: bool | None = None) -> PotentialGrid:
    """Sample V/h (Hz) on a uniform grid.

    ``window`` is ``((phi_lo, phi_hi), (theta_lo, theta_hi))`` and
    ``resolution`` is ``(n_phi, n_theta)`` or a single int.
    """
    dq = _dq(params, dq)
    (p_lo, p_hi), (t_lo, t_hi) = window
    if isinstance(resolution, int):
        resolution = (resolution, resolution)
    n_phi, n_theta = resolution
    if n_phi < 2 or n_theta < 2:
        raise ValueError("resolution must be at least 2 per axis")
    if not (p_hi > p_lo and t_hi > t_lo):
        raise ValueError("degenerate window")
    phi_axis = np.linspace(p_lo, p_hi, n_phi)
    theta_axis = np.linspace(t_lo, t_hi, n_theta)
    V = _kernels.potential_grid(phi_axis, theta_axis, dq.flux_scale, params.L, dq.E_j,
                                dq.flux_quantum, params.I_m * params.omega_i**2,
                                params.theta_0, numba=numba)
    values = V / (2 * np.pi * dq.hbar)
    interval = float(values.max() - values.min()) / n_contours
    return PotentialGrid(phi_axis, theta_axis, values, interval, params, n_contours)
