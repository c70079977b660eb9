"""Analytic Gaussian ground state of one well and its flux/deflection entanglement."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .harmonic import HarmonicModes, xy_transform

SEPARABILITY_TOL = 1e-12


class NotPositiveDefiniteError(ValueError):
    pass


@dataclass(frozen=True)
class GaussianGroundState:
    """``Psi(phi, delta) = norm * exp(-(a_phiphi phi^2 + a_deltadelta delta^2 + a_phidelta phi delta))``.

    ``phi`` and ``delta`` are offsets from ``(center_phi, center_theta)``.
    """

    a_phiphi: float
    a_deltadelta: float
    a_phidelta: float
    norm: float
    modes: HarmonicModes | None = None
    center_phi: float = 0.0
    center_theta: float = 0.0

    def __post_init__(self):
        if not (self.a_phiphi > 0 and self.a_deltadelta > 0
                and 4 * self.a_phiphi * self.a_deltadelta > self.a_phidelta**2):
            raise NotPositiveDefiniteError("exponent is not positive definite")

    @classmethod
    def from_coefficients(cls, a_phiphi, a_deltadelta, a_phidelta, **kw) -> "GaussianGroundState":
        det = a_phiphi * a_deltadelta - 0.25 * a_phidelta**2
        if not (a_phiphi > 0 and det > 0):
            raise NotPositiveDefiniteError("exponent is not positive definite")
        norm = (4 * det / math.pi**2) ** 0.25
        return cls(a_phiphi, a_deltadelta, a_phidelta, norm, **kw)

    @property
    def correlation(self) -> float:
        """Dimensionless cross coefficient ``a_phidelta / (2 sqrt(a_phiphi a_deltadelta))``."""
        return self.a_phidelta / (2 * math.sqrt(self.a_phiphi * self.a_deltadelta))

    def covariance(self) -> np.ndarray:
        """Covariance of |Psi|^2 in (phi, delta)."""
        A = np.array([[self.a_phiphi, 0.5 * self.a_phidelta],
                      [0.5 * self.a_phidelta, self.a_deltadelta]])
        return np.linalg.inv(4 * A)

    def natural_scales(self) -> tuple[float, float]:
        """Marginal standard deviations of |Psi|^2."""
        cov = self.covariance()
        return math.sqrt(cov[0, 0]), math.sqrt(cov[1, 1])

    def __call__(self, phi, delta):
        phi = np.asarray(phi, dtype=float)
        delta = np.asarray(delta, dtype=float)
        return self.norm * np.exp(-(self.a_phiphi * phi**2 + self.a_deltadelta * delta**2
                                    + self.a_phidelta * phi * delta))

    def at(self, Phi, theta):
        """Evaluate at absolute landscape coordinates."""
        return self(np.asarray(Phi) - self.center_phi, np.asarray(theta) - self.center_theta)


def ground_state_xy(modes: HarmonicModes):
    """Product of the two normal-mode Gaussians as a function of (X, Y)."""
    if not (modes.omega_X > 0 and modes.omega_Y > 0):
        raise NotPositiveDefiniteError("normal-mode frequencies must be positive")
    ax = modes.mu * modes.omega_X / (2 * modes.hbar)
    ay = modes.mu * modes.omega_Y / (2 * modes.hbar)
    norm = (modes.mu**2 * modes.omega_X * modes.omega_Y / (math.pi**2 * modes.hbar**2)) ** 0.25

    def psi(X, Y):
        X = np.asarray(X, dtype=float)
        Y = np.asarray(Y, dtype=float)
        return norm * np.exp(-ax * X**2 - ay * Y**2)

    return psi


def to_xy(phi, delta, modes: HarmonicModes):
    T = xy_transform(modes)
    phi = np.asarray(phi, dtype=float)
    delta = np.asarray(delta, dtype=float)
    return T[0, 0] * phi + T[0, 1] * delta, T[1, 0] * phi + T[1, 1] * delta


def ground_state_phidelta(modes: HarmonicModes, center: tuple[float, float] = (0.0, 0.0)) -> GaussianGroundState:
    hb = modes.hbar
    c2, s2 = math.cos(modes.beta) ** 2, math.sin(modes.beta) ** 2
    wx, wy = modes.omega_X, modes.omega_Y
    return GaussianGroundState(
        a_phiphi=modes.C * (wx * c2 + wy * s2) / (2 * hb),
        a_deltadelta=modes.I_m * (wx * s2 + wy * c2) / (2 * hb),
        a_phidelta=math.sqrt(modes.C * modes.I_m) * (wx - wy) * math.sin(2 * modes.beta) / (2 * hb),
        norm=(modes.C * modes.I_m * wx * wy / (math.pi**2 * hb**2)) ** 0.25,
        modes=modes, center_phi=center[0], center_theta=center[1],
    )


def separability_check(state: GaussianGroundState, tol: float = SEPARABILITY_TOL) -> bool:
    return abs(state.correlation) < tol


@dataclass(frozen=True)
class EntanglementReport:
    separable: bool
    cross_coefficient: float
    schmidt_parameter: float
    entropy: float

    def to_dict(self) -> dict:
        return {"separable": self.separable, "cross_coefficient": self.cross_coefficient,
                "schmidt_parameter": self.schmidt_parameter, "entropy_nats": self.entropy}


def schmidt_parameter(r: float) -> float:
    """Ratio ``xi`` of the geometric Schmidt spectrum ``(1 - xi) xi^k``."""
    s = math.sqrt(1 - r * r)
    return r * r / (1 + s) ** 2


def entropy_from_xi(xi: float) -> float:
    if xi == 0:
        return 0.0
    return -math.log1p(-xi) - xi * math.log(xi) / (1 - xi)


def entanglement_entropy(state: GaussianGroundState, tol: float = SEPARABILITY_TOL) -> EntanglementReport:
    """Von Neumann entropy (nats) of either reduced state.

    A real two-mode Gaussian with correlation ``r`` has reduced states that
    are thermal with symplectic eigenvalue ``1 / (2 sqrt(1 - r^2))``.
    """
    r = state.correlation
    if not abs(r) < 1:
        raise NotPositiveDefiniteError("exponent is not positive definite")
    xi = schmidt_parameter(r)
    entropy = entropy_from_xi(xi)
    return EntanglementReport(separable=abs(r) < tol, cross_coefficient=state.a_phidelta,
                              schmidt_parameter=xi, entropy=entropy)


def svd_entropy(psi: np.ndarray) -> float:
    """Entanglement entropy of a sampled bipartite wavefunction ``psi[i_phi, i_delta]``."""
    sv = np.linalg.svd(np.asarray(psi, dtype=float), compute_uv=False)
    p = sv**2
    p = p / p.sum()
    p = p[p > 0]
    return float(-(p * np.log(p)).sum())


@dataclass(frozen=True)
class WavefunctionGrid:
    phi_axis: np.ndarray
    delta_axis: np.ndarray
    psi: np.ndarray
    prob: np.ndarray


def wavefunction_grid(state: GaussianGroundState, window, resolution) -> WavefunctionGrid:
    """Sample Psi and |Psi|^2 over ``window = ((phi_lo, phi_hi), (delta_lo, delta_hi))`` in local offsets."""
    (p_lo, p_hi), (d_lo, d_hi) = window
    if isinstance(resolution, int):
        resolution = (resolution, resolution)
    if not (p_hi > p_lo and d_hi > d_lo):
        raise ValueError("degenerate window")
    if min(resolution) < 2:
        raise ValueError("resolution must be at least 2 per axis")
    phi = np.linspace(p_lo, p_hi, resolution[0])
    delta = np.linspace(d_lo, d_hi, resolution[1])
    psi = state(phi[:, None], delta[None, :])
    return WavefunctionGrid(phi, delta, psi, psi**2)


def default_window(state: GaussianGroundState, n_sigma: float = 6.0):
    sp, sd = state.natural_scales()
    return ((-n_sigma * sp, n_sigma * sp), (-n_sigma * sd, n_sigma * sd))
