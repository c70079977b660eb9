"""Quadratic expansion about a well: coupled flux/deflection oscillators and their normal modes."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .model import DerivedQuantities, DeviceParams, derive
from .potential import Branch, Kind, StationaryPoint, hessian, potential


class WellDomainError(ValueError):
    """The requested well does not exist (Bx A below |n| Phi0)."""


@dataclass(frozen=True)
class TaylorCoefficients:
    """``V ~ c_phiphi phi^2 + c_deltadelta delta^2 + c_phidelta phi delta``."""

    c_phiphi: float
    c_deltadelta: float
    c_phidelta: float


@dataclass(frozen=True)
class HarmonicModes:
    omega_phi: float
    omega_delta: float
    kappa: float
    mu: float
    beta: float
    omega_X: float
    omega_Y: float
    branch_sign: int
    C: float
    I_m: float
    hbar: float

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def coupled(self) -> bool:
        return self.kappa != 0


def analytic_well(params: DeviceParams, n: int = 0, branch: Branch = Branch.PLUS,
                  dq: DerivedQuantities | None = None) -> StationaryPoint:
    """The lattice point ``(n Phi0, theta^+-_n)`` as a stationary-point record (not refined)."""
    dq = derive(params) if dq is None else dq
    ba2 = dq.flux_scale**2 - (n * dq.flux_quantum) ** 2
    if ba2 < 0 or (dq.flux_scale == 0 and n != 0):
        raise WellDomainError(f"no well for n={n}: Bx A < |n| Phi0")
    if dq.flux_scale == 0:
        theta = math.pi / 2
    else:
        theta = math.acos(n * dq.flux_quantum / dq.flux_scale)
    if branch is Branch.MINUS:
        theta = -theta
    Phi = n * dq.flux_quantum
    return StationaryPoint(phi=Phi, theta=theta, value=float(potential(Phi, theta, params, dq)),
                           kind=Kind.MINIMUM, hessian=hessian(Phi, theta, params, dq),
                           n_index=n, branch=branch)


def _coupling_root(n: int, params: DeviceParams, dq: DerivedQuantities) -> float:
    ba2 = dq.flux_scale**2 - (n * dq.flux_quantum) ** 2
    if ba2 < 0:
        raise WellDomainError(f"no well for n={n}: Bx A < |n| Phi0")
    return math.sqrt(ba2)


def taylor_coefficients(well: StationaryPoint, params: DeviceParams,
                        dq: DerivedQuantities | None = None) -> TaylorCoefficients:
    """Closed-form quadratic coefficients at a lattice well ``(n Phi0, theta^+-_n)``.

    The cross term changes sign on the minus branch.
    """
    dq = derive(params) if dq is None else dq
    root = _coupling_root(well.n_index, params, dq)
    sign = -1 if well.branch is Branch.MINUS else 1
    return TaylorCoefficients(
        c_phiphi=1 / (2 * params.L) + 2 * math.pi**2 * dq.E_j / dq.flux_quantum**2,
        c_deltadelta=root**2 / (2 * params.L) + 0.5 * params.I_m * params.omega_i**2,
        c_phidelta=sign * root / params.L,
    )


def _normal_modes(omega_phi2: float, omega_delta2: float, kappa: float, params: DeviceParams,
                  dq: DerivedQuantities, sign: int) -> HarmonicModes:
    mu = dq.mu
    b = kappa / mu
    if kappa == 0:
        beta = 0.0
        wx2, wy2 = omega_phi2, omega_delta2
    else:
        # two-argument form: defined at omega_phi == omega_delta, X is always the stiffer mode
        beta = 0.5 * math.atan2(2 * b, omega_phi2 - omega_delta2)
        half_diff = 0.5 * (omega_phi2 - omega_delta2)
        wx2 = 0.5 * (omega_phi2 + omega_delta2) + math.hypot(half_diff, b)
        # product form avoids cancellation when omega_X >> omega_Y
        wy2 = (omega_phi2 * omega_delta2 - b * b) / wx2
    if not (wx2 > 0 and wy2 > 0):
        raise WellDomainError("quadratic form is not positive definite: not a minimum")
    return HarmonicModes(
        omega_phi=math.sqrt(omega_phi2), omega_delta=math.sqrt(omega_delta2), kappa=kappa,
        mu=mu, beta=beta, omega_X=math.sqrt(wx2), omega_Y=math.sqrt(wy2), branch_sign=sign,
        C=params.C, I_m=params.I_m, hbar=dq.hbar,
    )


def mode_frequencies(well: StationaryPoint, params: DeviceParams,
                     dq: DerivedQuantities | None = None) -> HarmonicModes:
    """Bare frequencies, coupling, rotation angle and normal-mode frequencies of a lattice well."""
    dq = derive(params) if dq is None else dq
    root = _coupling_root(well.n_index, params, dq)
    sign = -1 if well.branch is Branch.MINUS else 1
    omega_phi2 = (1 / params.L + 4 * math.pi**2 * dq.E_j / dq.flux_quantum**2) / params.C
    omega_delta2 = root**2 / (params.I_m * params.L) + params.omega_i**2
    return _normal_modes(omega_phi2, omega_delta2, sign * root / params.L, params, dq, sign)


def modes_from_hessian(H: np.ndarray, params: DeviceParams,
                       dq: DerivedQuantities | None = None) -> HarmonicModes:
    """Normal modes for an arbitrary minimum, e.g. a well shifted off the lattice point."""
    dq = derive(params) if dq is None else dq
    kappa = float(H[0, 1])
    sign = -1 if kappa < 0 else 1
    return _normal_modes(float(H[0, 0]) / params.C, float(H[1, 1]) / params.I_m, kappa, params, dq, sign)


def rotation_frequencies(modes: HarmonicModes) -> tuple[float, float]:
    """omega_X^2, omega_Y^2 evaluated through the rotation angle directly.

    Loses precision when omega_X >> omega_Y; kept as an independent check.
    """
    c2 = math.cos(modes.beta) ** 2
    s2 = math.sin(modes.beta) ** 2
    s2b = math.sin(2 * modes.beta)
    b = modes.kappa / modes.mu
    wp2, wd2 = modes.omega_phi**2, modes.omega_delta**2
    return wp2 * c2 + wd2 * s2 + b * s2b, wp2 * s2 + wd2 * c2 - b * s2b


def coupled_quadratic_form(modes: HarmonicModes) -> np.ndarray:
    """Potential-energy matrix in (phi, delta): ``V = v^T Q v``."""
    return np.array([
        [0.5 * modes.C * modes.omega_phi**2, 0.5 * modes.kappa],
        [0.5 * modes.kappa, 0.5 * modes.I_m * modes.omega_delta**2],
    ])


def xy_transform(modes: HarmonicModes) -> np.ndarray:
    """Matrix ``T`` with ``(X, Y) = T (phi, delta)``: mass scaling followed by rotation by beta."""
    r = (modes.C / modes.I_m) ** 0.25
    c, s = math.cos(modes.beta), math.sin(modes.beta)
    return np.array([[c * r, s / r], [-s * r, c / r]])


def decoupled_quadratic_form(modes: HarmonicModes) -> np.ndarray:
    """The coupled form rewritten in (X, Y); off-diagonal vanishes for the chosen beta."""
    Tinv = np.linalg.inv(xy_transform(modes))
    return Tinv.T @ coupled_quadratic_form(modes) @ Tinv


def anharmonicity_ratio(point: StationaryPoint, modes: HarmonicModes, params: DeviceParams,
                        dq: DerivedQuantities | None = None) -> float:
    """Largest |cubic Taylor term| / quadratic term at one ground-state width.

    Diagnostic for how far the quadratic expansion can be trusted.
    """
    dq = derive(params) if dq is None else dq
    q = 2 * math.pi / dq.flux_quantum
    ba = dq.flux_scale
    s, c = math.sin(point.theta), math.cos(point.theta)
    r = point.phi - ba * c
    v_ppp = -dq.E_j * q**3 * math.sin(q * point.phi)
    v_ppt = 0.0
    v_ptt = ba * c / params.L
    v_ttt = (3 * ba**2 * s * c - r * ba * s) / params.L
    H = point.hessian
    sig_phi = math.sqrt(modes.hbar / (2 * modes.C * modes.omega_phi))
    sig_delta = math.sqrt(modes.hbar / (2 * modes.I_m * modes.omega_delta))
    worst = 0.0
    for sp, sd in ((1, 1), (1, -1), (1, 0), (0, 1)):
        x, y = sp * sig_phi, sd * sig_delta
        quad = 0.5 * (H[0, 0] * x * x + 2 * H[0, 1] * x * y + H[1, 1] * y * y)
        cubic = (v_ppp * x**3 + 3 * v_ppt * x * x * y + 3 * v_ptt * x * y * y + v_ttt * y**3) / 6
        if quad > 0:
            worst = max(worst, abs(cubic) / quad)
    return worst
