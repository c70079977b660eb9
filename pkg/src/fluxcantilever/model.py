"""Physical constants, device parameters and derived scalars (SI throughout)."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

# CODATA 2018 (exact in the 2019 SI)
PLANCK_H = 6.62607015e-34
ELEMENTARY_CHARGE = 1.602176634e-19


class InvalidParameterError(ValueError):
    """Raised when a device parameter violates a physical invariant."""


@dataclass(frozen=True)
class PhysicalConstants:
    h: float = PLANCK_H
    e: float = ELEMENTARY_CHARGE

    def __post_init__(self):
        if not (self.h > 0 and self.e > 0):
            raise InvalidParameterError("physical constants must be positive")

    @property
    def hbar(self) -> float:
        return self.h / (2.0 * math.pi)

    @property
    def flux_quantum(self) -> float:
        return self.h / (2.0 * self.e)


CODATA2018 = PhysicalConstants()


@dataclass(frozen=True)
class DeviceParams:
    """Inputs of the flux-qubit-cantilever.

    ``mass`` and ``I_m`` are taken verbatim; they are not derived from the
    geometry (see :func:`beam_mass_and_inertia` for a geometric estimate).
    """

    L: float
    C: float
    I_c: float
    length: float
    width: float
    I_m: float
    omega_i: float = 0.0
    theta_0: float = math.pi / 2
    B_x: float = 0.0
    thickness: float = 0.0
    mass: float = 0.0

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        bad = []
        for name in ("L", "C", "I_c", "I_m", "length", "width"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                bad.append(f"{name}={value!r} must be > 0")
        for name in ("omega_i", "B_x", "thickness", "mass"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                bad.append(f"{name}={value!r} must be >= 0")
        if not (math.isfinite(self.theta_0) and -math.pi <= self.theta_0 <= math.pi):
            bad.append(f"theta_0={self.theta_0!r} must lie in [-pi, pi]")
        if bad:
            raise InvalidParameterError("; ".join(bad))

    @property
    def area(self) -> float:
        return self.length * self.width

    def replace(self, **changes) -> "DeviceParams":
        data = asdict(self)
        data.update(changes)
        return DeviceParams(**data)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "DeviceParams":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidParameterError(f"unknown device fields: {sorted(unknown)}")
        try:
            return cls(**{k: float(v) for k, v in data.items()})
        except TypeError as exc:
            raise InvalidParameterError(str(exc)) from exc


@dataclass(frozen=True)
class DerivedQuantities:
    E_j: float
    beta_L: float
    mu: float
    flux_scale: float
    m_max: int
    flux_quantum: float
    hbar: float


def derive(params: DeviceParams, consts: PhysicalConstants = CODATA2018) -> DerivedQuantities:
    """Josephson energy, screening parameter, reduced mass and flux-lattice size."""
    params.validate()
    phi0 = consts.flux_quantum
    flux_scale = params.B_x * params.area
    return DerivedQuantities(
        E_j=params.I_c * phi0 / (2.0 * math.pi),
        beta_L=2.0 * math.pi * params.L * params.I_c / phi0,
        mu=math.sqrt(params.C * params.I_m),
        flux_scale=flux_scale,
        m_max=int(math.floor(flux_scale / phi0)),
        flux_quantum=phi0,
        hbar=consts.hbar,
    )


def beam_mass_and_inertia(length: float, width: float, thickness: float,
                          density: float = 8570.0) -> tuple[float, float]:
    """Uniform-beam estimate ``m = rho*l*w*t`` and ``I = m*l**2/3`` about the clamped end.

    This does not reproduce the worked-example mass (3.64e-14 kg) or moment of
    inertia (7.28e-25 kg m^2); pass those to :class:`DeviceParams` directly.
    """
    mass = density * length * width * thickness
    return mass, mass * length**2 / 3.0


def reference_device(omega_i: float = 2 * math.pi * 12000.0, theta_0: float = math.pi / 2,
                 B_x: float = 5e-2) -> DeviceParams:
    """Niobium device of the worked example (n = 0 well at theta = pi/2)."""
    return DeviceParams(
        L=100e-12, C=0.1e-12, I_c=5e-6,
        length=6e-6, width=4e-6, thickness=0.5e-6,
        mass=3.64e-14, I_m=7.28e-25,
        omega_i=omega_i, theta_0=theta_0, B_x=B_x,
    )


def symmetric_double_well_angle(params: DeviceParams, n: int = 0,
                                consts: PhysicalConstants = CODATA2018) -> float:
    """Equilibrium angle ``acos((2n+1) Phi0 / (2 Bx A))`` biasing the loop at half a flux quantum."""
    ratio = (2 * n + 1) * consts.flux_quantum / (2.0 * params.B_x * params.area)
    if abs(ratio) > 1:
        raise InvalidParameterError("field too weak for a half-flux bias at this n")
    return math.acos(ratio)


def energy_to_hz(energy: float, consts: PhysicalConstants = CODATA2018) -> float:
    return energy / consts.h
