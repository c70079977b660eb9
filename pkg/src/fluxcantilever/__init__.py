"""Flux-qubit-cantilever: potential landscape, normal modes, Gaussian ground state and a finite-difference verifier."""

from .model import (CODATA2018, DerivedQuantities, DeviceParams, InvalidParameterError,
                    PhysicalConstants, derive, reference_device, symmetric_double_well_angle)
from .potential import (Branch, Kind, Regime, StationaryPoint, barrier, classify_landscape,
                        degenerate_equilibrium_angle, enumerate_candidate_minima, export_grid,
                        flux_qubit_potential, gradient, hessian, potential)
from .harmonic import (HarmonicModes, analytic_well, decoupled_quadratic_form, mode_frequencies,
                       modes_from_hessian, taylor_coefficients)
from .groundstate import (GaussianGroundState, entanglement_entropy, ground_state_phidelta,
                          ground_state_xy, separability_check)

__version__ = "0.1.0"
