"""Command-line front end.

    fluxcant analyze --config run.json
    fluxcant grid --config fig2.json --output-dir out/
    fluxcant reproduce-paper --json
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path

import numpy as np

from . import io
from .groundstate import default_window, entanglement_entropy, ground_state_phidelta, wavefunction_grid
from .harmonic import (WellDomainError, analytic_well, anharmonicity_ratio, mode_frequencies,
                       taylor_coefficients)
from .model import DeviceParams, InvalidParameterError, derive, reference_device, symmetric_double_well_angle
from .potential import (Branch, LandscapeError, classify_landscape, degenerate_equilibrium_angle,
                        export_grid)
from .schrodinger import (GridSpec, SchrodingerError, cat_state_fidelity, discretize, double_well_grid,
                          solve_lowest, synthetic_params, tunnel_splitting, well_window)

EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG, EXIT_COMPUTE, EXIT_IO = 0, 1, 2, 3, 4

THETA_MODES = ("value", "lattice", "half_flux", "degenerate")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    device: DeviceParams = field(default_factory=reference_device)
    n: int = 0
    branch: str = "plus"
    theta_0_mode: str = "value"
    theta_0_offset: float = 0.0
    window: list | None = None
    resolution: list = field(default_factory=lambda: [101, 101])
    n_contours: int = 20
    sweep: dict | None = None
    synthetic: dict | None = None
    grid: dict = field(default_factory=lambda: {"n_phi": 128, "n_theta": 128, "n_sigma": 8.0})
    eigen: dict = field(default_factory=lambda: {"k": 4, "potential": "full", "seed": 0})
    output_format: str = "csv"
    tolerance: float | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["device"] = self.device.to_dict()
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        data = dict(data)
        try:
            base = reference_device().to_dict()
            base.update(data.pop("device", {}))
            cfg = cls(device=DeviceParams.from_dict(base), **data)
        except InvalidParameterError as exc:
            raise ConfigError(str(exc)) from exc
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.branch not in ("plus", "minus"):
            raise ConfigError("branch must be 'plus' or 'minus'")
        if self.theta_0_mode not in THETA_MODES:
            raise ConfigError(f"theta_0_mode must be one of {THETA_MODES}")
        if self.output_format not in ("csv", "json"):
            raise ConfigError("output_format must be csv or json")
        if len(self.resolution) != 2 or min(self.resolution) < 2:
            raise ConfigError("resolution must be two integers >= 2")

    @property
    def branch_enum(self) -> Branch:
        return Branch(self.branch)


def resolve_device(cfg: RunConfig) -> DeviceParams:
    """Apply synthetic rescaling and the equilibrium-angle rule to the configured device."""
    p = cfg.device
    if cfg.synthetic:
        s = cfg.synthetic
        p = synthetic_params(p, s["kinetic_phi"], s.get("kinetic_theta", s["kinetic_phi"]), s.get("tilt"))
    mode = cfg.theta_0_mode
    if mode == "lattice":
        p = p.replace(theta_0=analytic_well(p, cfg.n, cfg.branch_enum).theta)
    elif mode == "half_flux":
        p = p.replace(theta_0=symmetric_double_well_angle(p, cfg.n))
    elif mode == "degenerate":
        p = p.replace(theta_0=degenerate_equilibrium_angle(p, cfg.n))
    if cfg.theta_0_offset:
        p = p.replace(theta_0=p.theta_0 + cfg.theta_0_offset)
    return p


def _hz(omega: float) -> float:
    return omega / (2 * math.pi)


def _default_window(p: DeviceParams, dq, n: int):
    spacing = dq.flux_quantum / dq.flux_scale if dq.flux_scale > dq.flux_quantum else 0.5
    center = n * dq.flux_quantum
    return [[center - 2 * dq.flux_quantum, center + 2 * dq.flux_quantum],
            [p.theta_0 - 2 * spacing, p.theta_0 + 2 * spacing]]


def _point(sp) -> dict:
    return {"phi_wb": sp.phi, "theta_rad": sp.theta, "V_J": sp.value, "kind": sp.kind.value,
            "n": sp.n_index, "branch": sp.branch.value}


def analysis_report(cfg: RunConfig) -> dict:
    p = resolve_device(cfg)
    dq = derive(p)
    well = analytic_well(p, cfg.n, cfg.branch_enum, dq)
    modes = mode_frequencies(well, p, dq)
    coeffs = taylor_coefficients(well, p, dq)
    landscape = classify_landscape(p, dq)
    report = {
        "device": p.to_dict(),
        "derived": {"E_j_J": dq.E_j, "E_j_over_h_hz": dq.E_j / (2 * math.pi * dq.hbar),
                    "beta_L": dq.beta_L, "mu": dq.mu, "flux_scale_wb": dq.flux_scale, "m_max": dq.m_max},
        "well": {"n": cfg.n, "branch": cfg.branch, "phi_wb": well.phi, "theta_rad": well.theta},
        "taylor": asdict(coeffs),
        "modes": {**modes.to_dict(),
                  "omega_phi_hz": _hz(modes.omega_phi), "omega_delta_hz": _hz(modes.omega_delta),
                  "omega_X_hz": _hz(modes.omega_X), "omega_Y_hz": _hz(modes.omega_Y),
                  "uncoupled": modes.kappa == 0,
                  "anharmonicity": anharmonicity_ratio(well, modes, p, dq)},
        "landscape": {
            "regime": landscape.regime.value,
            "n_minima": len(landscape.minima),
            "global_minima": [_point(m) for m in landscape.global_minima[:10]],
            "barrier": None if landscape.barrier is None else {
                "saddle": _point(landscape.barrier.saddle),
                "height_J": landscape.barrier.height,
                "height_over_Ej": landscape.barrier.height / dq.E_j},
        },
    }
    return report


def cmd_analyze(cfg: RunConfig, out: Path, args) -> int:
    report = analysis_report(cfg)
    io.write_json(out / "analyze.json", report)
    d, m = report["derived"], report["modes"]
    lines = [
        f"beta_L        {d['beta_L']:.6g}",
        f"E_j           {d['E_j_J']:.6e} J  ({d['E_j_over_h_hz']:.6e} Hz)",
        f"m_max         {d['m_max']}",
        f"kappa         {m['kappa']:.6g} A" + ("  (uncoupled)" if m["uncoupled"] else ""),
        f"omega_phi     2pi x {m['omega_phi_hz']:.6g} rad/s",
        f"omega_delta   2pi x {m['omega_delta_hz']:.6g} rad/s",
        f"omega_X       2pi x {m['omega_X_hz']:.6g} rad/s",
        f"omega_Y       2pi x {m['omega_Y_hz']:.6g} rad/s",
        f"beta          {m['beta']:.6g} rad",
        f"landscape     {report['landscape']['regime']}",
    ]
    print("\n".join(lines))
    return EXIT_OK


def cmd_grid(cfg: RunConfig, out: Path, args) -> int:
    p = resolve_device(cfg)
    dq = derive(p)
    window = cfg.window or _default_window(p, dq, cfg.n)
    grid = export_grid(p, window, tuple(cfg.resolution), cfg.n_contours, dq)
    for path in io.potential_grid_files(grid, out, fmt_=cfg.output_format):
        print("Wrote", path)
    return EXIT_OK


def sweep_rows(cfg: RunConfig) -> list[list]:
    spec = cfg.sweep or {}
    if "B_x" not in spec:
        raise ConfigError("sweep needs {'B_x': [start, stop, count]}")
    start, stop, count = spec["B_x"]
    count = int(count)
    if count < 1 or start < 0 or stop < start:
        raise ConfigError("invalid B_x sweep range")
    rows = []
    base = resolve_device(cfg)
    for bx in np.linspace(start, stop, count):
        p = base.replace(B_x=float(bx))
        dq = derive(p)
        try:
            m = mode_frequencies(analytic_well(p, cfg.n, cfg.branch_enum, dq), p, dq)
        except WellDomainError:
            rows.append([float(bx), math.nan, math.nan, math.nan, math.nan, f"invalid_for_n={cfg.n}"])
            continue
        rows.append([float(bx), m.kappa, m.omega_delta, m.omega_X, m.omega_Y, "ok"])
    return rows


def cmd_sweep(cfg: RunConfig, out: Path, args) -> int:
    rows = sweep_rows(cfg)
    header = ["B_x_T", "kappa_A", "omega_delta_rad_s", "omega_X_rad_s", "omega_Y_rad_s", "status"]
    if cfg.output_format == "csv":
        path = io.write_rows(out / "sweep.csv", header, rows)
    else:
        path = io.write_json(out / "sweep.json", [dict(zip(header, r)) for r in rows])
    print("Wrote", path)
    return EXIT_OK


def cmd_groundstate(cfg: RunConfig, out: Path, args) -> int:
    p = resolve_device(cfg)
    dq = derive(p)
    well = analytic_well(p, cfg.n, cfg.branch_enum, dq)
    modes = mode_frequencies(well, p, dq)
    state = ground_state_phidelta(modes)
    report = entanglement_entropy(state, cfg.tolerance or 1e-12)
    sp, sd = state.natural_scales()
    doc = {
        "well": {"n": cfg.n, "branch": cfg.branch, "phi_wb": well.phi, "theta_rad": well.theta},
        "si": {"a_phiphi": state.a_phiphi, "a_deltadelta": state.a_deltadelta,
               "a_phidelta": state.a_phidelta, "norm": state.norm},
        "natural": {"phi_scale_wb": sp, "delta_scale_rad": sd,
                    "a_phiphi": state.a_phiphi * sp**2, "a_deltadelta": state.a_deltadelta * sd**2,
                    "a_phidelta": state.a_phidelta * sp * sd},
        "correlation": state.correlation,
        **report.to_dict(),
    }
    io.write_json(out / "groundstate.json", doc)
    wg = wavefunction_grid(state, default_window(state), tuple(cfg.resolution))
    io.write_field_csv(out / "groundstate_grid.csv", ["phi_wb", "delta_rad", "psi", "abs_psi_sq"],
                       wg.phi_axis, wg.delta_axis, wg.psi, wg.prob)
    print(f"separable={report.separable} entropy={report.entropy:.6e} nats")
    return EXIT_OK


def _write_states(sol, out: Path, stem: str) -> list[str]:
    names = []
    for i, psi in enumerate(sol.states):
        name = f"{stem}_state{i}.csv"
        io.write_field_csv(out / name, ["phi", "theta", "psi"], sol.grid.phi_axis, sol.grid.theta_axis, psi)
        names.append(name)
    return names


def cmd_doublewell(cfg: RunConfig, out: Path, args) -> int:
    p = resolve_device(cfg)
    dq = derive(p)
    g = cfg.grid
    grid = double_well_grid(p, int(g["n_phi"]), int(g.get("n_theta", g["n_phi"])), dq,
                            float(g.get("n_sigma", 8.0)))
    ts = tunnel_splitting(p, grid, dq, require_symmetric=cfg.theta_0_offset == 0)
    fid = cat_state_fidelity(p, grid, dq, solution=ts.solution)
    manifest = {"device": p.to_dict(), **ts.to_manifest(), "cat_state_fidelity": fid,
                **ts.solution.to_manifest()}
    manifest["state_files"] = _write_states(ts.solution, out, "doublewell")
    io.write_json(out / "doublewell.json", manifest)
    print(f"delta_E={ts.delta_E:.6e} J ({ts.frequency:.6e} Hz) fidelity={fid:.6f}")
    return EXIT_OK


def cmd_eigen(cfg: RunConfig, out: Path, args) -> int:
    p = resolve_device(cfg)
    dq = derive(p)
    well = analytic_well(p, cfg.n, cfg.branch_enum, dq)
    modes = mode_frequencies(well, p, dq)
    g = cfg.grid
    window = cfg.window or well_window([well], p, dq, n_sigma=float(g.get("n_sigma", 8.0)))
    grid = GridSpec(tuple(map(tuple, window)), int(g["n_phi"]), int(g.get("n_theta", g["n_phi"])))
    potential_fn = None
    if cfg.eigen.get("potential", "full") == "harmonic":
        c = taylor_coefficients(well, p, dq)

        def potential_fn(P, T):
            x, y = P - well.phi, T - well.theta
            return c.c_phiphi * x * x + c.c_deltadelta * y * y + c.c_phidelta * x * y
    sol = solve_lowest(discretize(p, grid, dq, potential_fn), k=int(cfg.eigen.get("k", 4)),
                       seed=int(cfg.eigen.get("seed", 0)))
    manifest = {"device": p.to_dict(), "potential": cfg.eigen.get("potential", "full"),
                "harmonic_E0_J": dq.hbar * (modes.omega_X + modes.omega_Y) / 2,
                **sol.to_manifest()}
    manifest["state_files"] = _write_states(sol, out, "eigen")
    io.write_json(out / "eigen.json", manifest)
    print("E0 =", f"{sol.energies[0]:.9e} J", "harmonic:", f"{manifest['harmonic_E0_J']:.9e} J")
    return EXIT_OK


def load_published_values() -> dict:
    text = resources.files("fluxcantilever").joinpath("data/published_values.json").read_text(encoding="utf-8")
    return json.loads(text)


def reproduce_rows(overrides: dict | None = None, tolerance: float | None = None) -> list[dict]:
    ref = load_published_values()
    rows = []
    for case in ref["cases"]:
        dev = dict(ref["device"])
        dev["omega_i"] = 2 * math.pi * case["omega_i_hz"]
        dev.update(overrides or {})
        p = DeviceParams.from_dict(dev)
        dq = derive(p)
        m = mode_frequencies(analytic_well(p, 0, Branch.PLUS, dq), p, dq)
        got = {"beta_L": dq.beta_L, "kappa": m.kappa, "omega_phi": _hz(m.omega_phi),
               "omega_delta": _hz(m.omega_delta), "omega_X": _hz(m.omega_X), "omega_Y": _hz(m.omega_Y)}
        for r in case["rows"]:
            value = got[r["quantity"]]
            tol = r["rel_tol"] if tolerance is None else tolerance
            rel = (value - r["expected"]) / r["expected"]
            rows.append({"case": case["name"], "quantity": r["quantity"], "expected": r["expected"],
                         "computed": value, "rel_delta": rel, "rel_tol": tol, "unit": r["unit"],
                         "pass": abs(rel) <= tol, "provenance": "published", "source": r["source"]})
    return rows


def cmd_reproduce(cfg: RunConfig, out: Path, args) -> int:
    rows = reproduce_rows(args.overrides or None, args.tolerance)
    io.write_json(out / "reproduce_paper.json", rows)
    if args.json:
        sys.stdout.write(io.dumps(rows))
    else:
        print(f"{'case':<28}{'quantity':<13}{'expected':>14}{'computed':>18}{'rel delta':>12}  result")
        for r in rows:
            print(f"{r['case']:<28}{r['quantity']:<13}{r['expected']:>14.6g}{r['computed']:>18.9g}"
                  f"{r['rel_delta']:>12.2e}  {'PASS' if r['pass'] else 'FAIL'}")
    return EXIT_OK if all(r["pass"] for r in rows) else EXIT_MISMATCH


COMMANDS = {
    "analyze": cmd_analyze,
    "grid": cmd_grid,
    "sweep": cmd_sweep,
    "groundstate": cmd_groundstate,
    "doublewell": cmd_doublewell,
    "eigen": cmd_eigen,
    "reproduce-paper": cmd_reproduce,
}


def _parse_set(items) -> dict:
    out = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        try:
            out[key.strip()] = float(value)
        except ValueError as exc:
            raise ConfigError(f"--set {key}: not a number") from exc
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fluxcant", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, help="JSON run configuration")
        sp.add_argument("--output-dir", type=Path, default=Path("fluxcant-output"))
        sp.add_argument("--format", choices=["csv", "json"], default=None)
        sp.add_argument("--tolerance", type=float, default=None,
                        help="relative tolerance (reproduce-paper) or separability threshold")
        sp.add_argument("--set", action="append", metavar="FIELD=VALUE",
                        help="override a device field, e.g. --set L=110e-12")
        if name == "reproduce-paper":
            sp.add_argument("--json", action="store_true", help="machine-readable rows on stdout")
    return ap


def load_config(args) -> RunConfig:
    data = {}
    if args.config is not None:
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: {exc}") from exc
    overrides = _parse_set(args.set)
    if overrides:
        data.setdefault("device", {}).update(overrides)
    if args.format:
        data["output_format"] = args.format
    if args.tolerance is not None:
        data["tolerance"] = args.tolerance
    args.overrides = overrides
    return RunConfig.from_dict(data)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO if not isinstance(exc, FileNotFoundError) else EXIT_CONFIG
    except (ConfigError, InvalidParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.output_dir
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        return COMMANDS[args.command](cfg, out, args)
    except (ConfigError, InvalidParameterError, WellDomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (LandscapeError, SchrodingerError) as exc:
        print(f"computation error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
