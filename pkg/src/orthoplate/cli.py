"""Command-line front end: ``orthoplate <command> [options]``.

Exit codes: 0 success, 2 invalid input, 3 numerical incompleteness.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import dynamics
from . import elasticity as el
from .config import ConfigError, load_config, material_from_values, run_config
from .fields import DisplacementField, Grid, GridError, read_grid_csv, write_grid_csv
from .plate import PlateError, bending_energy, total_energy
from .spectral import IncompleteSpectrumError, Parity, SpectralError, assemble_spectrum, frequency, solve_mode_eigs
from .spectral.static import DEFAULT_M_MAX, GridLoad, SineLoad, TruncationWarning, UniformLoad, static_solve

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3
VERT_COLUMNS, TORS_COLUMNS = 10, 8
ROTATION_ANGLES = (0.7, np.pi / 5, -2.3)


class InputError(ValueError):
    pass


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _grid(args, rc) -> Grid:
    nx, ny = rc.nx, rc.ny
    if args.grid:
        try:
            nx, ny = (int(s) for s in args.grid.split(","))
        except ValueError:
            raise InputError(f"--grid expects 'nx,ny', got {args.grid!r}") from None
    return Grid(rc.model.L, rc.model.ell, nx, ny)


def _run_config(args):
    values = load_config(args.config)
    rc = run_config(values)
    return values, rc


def _m_max(args, rc) -> int:
    return args.m_max if args.m_max is not None else rc.m_max


def _k_per_mode(args, rc) -> int:
    return args.k_per_mode if args.k_per_mode is not None else rc.k_per_mode


# ---------------------------------------------------------------------------
# material
# ---------------------------------------------------------------------------


def _rel(a, b) -> float:
    return float(np.abs(np.asarray(a) - np.asarray(b)).max() / np.abs(b).max())


def material_report(values: dict) -> dict:
    k = material_from_values(values)
    transverse = isinstance(k, el.TransverselyIsotropicConstants)
    k9 = k.expand() if transverse else k
    S = el.compliance_matrix(k9)
    C = el.reinforced_stiffness(k) if transverse else el.stiffness_closed_form(k9)
    C_inv = np.linalg.inv(S)
    d_closed, d_det = el.delta(k9), el.delta_determinant(k9)
    ortho = el.is_orthotropic(C)
    el.check_admissible(C)
    rot = {
        f"x{axis + 1}": max(el.rotation_residual(C, el.rotation_about(axis, t)) for t in ROTATION_ANGLES)
        for axis in range(3)
    }
    c2323 = el.c2323_residual(C)
    checks = {
        "closed_form_vs_inverse": _rel(C, C_inv) <= el.INVERSION_TOL,
        "stiffness_times_compliance": _rel(C @ S, np.eye(6)) <= el.INVERSION_TOL,
        "delta_two_ways": abs(d_closed - d_det) <= el.STRUCTURAL_TOL * abs(d_det),
        "orthotropic_pattern": ortho.orthotropic,
        "reflection_invariance": el.commutes_with_reflections(C),
    }
    if transverse:
        checks["c2323_identity"] = c2323 <= el.STRUCTURAL_TOL
        checks["x1_rotation_invariance"] = rot["x1"] <= el.INVERSION_TOL
    return {
        "kind": "transversely isotropic" if transverse else "orthotropic",
        "stiffness": C.tolist(),
        "stiffness_by_inversion": C_inv.tolist(),
        "compliance": S.tolist(),
        "delta": d_closed,
        "delta_determinant": d_det,
        "orthotropy_residual": ortho.residual,
        "reflection_residual": ortho.reflection_residual,
        "c2323_residual": c2323,
        "rotation_residual": rot,
        "rotation_invariant_axes": [a for a, r in rot.items() if r <= el.INVERSION_TOL],
        "checks": checks,
        "passed": all(checks.values()),
    }


def _matrix_text(name, A) -> str:
    rows = "\n".join("  " + " ".join(f"{v: .6e}" for v in row) for row in A)
    return f"{name}:\n{rows}"


def cmd_material(args) -> int:
    values = load_config(args.config)
    rep = material_report(values)
    if args.out:
        out = _out_dir(args)
        (out / "stiffness.csv").write_text(el.matrix_to_csv(np.array(rep["stiffness"])))
        (out / "compliance.csv").write_text(el.matrix_to_csv(np.array(rep["compliance"])))
    if args.json:
        print(_dump(rep))
    else:
        print(f"material: {rep['kind']}")
        print(_matrix_text("C (closed form)", rep["stiffness"]))
        print(_matrix_text("C (inverse of S)", rep["stiffness_by_inversion"]))
        print(_matrix_text("S", rep["compliance"]))
        print(f"delta = {rep['delta']:.12e} (determinant {rep['delta_determinant']:.12e})")
        print(f"orthotropy residual = {rep['orthotropy_residual']:.3e}, reflections {rep['reflection_residual']:.3e}")
        print(f"C2323 residual = {rep['c2323_residual']:.3e}")
        for axis, r in rep["rotation_residual"].items():
            print(f"rotation residual about {axis} = {r:.3e}")
        for name, ok in rep["checks"].items():
            print(f"[{'PASS' if ok else 'FAIL'}] {name}")
    return EXIT_OK if rep["passed"] else EXIT_INPUT


# ---------------------------------------------------------------------------
# spectrum
# ---------------------------------------------------------------------------


def spectrum_summary(spectrum_) -> dict:
    vert = spectrum_.vertical
    tors = spectrum_.torsional
    nv = min(VERT_COLUMNS, spectrum_.m_max)
    nt = min(TORS_COLUMNS, spectrum_.m_max)
    return {
        "vertical_hz": [vert[m].nu_hz for m in range(1, nv + 1)],
        "torsional_hz": [tors[m].nu_hz for m in range(1, nt + 1)],
        "m_max": spectrum_.m_max,
        "k_per_mode": spectrum_.k_per_mode,
        "certified_below_hz": float(frequency(spectrum_.cutoff, spectrum_.M, spectrum_.ell)),
        "certified_count": len(spectrum_.certified),
    }


def write_spectrum_csv(path, spectrum_) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("rank,m,parity,lambda_N_per_m3,frequency_hz\n")
        for rank, p in enumerate(spectrum_.pairs, start=1):
            fh.write(f"{rank},{p.m},{p.parity.value},{p.lam:.17g},{p.nu_hz:.17g}\n")


def format_table(summary: dict) -> str:
    vert, tors = summary["vertical_hz"], summary["torsional_hz"]
    n = max(len(vert), len(tors))
    width = 8
    head = "m".ljust(6) + "".join(str(m).rjust(width) for m in range(1, n + 1))
    rows = [head]
    for name, vals in (("vert", vert), ("tors", tors)):
        cells = [f"{v:.4f}".rjust(width) for v in vals] + ["-".rjust(width)] * (n - len(vals))
        rows.append(name.ljust(6) + "".join(cells))
    return "\n".join(rows)


def cmd_spectrum(args) -> int:
    _, rc = _run_config(args)
    spectrum_ = assemble_spectrum(rc.model, _m_max(args, rc), _k_per_mode(args, rc))
    summary = spectrum_summary(spectrum_)
    out = _out_dir(args)
    write_spectrum_csv(out / "spectrum.csv", spectrum_)
    (out / "spectrum.json").write_text(_dump(summary) + "\n")
    if args.json:
        print(_dump(summary))
    else:
        print("frequencies (Hz)")
        print(format_table(summary))
        print(f"{summary['certified_count']} eigenvalues certified below {summary['certified_below_hz']:.4f} Hz")
    return EXIT_OK


# ---------------------------------------------------------------------------
# modeshape
# ---------------------------------------------------------------------------


def cmd_modeshape(args) -> int:
    _, rc = _run_config(args)
    grid = _grid(args, rc)
    parity = Parity.parse(args.parity)
    if args.m < 1 or args.index < 1:
        raise InputError("mode number and index must be positive")
    pair = solve_mode_eigs(rc.model, args.m, parity, args.index)[-1]
    out = _out_dir(args)
    stem = f"modeshape_m{args.m}_{parity.value}_{args.index}"
    field = pair.field(grid.x, grid.y)
    field.to_csv(out / f"{stem}.csv")
    with open(out / f"{stem}_profile.csv", "w", newline="\n") as fh:
        fh.write("y,Y\n")
        np.savetxt(fh, np.column_stack([grid.y, pair.samples(grid.y)]), fmt="%.17g", delimiter=",")
    info = {"m": pair.m, "parity": parity.value, "index": pair.index, "lambda_N_per_m3": pair.lam,
            "frequency_hz": pair.nu_hz, "grid": [grid.nx, grid.ny], "file": f"{stem}.csv"}
    print(_dump(info) if args.json else f"{pair.label}: lambda = {pair.lam:.10g} N/m^3, "
          f"frequency = {pair.nu_hz:.4f} Hz -> {out / (stem + '.csv')}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------


def parse_load(text: str, model, grid: Grid):
    kind, _, rest = text.partition(":")
    try:
        if kind == "uniform":
            return UniformLoad(float(rest))
        if kind == "mode":
            parts = rest.split(":")
            m = int(parts[0])
            q = float(parts[1]) if len(parts) > 1 else 1.0
            if m < 1:
                raise InputError("mode load needs m >= 1")
            return SineLoad(m, q, model.L)
        if kind == "csv":
            x, y, f = read_grid_csv(rest, grid)
            return GridLoad(grid.x, grid.y, f)
    except (TypeError, IndexError) as exc:
        raise InputError(f"cannot parse load {text!r}: {exc}") from None
    except ValueError as exc:
        if isinstance(exc, (GridError, InputError)):
            raise
        raise InputError(f"cannot parse load {text!r}: {exc}") from None
    raise InputError(f"unknown load {text!r}; use uniform:<q>, mode:<m>[:<q>] or csv:<path>")


def cmd_solve(args) -> int:
    _, rc = _run_config(args)
    grid = _grid(args, rc)
    load = parse_load(args.load, rc.model, grid)
    m_max = args.m_max if args.m_max is not None else DEFAULT_M_MAX
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", TruncationWarning)
        sol = static_solve(rc.model, load, m_max=m_max, grid=grid)
    out = _out_dir(args)
    sol.field.to_csv(out / "displacement.csv")
    report = {
        "interior_residual": sol.interior_residual(),
        "boundary_residuals": sol.boundary_residuals(),
        "bending_energy_J": bending_energy(rc.model, sol.field),
        "total_energy_J": total_energy(rc.model, sol.field, sol.load_values),
        "truncation": sol.truncation,
        "modes_used": list(sol.modes),
        "max_displacement_m": float(np.abs(sol.field.u).max()),
        "warnings": [str(w.message) for w in caught],
    }
    (out / "solve.json").write_text(_dump(report) + "\n")
    if args.json:
        print(_dump(report))
    else:
        print(f"max |u| = {report['max_displacement_m']:.6e} m")
        print(f"interior residual (relative) = {report['interior_residual']:.3e}")
        for k, v in report["boundary_residuals"].items():
            print(f"{k} residual (relative) = {v:.3e}")
        print(f"bending energy = {report['bending_energy_J']:.10e} J")
        print(f"total energy = {report['total_energy_J']:.10e} J")
        print(f"load truncation ||f - f~||/||f|| = {report['truncation']:.3e}")
        for w in report["warnings"]:
            print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# evolve
# ---------------------------------------------------------------------------


def parse_modes(text: str):
    """``m:parity:index:a0:v0`` entries separated by commas."""
    entries = []
    for item in filter(None, (s.strip() for s in text.split(","))):
        parts = item.split(":")
        if len(parts) != 5:
            raise InputError(f"mode entry {item!r} must be m:parity:index:a0:v0")
        try:
            m, index = int(parts[0]), int(parts[2])
            a0, v0 = float(parts[3]), float(parts[4])
        except ValueError:
            raise InputError(f"mode entry {item!r} has a non-numeric field") from None
        if m < 1 or index < 1:
            raise InputError(f"mode entry {item!r} needs m >= 1 and index >= 1")
        entries.append((m, Parity.parse(parts[1]), index, a0, v0))
    return entries


def cmd_evolve(args) -> int:
    _, rc = _run_config(args)
    grid = _grid(args, rc)
    model = rc.model
    if args.modes:
        entries = parse_modes(args.modes)
        if not entries:
            raise SpectralError("empty modal spectrum: no modes given")
        pairs = [solve_mode_eigs(model, m, par, idx)[-1] for m, par, idx, _, _ in entries]
        state = dynamics.modal_state(pairs, [e[3] for e in entries], [e[4] for e in entries], model.M, model.ell)
    elif args.u0:
        spectrum_ = assemble_spectrum(model, _m_max(args, rc), _k_per_mode(args, rc))
        pairs = spectrum_.certified
        if not pairs:
            raise SpectralError("empty modal spectrum")
        _, _, u0 = read_grid_csv(args.u0, grid)
        v0 = read_grid_csv(args.v0, grid)[2] if args.v0 else np.zeros_like(u0)
        state = dynamics.project_initial(DisplacementField(grid.x, grid.y, u0), DisplacementField(grid.x, grid.y, v0),
                                         pairs, model.M, model.ell)
    else:
        raise InputError("evolve needs --modes or --u0")
    slowest = float(state.omega.min())
    period = 2.0 * np.pi / slowest
    t_end = args.t_end if args.t_end is not None else 5.0 * period
    if not t_end > 0 or args.samples < 2:
        raise InputError("need t_end > 0 and at least 2 samples")
    times = np.linspace(0.0, t_end, args.samples)
    out = _out_dir(args)
    dynamics.write_trajectory(out / "trajectory.csv", state, times)
    dynamics.write_manifest(out / "manifest.json", state)
    E = state.energy(times)
    drift = float(np.abs(E - E[0]).max() / E[0]) if E[0] > 0 else float(np.abs(E).max())
    for j in range(args.snapshots):
        t = times[round(j * (len(times) - 1) / max(args.snapshots - 1, 1))]
        write_grid_csv(out / f"snapshot_{j:03d}.csv", grid.x, grid.y, dynamics.evolve(state, t, grid.x, grid.y).u)
    periods = [1.0 / p.nu_hz for p in state.pairs]
    report = {"energy_J": float(E[0]), "energy_drift": drift, "periods_s": periods, "t_end_s": float(t_end),
              "samples": int(args.samples), "truncation": state.truncation}
    if args.json:
        print(_dump(report))
    else:
        for p, T in zip(state.pairs, periods):
            print(f"{p.label}: frequency {p.nu_hz:.4f} Hz, period {T:.6g} s")
        print(f"total energy {report['energy_J']:.10e} J, relative drift {drift:.3e}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _common(parser, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--config", default=d(None), help="plate/material config (default: bundled tacoma.cfg)")
    parser.add_argument("--out", default=d("."), help="output directory")
    parser.add_argument("--grid", default=d(None), help="output grid 'nx,ny' (odd, >= 5)")
    parser.add_argument("--m-max", dest="m_max", type=int, default=d(None))
    parser.add_argument("--k-per-mode", dest="k_per_mode", type=int, default=d(None))
    parser.add_argument("--json", action="store_true", default=d(False), help="machine-readable output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orthoplate", description="Reinforced orthotropic plate model")
    _common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("material", help="elastic tensor checks")
    _common(p, True)
    p.set_defaults(func=cmd_material)

    p = sub.add_parser("spectrum", help="eigenvalues and vertical/torsional frequencies")
    _common(p, True)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("modeshape", help="export a normalized eigenfunction")
    _common(p, True)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--parity", default="even")
    p.add_argument("--index", type=int, default=1)
    p.set_defaults(func=cmd_modeshape)

    p = sub.add_parser("solve", help="static deflection under a load")
    _common(p, True)
    p.add_argument("--load", default="uniform:1000", help="uniform:<q> | mode:<m>[:<q>] | csv:<path>")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("evolve", help="free vibration by modal synthesis")
    _common(p, True)
    p.add_argument("--modes", help="comma-separated m:parity:index:a0:v0")
    p.add_argument("--u0", help="initial displacement grid CSV")
    p.add_argument("--v0", help="initial velocity grid CSV")
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--snapshots", type=int, default=0)
    p.set_defaults(func=cmd_evolve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except IncompleteSpectrumError as exc:
        print(f"error: {exc} (scan ceiling {exc.ceiling:.6g} N/m^3)", file=sys.stderr)
        return EXIT_NUMERIC
    except SpectralError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, el.MaterialError, GridError, PlateError, InputError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
