"""``magnon-walk`` command-line interface.

Subcommands: walk, otoc, butterfly, ed-compare, trotter, dispersion.
Settings resolve as CLI flag > ``--config`` key=value file > built-in default.

Exit codes: 0 success, 2 usage or validation error, 3 tolerance failure
(including OTOC fits that cannot be made), 4 I/O error.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import io as mio
from .circuit import Statevector, build_evolution_circuit, chain_hop_matrix, measure_densities, run
from .ed import ed_otoc, single_magnon_evolve
from .errors import (
    DegenerateFitError,
    EmptyFrameError,
    NeverDeclinesError,
    ToleranceError,
    ValidationError,
)
from .lattice import CouplingParams, LatticeSpec, grid_dispersion
from .otoc import (
    DEFAULT_DT,
    DEFAULT_EPSILON,
    SENSITIVITY_EPSILONS,
    butterfly_velocity,
    detect_td,
    fit_td_line,
    otoc_field,
    otoc_series_many,
    separation_along,
    velocities_by_epsilon,
    velocity_oracle,
)
from .qasm import export_qasm, parse_qasm
from .walk import boundary_density, hop_matrix, walk_frames

log = logging.getLogger("magnon_walk")

EXIT_OK, EXIT_USAGE, EXIT_TOLERANCE, EXIT_IO = 0, 2, 3, 4
BOUNDARY_WARN = 1e-6
TROTTER_TIMES = "0,0.25,0.5,0.75"
BOOLEANS = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}


def float_list(text: str) -> list[float]:
    text = text.strip()
    if not text:
        return []
    try:
        return [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def int_list(text: str) -> list[int]:
    vals = float_list(text)
    if any(v != int(v) for v in vals):
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    return [int(v) for v in vals]


def site(text: str) -> tuple[int, int]:
    vals = int_list(text)
    if len(vals) == 1:
        vals.append(0)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError(f"expected m,n, got {text!r}")
    return (vals[0], vals[1])


def _common(p: argparse.ArgumentParser, nx: int, ny: int, j2: float = 0.0) -> None:
    p.add_argument("--config", type=Path, help="key = value file of default settings")
    p.add_argument("--j1", type=float, default=-1.0)
    p.add_argument("--j2", type=float, default=j2)
    p.add_argument("--nx", type=int, default=nx)
    p.add_argument("--ny", type=int, default=ny)
    p.add_argument("--out", type=Path, default=Path("out"))
    p.add_argument("--format", choices=mio.FORMATS, default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="magnon-walk", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    parser.subcommands = sub.choices

    p = sub.add_parser("walk", help="density frames of a single spin flip")
    _common(p, 101, 101)
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--t1", type=float, default=25.0)
    p.add_argument("--dt", type=float, default=5.0)
    p.add_argument("--times", type=float_list, help="explicit frame times (overrides t0/t1/dt)")
    p.add_argument("--r0", type=site, help="flipped site m,n (default: lattice centre)")
    p.add_argument("--image", action="store_true", help="also write a pixmap per frame")
    p.add_argument("--gray", action="store_true", help="grayscale P5 instead of colour P6")
    p.add_argument("--global-norm", action="store_true", help="one intensity scale for all frames")

    p = sub.add_parser("otoc", help="OTOC curves, decline times and t_d line")
    _common(p, 41, 41, j2=-0.5)
    p.add_argument("--direction", choices=("axial", "diagonal"), default="axial")
    p.add_argument("--distances", type=int_list, default="0,2,4,6,8",
                   help="lattice steps along the direction (diagonal step = sqrt(2))")
    p.add_argument("--t1", type=float, default=20.0)
    p.add_argument("--dt", type=float, default=DEFAULT_DT)
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--fit-min", type=float, default=0.0)
    p.add_argument("--fit-max", type=float, default=math.inf)

    p = sub.add_parser("butterfly", help="butterfly velocities over a J2 grid")
    _common(p, 41, 41)
    p.add_argument("--j2-grid", type=float_list, help="J2 values (default: the single --j2)")
    p.add_argument("--dt", type=float, default=DEFAULT_DT)
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--fit-min", type=float, default=4.0)
    p.add_argument("--fit-max", type=float, default=12.0)

    p = sub.add_parser("ed-compare", help="spin-wave OTOC against full exact diagonalization")
    _common(p, 0, 0, j2=-1.0)
    p.add_argument("--sep", type=site, default=(0, 0), help="separation for a custom --nx/--ny panel")
    p.add_argument("--t1", type=float, default=10.0)
    p.add_argument("--dt", type=float, default=0.05)
    p.add_argument("--tol", type=float, default=1e-8)

    p = sub.add_parser("trotter", help="Trotter circuit against exact chain evolution")
    p.add_argument("--config", type=Path)
    p.add_argument("--j1", type=float, default=-1.0)
    p.add_argument("--L", type=int, default=5, dest="L")
    p.add_argument("--delta-t", type=float, default=0.1)
    p.add_argument("--times", type=float_list, default=TROTTER_TIMES)
    p.add_argument("--flip", type=int, help="flipped qubit (default: centre)")
    p.add_argument("--periodic", action="store_true")
    p.add_argument("--qasm", action="store_true", help="write and round-trip check OpenQASM files")
    p.add_argument("--tol", type=float, help="fail if any site differs from exact by more")
    p.add_argument("--out", type=Path, default=Path("out"))
    p.add_argument("--format", choices=mio.FORMATS, default="csv")

    p = sub.add_parser("dispersion", help="magnon energies on the k-grid and the hopping matrix")
    _common(p, 8, 8)
    p.add_argument("--hop", action="store_true", help="also dump nonzero hopping-matrix entries")
    return parser


def parse_args(argv: list[str] | None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None) is not None:
        cfg = mio.load_config(args.config)
        subparser = parser.subcommands[args.command]
        flags = {a.dest: a for a in subparser._actions}
        unknown = sorted(set(cfg) - set(flags))
        if unknown:
            parser.error(f"unknown config keys: {', '.join(unknown)}")
        for key, value in cfg.items():
            if flags[key].nargs == 0:
                if value.lower() not in BOOLEANS:
                    parser.error(f"config key {key} expects true or false, got {value!r}")
                cfg[key] = BOOLEANS[value.lower()]
        subparser.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


def _params(args) -> CouplingParams:
    return CouplingParams(args.j1, args.j2).require_ferromagnetic()


def _lattice(args) -> LatticeSpec:
    return LatticeSpec(args.nx, args.ny)


def _positive(name: str, value: float) -> None:
    if not value > 0:
        raise ValidationError(f"{name} must be positive, got {value}")


def _frame_times(args) -> list[float]:
    if args.times is not None:
        return args.times
    _positive("dt", args.dt)
    if args.t1 < args.t0:
        raise ValidationError("t1 must not be below t0")
    n = int(math.floor((args.t1 - args.t0) / args.dt + 1e-9))
    return [round(args.t0 + i * args.dt, 12) for i in range(n + 1)]


def _params_record(args) -> dict:
    skip = {"config", "out", "verbose", "command"}
    return {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(vars(args).items()) if k not in skip}


def cmd_walk(args) -> int:
    params, lattice = _params(args), _lattice(args)
    times = _frame_times(args)
    if any(t < 0 for t in times):
        raise ValidationError("frame times must be non-negative")
    frames = walk_frames(times, params, lattice, args.r0).frames
    vmax = max(f.values.max() for f in frames) if args.global_norm else None
    files = []
    for i, fr in enumerate(frames):
        edge = boundary_density(fr)
        if edge > BOUNDARY_WARN:
            log.warning("frame t=%s: density %.3g within 2 sites of the lattice edge", mio.fmt(fr.time), edge)
        rows = ((m, n, fr.values[m, n]) for m in range(lattice.nx) for n in range(lattice.ny))
        files.append(mio.write_table(args.out / f"frame_{i:04d}", ("m", "n", "xi"), rows, args.format))
        if args.image:
            img = mio.frame_image(fr.values, vmax, color=not args.gray)
            files.append(mio.write_pnm(args.out / f"frame_{i:04d}", img))
    mio.write_manifest(args.out, "walk", _params_record(args), files, {"times": times})
    return EXIT_OK


def cmd_otoc(args) -> int:
    params, lattice = _params(args), _lattice(args)
    if not args.distances:
        raise ValidationError("empty distance list")
    _positive("dt", args.dt)
    _positive("epsilon", args.epsilon)
    step = 1.0 if args.direction == "axial" else math.sqrt(2.0)
    seps = [separation_along(args.direction, s) for s in args.distances]
    times = np.arange(0.0, args.t1 + 0.5 * args.dt, args.dt)
    series = otoc_series_many(seps, times, params, lattice)
    files, td_rows, points = [], [], []
    for steps, s in zip(args.distances, series):
        dist = steps * step
        label = f"r{steps}{'d' if args.direction == 'diagonal' else 'a'}"
        files.append(mio.write_table(args.out / f"otoc_{label}", ("t", "F"), zip(s.times, s.values), args.format))
        td = detect_td(s, args.epsilon)
        td_rows.append((steps, dist, td))
        if dist > 0 and args.fit_min - 1e-9 <= dist <= args.fit_max + 1e-9:
            points.append((dist, td))
    files.append(mio.write_table(args.out / "td", ("steps", "distance", "t_d"), td_rows, args.format))
    try:
        line = fit_td_line(args.direction, points)
        fit = {"direction": line.direction, "points": line.points, "slope": line.slope,
               "intercept": line.intercept, "v_b": line.v_b}
    except DegenerateFitError as exc:
        log.warning("no t_d line: %s", exc)
        fit = None
    files.append(mio.write_json(args.out / "tdline.json", {"epsilon": args.epsilon, "fit": fit}))
    mio.write_manifest(args.out, "otoc", _params_record(args), files)
    return EXIT_OK


def cmd_butterfly(args) -> int:
    lattice = _lattice(args)
    grid = args.j2_grid if args.j2_grid else [args.j2]
    _positive("dt", args.dt)
    _positive("epsilon", args.epsilon)
    window = (args.fit_min, args.fit_max)
    eps_all = tuple(dict.fromkeys((args.epsilon, *SENSITIVITY_EPSILONS)))
    cols = ["j2", "v_b_axial", "v_b_diagonal", "oracle_axial", "oracle_diagonal"]
    cols += [f"v_b_{d}_eps{e:g}" for e in SENSITIVITY_EPSILONS for d in ("axial", "diagonal")]
    rows = []
    for j2 in grid:
        params = CouplingParams(args.j1, j2).require_ferromagnetic()
        vb = {d: velocities_by_epsilon(params, lattice, d, eps_all, window, args.dt) for d in ("axial", "diagonal")}
        for d in vb:
            if np.isnan(vb[d][args.epsilon]):
                # re-run the strict fit so the failure carries its reason
                butterfly_velocity(params, lattice, d, epsilon=args.epsilon, fit_window=window, dt=args.dt)
        row = [j2, vb["axial"][args.epsilon], vb["diagonal"][args.epsilon],
               velocity_oracle(params, "axial"), velocity_oracle(params, "diagonal")]
        row += [vb[d][e] for e in SENSITIVITY_EPSILONS for d in ("axial", "diagonal")]
        rows.append(row)
    files = [mio.write_table(args.out / "butterfly", cols, rows, args.format)]
    mio.write_manifest(args.out, "butterfly", _params_record(args), files)
    return EXIT_OK


def ed_panels(args) -> list[tuple[str, CouplingParams, LatticeSpec, tuple[int, int]]]:
    """The six default comparison panels, or one custom panel from --nx/--ny/--sep."""
    if args.nx or args.ny:
        lat = LatticeSpec(args.nx or 1, args.ny or 1)
        name = f"custom_{lat.nx}x{lat.ny}_sep{args.sep[0]}_{args.sep[1]}"
        return [(name, _params(args), lat, args.sep)]
    chain = CouplingParams(args.j1, 0.0).require_ferromagnetic()
    square = _params(args)
    panels = [(f"chain{L}_onsite", chain, LatticeSpec(L, 1), (0, 0)) for L in (3, 7, 11)]
    for label, sep in (("onsite", (0, 0)), ("nn", (1, 0)), ("nnn", (1, 1))):
        panels.append((f"square3x3_{label}", square, LatticeSpec(3, 3), sep))
    return panels


def cmd_ed_compare(args) -> int:
    _positive("dt", args.dt)
    times = np.arange(0.0, args.t1 + 0.5 * args.dt, args.dt)
    files, summary, worst = [], {}, 0.0
    for name, params, lat, sep in ed_panels(args):
        ed = ed_otoc(params, lat, (0, 0), sep, times)
        idx = (sep[0] % lat.nx, sep[1] % lat.ny)
        sw = np.array([otoc_field(t, params, lat)[idx] for t in times])
        diff = np.abs(sw - ed)
        summary[name] = float(diff.max())
        worst = max(worst, float(diff.max()))
        files.append(mio.write_table(args.out / f"ed_{name}", ("t", "F_sw", "F_ed", "abs_diff"),
                                     zip(times, sw, ed, diff), args.format))
    mio.write_manifest(args.out, "ed-compare", _params_record(args), files, {"max_abs_diff": summary})
    if worst > args.tol:
        raise ToleranceError(f"SW and ED differ by {worst:.3e} > {args.tol:g}")
    return EXIT_OK


def cmd_trotter(args) -> int:
    L = args.L
    if L < 2:
        raise ValidationError("L must be at least 2")
    if args.j1 > 0:
        raise ValidationError("only ferromagnetic j1 <= 0 is supported")
    if args.delta_t < 0 or any(t < 0 for t in args.times):
        raise ValidationError("delta_t and times must be non-negative")
    flip = L // 2 if args.flip is None else args.flip
    if not 0 <= flip < L:
        raise ValidationError(f"flip qubit {flip} outside chain of {L}")
    hop = chain_hop_matrix(L, args.j1, args.periodic)
    psi0 = np.zeros(L, dtype=complex)
    psi0[flip] = 1.0
    files, worst = [], 0.0
    for i, t in enumerate(args.times):
        circ = build_evolution_circuit(L, t, args.delta_t, args.j1, flip, args.periodic)
        dens = measure_densities(run(circ, Statevector.zero(L)))
        if args.delta_t == 0:
            exact = np.abs(psi0) ** 2
        else:
            exact = np.abs(single_magnon_evolve(hop, psi0, t)) ** 2
        worst = max(worst, float(np.abs(dens - exact).max()))
        files.append(mio.write_table(args.out / f"trotter_{i:02d}", ("site", "n_circuit", "n_exact"),
                                     zip(range(L), dens, exact), args.format))
        if args.qasm:
            path = args.out / f"trotter_{i:02d}.qasm"
            path.write_text(export_qasm(circ))
            back = measure_densities(run(parse_qasm(path.read_text()), Statevector.zero(L)))
            if np.abs(back - dens).max() > 1e-12:
                raise ToleranceError(f"QASM round trip for t={t} drifted by {np.abs(back - dens).max():.3e}")
            files.append(path)
    mio.write_manifest(args.out, "trotter", _params_record(args), files, {"max_abs_error": worst})
    if args.tol is not None and worst > args.tol:
        raise ToleranceError(f"circuit densities differ from exact by {worst:.3e} > {args.tol:g}")
    return EXIT_OK


def cmd_dispersion(args) -> int:
    params, lattice = _params(args), _lattice(args)
    k = lattice.kgrid()
    w = grid_dispersion(lattice, params)
    files = [mio.write_table(args.out / "dispersion", ("kx", "ky", "omega"),
                             zip(k.kx.ravel(), k.ky.ravel(), w.ravel()), args.format)]
    if args.hop:
        ent = hop_matrix(params, lattice).entries
        files.append(mio.write_table(args.out / "hop", ("i", "j", "P"),
                                     ((i, j, v) for (i, j), v in sorted(ent.items())), args.format))
    mio.write_manifest(args.out, "dispersion", _params_record(args), files)
    return EXIT_OK


COMMANDS = {
    "walk": cmd_walk,
    "otoc": cmd_otoc,
    "butterfly": cmd_butterfly,
    "ed-compare": cmd_ed_compare,
    "trotter": cmd_trotter,
    "dispersion": cmd_dispersion,
}


def main(argv: list[str] | None = None) -> int:
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (ValidationError, OSError) as exc:
        print(f"magnon-walk: error: {exc}", file=sys.stderr)
        return EXIT_IO if isinstance(exc, OSError) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="magnon-walk: %(levelname)s: %(message)s")
    try:
        args.out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](args)
    except (ValidationError, EmptyFrameError) as exc:
        print(f"magnon-walk: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ToleranceError, NeverDeclinesError, DegenerateFitError) as exc:
        print(f"magnon-walk: failed: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    except OSError as exc:
        print(f"magnon-walk: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
