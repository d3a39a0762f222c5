"""Command-line interface.

Subcommands: constants | gen | energy | invariants | holonomy | develop |
minimize.  Configuration is a flat ``key = value`` text file with ``#``
comments; explicit flags override config values.  Every library error
maps to a distinct nonzero exit code with a one-line diagnostic.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import fileio
from .algebra import certification_report, parse_algebra
from .errors import CertificationError, ConfigError, SkyrmeError
from .holonomy import CubicalCover, CubeChart, develop_cube, gauge_from_holonomy, holonomy_rep
from .invariants import SectorInvariants, pi1_orders, sector_of
from .lattice import (
    GroupField,
    TorusLattice,
    make_hedgehog,
    make_random,
    make_winding,
    skyrme_energy_map,
)
from .minimize import MinimizeOptions, minimize_connection, minimize_map

EXIT_CODES_HELP = """\
exit codes:
  0 success                8 certification mismatch
  1 unexpected error       9 sector unresolved or drift
  2 usage or config       10 partial bracket domain
  3 unsupported algebra   11 no covering-group lift
  4 log range / roughness 12 bad field file
  5 connection not flat   13 line search stalled
  6 atlas inconsistent    14 generator precondition
  7 holonomies differ     15 algebra construction failure
"""


def _parse_config(path: str) -> dict:
    cfg = {}
    try:
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key = value")
                key, val = (s.strip() for s in line.split("=", 1))
                cfg[key] = val
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    return cfg


def _as_ints(text: str, n: int, what: str) -> tuple:
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != n:
        raise ConfigError(f"{what} needs {n} integers, got {text!r}")
    return tuple(int(p) for p in parts)


def _as_floats(text: str, n: int, what: str) -> tuple:
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != n:
        raise ConfigError(f"{what} needs {n} numbers, got {text!r}")
    return tuple(float(p) for p in parts)


def _lattice_from(cfg: dict) -> TorusLattice:
    if "dims" not in cfg:
        raise ConfigError("config needs dims = N1,N2,N3")
    dims = _as_ints(cfg["dims"], 3, "dims")
    lengths = _as_floats(cfg.get("lengths", "1,1,1"), 3, "lengths")
    return TorusLattice(dims, lengths)


def _options_from(cfg: dict) -> MinimizeOptions:
    opts = MinimizeOptions()
    casts = {
        "max_iters": int, "grad_tol": float, "initial_step": float,
        "shrink": float, "armijo_c": float, "grow": float,
        "max_backtracks": int, "sector_interval": int, "sector_tol": float,
    }
    for key, cast in casts.items():
        if key in cfg:
            setattr(opts, key, cast(cfg[key]))
    opts.__post_init__()
    return opts


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------

def cmd_constants(args) -> int:
    lines, ok = certification_report()
    for line in lines:
        print(line)
    if not ok:
        raise CertificationError("normalizing constants disagree with the closed forms")
    return 0


def cmd_gen(args) -> int:
    cfg = _parse_config(args.config)
    if args.out is None:
        raise ConfigError("gen needs --out PATH")
    alg = parse_algebra(cfg.get("group", "su2"))
    lattice = _lattice_from(cfg)
    kind = cfg.get("kind", "hedgehog")
    if kind == "hedgehog":
        radius = float(cfg.get("radius", 0.45 * min(lattice.lengths)))
        charge = int(cfg.get("charge", 1))
        u = make_hedgehog(lattice, alg, radius, charge=charge)
    elif kind == "winding":
        m = _as_ints(cfg.get("winding", "0,0,0"), 3, "winding")
        u = make_winding(lattice, alg, m)
    elif kind == "random":
        u = make_random(lattice, alg, seed=int(cfg.get("seed", 0)),
                        smoothness=float(cfg.get("smoothness", 2.0)),
                        amplitude=float(cfg.get("amplitude", 0.5)))
    else:
        raise ConfigError(f"unknown kind {kind!r} (hedgehog|winding|random)")
    fileio.write_field(args.out, u)
    print(f"wrote {args.out} kind={kind} group={alg.name} dims={lattice.dims}")
    return 0


def cmd_energy(args) -> int:
    u = fileio.read_field(args.field)
    print(f"E={skyrme_energy_map(u):.12g}")
    return 0


def cmd_invariants(args) -> int:
    u = fileio.read_field(args.field)
    print(sector_of(u).report_line())
    return 0


def _print_holonomy(rep) -> None:
    for ell in range(3):
        g = rep.elements[ell]
        tr = g.trace()
        print(f"loop={ell + 1} trace={tr.real:.10g}{tr.imag:+.10g}j")
        for row in g:
            print("  " + " ".join(f"{z.real:+.10f}{z.imag:+.10f}j" for z in row))


def cmd_holonomy(args) -> int:
    a = fileio.read_one_form(args.form, sampling=args.sampling)
    cover = CubicalCover.for_lattice(a.lattice, args.spacing)
    rep = holonomy_rep(a, cover, tol=args.tol)
    _print_holonomy(rep)
    if args.compare is not None:
        b = fileio.read_one_form(args.compare, sampling=args.sampling)
        gauge_from_holonomy(a, b, cover, tol=args.tol)
        print("holonomy=equal")
    return 0


def cmd_develop(args) -> int:
    if args.out is None:
        raise ConfigError("develop needs --out PATH")
    a = fileio.read_one_form(args.form, sampling=args.sampling)
    corner = _as_ints(args.corner, 3, "corner")
    shape = _as_ints(args.shape, 3, "shape")
    chart = develop_cube(a, corner, shape)
    # a chart is not periodic; store it as a standalone block with the
    # physical extents of the cube
    h = a.lattice.spacings
    sub = TorusLattice(shape, tuple(shape[i] * h[i] for i in range(3)))
    fileio.write_field(args.out, GroupField(sub, a.algebra, chart.values))
    print(f"wrote {args.out} corner={corner} shape={shape}")
    return 0


def cmd_minimize(args) -> int:
    cfg = _parse_config(args.config)
    if args.out is None:
        raise ConfigError("minimize needs --out PATH")
    opts = _options_from(cfg)
    if args.field is not None:
        u0 = fileio.read_field(args.field)
        final, trace = minimize_map(u0, opts)
        fileio.write_field(args.out, final)
    else:
        alg = parse_algebra(cfg.get("group", "su2"))
        lattice = _lattice_from(cfg)
        alpha = _as_ints(cfg.get("alpha", "0,0,0"), 3, "alpha")
        nfac = len(alg.factors)
        charges = _as_ints(cfg.get("charges", ",".join(["0"] * nfac)), nfac, "charges") \
            if nfac else ()
        sector = SectorInvariants(alpha=alpha, alpha_orders=pi1_orders(alg),
                                  charges_raw=tuple(float(c) for c in charges),
                                  charges=charges, residuals=(0.0,) * nfac)
        from .lattice import zero_one_form
        b = zero_one_form(lattice, alg)
        a_final, trace = minimize_connection(b, sector, opts)
        fileio.write_one_form(args.out, a_final)
    trace_path = args.trace or (args.out + ".trace.csv")
    with open(trace_path, "w") as fh:
        fh.write(trace.to_csv())
    print(f"iters={len(trace.energies)} E={trace.energies[-1]:.12g} "
          f"termination={trace.termination or 'max_iters'} trace={trace_path}")
    return 0


# ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="skyrme",
        description="Skyrme energies, topological sectors, and holonomy on a lattice 3-torus.",
        epilog=EXIT_CODES_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    ap.add_argument("--workers", type=int, default=1,
                    help="worker hint; all reductions are fixed-order, results do not depend on it")
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("constants", help="certify normalizing constants against the closed forms")

    p = sub.add_parser("gen", help="generate a field file (hedgehog | winding | random)")
    p.add_argument("--config", required=True)
    p.add_argument("--out")

    p = sub.add_parser("energy", help="Skyrme energy of a field file")
    p.add_argument("field")

    p = sub.add_parser("invariants", help="sector invariants of a field file")
    p.add_argument("field")

    p = sub.add_parser("holonomy", help="generator-loop holonomy of a flat one-form")
    p.add_argument("form")
    p.add_argument("--compare", help="second one-form; exit 0 only if gauge equivalent")
    p.add_argument("--spacing", type=int, default=None, help="cover spacing in sites")
    p.add_argument("--sampling", choices=("site", "link"), default="link")
    p.add_argument("--tol", type=float, default=1e-6)

    p = sub.add_parser("develop", help="integrate a developing map over a cube")
    p.add_argument("form")
    p.add_argument("--corner", default="0,0,0")
    p.add_argument("--shape", required=True)
    p.add_argument("--sampling", choices=("site", "link"), default="link")
    p.add_argument("--out")

    p = sub.add_parser("minimize", help="sector-preserving energy descent")
    p.add_argument("--config", required=True)
    p.add_argument("--field", help="SKYF input; omit to seed from the config's sector")
    p.add_argument("--out")
    p.add_argument("--trace", help="CSV trace path (default: OUT.trace.csv)")

    return ap


_COMMANDS = {
    "constants": cmd_constants,
    "gen": cmd_gen,
    "energy": cmd_energy,
    "invariants": cmd_invariants,
    "holonomy": cmd_holonomy,
    "develop": cmd_develop,
    "minimize": cmd_minimize,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.workers < 1:
        print("error: --workers must be at least 1", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](args)
    except SkyrmeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
