"""Command-line front end.

Every command writes into ``<out>/<run-name>/``: a ``manifest.txt`` with
the resolved configuration and headline results, the data as CSV, and an
SVG figure.  ``report`` re-renders the figure from a manifest and its CSV
without recomputing anything.

Exit codes: 0 success, 2 search failure, 3 input error, 4 internal failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DomainError, InputError, SearchFailure
from .io import emit_svg, fmt, read_curve_csv, read_manifest, write_csv, write_curve_csv, write_manifest

EXIT_OK, EXIT_SEARCH, EXIT_INPUT, EXIT_INTERNAL = 0, 2, 3, 4
DEFAULT_OUT = "shrinker-lab-out"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _positive(x):
    v = float(x)
    if not v > 0 or not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {x!r}")
    return v


# ------------------------------------------------------------------ decorations


def _encode_decorations(decs):
    parts = []
    for d in decs:
        if d[0] == "circle":
            (u0, v0), r = d[1], d[2]
            parts.append(f"circle:{fmt(u0)}:{fmt(v0)}:{fmt(r)}")
        elif d[0] == "diagonal":
            parts.append("diagonal")
        else:
            parts.append(f"{d[0]}:{fmt(d[1])}")
    return ";".join(parts)


def _decode_decorations(text):
    out = []
    for part in filter(None, text.split(";")):
        bits = part.split(":")
        if bits[0] == "circle":
            out.append(("circle", (float(bits[1]), float(bits[2])), float(bits[3])))
        elif bits[0] == "diagonal":
            out.append(("diagonal",))
        else:
            out.append((bits[0], float(bits[1])))
    return out


def _rotational_decorations(n):
    return [("hline", math.sqrt(2.0 * (n - 1))), ("circle", (0.0, 0.0), math.sqrt(2.0 * n))]


def _bi_decorations(M):
    return [("diagonal",), ("hline", math.sqrt(2.0 * M)), ("vline", math.sqrt(2.0 * M)),
            ("circle", (0.0, 0.0), math.sqrt(2.0 * (2 * M + 1)))]


def _emit_run(run_dir: Path, command, config, results, curves, decorations, closed, extra_files=None):
    """Write curve CSVs, the SVG and the manifest of one run."""
    run_dir.mkdir(parents=True, exist_ok=True)
    entries = {"tool": f"shrinker-lab {__version__}", "command": command}
    entries.update({f"config.{k}": v for k, v in config.items()})
    entries.update({f"result.{k}": v for k, v in results.items()})
    names = []
    for i, c in enumerate(curves):
        name = "curve.csv" if i == 0 else f"curve{i}.csv"
        write_curve_csv(run_dir / name, c)
        names.append(name)
    entries["files.curves"] = names
    entries["files.closed"] = [bool(x) for x in closed]
    entries["files.svg"] = "figure.svg"
    for k, v in (extra_files or {}).items():
        entries[f"files.{k}"] = v
    entries["decorations"] = _encode_decorations(decorations)
    emit_svg(curves, decorations, run_dir / "figure.svg", closed=list(closed))
    write_manifest(run_dir / "manifest.txt", entries)
    return run_dir / "manifest.txt"


def _print_results(results):
    for k, v in results.items():
        print(f"{k} = {fmt(v)}")


# ------------------------------------------------------------------ commands


def cmd_verify_exact(args):
    from .exact import exact_suite

    cases = exact_suite(ns=(args.n,), M=args.M)
    ok = True
    rows = []
    for c in cases:
        passed = c.deviation < args.tol
        ok &= passed
        rows.append((c.name, c.deviation, c.arc_length, int(passed)))
        print(f"{'PASS' if passed else 'FAIL'} {c.name}: deviation {c.deviation:.3e} over arc {c.arc_length:.4f}")
    out = Path(args.out) / f"verify-exact-n{args.n}"
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "residuals.csv", "exact-residuals", ["case", "deviation", "arc_length", "pass"], rows)
    write_manifest(out / "manifest.txt", {
        "tool": f"shrinker-lab {__version__}", "command": "verify-exact",
        "config.n": args.n, "config.M": args.M, "config.tol": args.tol,
        "result.all_pass": ok, "result.max_deviation": max(c.deviation for c in cases),
        "files.table": "residuals.csv",
    })
    return EXIT_OK if ok else EXIT_INTERNAL


def cmd_planar(args):
    from .planar import PlanarState, conservation_report, find_closed_planar, integrate_planar, invariants

    if args.closed:
        p, q = args.closed
        res = find_closed_planar(args.alpha, p, q)
        rep = conservation_report(res.profile, args.alpha)
        results = {"pericentre": res.parameter, **res.residuals, "drift1": rep.drift1, "drift2": rep.drift2}
        _print_results(results)
        curve = res.curve
        R = 1.0 / math.sqrt(-args.alpha)
        _emit_run(Path(args.out) / f"planar-closed-{p}-{q}", "planar",
                  {"alpha": args.alpha, "p": p, "q": q}, results, [curve], [("circle", (0.0, 0.0), R)], [False])
        return EXIT_OK
    init = PlanarState(args.x, args.y, args.theta)
    traj = integrate_planar(args.alpha, init, args.s_max, rtol=args.rtol, atol=args.atol)
    rep = conservation_report(traj, args.alpha)
    s, Y = traj.sample(args.samples)
    kappa, I1, I2 = invariants(args.alpha, Y)
    out = Path(args.out) / "planar"
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "trajectory.csv", "planar-trajectory", ["s", "x", "y", "theta", "kappa", "I1", "I2"],
              np.column_stack([s, Y[0], Y[1], Y[2], kappa, I1, I2]))
    results = {"drift1": rep.drift1, "drift2": rep.drift2, "I1": rep.I1, "I2": rep.I2, "excluded": rep.excluded,
               "s_end": traj.s_end}
    _print_results(results)
    _emit_run(out, "planar", {"alpha": args.alpha, "x": args.x, "y": args.y, "theta": args.theta,
                              "s_max": args.s_max, "rtol": args.rtol, "atol": args.atol},
              results, [Y[:2].T], [], [False], {"trajectory": "trajectory.csv"})
    return EXIT_OK


def cmd_shoot(args):
    from .birotational import BiShotSpec, Launch, shoot_bi
    from .rotational import ShotSpec, shoot

    if args.t is None:
        raise InputError("shoot needs --t")
    if args.family == "bi":
        launch = Launch.AXIS_ORTHOGONAL if args.axis_launch else Launch.DIAGONAL_ORTHOGONAL
        traj, sig = shoot_bi(BiShotSpec(args.M, args.t, launch), s_max=args.s_max, rtol=args.rtol, atol=args.atol)
        decs = _bi_decorations(args.M)
        config = {"family": "bi", "M": args.M, "t": args.t, "launch": launch.value}
        results = {"terminal": traj.terminal.value, "s_end": traj.s_end, "diagonal_crossings": len(sig.diagonal_crossings)}
    else:
        traj = shoot(ShotSpec(args.family, args.t, args.n), s_max=args.s_max, rtol=args.rtol, atol=args.atol)
        decs = _rotational_decorations(args.n)
        config = {"family": args.family, "n": args.n, "t": args.t}
        results = {"terminal": traj.terminal.value, "s_end": traj.s_end, "events": len(traj.events)}
    config.update(s_max=args.s_max, rtol=args.rtol, atol=args.atol)
    s, Y = traj.sample(args.samples)
    out = Path(args.out) / f"shoot-{args.family}-{fmt(args.t)}"
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "trajectory.csv", "profile-trajectory", ["s", "u", "v", "psi"], np.column_stack([s, Y.T]))
    write_csv(out / "events.csv", "profile-events", ["id", "s", "u", "v", "psi"],
              [(e.id, e.s, e.state.u, e.state.v, e.state.psi) for e in traj.events])
    _print_results(results)
    _emit_run(out, "shoot", config, results, [Y[:2].T], decs, [False],
              {"trajectory": "trajectory.csv", "events": "events.csv"})
    return EXIT_OK


FIND_KINDS = ("sphere", "sphere2", "torus-embedded", "torus-immersed")


def cmd_find(args):
    from . import rotational as rot

    n = args.n
    if args.kind == "sphere":
        res = rot.find_immersed_sphere(n)
    elif args.kind == "sphere2":
        first = rot.find_immersed_sphere(n)
        res = rot.find_second_immersed_sphere(n, first.parameter)
    elif args.kind == "torus-embedded":
        res = rot.find_embedded_torus(n)
    else:
        res = rot.find_immersed_torus(n)
    closed = args.kind.startswith("torus")
    results = {"parameter": res.parameter, "bracket_lo": res.bracket[0], "bracket_hi": res.bracket[1],
               "classification": res.classification.value, **res.residuals}
    for k, v in res.info.items():
        if isinstance(v, (int, float, bool, np.floating, np.integer)):
            results[k] = v
    _print_results(results)
    _emit_run(Path(args.out) / f"find-{args.kind}-n{n}", f"find {args.kind}", {"n": n}, results,
              [res.curve], _rotational_decorations(n), [closed])
    return EXIT_OK


def cmd_csf(args):
    from .csf import FlowControls, find_pinned_parameter

    ctl = FlowControls(N=args.N, dt=args.dt, t_max=args.t_max)
    bracket = (args.a_lo, args.a_hi) if args.a_lo is not None and args.a_hi is not None else None
    res = find_pinned_parameter(args.n, bracket=bracket, controls=ctl)
    info = res.info
    results = {"a0": res.parameter, "length": info["length"], "length_below_bound": info["length"] < _csf_bound(args.n),
               "bound": _csf_bound(args.n), **res.residuals}
    for k in ("time", "steps", "polished", "rejected", "cylinder_crossings", "simple", "convex", "r_min", "r_max"):
        results[k] = info[k]
    _print_results(results)
    out = Path(args.out) / f"csf-n{args.n}"
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "history.csv", "csf-history", ["t", "length", "gauss_area", "max_speed", "residual"], info["history"])
    write_csv(out / "bisection.csv", "csf-bisection", ["a", "status", "time", "residual"], res.sweep)
    config = {"n": args.n, "N": args.N, "dt": args.dt, "t_max": args.t_max, "tol_geodesic": ctl.tol_geodesic,
              "polish_below": ctl.polish_below}
    if bracket:
        config.update(a_lo=bracket[0], a_hi=bracket[1])
    _emit_run(out, "csf", config, results, [res.curve], _rotational_decorations(args.n), [True],
              {"history": "history.csv", "bisection": "bisection.csv"})
    return EXIT_OK


def _csf_bound(n):
    # twice the weighted length of the half-line x = 0, r > 0
    return 2.0 * 2.0 ** (n - 1) * math.gamma(n / 2.0)


BI_TARGETS = ("embedded-t3", "immersed-t3", "immersed-s3")


def cmd_find_bi(args):
    from .birotational import BiTarget, find_symmetric_closed

    target = BiTarget(args.target.replace("-", "_"))
    res = find_symmetric_closed(args.M, target, index=args.index)
    results = {"parameter": res.parameter, "bracket_lo": res.bracket[0], "bracket_hi": res.bracket[1],
               "classification": res.classification.value, **res.residuals}
    for k in ("self_intersections", "symmetry_defect", "topology", "weighted_length", "crossing_index", "launch"):
        results[k] = res.info[k]
    _print_results(results)
    closed = res.info["topology"] == "T3"
    _emit_run(Path(args.out) / f"find-bi-{args.target}-{args.index}-M{args.M}", "find-bi",
              {"M": args.M, "target": args.target, "index": args.index}, results, [res.curve],
              _bi_decorations(args.M), [closed])
    return EXIT_OK


def _load_run(manifest_path):
    man = read_manifest(manifest_path)
    base = Path(manifest_path).parent
    names = [x for x in man.get("files.curves", "").split(",") if x]
    if not names:
        raise InputError(f"{manifest_path}: no curves listed")
    curves = [read_curve_csv(base / x) for x in names]
    closed = [x == "true" for x in man.get("files.closed", "").split(",")]
    return man, base, curves, closed


def cmd_report(args):
    from .polyline import hausdorff_distance

    if args.compare is not None:
        paths = args.compare or [
            Path(args.out) / f"find-torus-embedded-n{args.n}" / "manifest.txt",
            Path(args.out) / f"csf-n{args.n}" / "manifest.txt",
        ]
        if len(paths) != 2:
            raise InputError("--compare takes two manifests (or none for the defaults)")
        runs = []
        for p in paths:
            if not Path(p).exists():
                raise InputError(f"manifest not found: {p}")
            runs.append(_load_run(p))
        (_, _, ca, cla), (_, _, cb, clb) = runs
        d = hausdorff_distance(ca[0], cb[0], cla[0], clb[0])
        print(f"hausdorff_distance = {fmt(d)}")
        return EXIT_OK
    if not args.manifest:
        raise InputError("report needs a manifest path or --compare")
    man, base, curves, closed = _load_run(args.manifest)
    for name, c in zip(man["files.curves"].split(","), curves):
        write_curve_csv(base / name, c)
    decs = _decode_decorations(man.get("decorations", ""))
    emit_svg(curves, decs, base / man.get("files.svg", "figure.svg"), closed=closed)
    print(f"rendered {base / man.get('files.svg', 'figure.svg')}")
    return EXIT_OK


# ------------------------------------------------------------------ parser


def build_parser():
    p = _Parser(prog="shrinker-lab", description="Construct and verify closed self-shrinker profiles.")
    p.add_argument("--version", action="version", version=f"shrinker-lab {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp, tol=False):
        sp.add_argument("--out", default=DEFAULT_OUT, help="output directory (default: %(default)s)")
        sp.add_argument("--config", help="flat key=value file supplying defaults for this command")
        if tol:
            sp.add_argument("--rtol", type=_positive, default=1e-11)
            sp.add_argument("--atol", type=_positive, default=1e-13)

    sp = sub.add_parser("verify-exact", help="residuals of the closed-form profiles")
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--M", type=int, default=1)
    sp.add_argument("--tol", type=_positive, default=1e-8)
    common(sp)
    sp.set_defaults(func=cmd_verify_exact)

    sp = sub.add_parser("planar", help="planar self-shrinking curves")
    sp.add_argument("--alpha", type=float, default=-0.5)
    sp.add_argument("--x", type=float, default=1.2)
    sp.add_argument("--y", type=float, default=0.0)
    sp.add_argument("--theta", type=float, default=math.pi / 2)
    sp.add_argument("--s-max", type=_positive, default=50.0)
    sp.add_argument("--samples", type=int, default=5001)
    sp.add_argument("--closed", type=int, nargs=2, metavar=("P", "Q"), help="search for a closed curve instead")
    common(sp, tol=True)
    sp.set_defaults(func=cmd_planar)

    sp = sub.add_parser("shoot", help="integrate one launch")
    sp.add_argument("family", choices=("S", "T", "bi"))
    sp.add_argument("--t", type=_positive, help="launch parameter (required)")
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--M", type=int, default=1)
    sp.add_argument("--axis-launch", action="store_true", help="bi: leave the axis u = 0 orthogonally")
    sp.add_argument("--s-max", type=_positive, default=20.0)
    sp.add_argument("--samples", type=int, default=4001)
    common(sp, tol=True)
    sp.set_defaults(func=cmd_shoot)

    sp = sub.add_parser("find", help="rotational shooting searches")
    sp.add_argument("kind", choices=FIND_KINDS)
    sp.add_argument("--n", type=int, default=2)
    common(sp)
    sp.set_defaults(func=cmd_find)

    sp = sub.add_parser("csf", help="variational torus by curve shortening flow")
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--N", type=int, default=256)
    sp.add_argument("--dt", type=_positive, default=2e-3)
    sp.add_argument("--t-max", type=_positive, default=60.0)
    sp.add_argument("--a-lo", type=_positive)
    sp.add_argument("--a-hi", type=_positive)
    common(sp)
    sp.set_defaults(func=cmd_csf)

    sp = sub.add_parser("find-bi", help="bi-rotational closed profiles")
    sp.add_argument("target", choices=BI_TARGETS)
    sp.add_argument("--M", type=int, default=1)
    sp.add_argument("--index", type=int, default=1)
    common(sp)
    sp.set_defaults(func=cmd_find_bi)

    sp = sub.add_parser("report", help="re-render a run or compare two runs")
    sp.add_argument("manifest", nargs="?")
    sp.add_argument("--compare", nargs="*", metavar="MANIFEST")
    sp.add_argument("--n", type=int, default=2)
    common(sp)
    sp.set_defaults(func=cmd_report)
    return p


def _apply_config(parser, args, argv):
    """Re-parse with defaults taken from ``args.config``; command-line flags still win."""
    entries = read_manifest(args.config)
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction)).choices[args.command]
    actions = {a.dest: a for a in sub._actions if a.option_strings}
    defaults = {}
    for key, text in entries.items():
        dest = key.removeprefix("config.").replace("-", "_")
        if dest not in actions or dest == "config":
            raise InputError(f"{args.config}: unknown key {key!r} for {args.command}")
        act = actions[dest]
        try:
            if act.nargs is not None and act.nargs not in ("?",):
                defaults[dest] = [(act.type or str)(x) for x in text.split(",")]
            elif isinstance(act, argparse._StoreTrueAction):
                defaults[dest] = text == "true"
            else:
                defaults[dest] = (act.type or str)(text)
        except (ValueError, argparse.ArgumentTypeError) as e:
            raise InputError(f"{args.config}: bad value for {key!r}: {e}") from None
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def run_cli(argv=None) -> int:
    """Parse ``argv`` and run the command; returns the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "config", None):
            args = _apply_config(parser, args, argv)
        if not getattr(args, "command", None):
            raise UsageError(parser.format_usage() + "shrinker-lab: error: a command is required")
        return args.func(args)
    except SystemExit as e:  # --help, --version
        return int(e.code or 0)
    except UsageError as e:
        print(str(e), file=sys.stderr)
        return EXIT_INPUT
    except SearchFailure as e:
        print(f"search failed: {e}", file=sys.stderr)
        return EXIT_SEARCH
    except (InputError, DomainError) as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as e:  # noqa: BLE001
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
