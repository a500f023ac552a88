"""Command-line interface.

Subcommands expose the main workflows: exact spectra, the exceptional
point table, overlap maps, monodromy loops, oracle comparison, and a
self-check suite.  All artifacts are deterministic for a fixed
configuration and seed, and every file carries its resolved
configuration in a comment header (CSV) or config block (JSON).

Exit codes: 0 success, 1 failed verification, 2 configuration error,
3 boundary-parameter pole, 4 ambiguous eigenvalue continuation.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from ._fmt import csv_text, fmt_real, json_text, parse_complex
from .basis import many_body_energies
from .chain import ChainSpec, quasi_energies
from .ep import locate_eps, reference_ep_gammas
from .errors import AmbiguousContinuation, LambdaSingular, XYEPError
from .oracle import build_spin_hamiltonian, ed_eigen, match_spectra
from .topology import overlap_grid, resolve_threads, track_loop


class VerificationFailed(Exception):
    """At least one requested check reported FAIL."""


def _complex_arg(text: str) -> complex:
    try:
        return parse_complex(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_spectrum(args) -> int:
    spec = ChainSpec(args.L, args.gamma)
    pts = quasi_energies(spec)
    mb = many_body_energies(spec)
    config = {
        "command": "spectrum",
        "version": __version__,
        "L": args.L,
        "gamma": f"{fmt_real(args.gamma.real)}+{fmt_real(args.gamma.imag)}i",
    }
    rows = []
    for p in pts:
        rows.append(["quasi", f"{p.mode}:{p.branch}",
                     p.epsilon.real, p.epsilon.imag])
    for occ, e in zip(mb.occupations, mb.energies):
        label = "".join(str(int(b)) for b in occ)
        rows.append(["many", label, e.real, e.imag])
    if args.format == "json":
        payload = {
            "quasi": [{"mode": p.mode, "branch": p.branch,
                       "epsilon": [p.epsilon.real, p.epsilon.imag]}
                      for p in pts],
            "many_body": [{"occupation": "".join(str(int(b)) for b in occ),
                           "energy": [e.real, e.imag]}
                          for occ, e in zip(mb.occupations, mb.energies)],
        }
        _emit(json_text(config, payload), args.out)
    else:
        _emit(csv_text(config, ["kind", "label", "re", "im"], rows), args.out)
    return 0


def cmd_ep_table(args) -> int:
    if args.L_min % 2 or args.L_max % 2 or args.L_min < 4 \
            or args.L_max < args.L_min:
        raise XYEPError("need even 4 <= L-min <= L-max")
    config = {
        "command": "ep-table",
        "version": __version__,
        "L_min": args.L_min,
        "L_max": args.L_max,
    }
    rows = []
    for L in range(args.L_min, args.L_max + 1, 2):
        for r in locate_eps(L, "both"):
            rows.append([r.L, r.mode, r.gamma.real, r.gamma.imag,
                         r.epsilon.real, r.epsilon.imag,
                         r.boundary_residual])
    cols = ["L", "mode", "re_gamma", "im_gamma",
            "re_epsilon", "im_epsilon", "boundary_residual"]
    _emit(csv_text(config, cols, rows), args.out)
    return 0


def cmd_overlap_map(args) -> int:
    threads = resolve_threads(args.threads)
    grid = overlap_grid(args.L, args.re_min, args.re_max, args.im_min,
                        args.im_max, args.n_re, args.n_im, threads=threads)
    config = {
        "command": "overlap-map",
        "version": __version__,
        "L": args.L,
        "re_min": fmt_real(args.re_min), "re_max": fmt_real(args.re_max),
        "im_min": fmt_real(args.im_min), "im_max": fmt_real(args.im_max),
        "n_re": args.n_re, "n_im": args.n_im,
        "threads": threads,
        "tracked_a": "".join(map(str, grid.occupation_a)),
        "tracked_b": "".join(map(str, grid.occupation_b)),
    }
    rows = []
    for i in range(args.n_re):
        for j in range(args.n_im):
            ov = grid.overlap_a[i, j]
            rows.append([float(grid.re_vals[i]), float(grid.im_vals[j]),
                         float(ov.real), float(ov.imag), float(abs(ov))])
    cols = ["re_gamma", "im_gamma", "re_overlap", "im_overlap", "abs_overlap"]
    _emit(csv_text(config, cols, rows), args.out)
    return 0


def cmd_loop(args) -> int:
    result = track_loop(args.L, args.center, args.radius, steps=args.steps)
    config = {
        "command": "loop",
        "version": __version__,
        "L": args.L,
        "center": f"{fmt_real(args.center.real)}+{fmt_real(args.center.imag)}i",
        "radius": fmt_real(args.radius),
        "steps": args.steps,
    }
    _emit(json_text(config, result.as_jsonable()), args.out)
    return 0


def cmd_oracle_compare(args) -> int:
    rng = np.random.default_rng(args.seed)
    lines = []
    worst = 0.0
    ok = True
    for _ in range(args.samples):
        g = complex(*(rng.uniform(-1.5, 1.5, size=2)))
        if min(abs(g - 1), abs(g + 1)) < 5e-2:
            continue
        spec = ChainSpec(args.L, g)
        analytic = many_body_energies(spec).energies
        ed = ed_eigen(build_spin_hamiltonian(args.L, g),
                      want_vectors=False).values
        scale = float(np.max(np.abs(ed)))
        dev = match_spectra(analytic, ed).max_abs_diff / scale
        worst = max(worst, dev)
        status = "PASS" if dev <= 1e-8 else "FAIL"
        ok = ok and dev <= 1e-8
        lines.append(f"{status} gamma={g:.6g} rel_dev={dev:.3e}")
    lines.append(f"worst relative deviation: {worst:.3e}")
    _emit("\n".join(lines) + "\n", args.out)
    if not ok:
        raise VerificationFailed("oracle comparison exceeded tolerance")
    return 0


def _verify_ep_table(lines: list[str]) -> bool:
    # component-wise deviation: the reference values carry four decimals,
    # so only max(|d re|, |d im|) < 5e-5 is meaningful (the modulus of the
    # rounding error itself can reach ~7e-5)
    ok = True
    for L in (4, 6, 8, 10, 12, 14):
        found = locate_eps(L, "both")
        worst = 0.0
        for mode in ("I", "II"):
            refs = reference_ep_gammas(L, mode)
            got = [r.gamma for r in found if r.mode == mode]
            for ref in refs:
                d = min(max(abs(g.real - ref.real), abs(g.imag - ref.imag))
                        for g in got)
                worst = max(worst, d)
        passed = worst < 5e-5
        ok = ok and passed
        lines.append(f"{'PASS' if passed else 'FAIL'} ep-table L={L} "
                     f"max component |dgamma| = {worst:.2e}")
    return ok


def _verify_oracle(lines: list[str]) -> bool:
    rng = np.random.default_rng(7)
    ok = True
    for L in (2, 4, 6):
        worst = 0.0
        for _ in range(8):
            g = complex(*(rng.uniform(-1.2, 1.2, size=2)))
            if min(abs(g - 1), abs(g + 1)) < 5e-2:
                continue
            spec = ChainSpec(L, g)
            analytic = many_body_energies(spec).energies
            ed = ed_eigen(build_spin_hamiltonian(L, g),
                          want_vectors=False).values
            scale = float(np.max(np.abs(ed)))
            worst = max(worst, match_spectra(analytic, ed).max_abs_diff / scale)
        passed = worst <= 1e-8
        ok = ok and passed
        lines.append(f"{'PASS' if passed else 'FAIL'} oracle L={L} "
                     f"worst rel dev = {worst:.2e}")
    return ok


def _verify_jordan(lines: list[str]) -> bool:
    from .ep import jordan_decomposition
    ok = True
    for L in (4, 6):
        worst = 0.0
        for rec in locate_eps(L, "both"):
            spec = ChainSpec(L, rec.gamma)
            jd = jordan_decomposition(spec, rec)
            worst = max(worst, jd.jordan_residual, jd.inv_residual)
        passed = worst <= 1e-8
        ok = ok and passed
        lines.append(f"{'PASS' if passed else 'FAIL'} jordan L={L} "
                     f"worst residual = {worst:.2e}")
    return ok


def _verify_loop(lines: list[str]) -> bool:
    ok = True
    eps4 = [r for r in locate_eps(4, "II") if r.gamma.imag > 0]
    res = track_loop(4, eps4[0].gamma, 0.05, steps=128)
    moved = sorted(k for k, p in enumerate(res.permutation) if p != k)
    passed = res.closed and len(moved) == 2
    ok = ok and passed
    lines.append(f"{'PASS' if passed else 'FAIL'} loop around EP: "
                 f"permutation {res.permutation}")
    res2 = track_loop(4, 0.2 + 0.1j, 0.05, steps=128)
    passed2 = res2.closed and res2.permutation == list(range(4)) \
        and not any(res2.sign_flips)
    ok = ok and passed2
    lines.append(f"{'PASS' if passed2 else 'FAIL'} EP-free loop: "
                 f"permutation {res2.permutation}")
    return ok


def cmd_verify(args) -> int:
    suites = {
        "ep-table": _verify_ep_table,
        "oracle": _verify_oracle,
        "jordan": _verify_jordan,
        "loop": _verify_loop,
    }
    names = list(suites) if args.suite == "all" else [args.suite]
    lines: list[str] = []
    ok = True
    for name in names:
        ok = suites[name](lines) and ok
    _emit("\n".join(lines) + "\n", args.out)
    if not ok:
        raise VerificationFailed("one or more verification checks failed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xyep",
        description="Exact spectra and exceptional points of the open "
                    "non-Hermitian anisotropic chain.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="quasi-energies and many-body levels")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--gamma", type=_complex_arg, required=True,
                   help="complex anisotropy, e.g. 0.6+0.8i")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("ep-table", help="exceptional points for a range of L")
    p.add_argument("--L-min", type=int, default=4)
    p.add_argument("--L-max", type=int, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_ep_table)

    p = sub.add_parser("overlap-map",
                       help="tracked-pair overlap over a gamma rectangle")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--re-min", type=float, required=True)
    p.add_argument("--re-max", type=float, required=True)
    p.add_argument("--im-min", type=float, required=True)
    p.add_argument("--im-max", type=float, required=True)
    p.add_argument("--n-re", type=int, default=21)
    p.add_argument("--n-im", type=int, default=21)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_overlap_map)

    p = sub.add_parser("loop", help="quasi-energy monodromy around a circle")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--center", type=_complex_arg, required=True)
    p.add_argument("--radius", type=float, required=True)
    p.add_argument("--steps", type=int, default=256)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_loop)

    p = sub.add_parser("oracle-compare",
                       help="analytic spectra against dense diagonalization")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--samples", type=int, default=25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_oracle_compare)

    p = sub.add_parser("verify", help="run a built-in check suite")
    p.add_argument("--suite",
                   choices=("ep-table", "oracle", "jordan", "loop", "all"),
                   default="all")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except VerificationFailed as exc:
        print(f"FAIL: {exc}", file=sys.stderr)
        return 1
    except LambdaSingular as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except AmbiguousContinuation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except XYEPError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
