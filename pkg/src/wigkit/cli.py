"""Command-line driver.

Subcommands: wigner, kernel, fio, propagate, checks, info.  Exit codes:
0 pass, 1 check-fail, 2 usage/format error.  The CLI is a thin
sequential layer over the library; --threads (or WIG_THREADS) caps the
worker count used by the slice-parallel contractions.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .checks import SUITES, rows_to_csv, run_suite
from .config import DEFAULTS, load_config, thread_count
from .errors import WigkitError
from .fio import fio_membership, kn_phase, symbol, type1_fio, QuadraticPhase
from .propagator import (
    FOURIER_MULTIPLIER,
    KN_SYMBOL,
    MULTIPLIER,
    PerturbedHamiltonian,
    QuadraticHamiltonian,
    propagator_kernel,
    split_step,
)
from .signal_core import Grid, Signal, gaussian
from .symplectic import SymplecticMat, mat_from_csv
from .transforms import stft, wigner
from .wigner_kernel import (
    OperatorKernel,
    compose_operators,
    identity_operator,
    wigner_kernel,
)
from .wkt_io import (
    load_matrix_csv,
    load_object,
    load_signal_csv,
    load_wkt,
    save_object,
    save_pgm,
    save_wkt,
)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


def _load_signal(path: str) -> Signal:
    if path.endswith(".csv"):
        return load_signal_csv(path)
    obj = load_object(path)
    if not isinstance(obj, Signal):
        raise WigkitError(f"{path} does not hold a signal")
    return obj


def _load_operator(path: str) -> OperatorKernel:
    if path.endswith(".csv"):
        M = np.loadtxt(path, delimiter=",", dtype=complex)
        return OperatorKernel(Grid(1, M.shape[0]), M)
    obj = load_object(path)
    if not isinstance(obj, OperatorKernel):
        raise WigkitError(f"{path} does not hold an operator kernel")
    return obj


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_wigner(args) -> int:
    f = _load_signal(args.input)
    if args.transform == "stft":
        win = _load_signal(args.window) if args.window else gaussian(f.grid)
        W = stft(f, win)
    else:
        g2 = _load_signal(args.window) if args.window else f
        W = wigner(f, g2)
    out = args.out or (os.path.splitext(args.input)[0] + f".{args.transform}.wkt")
    save_object(out, W)
    print(f"wrote {out} (freq_step {W.freq_step:.6g}, x_step {W.x_step:.6g})")
    if args.pgm:
        save_pgm(args.pgm, W.values, log=True)
        print(f"wrote {args.pgm}")
    return EXIT_PASS


def cmd_kernel(args) -> int:
    T = identity_operator(Grid(1, args.n)) if args.input == "identity" \
        else _load_operator(args.input)
    rc = EXIT_PASS
    if args.compose:
        T2 = _load_operator(args.compose)
        T = compose_operators(T, T2)
    if args.adjoint:
        T = T.adjoint()
    if args.invert:
        T = OperatorKernel(
            T.grid, np.linalg.inv(T.grid.h * T.matrix) / T.grid.h
        )
    if args.membership:
        if args.membership == "I":
            S = np.eye(2)
        else:
            S = mat_from_csv(open(args.membership, encoding="utf-8").read())
        rep = fio_membership(T, SymplecticMat(S))
        print(
            f"membership: off_tube {rep['off_tube']:.3e} "
            f"exponent {rep['exponent']:.3f} passed {rep['passed']}"
        )
        if not rep["passed"]:
            rc = EXIT_FAIL
    if args.out:
        k = wigner_kernel(T)
        save_object(args.out, k)
        print(f"wrote {args.out}")
    return rc


def cmd_fio(args) -> int:
    vals, _meta = load_wkt(args.symbol)
    g = Grid(1, vals.shape[0])
    sig = symbol(g, vals)
    if args.phase:
        blocks = load_matrix_csv(args.phase)
        flat = blocks.reshape(-1)
        if (blocks.ndim == 2 and blocks.shape[1] > 1
                and blocks.shape[0] == 3 * blocks.shape[1]):
            d = blocks.shape[1]
            phi = QuadraticPhase(blocks[:d], blocks[d:2 * d], blocks[2 * d:])
        elif flat.size == 3:
            phi = QuadraticPhase([[flat[0]]], [[flat[1]]], [[flat[2]]])
        else:
            raise WigkitError(
                "phase CSV must hold P, Q, R stacked (3 values for d=1)"
            )
    else:
        phi = kn_phase()
    T = type1_fio(sig, phi)
    report = {}
    if args.check_membership:
        S = (
            mat_from_csv(open(args.S, encoding="utf-8").read())
            if args.S
            else phi.symplectic().mat
        )
        rep = fio_membership(T, SymplecticMat(S))
        report = {
            "decay_profile": rep["profile"],
            "symbol_norm": rep["symbol_norm"],
            "exponent": rep["exponent"],
            "pass": rep["passed"],
        }
        print(json.dumps(report))
        if not rep["passed"]:
            return EXIT_FAIL
    if args.out:
        save_object(args.out, T)
        print(f"wrote {args.out}")
    return EXIT_PASS


def _parse_ham(path: str) -> tuple[PerturbedHamiltonian, dict]:
    """ham.cfg: key=value with A/B/C CSV paths, pert kind, pert profile."""
    keys = {}
    base = os.path.dirname(os.path.abspath(path))
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise WigkitError(f"ham config: expected key=value, got {line!r}")
            k, v = line.split("=", 1)
            keys[k.strip()] = v.strip()

    def mat(key, default=None):
        if key not in keys:
            if default is None:
                raise WigkitError(f"ham config missing {key}")
            return default
        p = keys[key]
        if not os.path.isabs(p):
            p = os.path.join(base, p)
        return load_matrix_csv(p)

    A = mat("A", np.zeros((1, 1)))
    B = mat("B", np.zeros((1, 1)))
    C = mat("C", np.zeros((1, 1)))
    quad = QuadraticHamiltonian(A, B, C)
    kind = keys.get("pert_kind", MULTIPLIER)
    if kind not in (MULTIPLIER, FOURIER_MULTIPLIER, KN_SYMBOL):
        raise WigkitError(f"unknown pert_kind {kind!r}")
    pert = None
    if "pert" in keys:
        p = keys["pert"]
        if not os.path.isabs(p):
            p = os.path.join(base, p)
        if kind == KN_SYMBOL:
            vals, _ = load_wkt(p)
            pert = symbol(Grid(1, vals.shape[0]), vals)
        else:
            pert = load_signal_csv(p).values
    return PerturbedHamiltonian(quad, kind, pert), keys


def cmd_propagate(args) -> int:
    H, keys = _parse_ham(args.ham)
    n = int(keys.get("n", DEFAULTS.n))
    g = Grid(1, n)
    if args.u0:
        u0 = _load_signal(args.u0)
        g = u0.grid
    else:
        u0 = gaussian(g)
    u = split_step(H, args.t, args.steps, u0)
    save_object(args.out, u)
    print(f"wrote {args.out}")
    if args.kernel:
        T, k, St = propagator_kernel(H, args.t, args.steps, g)
        kpath = os.path.splitext(args.out)[0] + ".kernel.wkt"
        save_object(kpath, k)
        print(f"wrote {kpath} (flow map {St.mat.tolist()})")
    return EXIT_PASS


def cmd_checks(args) -> int:
    rows, passed = run_suite(args.suite)
    csv = rows_to_csv(args.suite, rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(csv)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(csv)
    summary = "PASS" if passed else "FAIL"
    print(f"suite {args.suite}: {summary} ({len(rows)} rows)")
    return EXIT_PASS if passed else EXIT_FAIL


def cmd_info(args) -> int:
    cfg = load_config(args.config) if args.config else DEFAULTS
    print(f"wigkit {__version__}")
    print(f"n={cfg.n} h_mode={cfg.h_mode} h={cfg.grid_step():.6g}")
    print(f"omega={cfg.omega:.12g} stft_stride={cfg.stft_stride}")
    print(
        f"membership: radius {cfg.membership_radius} tol {cfg.membership_tol} "
        f"exponent margin {cfg.membership_exponent_margin}"
    )
    print(f"guards: kernel_max_n {cfg.kernel_max_n} experiment_max_n "
          f"{cfg.experiment_max_n} memory_cap {cfg.memory_cap_gib} GiB")
    print(f"threads: {thread_count(getattr(args, 'threads', None))}")
    return EXIT_PASS


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="wig",
        description="Phase-space kernel toolkit: Wigner transforms, "
        "metaplectic words, FIO diagnostics, Schrodinger propagators.",
    )
    p.add_argument("--threads", type=int, default=None,
                   help="worker cap (default: WIG_THREADS or 1)")
    sub = p.add_subparsers(dest="command", required=True)

    w = sub.add_parser("wigner", help="Wigner / STFT of a signal file")
    w.add_argument("input", help="signal file (.wkt or .csv)")
    w.add_argument("--window", help="second signal / STFT window file")
    w.add_argument("--transform", choices=("wigner", "stft"), default="wigner")
    w.add_argument("--out", help="output .wkt path")
    w.add_argument("--pgm", help="also write a 16-bit log heatmap")
    w.set_defaults(fn=cmd_wigner)

    k = sub.add_parser("kernel", help="Wigner kernels of operators")
    k.add_argument("input", help="operator file (.wkt/.csv) or 'identity'")
    k.add_argument("--n", type=int, default=DEFAULTS.n,
                   help="grid size for the identity operator")
    k.add_argument("--compose", help="second operator to compose with")
    k.add_argument("--adjoint", action="store_true")
    k.add_argument("--invert", action="store_true")
    k.add_argument("--membership", help="projection CSV (or 'I')")
    k.add_argument("--out", help="write the Wigner kernel tensor here")
    k.set_defaults(fn=cmd_kernel)

    f = sub.add_parser("fio", help="type-I FIO construction and diagnostics")
    f.add_argument("--symbol", required=True, help="symbol .wkt")
    f.add_argument("--phase", help="phase CSV: stacked rows P, Q, R")
    f.add_argument("--check-membership", action="store_true")
    f.add_argument("--S", help="projection CSV (default: phase's projection)")
    f.add_argument("--out", help="write the operator kernel here")
    f.set_defaults(fn=cmd_fio)

    pr = sub.add_parser("propagate", help="Schrodinger evolution")
    pr.add_argument("--ham", required=True, help="ham.cfg (key=value)")
    pr.add_argument("--t", type=float, required=True)
    pr.add_argument("--steps", type=int, default=1)
    pr.add_argument("--u0", help="initial state file (default: Gaussian)")
    pr.add_argument("--out", required=True, help="output state .wkt")
    pr.add_argument("--kernel", action="store_true",
                    help="also write the propagator's Wigner kernel")
    pr.set_defaults(fn=cmd_propagate)

    c = sub.add_parser("checks", help="named verification suites")
    c.add_argument("suite", help=f"one of: {', '.join(SUITES)}")
    c.add_argument("--out", help="CSV output path (default: stdout)")
    c.set_defaults(fn=cmd_checks)

    i = sub.add_parser("info", help="print version and configuration")
    i.add_argument("--config", help="key=value config file")
    i.set_defaults(fn=cmd_info)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_PASS
    if args.threads is not None or os.environ.get("WIG_THREADS"):
        os.environ["WIG_THREADS"] = str(thread_count(args.threads))
    try:
        return args.fn(args)
    except WigkitError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
