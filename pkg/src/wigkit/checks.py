"""Named check suites: each runs a fixed battery and returns CSV-ready
rows (suite, case, value, threshold, passed).

Suites: moyal, symplectic, intertwine, fio, propagator, normequiv, perf.
Thresholds are the acceptance levels; a suite passes iff every row does.
"""

from __future__ import annotations

import resource
import time

import numpy as np

from . import battery
from .config import DEFAULTS, RunConfig
from .errors import UnknownSuite
from .fio import fio_membership, type1_fio, wigner_kernel_type1
from .metaplectic import covariance_defect
from .symplectic import is_symplectic
from .propagator import (
    MULTIPLIER,
    PerturbedHamiltonian,
    classical_flow,
    harmonic_oscillator,
    propagator_kernel,
    quad_propagate,
    semigroup_extension_check,
    split_step,
)
from .signal_core import Grid, Signal, gaussian, hermite, inner, norm
from .transforms import dft, moyal_pairing, wigner
from .wigner_kernel import (
    DIRECT,
    intertwining_defect,
    norm_equivalence_experiment,
    wigner_kernel,
)

SUITES = ("moyal", "symplectic", "intertwine", "fio", "propagator",
          "normequiv", "perf")


def _row(case: str, value: float, threshold: float, passed: bool | None = None):
    if passed is None:
        passed = bool(value <= threshold)
    return {
        "case": case,
        "value": float(value),
        "threshold": float(threshold),
        "passed": bool(passed),
    }


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------

def suite_moyal(config: RunConfig = DEFAULTS) -> list:
    g = Grid(1, 256)
    hs = [hermite(g, k) for k in range(5)]
    Ws = [[wigner(f, v) for v in hs] for f in hs]
    norms = [norm(f) for f in hs]
    rows = []
    for i in range(5):
        for j in range(5):
            worst = 0.0
            for k in range(5):
                for l in range(5):
                    lhs = moyal_pairing(Ws[i][j], Ws[k][l])
                    rhs = inner(hs[i], hs[k]) * np.conj(inner(hs[j], hs[l]))
                    scale = norms[i] * norms[j] * norms[k] * norms[l]
                    worst = max(worst, abs(lhs - rhs) / scale)
            rows.append(_row(f"moyal[{i},{j}]", worst, 1e-8))
    for i in range(5):
        rel = abs(Ws[i][i].norm2() - norms[i] ** 2) / norms[i] ** 2
        rows.append(_row(f"wnorm[{i}]", rel, 1e-8))
    return rows


def suite_symplectic(config: RunConfig = DEFAULTS) -> list:
    rows = []
    words = battery.word_battery(100)
    bad = sum(0 if is_symplectic(w.target, 1e-10) else 1 for w in words)
    rows.append(_row("is_symplectic[100]", float(bad), 0.0, bad == 0))
    # Covariance is checked on a grid wide enough that the dyadically
    # stretched Hermite battery keeps its tails inside the window: at
    # n = 64 the doubled h4 extent clips the boundary and the estimator
    # reports the ~1e-3 truncation mass instead of the word's covariance.
    g = Grid(1, 256)
    shifts = [(2 * g.h, 0.0), (0.0, 3 * g.dual_step), (g.h, g.dual_step)]
    for label, word in battery.covariance_words(g):
        worst_d = 0.0
        worst_c = 0.0
        for x0, xi0 in shifts:
            d, c = covariance_defect(word, x0, xi0, g)
            worst_d = max(worst_d, d)
            worst_c = max(worst_c, abs(abs(c) - 1.0))
        rows.append(_row(f"covariance[{label}]", worst_d, 1e-8))
        rows.append(_row(f"phase[{label}]", worst_c, 1e-9))
    return rows


def suite_intertwine(config: RunConfig = DEFAULTS) -> list:
    g = Grid(1, 32)
    rows = []
    for kind_idx, (kind, T, pairs) in enumerate(battery.intertwine_triples(g)):
        k = wigner_kernel(T, config=config)
        worst = max(intertwining_defect(T, f, v, k=k) for f, v in pairs)
        rows.append(_row(f"{kind}[{kind_idx % 6}]", worst, 1e-5))
    return rows


def suite_fio(config: RunConfig = DEFAULTS) -> list:
    g = Grid(1, 32)
    sig = battery.gaussian_symbol(g)
    rows = []
    for label, phi in battery.lattice_phases():
        T = type1_fio(sig, phi)
        k_op = wigner_kernel(T, DIRECT, config)
        k_ph = wigner_kernel_type1(sig, phi, config)
        rel = np.sqrt(
            np.sum(np.abs(k_op.tensor - k_ph.tensor) ** 2)
            / np.sum(np.abs(k_op.tensor) ** 2)
        )
        rows.append(_row(f"twopath[{label}]", rel, 1e-4))
    return rows


def suite_propagator(config: RunConfig = DEFAULTS) -> list:
    g = Grid(1, 32)
    ho = harmonic_oscillator()
    hp = PerturbedHamiltonian(ho)
    PI2 = np.pi**2
    rows = []
    for label, t in (("regular", PI2 / 2), ("caustic", PI2)):
        T, k, St = propagator_kernel(hp, t, 1, g, config)
        rep = fio_membership(T, St, config=config)
        rows.append(
            _row(f"membership[{label}]", rep["off_tube"], config.membership_tol,
                 rep["passed"])
        )
    u0 = gaussian(g)
    v = quad_propagate(ho, PI2, u0)
    w = dft(u0)
    ph = inner(v, w) / inner(w, w)
    ph /= abs(ph)
    rel = norm(Signal(g, v.values - ph * w.values)) / norm(w)
    rows.append(_row("quarter-period", rel, 1e-7))

    x = g.axis()
    hpert = PerturbedHamiltonian(ho, MULTIPLIER, np.exp(-np.pi * x**2))
    ref = split_step(hpert, 1.0, 1024, u0, config)
    errs = []
    for steps in (32, 64):
        vs = split_step(hpert, 1.0, steps, u0, config)
        errs.append(norm(Signal(g, vs.values - ref.values)))
    ratio = errs[0] / errs[1]
    rows.append(_row("richardson", ratio, 4.4, bool(3.6 <= ratio <= 4.4)))

    rep = semigroup_extension_check(hp, 3 * PI2 / 2, 3 * PI2 / 4, grid=g,
                                    config=config)
    rows.append(_row("tiling", rep["matrix_rel"], 1e-5))
    rows.append(
        _row("tiling-membership", rep["off_tube"], config.membership_tol,
             rep["membership_passed"])
    )
    return rows


def suite_normequiv(config: RunConfig = DEFAULTS) -> list:
    g = Grid(1, 32)
    rows = []
    for i, T in enumerate(battery.random_ops(g, 20)):
        rep = norm_equivalence_experiment(T, s=1.0, config=config)
        rows.append(_row(f"anchor[{i}]", abs(rep["one"][2] - 1.0), 1e-4))
    logs = []
    params = battery.normequiv_params()
    for n in (24, 32, 48):
        rep = norm_equivalence_experiment(
            battery.normequiv_family_op(Grid(1, n), params), s=1.0, config=config
        )
        logs.append(np.log(rep["one_tensor_vs"][2]))
    mid = (max(logs) + min(logs)) / 2.0
    band = (max(logs) - min(logs)) / 2.0 / abs(mid) if mid else 0.0
    rows.append(_row("stability[1xv_s]", band, 0.20))
    return rows


def suite_perf(config: RunConfig = DEFAULTS) -> list:
    rows = []
    times = {}
    rng = np.random.default_rng(7)
    for n in (16, 32, 48):
        g = Grid(1, n)
        T = battery.white_op(rng, g)
        t0 = time.time()
        wigner_kernel(T, config=config)
        times[n] = time.time() - t0
        rows.append(_row(f"time[n={n}]", times[n], float("inf"), True))
    ratio = times[48] / max(times[32], 1e-9)
    rows.append(_row("scaling[48/32]", ratio, 10.0))
    peak_gib = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / (1024.0**2)
    rows.append(_row("peak-mem-gib", peak_gib, config.memory_cap_gib))
    return rows


_SUITE_FNS = {
    "moyal": suite_moyal,
    "symplectic": suite_symplectic,
    "intertwine": suite_intertwine,
    "fio": suite_fio,
    "propagator": suite_propagator,
    "normequiv": suite_normequiv,
    "perf": suite_perf,
}


def run_suite(name: str, config: RunConfig = DEFAULTS) -> tuple[list, bool]:
    """Run one named suite; returns (rows, all_passed)."""
    if name not in _SUITE_FNS:
        raise UnknownSuite(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    rows = _SUITE_FNS[name](config)
    return rows, all(r["passed"] for r in rows)


def rows_to_csv(suite: str, rows: list) -> str:
    out = ["suite,case,value,threshold,passed"]
    for r in rows:
        thr = "inf" if not np.isfinite(r["threshold"]) else f"{r['threshold']:.3e}"
        out.append(
            f"{suite},{r['case']},{r['value']:.6e},{thr},{int(r['passed'])}"
        )
    return "\n".join(out) + "\n"
