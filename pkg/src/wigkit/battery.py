"""Frozen deterministic test batteries shared by the check suites, the
CLI, and the acceptance tests.

Every battery fixes its seed and draw order, so the resulting operators,
probes, and verdict baselines are bit-reproducible.  The Gaussian probe
family divides by the width parameter (widening the envelope, narrowing
the spectrum): the chord lattice carries exactly the band-concentrated
component of a probe, so band concentration is what makes the kernel
identities testable at tight tolerances.
"""

from __future__ import annotations

import numpy as np

from .config import DEFAULTS, RunConfig
from .fio import QuadraticPhase, Symbol, kn_op, kn_phase, symbol, type1_fio
from .metaplectic import (
    ChirpConv,
    ChirpMul,
    Dilate,
    FTAll,
    MetaplecticWord,
)
from .signal_core import Grid, Signal
from .symplectic import SymplecticMat, make_J
from .transforms import ctr_fft
from .wigner_kernel import OperatorKernel, compose_operators, identity_operator

INTERTWINE_SEED = 2024
NORMEQUIV_SEED = 77
WORD_SEED = 4242
MEMBERSHIP_SEED = 909


# ---------------------------------------------------------------------------
# probe and operator draws
# ---------------------------------------------------------------------------

def gauss_draw(rng: np.random.Generator, grid: Grid) -> Signal:
    """Band-concentrated Gaussian probe: shifted, modulated, width >= 1."""
    x0 = rng.uniform(-3, 3) * grid.h
    xi0 = rng.uniform(-1, 1) * grid.dual_step
    w = rng.uniform(1.0, 1.3)
    t = grid.axis()
    return Signal(
        grid, np.exp(-np.pi * (t - x0) ** 2 / w) * np.exp(2j * np.pi * xi0 * (t - x0))
    )


def white_op(rng: np.random.Generator, grid: Grid) -> OperatorKernel:
    n = grid.n
    M = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    return OperatorKernel(grid, M / np.sqrt(2 * n))


def smooth4_op(rng: np.random.Generator, grid: Grid) -> OperatorKernel:
    n = grid.n
    M = np.zeros((n, n), dtype=np.complex128)
    for _ in range(4):
        lam = rng.standard_normal() + 1j * rng.standard_normal()
        u = gauss_draw(rng, grid)
        v = gauss_draw(rng, grid)
        M += lam * np.outer(u.values, np.conj(v.values))
    return OperatorKernel(grid, M)


def composite_op(rng: np.random.Generator, grid: Grid) -> OperatorKernel:
    n, h = grid.n, grid.h
    t = grid.axis()
    K_dft = OperatorKernel(grid, ctr_fft(np.eye(n, dtype=complex), 0))
    c = rng.uniform(-1.0, 1.0)
    K_ch = OperatorKernel(grid, np.diag(np.exp(1j * np.pi * c * t**2)) / h)
    K_dg = OperatorKernel(grid, np.diag(rng.standard_normal(n) + 2.0) / h)
    return compose_operators(K_dft, compose_operators(K_ch, K_dg))


def intertwine_triples(grid: Grid, seed: int = INTERTWINE_SEED):
    """(kind, T, [(f, g)] * 3) stream: 3 classes x 6 operators x 3 pairs."""
    rng = np.random.default_rng(seed)
    out = []
    for kind, mk in (
        ("white", white_op),
        ("smooth4", smooth4_op),
        ("composite", composite_op),
    ):
        for _ in range(6):
            T = mk(rng, grid)
            pairs = [(gauss_draw(rng, grid), gauss_draw(rng, grid)) for _ in range(3)]
            out.append((kind, T, pairs))
    return out


# ---------------------------------------------------------------------------
# norm-equivalence family (continuum parameters, n-independent)
# ---------------------------------------------------------------------------

def normequiv_params(seed: int = NORMEQUIV_SEED):
    rng = np.random.default_rng(seed)
    params = []
    for _ in range(4):
        lam = rng.standard_normal() + 1j * rng.standard_normal()
        x0, y0 = rng.uniform(-0.5, 0.5, 2)
        p0, q0 = rng.uniform(-0.3, 0.3, 2)
        wu, wv = rng.uniform(1.0, 1.3, 2)
        params.append((lam, x0, y0, p0, q0, wu, wv))
    return params


def normequiv_family_op(grid: Grid, params) -> OperatorKernel:
    t = grid.axis()
    M = np.zeros((grid.n, grid.n), dtype=np.complex128)
    for lam, x0, y0, p0, q0, wu, wv in params:
        u = np.exp(-np.pi * (t - x0) ** 2 / wu) * np.exp(2j * np.pi * p0 * (t - x0))
        v = np.exp(-np.pi * (t - y0) ** 2 / wv) * np.exp(2j * np.pi * q0 * (t - y0))
        M += lam * np.outer(u, np.conj(v))
    return OperatorKernel(grid, M)


def random_ops(grid: Grid, count: int, seed: int = INTERTWINE_SEED):
    """Mixed random operator stream for the p = 2, m = 1 anchor."""
    rng = np.random.default_rng(seed)
    draws = (white_op, smooth4_op, composite_op)
    return [draws[i % 3](rng, grid) for i in range(count)]


# ---------------------------------------------------------------------------
# symplectic word battery
# ---------------------------------------------------------------------------

def random_word(rng: np.random.Generator, d: int = 1, length: int | None = None
                ) -> MetaplecticWord:
    """Random product of generator tokens (FT, chirps, dyadic dilations)."""
    if length is None:
        length = int(rng.integers(2, 6))
    tokens = []
    for _ in range(length):
        kind = rng.integers(0, 4)
        if kind == 0:
            tokens.append(FTAll())
        elif kind == 1:
            C = rng.uniform(-2.0, 2.0, (d, d))
            tokens.append(ChirpMul(0.5 * (C + C.T)))
        elif kind == 2:
            C = rng.uniform(-2.0, 2.0, (d, d))
            tokens.append(ChirpConv(0.5 * (C + C.T)))
        else:
            expo = rng.integers(-2, 3, d)
            tokens.append(Dilate(np.diag(2.0 ** expo.astype(float))))
    return MetaplecticWord(tokens, d)


def word_battery(count: int = 100, d: int = 1, seed: int = WORD_SEED):
    rng = np.random.default_rng(seed)
    return [random_word(rng, d) for _ in range(count)]


def covariance_words(grid: Grid) -> list:
    """(label, word) pairs for lattice-shift covariance: FT, chirps, dyadic."""
    return [
        ("ft", MetaplecticWord([FTAll()], 1)),
        ("chirp+1", MetaplecticWord([ChirpMul([[1.0]])], 1)),
        ("chirp-2", MetaplecticWord([ChirpMul([[-2.0]])], 1)),
        ("conv+1", MetaplecticWord([ChirpConv([[1.0]])], 1)),
        ("dilate2", MetaplecticWord([Dilate([[2.0]])], 1)),
        ("dilate1/2", MetaplecticWord([Dilate([[0.5]])], 1)),
        ("ft.chirp", MetaplecticWord([FTAll(), ChirpMul([[1.0]])], 1)),
    ]


# ---------------------------------------------------------------------------
# type-I phase battery (criterion-5 surface)
# ---------------------------------------------------------------------------

def lattice_phases() -> list:
    """(label, QuadraticPhase): 5 lattice-compatible free phases."""
    return [
        ("kn", kn_phase()),
        ("p1", QuadraticPhase([[1.0]], [[1.0]], [[0.0]])),
        ("r1", QuadraticPhase([[0.0]], [[1.0]], [[1.0]])),
        ("p1r1", QuadraticPhase([[1.0]], [[1.0]], [[1.0]])),
        ("m1r1", QuadraticPhase([[-1.0]], [[1.0]], [[1.0]])),
    ]


def gaussian_symbol(grid: Grid) -> Symbol:
    x = grid.axis()[:, None]
    e = grid.dual_axis()[None, :]
    return symbol(grid, np.exp(-np.pi * (x**2 + e**2)))


def wide_symbol(grid: Grid) -> Symbol:
    """Slowly varying elliptic symbol whose kernel stays cell-scale thin.

    The kernel's cross-tube width scales inversely with the symbol's
    variation scale: a unit-width bump spreads the kernel over several
    cells and legitimately fails the concentration gate, so gated
    entries use this scale-4 bump on a unit background instead.
    """
    x = grid.axis()[:, None]
    e = grid.dual_axis()[None, :]
    return symbol(grid, 1.0 + 0.5 * np.exp(-np.pi * (x**2 + e**2) / 16.0))


# ---------------------------------------------------------------------------
# membership battery (fixed verdicts)
# ---------------------------------------------------------------------------

def _chirp_op(grid: Grid, c: float) -> OperatorKernel:
    t = grid.axis()
    return OperatorKernel(grid, np.diag(np.exp(1j * np.pi * c * t**2)) / grid.h)


def _dft_op(grid: Grid) -> OperatorKernel:
    return OperatorKernel(grid, ctr_fft(np.eye(grid.n, dtype=complex), 0))


def membership_battery(grid: Grid, seed: int = MEMBERSHIP_SEED):
    """(label, T, S, expect_pass) with exact expected verdicts.

    Metaplectic and type-I entries pass against their own projections,
    products against S1 S2, adjoints against S^{-1}; dense controls and
    deliberately wrong projections fail.
    """
    rng = np.random.default_rng(seed)
    eye2 = np.eye(2)
    J = make_J(1)
    chirp1 = _chirp_op(grid, 1.0)
    S_chirp1 = np.array([[1.0, 0.0], [1.0, 1.0]])
    dftT = _dft_op(grid)
    prod = compose_operators(dftT, chirp1)
    S_prod = J @ S_chirp1
    kn = kn_op(wide_symbol(grid))
    t1 = type1_fio(wide_symbol(grid), QuadraticPhase([[1.0]], [[1.0]], [[0.0]]))
    S_t1 = QuadraticPhase([[1.0]], [[1.0]], [[0.0]]).symplectic().mat
    white = white_op(rng, grid)
    x = grid.axis()[:, None]
    e = grid.dual_axis()[None, :]
    elliptic = kn_op(
        symbol(grid, 2.0 + 0.3 * np.exp(-np.pi * (x**2 + e**2) / 16.0))
    )
    chirp_ell = compose_operators(_chirp_op(grid, 1.0), elliptic)
    inv_ell = OperatorKernel(
        grid, np.linalg.inv(grid.h * chirp_ell.matrix) / grid.h
    )
    return [
        ("identity", identity_operator(grid), eye2, True),
        ("chirp1", chirp1, S_chirp1, True),
        ("dft", dftT, J, True),
        ("kn-smooth", kn, eye2, True),
        ("type1-p1", t1, S_t1, True),
        ("product", prod, S_prod, True),
        ("adjoint", chirp1.adjoint(), np.linalg.inv(S_chirp1), True),
        ("inverse-dft", dftT.adjoint(), np.linalg.inv(J), True),
        ("inverse-elliptic", inv_ell, np.linalg.inv(S_chirp1), True),
        ("chirp-wrong-S", chirp1, eye2, False),
        ("white-dense", white, eye2, False),
        ("product-wrong-S", prod, J, False),
    ]
