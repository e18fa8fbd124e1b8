"""Wigner kernels of linear operators on the self-dual lattice.

An operator T with kernel function k_T(x, y) acts on signals as
(Tf)(x) = sum_y k_T(x, y) f(y) h. Its Wigner kernel k(z, w) is the
phase-space kernel that intertwines Wigner distributions:

    sum_w k(z, w) W(f, g)(w) cell_w = W(Tf, Tg)(z).

Two constructions are provided:

* mode "apply": columns are built by probing — each one-hot phase-space
  field is pulled back to a rank-one-like operator (chord extraction plus
  a band unmixing that resolves the 2:1 chord cover), conjugated by T,
  and pushed forward again. This mode makes the intertwining contraction
  itself as accurate as possible.
* mode "direct": the two-variable Wigner distribution of k_T as a signal
  in (x, y), with axes shuffled to (z, w) order. This mode keeps exact
  quadratic invariants (||k||_2 = ||k_T||_2^2) and is the one used for
  concentration and membership diagnostics.

Both store axes (x, xi, y, eta) with x, y on the grid step h and xi, eta
on the half-dual step. The L2 measure per (x, xi) pair is 1/(4n); the
contraction measure cell_w is mode-dependent (the direct tensor carries
the chord double cover in the w variable, halving its weight).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfc

from .config import RunConfig, DEFAULTS
from .errors import (
    DimMismatch,
    GridMismatch,
    IllConditioned,
    KernelTooLarge,
    LatticeMismatch,
    RankMismatch,
)
from .signal_core import Grid, PhaseField, Signal, norm
from .transforms import chord_fft, chord_ifft, ctr_fft, ctr_ifft, perm_Tp, wigner

APPLY = "apply"
DIRECT = "direct"


# ---------------------------------------------------------------------------
# operator kernels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OperatorKernel:
    """Matrix samples of a 1-variable operator kernel: entry [j, j'] is
    k_T(x_j, y_{j'}), and T acts by h * matrix @ f."""

    grid: Grid
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.grid.d != 1:
            raise RankMismatch("operator kernels take 1-variable signals")
        mat = np.asarray(self.matrix, dtype=np.complex128)
        n = self.grid.n
        if mat.shape != (n, n):
            raise DimMismatch(f"kernel matrix must be {n} x {n}, got {mat.shape}")
        object.__setattr__(self, "matrix", mat)

    @property
    def n(self) -> int:
        return self.grid.n

    def apply(self, f: Signal) -> Signal:
        if f.grid != self.grid:
            raise GridMismatch("signal grid does not match the kernel grid")
        return Signal(self.grid, self.grid.h * (self.matrix @ f.values))

    def adjoint(self) -> "OperatorKernel":
        return OperatorKernel(self.grid, np.conj(self.matrix.T))

    def norm_hs(self) -> float:
        """L2 norm of the kernel function = Hilbert-Schmidt norm of T."""
        return float(np.sqrt(np.sum(np.abs(self.matrix) ** 2) * self.grid.h**2))


def compose_operators(T1: OperatorKernel, T2: OperatorKernel) -> OperatorKernel:
    if T1.grid != T2.grid:
        raise GridMismatch("operators live on different grids")
    return OperatorKernel(T1.grid, T1.grid.h * (T1.matrix @ T2.matrix))


def identity_operator(grid: Grid) -> OperatorKernel:
    """Kernel of the identity: a discrete delta ridge of height 1/h."""
    return OperatorKernel(grid, np.eye(grid.n) / grid.h)


def operator_from_map(grid: Grid, fn) -> OperatorKernel:
    """Kernel matrix of a linear map given as Signal -> Signal."""
    n = grid.n
    mat = np.empty((n, n), dtype=np.complex128)
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0 / grid.h
        mat[:, j] = fn(Signal(grid, e)).values
    return OperatorKernel(grid, mat)


# ---------------------------------------------------------------------------
# Wigner kernels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WignerKernel:
    """Rank-4 tensor on (x, xi, y, eta); xi, eta use the half-dual step."""

    grid: Grid
    tensor: np.ndarray = field(repr=False)
    mode: str
    cell_w: float
    interpolated: bool = False

    def __post_init__(self):
        t = np.asarray(self.tensor)
        n = self.grid.n
        if t.shape != (n, n, n, n):
            raise RankMismatch(f"Wigner kernel tensor must be rank 4 of side {n}")
        object.__setattr__(self, "tensor", t)

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def cell_norm(self) -> float:
        """L2 measure per (x, xi) pair: h * (half-dual step) / 2 = 1/(4n)."""
        return self.grid.h * self.grid.half_dual_step / 2.0

    def norm2(self) -> float:
        return float(
            np.sqrt(np.sum(np.abs(self.tensor) ** 2)) * self.cell_norm
        )

    def same_lattice(self, other: "WignerKernel") -> bool:
        return self.grid == other.grid and self.mode == other.mode


# -- chord cover helpers -----------------------------------------------------

def wig_mat(M: np.ndarray, grid: Grid) -> np.ndarray:
    """Phase-space (x, xi) field of an operator matrix via its chords."""
    n = grid.n
    j = np.arange(n)[:, None]
    m = np.arange(n)[None, :]
    C = M[(j + m) % n, (j - m) % n]
    return 2.0 * grid.h * chord_fft(C, 1)


def chord_scatter(W: np.ndarray, grid: Grid) -> np.ndarray:
    """Adjoint of the chord gather: phase-space field -> mixed matrix.

    The chord map (j, m) -> (j+m, j-m) is a 2:1 cover of each parity
    class of matrix entries, so the scatter halves and leaves the
    opposite checkerboard empty; see unmix_matrix.
    """
    n = grid.n
    C = chord_ifft(W, 1) / (2.0 * grid.h)
    M = np.zeros((n, n), dtype=np.complex128)
    j = np.arange(n)[:, None]
    m = np.arange(n)[None, :]
    np.add.at(M, ((j + m) % n, (j - m) % n), C / 2.0)
    return M


def _unmix_mask(n: int) -> np.ndarray:
    P = np.abs(np.arange(2 * n) - n)
    s = P[:, None] + P[None, :]
    return 0.5 * erfc((s - n) / (np.sqrt(2.0) * 0.5))


def unmix_matrix(M: np.ndarray, grid: Grid) -> np.ndarray:
    """Resolve the checkerboard left by chord_scatter.

    The scattered matrix is the true matrix plus its half-period alias;
    embedding in a doubled window and keeping the low band with a mask
    whose alias pairs sum to one separates them exactly for matrices
    supported in the admissible band (the forward chord gather of the
    discarded part cancels identically).
    """
    n = grid.n
    Z = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    Z[n // 2:n // 2 + n, n // 2:n // 2 + n] = M
    F = ctr_fft(Z, (0, 1)) * _unmix_mask(n)
    Zi = ctr_ifft(F, (0, 1))
    return 2.0 * Zi[n // 2:n // 2 + n, n // 2:n // 2 + n]


def field_to_operator(W: PhaseField) -> OperatorKernel:
    """Pull a phase-space field back to the operator whose Wigner field
    it is (inverse of the one-variable Wigner transform on matrices)."""
    g = W.grid
    if g.d != 1:
        raise RankMismatch("field_to_operator takes 1-variable phase fields")
    if abs(W.freq_step - g.half_dual_step) > 1e-12 * g.half_dual_step:
        raise LatticeMismatch("field is not on the half-dual Wigner lattice")
    return OperatorKernel(g, unmix_matrix(chord_scatter(W.values, g), g))


# -- builders ----------------------------------------------------------------

def wigner_kernel(T: OperatorKernel, mode: str = APPLY,
                  config: RunConfig = DEFAULTS) -> WignerKernel:
    """Wigner kernel of T; see the module docstring for the two modes."""
    g = T.grid
    n = g.n
    if n > config.kernel_max_n:
        raise KernelTooLarge(
            f"rank-4 kernel at n = {n} exceeds the cap {config.kernel_max_n}"
        )
    h = g.h
    if mode == DIRECT:
        psi = Signal(Grid(2, n), T.matrix)
        W4 = wigner(psi, psi)
        tensor = perm_Tp(W4.values)
        return WignerKernel(g, tensor, DIRECT, cell_w=1.0 / (8.0 * n))
    if mode != APPLY:
        raise LatticeMismatch(f"unknown Wigner kernel mode {mode!r}")

    cell_w = 1.0 / (4.0 * n)
    Kc = np.conj(T.matrix.T)
    tensor = np.empty((n, n, n, n), dtype=np.complex128)
    m = np.arange(n)
    rows = np.arange(n)
    # precompute mask/fft plans implicitly; loop over probe columns (b, e)
    for b in range(n):
        base_r = (b + m) % n
        base_c = (b - m) % n
        for e in range(n):
            # closed-form chord scatter of the one-hot field at (b, e):
            # row b of the inverse chord DFT, spread to the anti-diagonal
            phase = np.exp(2j * np.pi * m * (e - n // 2) / n) / (4.0 * h * n)
            M = np.zeros((n, n), dtype=np.complex128)
            np.add.at(M, (base_r, base_c), phase)
            Mu = unmix_matrix(M, g)
            S = (h * h) * (T.matrix @ Mu @ Kc)
            tensor[:, :, b, e] = wig_mat(S, g) / cell_w
    return WignerKernel(g, tensor, APPLY, cell_w=cell_w)


def apply_wigner_kernel(k: WignerKernel, W: PhaseField) -> PhaseField:
    """Contract the kernel against a phase-space field over (y, eta)."""
    g = k.grid
    if W.grid != g or W.values.shape != (g.n, g.n):
        raise LatticeMismatch("field lattice does not match the kernel")
    if abs(W.freq_step - g.half_dual_step) > 1e-12 * g.half_dual_step:
        raise LatticeMismatch("field is not on the half-dual Wigner lattice")
    out = np.tensordot(k.tensor, W.values, axes=([2, 3], [0, 1])) * k.cell_w
    return PhaseField(g, out, freq_step=g.half_dual_step, x_step=g.h,
                      cell=g.h * g.half_dual_step / 2.0)


def intertwining_defect(T: OperatorKernel, f: Signal, g: Signal,
                        k: WignerKernel | None = None) -> float:
    """Relative L2 mismatch of K W(f,g) against W(Tf, Tg)."""
    if k is None:
        k = wigner_kernel(T, APPLY)
    Wfg = wigner(f, g)
    lhs = apply_wigner_kernel(k, Wfg)
    Tf = T.apply(f)
    Tg = T.apply(g)
    rhs = wigner(Tf, Tg)
    num = np.sqrt(np.sum(np.abs(lhs.values - rhs.values) ** 2) * rhs.cell)
    den = norm(Tf) * norm(Tg) + 1e-300
    return float(num / den)


# -- algebra -----------------------------------------------------------------

def compose_kernels(k1: WignerKernel, k2: WignerKernel) -> WignerKernel:
    """Kernel of the composed intertwiner: contract k1's w against k2's z."""
    if not k1.same_lattice(k2):
        raise LatticeMismatch("kernels live on different lattices or modes")
    t = np.tensordot(k1.tensor, k2.tensor, axes=([2, 3], [0, 1])) * k1.cell_w
    return WignerKernel(k1.grid, t, k1.mode, cell_w=k1.cell_w)


def adjoint_kernel(k: WignerKernel) -> WignerKernel:
    """Wigner kernel of the adjoint operator: swap the z and w pairs."""
    return WignerKernel(
        k.grid,
        np.ascontiguousarray(k.tensor.transpose(2, 3, 0, 1)),
        k.mode,
        cell_w=k.cell_w,
    )


def inverse_kernel(T: OperatorKernel, mode: str = APPLY,
                   config: RunConfig = DEFAULTS,
                   cond_cap: float | None = None):
    """(T^{-1} kernel, its Wigner kernel); raises IllConditioned when the
    normalized matrix h * K_T is numerically singular."""
    if cond_cap is None:
        cond_cap = config.inverse_cond_max
    A = T.grid.h * T.matrix
    cond = float(np.linalg.cond(A))
    if not np.isfinite(cond) or cond > cond_cap:
        raise IllConditioned(f"operator condition number {cond:.3e} exceeds {cond_cap:.1e}")
    Tinv = OperatorKernel(T.grid, np.linalg.inv(A) / T.grid.h)
    return Tinv, wigner_kernel(Tinv, mode, config)


# -- norm equivalence ---------------------------------------------------------

def norm_equivalence_experiment(T: OperatorKernel, s: float = 1.0,
                                config: RunConfig = DEFAULTS) -> dict:
    """Compare M^{2,2}_m norms of the Wigner kernel against the squared
    matched norms of the operator kernel, for m in {1, v_s, 1 (x) v_s}.

    Returns a report dict with one (kernel_norm, base_norm_sq, ratio)
    triple per weight, plus the exact quadratic invariant residual.
    """
    from .modnorm import mod_norm, weight_one_tensor_vs, weight_vs

    g = T.grid
    n = g.n
    if n > config.experiment_max_n:
        raise KernelTooLarge(
            f"norm equivalence experiment capped at n = {config.experiment_max_n}"
        )
    k = wigner_kernel(T, DIRECT, config)
    base_spec = (T.matrix, (g.h, g.h))  # kernel function as a 2-variable field
    report: dict = {"n": n, "s": s}
    pairs = [
        ("one", None, None),
        ("vs", weight_vs(s), weight_vs(s)),
        ("one_tensor_vs", weight_one_tensor_vs(s), weight_one_tensor_vs(s)),
    ]
    for label, m_big, m_small in pairs:
        big = mod_norm(k, 2, 2, m_big)
        small = mod_norm(base_spec[0], 2, 2, m_small, steps=base_spec[1])
        report[label] = (big, small**2, big / (small**2 + 1e-300))
    report["l2_invariant"] = abs(k.norm2() / (T.norm_hs() ** 2 + 1e-300) - 1.0)
    return report
