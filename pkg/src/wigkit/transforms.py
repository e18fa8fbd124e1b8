"""Time-frequency transforms on centered grids.

Conventions (d = 1 shown; d = 2 is the per-axis product):

* centered unitary DFT: fhat[k] = h * sum_j f[j] e^{-2pi i xi_k x_j},
  xi_k = (k - n/2)/(n h) — with the self-dual step the output lives on the
  input grid and the transform is exactly unitary.
* STFT: V_g f[j,k] = h * sum_t f[t] conj(g[t - x_j]) e^{-2pi i xi_k t} on
  the (x-lattice) x (dual lattice); Parseval is exact with cell h/(n h).
* Wigner: W(f,g)[j,k] = 2h * sum_m f[j+m] conj(g[j-m]) e^{-4pi i xi_k m h},
  xi_k on the half-dual lattice (step 1/(2 n h)). The chord map (j, m) ->
  (j+m, j-m) is a 2:1 cover of the even-sum index pairs, which fixes the
  orthogonality cell at h * (1/(2nh)) / 2 = 1/(4n) per axis pair; with
  that cell the discrete Moyal identity is exact up to the Nyquist-ghost
  term, which is negligible for concentrated signals.

Every PhaseField carries its lattice steps and its exact quadrature cell,
so downstream pairings never guess measures.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    GridMismatch,
    LatticeMismatch,
    RankMismatch,
    ZeroWindow,
)
from .signal_core import Grid, PhaseField, Signal

# ---------------------------------------------------------------------------
# centered FFT helpers (module-internal but reused by kernels and FIOs)
# ---------------------------------------------------------------------------

def ctr_fft(a: np.ndarray, axes) -> np.ndarray:
    """Centered DFT: sum_j a[j] e^{-2pi i (k-n/2)(j-n/2)/n} on each axis."""
    if isinstance(axes, int):
        axes = (axes,)
    out = np.fft.fftshift(
        np.fft.fftn(np.fft.ifftshift(a, axes=axes), axes=axes), axes=axes
    )
    return out


def ctr_ifft(a: np.ndarray, axes) -> np.ndarray:
    """Inverse of :func:`ctr_fft` (includes the 1/n per axis of ifft)."""
    if isinstance(axes, int):
        axes = (axes,)
    return np.fft.fftshift(
        np.fft.ifftn(np.fft.ifftshift(a, axes=axes), axes=axes), axes=axes
    )


def chord_fft(a: np.ndarray, axes) -> np.ndarray:
    """Chord-index DFT: sum_m a[m] e^{-2pi i (k-n/2) m / n}.

    The chord index m is circular but *not* centered, so only the output
    is shifted. Used by Wigner-type transforms.
    """
    if isinstance(axes, int):
        axes = (axes,)
    return np.fft.fftshift(np.fft.fftn(a, axes=axes), axes=axes)


def chord_ifft(a: np.ndarray, axes) -> np.ndarray:
    if isinstance(axes, int):
        axes = (axes,)
    return np.fft.ifftn(np.fft.ifftshift(a, axes=axes), axes=axes)


def neg_axis(a: np.ndarray, axis: int) -> np.ndarray:
    """Centered index negation k -> (n - k) mod n along one axis."""
    return np.roll(np.flip(a, axis=axis), 1, axis=axis)


# ---------------------------------------------------------------------------
# Fourier transforms
# ---------------------------------------------------------------------------

def dft(f: Signal) -> Signal:
    """Centered unitary DFT; with the self-dual step, grid in = grid out."""
    g = f.grid
    vals = (g.h ** g.d) * ctr_fft(f.values, axes=tuple(range(g.d)))
    return Signal(g, vals)


def idft(f: Signal) -> Signal:
    g = f.grid
    vals = ctr_ifft(f.values, axes=tuple(range(g.d))) / (g.h ** g.d)
    return Signal(g, vals)


def _selfdual_check(step: float, n: int) -> bool:
    return abs(1.0 / (n * step) - step) <= 1e-12 * max(1.0, step)


def partial_ft2(F):
    """DFT on the second block of axes only (unitary).

    Accepts a 2d :class:`Signal` (returns a 2d Signal: on the self-dual
    grid the transformed axis lands back on the same lattice) or a d = 1
    :class:`PhaseField` whose frequency lattice is self-dual.
    """
    if isinstance(F, Signal):
        if F.d != 2:
            raise RankMismatch("partial_ft2 needs a 2d signal or a phase field")
        g = F.grid
        vals = g.h * ctr_fft(F.values, axes=(1,))
        return Signal(g, vals)
    if isinstance(F, PhaseField):
        if F.d != 1:
            raise RankMismatch("partial_ft2 on phase fields supports d = 1")
        if not _selfdual_check(F.freq_step, F.n):
            raise LatticeMismatch("frequency lattice is not self-dual")
        vals = F.freq_step * ctr_fft(F.values, axes=(1,))
        return PhaseField(F.grid, vals, freq_step=F.freq_step,
                          x_step=F.x_step, cell=F.cell)
    raise RankMismatch("unsupported input type for partial_ft2")


# ---------------------------------------------------------------------------
# STFT
# ---------------------------------------------------------------------------

def stft(f: Signal, window: Signal) -> PhaseField:
    """Short-time Fourier transform V_window f on (x-lattice) x (dual lattice)."""
    if f.grid != window.grid:
        raise GridMismatch("signal and window live on different grids")
    if not np.any(window.values):
        raise ZeroWindow("stft window is identically zero")
    g = f.grid
    n = g.n
    t = np.arange(n)
    idx = (t[None, :] - (t[:, None] - n // 2)) % n  # idx[j, t] = t - x_j
    Wc = np.conj(window.values)
    if g.d == 1:
        A = f.values[None, :] * Wc[idx]
        vals = g.h * ctr_fft(A, axes=(1,))  # axes: (x_j, xi_k)
    else:
        # A[j1, j2, t1, t2] = f[t1, t2] * conj(w[t1 - x_j1, t2 - x_j2])
        A = f.values[None, None, :, :] * Wc[idx[:, None, :, None], idx[None, :, None, :]]
        vals = (g.h ** 2) * ctr_fft(A, axes=(2, 3))
    return PhaseField(
        g, vals, freq_step=g.dual_step, x_step=g.h,
        cell=(g.h * g.dual_step) ** g.d,
    )


# ---------------------------------------------------------------------------
# Wigner and Rihaczek
# ---------------------------------------------------------------------------

def _chords_1d(fv: np.ndarray, gv: np.ndarray) -> np.ndarray:
    """C[j, m] = f[(j+m) mod n] conj(g[(j-m) mod n])."""
    n = fv.shape[0]
    j = np.arange(n)[:, None]
    m = np.arange(n)[None, :]
    return fv[(j + m) % n] * np.conj(gv[(j - m) % n])


def wigner(f: Signal, g: Signal) -> PhaseField:
    """Cross-Wigner distribution on the (x) x (half-dual) lattice."""
    if f.grid != g.grid:
        raise GridMismatch("signals live on different grids")
    gr = f.grid
    n = gr.n
    if gr.d == 1:
        C = _chords_1d(f.values, g.values)
        vals = 2.0 * gr.h * chord_fft(C, axes=1)
    else:
        j = np.arange(n)
        jp = (j[:, None] + j[None, :]) % n  # (axis j, chord m) -> j+m
        jm = (j[:, None] - j[None, :]) % n
        # C[j1, j2, m1, m2] = F[(j1+m1), (j2+m2)] * conj(G[(j1-m1), (j2-m2)])
        C = (
            f.values[jp[:, None, :, None], jp[None, :, None, :]]
            * np.conj(g.values[jm[:, None, :, None], jm[None, :, None, :]])
        )
        vals = (2.0 * gr.h) ** 2 * chord_fft(C, axes=(2, 3))
    return PhaseField(
        gr, vals, freq_step=gr.half_dual_step, x_step=gr.h,
        cell=(gr.h * gr.half_dual_step / 2.0) ** gr.d,
    )


def rihaczek(f: Signal, g: Signal) -> PhaseField:
    """Rihaczek distribution f(x) conj(ghat(xi)) e^{-2pi i xi x}."""
    if f.grid != g.grid:
        raise GridMismatch("signals live on different grids")
    gr = f.grid
    n = gr.n
    gh = dft(g).values
    x = gr.axis()
    xi = gr.dual_axis()
    ph = np.exp(-2j * np.pi * np.multiply.outer(x, xi))
    if gr.d == 1:
        vals = f.values[:, None] * np.conj(gh)[None, :] * ph
    else:
        vals = (
            f.values[:, :, None, None]
            * np.conj(gh)[None, None, :, :]
            * ph[:, None, :, None]
            * ph[None, :, None, :]
        )
    return PhaseField(
        gr, vals, freq_step=gr.dual_step, x_step=gr.h,
        cell=(gr.h * gr.dual_step) ** gr.d,
    )


# ---------------------------------------------------------------------------
# pairings and index algebra
# ---------------------------------------------------------------------------

def moyal_pairing(W1: PhaseField, W2: PhaseField) -> complex:
    """Phase-space inner product <W1, W2> under the fields' exact cell."""
    if not W1.same_lattice(W2):
        raise LatticeMismatch("phase fields live on different lattices")
    return complex(np.sum(np.conj(W1.values) * W2.values) * W1.cell)


def flip2(F: PhaseField) -> PhaseField:
    """Frequency flip I2 F(x, xi) = F(x, -xi) (centered circular negation)."""
    vals = F.values
    for ax in range(F.d, 2 * F.d):
        vals = neg_axis(vals, ax)
    return PhaseField(F.grid, vals, freq_step=F.freq_step,
                      x_step=F.x_step, cell=F.cell)


def perm_Tp(F: np.ndarray) -> np.ndarray:
    """Axis shuffle (x, y, xi, eta) -> (x, xi, y, -eta) on a rank-4 array."""
    arr = F.values if isinstance(F, PhaseField) else np.asarray(F)
    if arr.ndim != 4:
        raise RankMismatch(f"perm_Tp needs a rank-4 field, got rank {arr.ndim}")
    return np.ascontiguousarray(neg_axis(arr, 3).transpose(0, 2, 1, 3))


def metaplectic_wigner(word, f: Signal, g: Signal) -> PhaseField:
    """Metaplectic time-frequency distribution: word applied to f (x) conj(g).

    The word acts on 2d-dimensional signals; the result lives on the
    (x-lattice) x (dual lattice) with the unitary cell h * dual_step, under
    which the Moyal identity is exact for any unitary word.
    """
    from .metaplectic import apply as word_apply  # deferred: avoid cycle
    from .signal_core import tensor

    if f.grid != g.grid:
        raise GridMismatch("signals live on different grids")
    gconj = Signal(g.grid, np.conj(g.values))
    F = tensor(f, gconj)
    out = word_apply(word, F)
    gr = f.grid
    return PhaseField(
        gr, out.values, freq_step=gr.dual_step, x_step=gr.h,
        cell=(gr.h * gr.dual_step) ** gr.d,
    )


def conjugate(f: Signal) -> Signal:
    return Signal(f.grid, np.conj(f.values))
