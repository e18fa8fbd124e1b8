"""Metaplectic operators as words in elementary unitaries.

A word is a finite sequence of tokens applied right to left:

* ``FTAll``            — centered unitary Fourier transform (all axes),
* ``FTPartial2``       — Fourier transform in the second axis block only,
* ``Dilate(L)``        — f(t) -> |det L|^{1/2} f(L t),
* ``ChirpMul(C)``      — multiplication by e^{i pi t . C t},
* ``ChirpConv(C)``     — Fourier conjugate of ChirpMul(-C),
* ``FreeBlock(S)``     — the三-token factorization of an S with det A != 0
                         (kept as one token for readability; expands on use).

Each token projects to a symplectic matrix; a word stores the product as
its ``target``. Words are unitary up to machine precision except the
band-limited resampling inside non-lattice dilations, which is exact on
signals concentrated inside the fundamental window.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    ConfigError,
    DimMismatch,
    FactorizationFailed,
    FormatVersion,
    NonSymmetricC,
    NotSymplectic,
    SingularL,
)
from .signal_core import Grid, Signal, hermite, inner, norm, tensor
from .symplectic import (
    SymplecticMat,
    make_DL,
    make_J,
    make_VC,
    mat_from_csv,
    mat_to_csv,
)
from .transforms import ctr_fft, ctr_ifft

# ---------------------------------------------------------------------------
# tokens
# ---------------------------------------------------------------------------

def _as_square(M, name: str) -> np.ndarray:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimMismatch(f"{name} must be square")
    return M


def _check_sym(C: np.ndarray) -> np.ndarray:
    if np.max(np.abs(C - C.T)) > 1e-10 * max(1.0, float(np.max(np.abs(C)))):
        raise NonSymmetricC("chirp matrix must be symmetric")
    return 0.5 * (C + C.T)


@dataclass(frozen=True, eq=False)
class FTAll:
    def projection(self, d: int) -> np.ndarray:
        return make_J(d)

    def dim(self):
        return None  # any


@dataclass(frozen=True, eq=False)
class FTPartial2:
    def projection(self, d: int) -> np.ndarray:
        if d != 2:
            raise DimMismatch("FTPartial2 lives in two axes")
        return np.array(
            [
                [1.0, 0.0, 0.0, 0.0],
                [0.0, 0.0, 0.0, 1.0],
                [0.0, 0.0, 1.0, 0.0],
                [0.0, -1.0, 0.0, 0.0],
            ]
        )

    def dim(self):
        return 2


@dataclass(frozen=True, eq=False)
class Dilate:
    L: np.ndarray

    def __post_init__(self):
        L = _as_square(self.L, "dilation matrix")
        if abs(np.linalg.det(L)) < 1e-12:
            raise SingularL("dilation matrix is singular")
        object.__setattr__(self, "L", L)

    def projection(self, d: int) -> np.ndarray:
        return make_DL(self.L).mat

    def dim(self):
        return self.L.shape[0]


@dataclass(frozen=True, eq=False)
class ChirpMul:
    C: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "C", _check_sym(_as_square(self.C, "chirp matrix")))

    def projection(self, d: int) -> np.ndarray:
        return make_VC(self.C).mat

    def dim(self):
        return self.C.shape[0]


@dataclass(frozen=True, eq=False)
class ChirpConv:
    C: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "C", _check_sym(_as_square(self.C, "chirp matrix")))

    def projection(self, d: int) -> np.ndarray:
        dd = self.C.shape[0]
        I = np.eye(dd)
        Z = np.zeros((dd, dd))
        return np.block([[I, self.C], [Z, I]])

    def dim(self):
        return self.C.shape[0]


@dataclass(frozen=True, eq=False)
class FreeBlock:
    S: np.ndarray

    def __post_init__(self):
        S = _as_square(self.S, "free block")
        d = S.shape[0] // 2
        A = S[:d, :d]
        if abs(np.linalg.det(A)) < 1e-12 * max(1.0, float(np.max(np.abs(A))) ** d):
            raise FactorizationFailed("free block needs det A != 0")
        object.__setattr__(self, "S", S)

    def projection(self, d: int) -> np.ndarray:
        return self.S

    def dim(self):
        return self.S.shape[0] // 2

    def expand(self):
        d = self.S.shape[0] // 2
        A = self.S[:d, :d]
        B = self.S[:d, d:]
        C = self.S[d:, :d]
        Ainv = np.linalg.inv(A)
        CA = C @ Ainv
        AB = Ainv @ B
        # symmetric in exact arithmetic for symplectic S; symmetrize roundoff
        return [
            ChirpMul(0.5 * (CA + CA.T)),
            Dilate(Ainv),
            ChirpConv(0.5 * (AB + AB.T)),
        ]


Token = FTAll | FTPartial2 | Dilate | ChirpMul | ChirpConv | FreeBlock


# ---------------------------------------------------------------------------
# words
# ---------------------------------------------------------------------------

class MetaplecticWord:
    """A validated token word with its symplectic projection ``target``."""

    __slots__ = ("d", "tokens", "target")

    def __init__(self, tokens: Sequence[Token], d: int, target=None):
        tokens = tuple(tokens)
        for tok in tokens:
            td = tok.dim()
            if td is not None and td != d:
                raise DimMismatch(
                    f"token {type(tok).__name__} has dimension {td}, word has {d}"
                )
        prod = np.eye(2 * d)
        for tok in tokens:
            prod = prod @ tok.projection(d)
        if target is None:
            target = SymplecticMat(prod, tol=1e-9 * max(1.0, float(np.max(np.abs(prod))) ** 2))
        else:
            if not isinstance(target, SymplecticMat):
                target = SymplecticMat(target)
            scale = max(1.0, float(np.max(np.abs(target.mat))))
            if np.max(np.abs(prod - target.mat)) > 1e-9 * scale:
                raise NotSymplectic("token product does not match the claimed target")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "tokens", tokens)
        object.__setattr__(self, "target", target)

    def __setattr__(self, *a):
        raise AttributeError("MetaplecticWord is immutable")

    def __repr__(self):
        names = ",".join(type(t).__name__ for t in self.tokens)
        return f"MetaplecticWord(d={self.d}, [{names}])"


def free_word(S) -> MetaplecticWord:
    """Three-token word for S with invertible A block."""
    S = S.mat if isinstance(S, SymplecticMat) else np.asarray(S, dtype=float)
    fb = FreeBlock(S)
    return MetaplecticWord(fb.expand(), S.shape[0] // 2, target=SymplecticMat(S))


def factor_symplectic(S) -> MetaplecticWord:
    """Factor a symplectic matrix into an applicable token word.

    Uses the free factorization when det A != 0; otherwise right-multiplies
    by a chirp shear V_tau (integer tau in 1..d) chosen so the sheared A
    block becomes invertible, and appends the compensating ChirpMul(-tau I).
    """
    Smat = S.mat if isinstance(S, SymplecticMat) else np.asarray(S, dtype=float)
    Sm = SymplecticMat(Smat) if not isinstance(S, SymplecticMat) else S
    d = Sm.d
    A, B, C, D = Sm.blocks()

    def det_ok(M):
        return abs(np.linalg.det(M)) > 1e-9 * max(1.0, float(np.max(np.abs(M))) ** d)

    if det_ok(A):
        return free_word(Sm)
    for tau in range(1, d + 1):
        M = A + tau * B
        if det_ok(M):
            Vt = make_VC(tau * np.eye(d))
            sheared = Sm.mat @ Vt.mat
            toks = FreeBlock(sheared).expand() + [ChirpMul(-tau * np.eye(d))]
            return MetaplecticWord(toks, d, target=Sm)
    raise FactorizationFailed("no integer shear made the A block invertible")


# ---------------------------------------------------------------------------
# application
# ---------------------------------------------------------------------------

def _chirp_phase(C: np.ndarray, grid: Grid, negate: bool = False) -> np.ndarray:
    """exp(i pi t . C t) sampled on the grid (dw axes)."""
    x = grid.axis()
    dw = C.shape[0]
    sgn = -1.0 if negate else 1.0
    if dw == 1:
        q = C[0, 0] * x * x
    else:
        q = (
            C[0, 0] * np.multiply.outer(x * x, np.ones_like(x))
            + C[1, 1] * np.multiply.outer(np.ones_like(x), x * x)
            + 2.0 * C[0, 1] * np.multiply.outer(x, x)
        )
    return np.exp(1j * np.pi * sgn * q)


def _expand_to(arr_ndim: int, axes, ph: np.ndarray) -> np.ndarray:
    """Reshape a phase array living on ``axes`` to broadcast against arr."""
    shape = [1] * arr_ndim
    for i, ax in enumerate(axes):
        shape[ax] = ph.shape[i]
    return ph.reshape(shape)


def _dilate_axis_1d(arr: np.ndarray, axis: int, l: float, grid: Grid) -> np.ndarray:
    """Dilate along one axis by the scalar l: out = |l|^{1/2} f(l x)."""
    n = grid.n
    h = grid.h
    scale = np.sqrt(abs(l))
    j = np.arange(n)
    mapped = l * (j - n // 2)
    if np.max(np.abs(mapped - np.rint(mapped))) < 1e-9:
        # lattice-to-lattice map: exact circular gather (periodic semantics)
        idx = (np.rint(mapped).astype(int) + n // 2) % n
        return scale * np.take(arr, idx, axis=axis)
    G = ctr_fft(arr, axis)
    xi = grid.dual_axis()
    y = l * grid.axis()
    E = np.exp(2j * np.pi * np.multiply.outer(y, xi)) / n
    keep = (y >= -n * h / 2 - 1e-12) & (y < n * h / 2 - 1e-12)
    E[~keep, :] = 0.0
    out = np.moveaxis(np.tensordot(E, G, axes=([1], [axis])), 0, axis)
    return scale * out


def _dilate_2d(arr: np.ndarray, L: np.ndarray, grid: Grid) -> np.ndarray:
    """Dilate a 2d signal by the (possibly coupling) matrix L."""
    n = grid.n
    h = grid.h
    scale = np.sqrt(abs(np.linalg.det(L)))
    j = np.arange(n) - n // 2
    # mapped lattice indices m = L j for all index pairs
    M1 = L[0, 0] * j[:, None] + L[0, 1] * j[None, :]
    M2 = L[1, 0] * j[:, None] + L[1, 1] * j[None, :]
    if (
        np.max(np.abs(M1 - np.rint(M1))) < 1e-9
        and np.max(np.abs(M2 - np.rint(M2))) < 1e-9
    ):
        # lattice-to-lattice map: exact circular gather (periodic semantics)
        i1 = (np.rint(M1).astype(int) + n // 2) % n
        i2 = (np.rint(M2).astype(int) + n // 2) % n
        return scale * arr[i1, i2]
    G = ctr_fft(arr, (0, 1))
    x = grid.axis()
    xi = grid.dual_axis()
    P1 = np.exp(2j * np.pi * L[0, 0] * np.multiply.outer(x, xi))
    Q1 = np.exp(2j * np.pi * L[0, 1] * np.multiply.outer(x, xi))
    P2 = np.exp(2j * np.pi * L[1, 0] * np.multiply.outer(x, xi))
    Q2 = np.exp(2j * np.pi * L[1, 1] * np.multiply.outer(x, xi))
    out = np.einsum("kl,ak,bk,al,bl->ab", G, P1, Q1, P2, Q2, optimize=True) / n**2
    y1, y2 = M1 * h, M2 * h
    keep = (
        (y1 >= -n * h / 2 - 1e-12)
        & (y1 < n * h / 2 - 1e-12)
        & (y2 >= -n * h / 2 - 1e-12)
        & (y2 < n * h / 2 - 1e-12)
    )
    out = np.where(keep, out, 0.0)
    return scale * out


def _tok_apply(tok: Token, arr: np.ndarray, grid: Grid, axes) -> np.ndarray:
    h = grid.h
    if isinstance(tok, FTAll):
        for ax in axes:
            arr = h * ctr_fft(arr, ax)
        return arr
    if isinstance(tok, FTPartial2):
        if len(axes) != 2:
            raise DimMismatch("FTPartial2 needs two axes")
        return h * ctr_fft(arr, axes[1])
    if isinstance(tok, ChirpMul):
        ph = _chirp_phase(tok.C, grid)
        return arr * _expand_to(arr.ndim, axes, ph)
    if isinstance(tok, ChirpConv):
        ph = _chirp_phase(tok.C, grid, negate=True)
        tmp = ctr_fft(arr, tuple(axes)) * _expand_to(arr.ndim, axes, ph)
        return ctr_ifft(tmp, tuple(axes))
    if isinstance(tok, Dilate):
        if tok.L.shape[0] == 1:
            return _dilate_axis_1d(arr, axes[0], float(tok.L[0, 0]), grid)
        if len(axes) != 2 or arr.ndim != 2:
            raise DimMismatch("coupled dilation needs a full 2d signal")
        return _dilate_2d(arr, tok.L, grid)
    if isinstance(tok, FreeBlock):
        for sub in reversed(tok.expand()):
            arr = _tok_apply(sub, arr, grid, axes)
        return arr
    raise DimMismatch(f"unknown token {type(tok).__name__}")


def apply(word: MetaplecticWord, f: Signal) -> Signal:
    """Apply a word (rightmost token first) to a signal of matching dimension."""
    if f.d != word.d:
        raise DimMismatch(f"word dimension {word.d} != signal dimension {f.d}")
    arr = f.values
    axes = tuple(range(f.d))
    for tok in reversed(word.tokens):
        arr = _tok_apply(tok, arr, f.grid, axes)
    return Signal(f.grid, arr)


def apply_tensor(word1: MetaplecticWord, word2: MetaplecticWord, F: Signal) -> Signal:
    """Apply two one-axis words to the two axes of a 2d signal."""
    if word1.d != 1 or word2.d != 1:
        raise DimMismatch("apply_tensor takes one-dimensional words")
    if F.d != 2:
        raise DimMismatch("apply_tensor acts on 2d signals")
    arr = F.values
    for tok in reversed(word1.tokens):
        arr = _tok_apply(tok, arr, F.grid, (0,))
    for tok in reversed(word2.tokens):
        arr = _tok_apply(tok, arr, F.grid, (1,))
    return Signal(F.grid, arr)


# ---------------------------------------------------------------------------
# covariance
# ---------------------------------------------------------------------------

def tf_shift_cont(f: Signal, a, b) -> Signal:
    """Time-frequency shift e^{2 pi i b.x} f(x - a) at arbitrary real (a, b).

    Fractional translations use the band-limited (Fourier phase ramp)
    interpolation with periodic wrap; on lattice points this coincides with
    :func:`wigkit.signal_core.time_freq_shift`.
    """
    g = f.grid
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if a.shape != (g.d,) or b.shape != (g.d,):
        raise DimMismatch("shift vectors must match the grid dimension")
    arr = f.values
    xi = g.dual_axis()
    x = g.axis()
    for ax in range(g.d):
        G = ctr_fft(arr, ax)
        ramp = np.exp(-2j * np.pi * xi * a[ax])
        G = G * _expand_to(arr.ndim, (ax,), ramp)
        arr = ctr_ifft(G, ax)
    for ax in range(g.d):
        mod = np.exp(2j * np.pi * b[ax] * x)
        arr = arr * _expand_to(arr.ndim, (ax,), mod)
    return Signal(g, arr)


def _battery(grid: Grid):
    if grid.d == 1:
        return [hermite(grid, k) for k in range(5)]
    g1 = Grid(1, grid.n, grid.h)
    hs = [hermite(g1, k) for k in range(3)]
    pairs = [(0, 0), (0, 1), (1, 0), (1, 1), (0, 2)]
    return [tensor(hs[a], hs[b]) for a, b in pairs]


def covariance_defect(word: MetaplecticWord, x0, xi0, grid: Grid | None = None):
    """Worst-case symplectic covariance defect over a Hermite battery.

    Returns ``(defect, c)`` where c is the least-squares unimodular factor
    relating  word(shift(z) f)  to  shift(S z)(word f); the defect is the
    relative residual after removing c. The shift point z = (x0, xi0) may
    be any real phase-space point (its image S z rarely lies on the lattice,
    so both shifts use the band-limited fractional form).
    """
    if grid is None:
        grid = Grid(word.d, 64)
    if grid.d != word.d:
        raise DimMismatch("grid dimension does not match the word")
    d = word.d
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    xi0 = np.atleast_1d(np.asarray(xi0, dtype=float))
    z = np.concatenate([x0, xi0])
    Sz = word.target.mat @ z
    x1, xi1 = Sz[:d], Sz[d:]

    worst = 0.0
    c_out = None
    for f in _battery(grid):
        u = apply(word, tf_shift_cont(f, x0, xi0))
        v = tf_shift_cont(apply(word, f), x1, xi1)
        vv = inner(v, v)
        c = inner(v, u) / vv
        if c_out is None:
            c_out = complex(c)
        resid = norm(Signal(grid, u.values - c * v.values)) / norm(f)
        worst = max(worst, float(resid))
    return worst, c_out


def word_distance(word1: MetaplecticWord, word2: MetaplecticWord, grid: Grid) -> float:
    """max over a Hermite battery of the phase-free distance between actions."""
    worst = 0.0
    for f in _battery(grid):
        u = apply(word1, f)
        v = apply(word2, f)
        vv = inner(v, v)
        c = inner(v, u) / vv if abs(vv) > 0 else 0.0
        worst = max(worst, float(norm(Signal(grid, u.values - c * v.values)) / norm(f)))
    return worst


# ---------------------------------------------------------------------------
# distinguished two-axis words
# ---------------------------------------------------------------------------

def distribution_word(kind: str) -> MetaplecticWord:
    """Two-axis words whose action on f (x) conj(g) yields classic
    distributions: "wigner", "rihaczek", or "ft2"."""
    if kind == "ft2":
        return MetaplecticWord([FTPartial2()], 2)
    if kind == "wigner":
        L = np.array([[1.0, 0.5], [1.0, -0.5]])
    elif kind == "rihaczek":
        L = np.array([[1.0, 0.0], [1.0, -1.0]])
    else:
        raise ConfigError(f"unknown distribution kind {kind!r}")
    return MetaplecticWord([FTPartial2(), Dilate(L)], 2)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

_MAGIC = "MPW1"


def _tok_lines(tok: Token) -> list[str]:
    if isinstance(tok, FTAll):
        return ["FT"]
    if isinstance(tok, FTPartial2):
        return ["FT2"]
    if isinstance(tok, Dilate):
        return [f"DIL {mat_to_csv(tok.L)}"]
    if isinstance(tok, ChirpMul):
        return [f"CHM {mat_to_csv(tok.C)}"]
    if isinstance(tok, ChirpConv):
        return [f"CHC {mat_to_csv(tok.C)}"]
    if isinstance(tok, FreeBlock):
        out: list[str] = []
        for sub in tok.expand():
            out.extend(_tok_lines(sub))
        return out
    raise ConfigError(f"unserializable token {type(tok).__name__}")


def format_word(word: MetaplecticWord) -> str:
    lines = [f"{_MAGIC} {word.d}"]
    for tok in word.tokens:
        lines.extend(_tok_lines(tok))
    return "\n".join(lines) + "\n"


def parse_word(text: str) -> MetaplecticWord:
    lines = [ln.strip() for ln in text.strip().split("\n") if ln.strip()]
    if not lines:
        raise FormatVersion("empty word text")
    head = lines[0].split()
    if len(head) != 2 or head[0] != _MAGIC:
        raise FormatVersion(f"expected {_MAGIC} header, got {lines[0]!r}")
    try:
        d = int(head[1])
    except ValueError as e:
        raise FormatVersion(f"bad dimension in header: {head[1]!r}") from e
    tokens: list[Token] = []
    for ln in lines[1:]:
        kind, _, rest = ln.partition(" ")
        if kind == "FT":
            tokens.append(FTAll())
        elif kind == "FT2":
            tokens.append(FTPartial2())
        elif kind == "DIL":
            tokens.append(Dilate(mat_from_csv(rest)))
        elif kind == "CHM":
            tokens.append(ChirpMul(mat_from_csv(rest)))
        elif kind == "CHC":
            tokens.append(ChirpConv(mat_from_csv(rest)))
        else:
            raise ConfigError(f"unknown token line {ln!r}")
    return MetaplecticWord(tokens, d)
