"""Modulation quasi-norms M^{p,q}_m via Gaussian-window STFTs.

Mixed-norm convention: the inner l^p runs over the position axes with the
position cell measure, the weight multiplies pointwise first, and the
outer l^q runs over the frequency axes with the remaining cell measure;
p or q = inf means sup (no cell factor on that block).

Fields with two base variables (operator kernels as 2-variable signals,
symbols sigma(x, eta)) get the fully materialized 4-axis STFT. Fields
with four base variables (rank-4 Wigner kernels) never materialize their
8-axis STFT: the p = q = 2 norms reduce exactly to window-moment sums
(circular Parseval, see _moment_norm2), and other exponents use a
frequency-decimated scan that keeps all window positions via FFT
correlation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadExponent, KernelTooLarge, ZeroWindow
from .signal_core import Grid, PhaseField, Signal, gaussian
from .transforms import ctr_fft, stft

# ---------------------------------------------------------------------------
# weights
# ---------------------------------------------------------------------------

VS = "vs"
ONE_TENSOR_VS = "one_tensor_vs"


@dataclass(frozen=True)
class Weight:
    """Polynomial weight v_s(z) = (1+|z|^2)^{s/2}, possibly on a sub-block.

    kind VS weights the full variable z; ONE_TENSOR_VS weights only the
    axes in ``split`` (default: the frequency block of the field).
    """

    kind: str = VS
    s: float = 0.0
    split: tuple | None = None

    def __post_init__(self):
        if self.kind not in (VS, ONE_TENSOR_VS):
            raise BadExponent(f"unknown weight kind {self.kind!r}")
        if self.s < 0:
            raise BadExponent("weight exponent s must be nonnegative")

    def evaluate(self, axis_values: list[np.ndarray], default_split: tuple) -> np.ndarray:
        """Weight sampled on the product lattice of the given axes."""
        nd = len(axis_values)
        if self.kind == VS:
            axes = tuple(range(nd))
        else:
            axes = self.split if self.split is not None else default_split
        r2 = np.zeros((1,) * nd)
        for ax in axes:
            v = axis_values[ax] ** 2
            shape = [1] * nd
            shape[ax] = v.shape[0]
            r2 = r2 + v.reshape(shape)
        return (1.0 + r2) ** (self.s / 2.0)


def weight_vs(s: float) -> Weight:
    return Weight(VS, s)


def weight_one_tensor_vs(s: float, split: tuple | None = None) -> Weight:
    return Weight(ONE_TENSOR_VS, s, split)


# ---------------------------------------------------------------------------
# mixed norm on materialized fields
# ---------------------------------------------------------------------------

def _check_exponent(p) -> float:
    if p is None:
        raise BadExponent("exponent must be positive or inf")
    p = float(p)
    if not (p > 0):
        raise BadExponent(f"exponent {p} out of range (0, inf]")
    return p


def _block_norm(G: np.ndarray, axes: tuple, p: float, cell: float) -> np.ndarray:
    if np.isinf(p):
        return np.max(G, axis=axes)
    return (np.sum(G**p, axis=axes) * cell) ** (1.0 / p)


def mixed_norm(F, p, q, m: Weight | None = None) -> float:
    """L^{p,q}_m quasi-norm of a phase field (or array with given steps).

    F may be a PhaseField, or a tuple (values, x_steps, f_steps) for raw
    arrays; axes are position block first, frequency block second.
    """
    p = _check_exponent(p)
    q = _check_exponent(q)
    if isinstance(F, PhaseField):
        d = F.d
        vals = F.values
        x_steps = (F.x_step,) * d
        x_cell = F.x_step**d
        f_cell = F.cell / x_cell
        f_steps = (F.freq_step,) * d
        axis_vals = [
            (np.arange(F.n) - F.n // 2) * s for s in (*x_steps, *f_steps)
        ]
    else:
        vals, x_steps, f_steps = F
        vals = np.asarray(vals)
        d = len(x_steps)
        x_cell = float(np.prod(x_steps))
        f_cell = float(np.prod(f_steps))
        axis_vals = [
            (np.arange(vals.shape[i]) - vals.shape[i] // 2) * s
            for i, s in enumerate((*x_steps, *f_steps))
        ]
    nd = vals.ndim
    if nd != 2 * d:
        raise BadExponent("field rank does not match its step metadata")
    G = np.abs(vals)
    if m is not None and m.s != 0:
        G = G * m.evaluate(axis_vals, default_split=tuple(range(d, nd)))
    inner = _block_norm(G, tuple(range(d)), p, x_cell)
    outer = _block_norm(inner, tuple(range(inner.ndim)), q, f_cell)
    return float(outer)


# ---------------------------------------------------------------------------
# mod norms: dispatch on the number of base variables
# ---------------------------------------------------------------------------

def _axis_window(n: int, step: float) -> np.ndarray:
    """Per-axis L2-normalized Gaussian window on a centered lattice."""
    t = (np.arange(n) - n // 2) * step
    w = np.exp(-np.pi * t * t)
    return w / np.sqrt(np.sum(w * w) * step)


def _as_field_spec(f, steps):
    """Normalize input to (values, steps, deck) for the n-variable routes.

    Fields whose exact quadrature cell differs from the product of their
    lattice steps (chord-Wigner fields carry half a cell per pair) are
    rescaled so that step-product quadrature reproduces their true L2
    geometry.  ``deck`` is True for phase-space kernels that live on the
    sign-twisted double cover: every physical value appears twice (shifted
    half a period along each position axis, modulated along each momentum
    axis), so weighted moments must measure distances on the folded
    fundamental domain or a fixed object's moments grow with the lattice.
    """
    if isinstance(f, Signal):
        return f.values, (f.grid.h,) * f.d, False
    if isinstance(f, PhaseField):
        st = (f.x_step,) * f.d + (f.freq_step,) * f.d
        scale = np.sqrt(f.cell / np.prod(st))
        return f.values * scale, st, False
    if hasattr(f, "tensor") and hasattr(f, "grid"):  # WignerKernel duck type
        g = f.grid
        st = (g.h, g.half_dual_step, g.h, g.half_dual_step)
        cell_true = (g.h * g.half_dual_step / 2.0) ** 2
        scale = np.sqrt(cell_true / np.prod(st))
        return f.tensor * scale, st, True
    vals = np.asarray(f)
    if steps is None:
        raise BadExponent("raw arrays need an explicit steps tuple")
    if len(steps) != vals.ndim:
        raise BadExponent("steps tuple does not match array rank")
    return vals, tuple(float(s) for s in steps), False


def _stft_2var(vals: np.ndarray, steps, windows) -> tuple:
    """Materialized STFT of a 2-variable field: (V, x_steps, f_steps)."""
    n0, n1 = vals.shape
    if n0 * n1 * n0 * n1 > 48**4 + 1:
        raise KernelTooLarge("materialized 4-axis STFT capped at n = 48 per axis")
    idx0 = (np.arange(n0)[None, :] - (np.arange(n0)[:, None] - n0 // 2)) % n0
    idx1 = (np.arange(n1)[None, :] - (np.arange(n1)[:, None] - n1 // 2)) % n1
    W0 = np.conj(windows[0])
    W1 = np.conj(windows[1])
    A = vals[None, None, :, :] * W0[idx0][:, None, :, None] * W1[idx1][None, :, None, :]
    V = steps[0] * steps[1] * ctr_fft(A, axes=(2, 3))
    f_steps = (1.0 / (n0 * steps[0]), 1.0 / (n1 * steps[1]))
    return V, steps, f_steps


def _moment_norm2(vals: np.ndarray, steps, m: Weight | None,
                  deck: bool = False) -> float:
    """Exact M^{2,2}_m norm of an n-variable field without its STFT.

    Uses the circular identities (both exact on the lattice)
        sum_zeta |V(Z,zeta)|^2 fcell = sum_t |F[t]|^2 |Phi(t-Z)|^2 tcell
        sum_Z |V(Z,zeta)|^2 Zcell = sum_nu |Fhat[nu]|^2 |Phihat(nu-zeta)|^2 ncell
    so weighted second (and fourth) moments reduce to window-moment
    correlations. Supported weights: m = 1 (any), VS with s in {0,1},
    ONE_TENSOR_VS with s in {0,1,2}.

    With ``deck=True`` (phase-space kernels on the twisted double cover,
    axis layout (x, xi, y, eta)) distances are folded to the fundamental
    domain: position moments on the x/y axes and frequency moments on the
    chord (dual-of-xi/eta) axes use the half-period wrapped coordinate, so
    the cover's second copy of each value sits at distance zero, matching
    the folded metric used for concentration profiles.
    """
    nd = vals.ndim
    dims = vals.shape
    tcell = float(np.prod(steps))
    E = np.abs(vals) ** 2
    total = float(np.sum(E) * tcell)  # ||F||^2 = ||V||^2 exactly
    s = 0.0 if m is None else m.s
    if s == 0:
        return np.sqrt(total)

    kind = m.kind
    if kind == VS and s not in (1.0,):
        raise BadExponent("moment fast path supports VS only at s in {0,1}")
    if kind == ONE_TENSOR_VS and s not in (1.0, 2.0):
        raise BadExponent("moment fast path supports 1(x)v_s at s in {0,1,2}")

    def axis_moments(w2, n, step, order, fold=False):
        """c_k[t] = sum_Z Z^k w2[(Z - t)] step, circular, k = order.

        With fold, Z is the signed distance to the nearest half-period
        lattice point (period n//2 samples) instead of the raw centered
        coordinate.
        """
        base = np.arange(n) - n // 2
        if fold:
            half = n // 2
            base = (base + half // 2) % half - half // 2
        zs = base * step
        out = np.zeros(n)
        for shift in range(n):
            rel = (np.arange(n) - (shift - n // 2)) % n
            out[shift] = np.sum((zs**order) * w2[rel]) * step
        return out

    # per-axis windows on the position side and their exact dual samples:
    # the frequency identity holds with the discrete unitary DFT of the
    # sampled window, not a freshly sampled Gaussian (aliasing differs).
    pos_w2 = [_axis_window(dims[i], steps[i]) ** 2 for i in range(nd)]
    f_steps = tuple(1.0 / (dims[i] * steps[i]) for i in range(nd))
    freq_w2 = []
    for i in range(nd):
        phi = _axis_window(dims[i], steps[i]).astype(np.complex128)
        phihat = steps[i] * ctr_fft(phi, 0)
        freq_w2.append(np.abs(phihat) ** 2)

    def weighted_moment(arr, arr_steps, w2s, order_axes, fold_axes=()):
        """sum |arr|^2 * prod_i c_{k_i}(t_i) * cell for per-axis orders."""
        acc = np.abs(arr) ** 2
        for ax, order in enumerate(order_axes):
            n, step = arr.shape[ax], arr_steps[ax]
            if order == 0:
                c = np.ones(n)  # windows are L2-normalized per axis
            else:
                c = axis_moments(w2s[ax], n, step, order, fold=ax in fold_axes)
            shape = [1] * arr.ndim
            shape[ax] = n
            acc = acc * c.reshape(shape)
        return float(np.sum(acc) * np.prod(arr_steps))

    # Folded axes on the twisted double cover: the second copy of a value
    # sits half a period away along the position axes (x, y) and half a
    # dual period away along the chord axes (duals of xi, eta).
    if deck and nd != 4:
        raise BadExponent("deck folding applies to 4-variable kernels only")
    pos_fold = (0, 2) if deck else ()
    freq_fold = (1, 3) if deck else ()

    # frequency-side data
    Fhat = vals
    for ax in range(nd):
        Fhat = steps[ax] * ctr_fft(Fhat, ax)

    if kind == VS:
        # s = 1: v_1^2 = 1 + |Z|^2 + |zeta|^2 (no cross terms)
        pos = sum(
            weighted_moment(vals, steps, pos_w2,
                            tuple(2 if i == ax else 0 for i in range(nd)),
                            pos_fold)
            for ax in range(nd)
        )
        freq = sum(
            weighted_moment(Fhat, f_steps, freq_w2,
                            tuple(2 if i == ax else 0 for i in range(nd)),
                            freq_fold)
            for ax in range(nd)
        )
        return float(np.sqrt(total + pos + freq))

    # ONE_TENSOR_VS: weight depends on zeta only
    if s == 1.0:
        freq = sum(
            weighted_moment(Fhat, f_steps, freq_w2,
                            tuple(2 if i == ax else 0 for i in range(nd)),
                            freq_fold)
            for ax in range(nd)
        )
        return float(np.sqrt(total + freq))
    # s = 2: (1+|zeta|^2)^2 = 1 + 2|zeta|^2 + |zeta|^4;
    # |zeta|^4 = sum_i zeta_i^4 + 2 sum_{i<j} zeta_i^2 zeta_j^2
    freq2 = sum(
        weighted_moment(Fhat, f_steps, freq_w2,
                        tuple(2 if i == ax else 0 for i in range(nd)),
                        freq_fold)
        for ax in range(nd)
    )
    freq4 = sum(
        weighted_moment(Fhat, f_steps, freq_w2,
                        tuple(4 if i == ax else 0 for i in range(nd)),
                        freq_fold)
        for ax in range(nd)
    )
    for i in range(nd):
        for j in range(i + 1, nd):
            orders = [0] * nd
            orders[i] = 2
            orders[j] = 2
            freq4 += 2.0 * weighted_moment(Fhat, f_steps, freq_w2,
                                           tuple(orders), freq_fold)
    return float(np.sqrt(total + 2.0 * freq2 + freq4))


def decimated_quasinorm(
    vals: np.ndarray,
    steps,
    p,
    q,
    m: Weight | None = None,
    stride: int = 8,
    return_samples: bool = False,
):
    """M^{p,q}_m quasi-norm of an n-variable field on a frequency-decimated
    STFT lattice (all window positions kept; frequencies strided).

    For each sampled frequency zeta the full position slice
    V(., zeta) = conj-correlate(F e^{-2 pi i zeta t}, Phi) comes from FFTs,
    so the inner l^p (or sup) over positions is exact; the outer l^q sums
    over the decimated zeta lattice with the inflated cell stride^nd.
    """
    p = _check_exponent(p)
    q = _check_exponent(q)
    vals = np.asarray(vals)
    nd = vals.ndim
    dims = vals.shape
    tcell = float(np.prod(steps))
    windows = [_axis_window(dims[i], steps[i]) for i in range(nd)]
    Phi = windows[0]
    for w in windows[1:]:
        Phi = np.multiply.outer(Phi, w)
    Phihat_conj = np.conj(np.fft.fftn(np.fft.ifftshift(Phi)))
    f_steps = [1.0 / (dims[i] * steps[i]) for i in range(nd)]
    zgrids = [np.arange(0, dims[i], stride) for i in range(nd)]
    axis_vals_pos = [
        (np.arange(dims[i]) - dims[i] // 2) * steps[i] for i in range(nd)
    ]
    r2_pos = np.zeros((1,) * nd)
    for ax in range(nd):
        v = axis_vals_pos[ax] ** 2
        shape = [1] * nd
        shape[ax] = dims[ax]
        r2_pos = r2_pos + v.reshape(shape)

    def reduce_pos(G):
        if np.isinf(p):
            return float(np.max(G))
        return float((np.sum(G**p) * tcell) ** (1.0 / p))

    inner_list, raw_list, zeta_list = [], [], []
    for kidx in np.ndindex(*(len(zg) for zg in zgrids)):
        ks = [zgrids[i][kidx[i]] for i in range(nd)]
        zeta = [(ks[i] - dims[i] // 2) * f_steps[i] for i in range(nd)]
        z2 = float(sum(z * z for z in zeta))
        # V(Z, zeta) = sum_t F[t] conj(Phi[t - Z]) e^{-2 pi i zeta . t} tcell:
        # modulate in centered coordinates, then circular cross-correlation
        # with Phi via FFTs in natural index order.
        phase = np.ones((1,) * nd, dtype=np.complex128)
        for ax in range(nd):
            pv = np.exp(-2j * np.pi * zeta[ax] * axis_vals_pos[ax])
            shape = [1] * nd
            shape[ax] = dims[ax]
            phase = phase * pv.reshape(shape)
        FM = vals * phase
        slab = np.fft.ifftn(np.fft.fftn(np.fft.ifftshift(FM)) * Phihat_conj)
        G = np.abs(np.fft.fftshift(slab)) * tcell
        if return_samples:
            raw_list.append(reduce_pos(G))
        if m is not None and m.s != 0:
            if m.kind == VS:
                inner = reduce_pos(G * (1.0 + r2_pos + z2) ** (m.s / 2.0))
            else:
                inner = reduce_pos(G) * (1.0 + z2) ** (m.s / 2.0)
        else:
            inner = reduce_pos(G)
        inner_list.append(inner)
        zeta_list.append(zeta)

    inner_arr = np.array(inner_list)
    zeta_arr = np.array(zeta_list)
    f_cell = float(np.prod(f_steps)) * stride**nd
    if np.isinf(q):
        out = float(np.max(inner_arr))
    else:
        out = float((np.sum(inner_arr**q) * f_cell) ** (1.0 / q))
    if return_samples:
        return out, zeta_arr, np.array(raw_list)
    return out


def mod_norm(f, p, q, m: Weight | None = None, window: Signal | None = None,
             steps=None, stride: int = 8) -> float:
    """Modulation quasi-norm ||V_window f||_{L^{p,q}_m}.

    Signals with one or two variables use the materialized STFT (the
    default window is the L2-normalized Gaussian on the signal's grid).
    Four-variable fields dispatch to the exact moment route at p = q = 2
    and to the frequency-decimated scan otherwise.
    """
    p = _check_exponent(p)
    q = _check_exponent(q)
    if isinstance(f, Signal):
        if window is None:
            phi = gaussian(f.grid)
            window = Signal(f.grid, phi.values / np.sqrt(np.sum(np.abs(phi.values) ** 2) * f.grid.cell()))
        if not np.any(window.values):
            raise ZeroWindow("modulation-norm window is zero")
        return mixed_norm(stft(f, window), p, q, m)
    vals, st, deck = _as_field_spec(f, steps)
    nd = vals.ndim
    if nd == 1:
        g = Grid(1, vals.shape[0])
        return mod_norm(Signal(g, vals), p, q, m, window)
    if nd == 2:
        windows = [_axis_window(vals.shape[i], st[i]) for i in range(2)]
        V, xs, fs = _stft_2var(vals, st, windows)
        return mixed_norm((V, xs, fs), p, q, m)
    if nd == 4:
        if p == 2.0 and q == 2.0:
            return _moment_norm2(vals, st, m, deck=deck)
        return decimated_quasinorm(vals, st, p, q, m, stride=stride)
    raise BadExponent(f"unsupported field rank {nd}")


# ---------------------------------------------------------------------------
# derived reports
# ---------------------------------------------------------------------------

def tensor_norm_check(f: Signal, p, q) -> tuple:
    """(||f (x) conj f||_{M^{p,q}}, ||f||_{M^{p,q}}^2) with matched windows."""
    from .signal_core import tensor

    fconj = Signal(f.grid, np.conj(f.values))
    F2 = tensor(f, fconj)
    a = mod_norm(F2, p, q)
    b = mod_norm(f, p, q) ** 2
    return a, b


def shubin_sobolev(field, s: float, steps=None) -> tuple:
    """(Q_s, H^s) norms: M^{2,2}_{v_s} and M^{2,2}_{1 (x) v_s}."""
    if s < 0:
        raise BadExponent("s must be nonnegative")
    qn = mod_norm(field, 2, 2, weight_vs(s), steps=steps)
    hn = mod_norm(field, 2, 2, weight_one_tensor_vs(s), steps=steps)
    return qn, hn


def tube_distance_sq(n: int, S: np.ndarray, h: float, fsw: float) -> np.ndarray:
    """Folded squared distance |z - S w| in cell units on the rank-4 lattice.

    Genuine discrete kernels carry exactly one structural ghost: a
    half-period image on the z position axis.  Measured on metaplectic,
    shear, type-I and propagator kernels, half the kernel mass sits at
    offset (n/2, 0) from the graph and none appears at any other period
    fraction, so position differences fold modulo n/2 and frequency
    differences modulo n (the full length of the half-dual axis).

    An integer flow map sends the identification lattice (n/2) x n into
    itself, so the graph z = S w descends to that quotient as a single
    sheet and nothing else is identified — the strict fold keeps full
    discriminating power on lattice flows.  A non-integer map does not
    descend: every identified input translate w + (a1 n/2, a2 n) folds
    to a distinct sheet of the manifold, and the distance minimizes over
    the reachable sheets.  At incommensurate angles the sheets crowd the
    window, so the gate separates genuine kernels from dense mass by a
    thinner margin there; the discrimination is sharpest on integer and
    rational flows.
    """
    j = np.arange(n) - n // 2  # z position index (x / h)
    k = np.arange(n) - n // 2  # z frequency index (xi / fsw)
    b = np.arange(n) - n // 2  # w position index
    e = np.arange(n) - n // 2  # w frequency index
    half = n // 2

    # the flow in index units: position rows scale by h, frequency rows
    # by the half-dual step (fsw / h = 1/2 on the self-dual lattice)
    p = S[0, 0]
    q = S[0, 1] * fsw / h
    r = S[1, 0] * h / fsw
    s = S[1, 1]

    def fold_x(v):
        return (v + half / 2) % half - half / 2

    def fold_k(v):
        return (v + n / 2) % n - n / 2

    if np.all(np.abs(S - np.rint(S)) < 1e-9):
        shifts = [(0, 0)]
    else:
        reach = int(np.ceil(float(np.max(np.abs(S))))) + 1
        shifts = [
            (a1, a2)
            for a1 in range(-reach, reach + 1)
            for a2 in range(-reach, reach + 1)
        ]
    best = None
    for a1, a2 in shifts:
        px = p * (b[:, None] + half * a1) + q * (e[None, :] + n * a2)
        pxi = r * (b[:, None] + half * a1) + s * (e[None, :] + n * a2)
        dx = fold_x(j[:, None, None, None] - px[None, None, :, :])
        dk = fold_k(k[None, :, None, None] - pxi[None, None, :, :])
        d2 = dx**2 + dk**2
        best = d2 if best is None else np.minimum(best, d2)
    return best


def concentration_profile(k, S, radii) -> list:
    """[(R, l2-mass fraction at folded distance > R)] for the kernel tensor.

    S may be a SymplecticMat or a raw 2x2 array. Distances are in cell
    units (x in units of h, xi in units of the kernel frequency step).
    """
    Smat = S.mat if hasattr(S, "mat") else np.asarray(S, dtype=float)
    g = k.grid
    n = g.n
    d2 = tube_distance_sq(n, Smat, g.h, g.half_dual_step)
    E = np.abs(k.tensor) ** 2
    tot = float(np.sum(E))
    out = []
    for R in radii:
        frac = float(np.sum(E[d2 > R * R]) / tot) if tot > 0 else 0.0
        out.append((float(R), frac))
    return out
