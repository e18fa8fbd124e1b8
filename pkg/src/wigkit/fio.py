"""Kohn-Nirenberg operators, quadratic-phase type-I operators, and the
phase-space membership diagnostic.

A type-I operator acts as

    T f(x) = sum_eta  e^{2 pi i Phi(x, eta)} sigma(x, eta) fhat(eta) dual_cell

with a quadratic phase Phi(x, eta) = x.Px/2 + eta.Qx - eta.Reta/2.  The
Kohn-Nirenberg operator is the flat-phase case Phi = x.eta.  The phase-space
kernel of a type-I operator has a closed chord form: the doubled symbol

    sigma_I(x, eta, t, r) = sigma(x + t/2, eta + r/2) conj(sigma(x - t/2, eta - r/2))

is transformed over the chord pair (t, r) and the result is read off along
an affine index map determined by the phase's canonical blocks.  On the
lattice this identity is exact (machine precision) whenever the block
ratios C/A, 1/A, B/A are integers; otherwise evaluations snap to the
nearest representable shift and the result is flagged as interpolated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULTS, RunConfig
from .errors import (
    DimMismatch,
    IllConditionedS,
    KernelTooLarge,
    LatticeMismatch,
    NonSymmetric,
    SingularL,
)
from .modnorm import (
    concentration_profile,
    decimated_quasinorm,
    weight_one_tensor_vs,
)
from .signal_core import Grid, PhaseField
from .symplectic import SymplecticMat
from .transforms import ctr_ifft
from .wigner_kernel import DIRECT, OperatorKernel, WignerKernel, wigner_kernel


# ---------------------------------------------------------------------------
# quadratic phases
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadraticPhase:
    """Phi(x, eta) = x.Px/2 + eta.Qx - eta.Reta/2 with invertible coupling Q.

    The companion canonical transformation S = [[A, B], [C, D]] is recovered
    from Q = A^{-1}, P = C A^{-1}, R = A^{-1} B, D = A^{-T}(I + C^T B).
    """

    P: np.ndarray
    Q: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        P = np.atleast_2d(np.asarray(self.P, dtype=float))
        Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        R = np.atleast_2d(np.asarray(self.R, dtype=float))
        d = P.shape[0]
        for name, M in (("P", P), ("Q", Q), ("R", R)):
            if M.shape != (d, d):
                raise DimMismatch(f"phase block {name} must be {d}x{d}")
        for name, M in (("P", P), ("R", R)):
            if np.max(np.abs(M - M.T)) > 1e-12 * max(1.0, np.max(np.abs(M))):
                raise NonSymmetric(f"phase block {name} must be symmetric")
        if abs(np.linalg.det(Q)) < 1e-12:
            raise SingularL("phase coupling block Q must be invertible")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "R", R)

    @property
    def d(self) -> int:
        return self.P.shape[0]

    def blocks(self):
        """Canonical blocks (A, B, C, D) of the companion transformation."""
        A = np.linalg.inv(self.Q)
        C = self.P @ A
        B = A @ self.R
        D = np.linalg.solve(A.T, np.eye(self.d) + C.T @ B)
        return A, B, C, D

    def symplectic(self) -> SymplecticMat:
        A, B, C, D = self.blocks()
        return SymplecticMat(np.block([[A, B], [C, D]]))

    @classmethod
    def from_symplectic(cls, S) -> "QuadraticPhase":
        """Free phase of a transformation with invertible position block."""
        Sm = S if isinstance(S, SymplecticMat) else SymplecticMat(S)
        A, B, C, D = Sm.blocks()
        if abs(np.linalg.det(A)) < 1e-12:
            raise SingularL("free phase needs an invertible A block")
        Ainv = np.linalg.inv(A)
        P = C @ Ainv
        R = Ainv @ B
        # symmetric for exact canonical input; strip rounding noise
        return cls(0.5 * (P + P.T), Ainv, 0.5 * (R + R.T))

    def values(self, grid: Grid) -> np.ndarray:
        """Phi(x_j, eta_e) on the (x, dual) lattice (one-variable case)."""
        if self.d != 1 or grid.d != 1:
            raise DimMismatch("phase tables are built for one-variable grids")
        x = grid.axis()
        eta = grid.dual_axis()
        p, q, r = self.P[0, 0], self.Q[0, 0], self.R[0, 0]
        return (
            0.5 * p * x[:, None] ** 2
            + q * x[:, None] * eta[None, :]
            - 0.5 * r * eta[None, :] ** 2
        )


def kn_phase(d: int = 1) -> QuadraticPhase:
    """The Kohn-Nirenberg phase Phi = x.eta (companion S = identity)."""
    eye = np.eye(d)
    return QuadraticPhase(0.0 * eye, eye, 0.0 * eye)


# ---------------------------------------------------------------------------
# symbols
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Symbol:
    """sigma(x, eta) sampled on the (x) x (dual) lattice."""

    field: PhaseField

    def __post_init__(self):
        vals = self.field.values
        if not np.all(np.isfinite(vals.real)) or not np.all(np.isfinite(vals.imag)):
            raise ValueError("symbol values must be finite")

    @property
    def grid(self) -> Grid:
        return self.field.grid

    @property
    def values(self) -> np.ndarray:
        return self.field.values


def symbol(grid: Grid, values) -> Symbol:
    """Wrap lattice samples sigma[j, e] = sigma(x_j, eta_e) as a Symbol."""
    pf = PhaseField(
        grid,
        np.asarray(values, dtype=np.complex128),
        freq_step=grid.dual_step,
        x_step=grid.h,
        cell=(grid.h * grid.dual_step) ** grid.d,
    )
    return Symbol(pf)


def _check_symbol(sig: Symbol, grid: Grid | None = None) -> Grid:
    g = sig.grid if grid is None else grid
    if sig.grid != g:
        raise LatticeMismatch("symbol lattice does not match the target grid")
    f = sig.field
    if abs(f.x_step - g.h) > 1e-12 or abs(f.freq_step - g.dual_step) > 1e-12:
        raise LatticeMismatch("symbol must live on the (x) x (dual) lattice")
    return g


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------

def kn_op(sig: Symbol) -> OperatorKernel:
    """Kohn-Nirenberg operator: inverse partial transform + shear index map.

    k_T[j, j'] = dual_step * sum_e sigma[j, e] e^{2 pi i (j - j')(e - n/2)/n}.
    """
    g = _check_symbol(sig)
    n = g.n
    # W[j, delta] = sum_e sigma[j, e] e^{2 pi i delta (e - n/2)/n}
    W = n * np.fft.ifft(np.fft.ifftshift(sig.values, axes=1), axis=1)
    jj = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    K = g.dual_step * W[np.arange(n)[:, None], jj]
    return OperatorKernel(g, K)


def type1_fio(sig: Symbol, phi: QuadraticPhase) -> OperatorKernel:
    """Type-I operator matrix k_T[j, b] = fsd sum_e e^{2 pi i Phi} sigma e^{-2 pi i y_b eta_e}."""
    g = _check_symbol(sig)
    x = g.axis()
    eta = g.dual_axis()
    amp = np.exp(2j * np.pi * phi.values(g)) * sig.values
    E = np.exp(-2j * np.pi * np.multiply.outer(eta, x))  # [e, b]
    return OperatorKernel(g, g.dual_step * (amp @ E))


def type2_adjoint(T: OperatorKernel) -> OperatorKernel:
    """Adjoint (conjugate-transpose) operator; a type-II operator for type-I input."""
    return T.adjoint()


# ---------------------------------------------------------------------------
# doubled symbol and the closed-form kernel
# ---------------------------------------------------------------------------

def sigma_I(sig: Symbol, config: RunConfig = DEFAULTS) -> np.ndarray:
    """Rank-4 doubled symbol over (x, eta, t-chord, r-chord).

    sI[j, e, m, u] = sigma[(j+m) % n, (e+u) % n] * conj(sigma[(j-m) % n, (e-u) % n]):
    the circular half-shift pairing, indexed exactly like the Wigner chords.
    """
    g = _check_symbol(sig)
    n = g.n
    if n > config.kernel_max_n:
        raise KernelTooLarge(
            f"doubled symbol needs n <= {config.kernel_max_n}, got {n}"
        )
    idx = np.arange(n)
    jp = (idx[:, None] + idx[None, :]) % n  # [j, m]
    jm = (idx[:, None] - idx[None, :]) % n
    ep = (idx[:, None] + idx[None, :]) % n  # [e, u]
    em = (idx[:, None] - idx[None, :]) % n
    sv = sig.values
    return (
        sv[jp[:, None, :, None], ep[None, :, None, :]]
        * np.conj(sv[jm[:, None, :, None], em[None, :, None, :]])
    )


def _fine_chord_transforms(sI: np.ndarray, pairs) -> dict:
    """fft2 of sI over (m, u) with optional half-index modulations.

    Returns {(om, ou): G} where G[eb, qm, qu] evaluates the chord sum at
    half-index shifts (qm + om/2, qu + ou/2); the modulations use centered
    chord representatives so half-index (anti-periodic) evaluations pick
    the physical fundamental window.
    """
    n = sI.shape[1]
    cen = ((np.arange(n) + n // 2) % n) - n // 2
    out = {}
    for om, ou in pairs:
        arr = sI
        if om:
            arr = arr * np.exp(-1j * np.pi * om * cen / n)[None, :, None]
        if ou:
            arr = arr * np.exp(-1j * np.pi * ou * cen / n)[None, None, :]
        out[(om, ou)] = np.fft.fft2(arr, axes=(1, 2))
    return out


def wigner_kernel_type1(
    sig: Symbol, phi: QuadraticPhase, config: RunConfig = DEFAULTS
) -> WignerKernel:
    """Closed-form phase-space kernel of a type-I operator.

    Evaluates the chord transform of sigma_I along the affine map

        slot3 = xi - (C/A) x - (1/A) eta      (fine quarter-index lattice)
        slot4 = y  - (1/A) x + (B/A) eta

    including the staggered (half-integer center) chord family that fills
    the odd frequency cells, then folds the result onto the sign-twisted
    cover.  Exact for integer block ratios; otherwise nearest-shift
    snapping is used and ``interpolated`` is set.
    """
    g = _check_symbol(sig)
    n = g.n
    if n > config.experiment_max_n:
        raise KernelTooLarge(
            f"closed-form kernel needs n <= {config.experiment_max_n}, got {n}"
        )
    A, B, C, _ = phi.blocks()
    a, b, c = A[0, 0], B[0, 0], C[0, 0]
    CA, Ainv, AB = c / a, 1.0 / a, b / a

    # doubled-index (half-unit) shift coefficients
    coef = {
        "p_x": 4.0 * CA,
        "p_e": 4.0 * Ainv,
        "p_stag": 2.0 * Ainv,
        "w_x": 4.0 * Ainv,
        "w_e": 4.0 * AB,
        "w_stag": 2.0 * AB,
    }
    # integer block ratios keep every evaluation and both cover sheets on
    # the same cells; fractional ratios shear the sheets apart, so those
    # kernels are nearest-cell approximations and are flagged as such
    interpolated = any(abs(v - round(v)) > 1e-9 for v in (CA, Ainv, AB))

    idx = np.arange(n)
    cen = idx - n // 2
    sv = sig.values
    ep = (idx[:, None] + idx[None, :]) % n       # [eb, u]
    em = (idx[:, None] - idx[None, :]) % n
    ep1 = (idx[:, None] + idx[None, :] + 1) % n  # staggered center
    e1 = idx[: n // 2]
    eps_e = (2 * idx - n // 2) % n
    eps_o = (2 * idx + 1 - n // 2) % n
    kap = cen[:, None, None]
    bb = cen[None, :, None]
    eb = cen[None, None, :]

    two_n = 2 * n
    N = 4.0 / n
    shape3 = (n, n, n)
    ebi = np.broadcast_to(idx[None, None, :], shape3)

    def targets(P2v, W2v):
        Pm = np.broadcast_to(np.rint(P2v).astype(int) % two_n, shape3)
        Wm = np.broadcast_to(np.rint(W2v).astype(int) % two_n, shape3)
        om, ou = Pm % 2, Wm % 2
        pairs = {(o1, o2) for o1 in np.unique(om) for o2 in np.unique(ou)}
        return Pm // 2, Wm // 2, om, ou, pairs

    def gather(G, qm, qu, om, ou):
        out = np.empty(shape3, dtype=np.complex128)
        for key, src in G.items():
            sel = (om == key[0]) & (ou == key[1])
            if np.any(sel):
                out[sel] = src[ebi[sel], qm[sel], qu[sel]]
        return out

    tensor = np.zeros((n, n, n, n), dtype=np.complex128)
    for j in range(n):
        jc = j - n // 2
        jp = (j + idx) % n
        jm = (j - idx) % n

        P2 = 2 * kap - coef["p_x"] * jc - coef["p_e"] * eb
        W2 = 4 * bb - coef["w_x"] * jc + coef["w_e"] * eb
        P2o = P2 - coef["p_stag"]
        W2o = W2 + coef["w_stag"]
        qm_e, qu_e, om_e, ou_e, pairs_e = targets(P2, W2)
        qm_o, qu_o, om_o, ou_o, pairs_o = targets(P2o, W2o)

        sI_e = sv[jp[None, :, None], ep[:, None, :]] * np.conj(
            sv[jm[None, :, None], em[:, None, :]]
        )
        sI_o = sv[jp[None, :, None], ep1[:, None, :]] * np.conj(
            sv[jm[None, :, None], em[:, None, :]]
        )
        Ce = gather(_fine_chord_transforms(sI_e, pairs_e), qm_e, qu_e, om_e, ou_e)
        Co = gather(_fine_chord_transforms(sI_o, pairs_o), qm_o, qu_o, om_o, ou_o)
        Co = Co * np.exp(-1j * np.pi * W2o / two_n)
        acc = np.zeros((n, n, n), dtype=np.complex128)
        acc[:, :, eps_e[e1]] = 0.5 * (Ce[:, :, e1] + Ce[:, :, e1 + n // 2])
        acc[:, :, eps_o[e1]] += 0.5 * (Co[:, :, e1] + Co[:, :, e1 + n // 2])
        tensor[j] = N * acc

    sgn = np.where((np.arange(n) - n // 2) % 2 == 0, 1.0, -1.0)
    tensor = 0.5 * (tensor + sgn[None, :, None, None] * np.roll(tensor, -n // 2, axis=0))
    return WignerKernel(
        g, tensor, DIRECT, 1.0 / (8.0 * n), interpolated=interpolated
    )


# ---------------------------------------------------------------------------
# membership diagnostic
# ---------------------------------------------------------------------------

def _resample_indices(Sinv: np.ndarray, n: int):
    """Index image of u -> S^{-1} u for u on the self-dual (h, h) lattice.

    Returns centered integer index arrays (wx, wxi) over (beta, eps) plus a
    flag telling whether the map hit kernel cells exactly (integer position
    rows, half-integer frequency rows).  Maps that leave the lattice are
    snapped to the nearest cells so the diagnostic still runs for generic
    flow maps such as irrational rotations.
    """
    p, q = Sinv[0, 0], Sinv[0, 1]
    r, s = Sinv[1, 0], Sinv[1, 1]
    checks = (p, q, 2.0 * r, 2.0 * s)
    exact = all(abs(v - round(v)) <= 1e-9 for v in checks)
    cb = (np.arange(n) - n // 2)[:, None]
    ce = (np.arange(n) - n // 2)[None, :]
    wx = np.rint(p * cb + q * ce).astype(int)
    wxi = np.rint(2.0 * (r * cb + s * ce)).astype(int)
    return wx, wxi, exact


def fio_membership(
    T: OperatorKernel,
    S: SymplecticMat,
    q: float = 1.0,
    s: float = 1.0,
    config: RunConfig = DEFAULTS,
) -> dict:
    """Phase-space class diagnostic for T against the transformation S.

    (a) concentration: fraction of kernel mass beyond R cells of the
        manifold z = S w (folded metric); the pass verdict uses this gate.
    (b) candidate-symbol quasi-norm: resamples h(z, u) = k(z, S^{-1} u)
        (snapped to the nearest kernel cells when S^{-1} leaves the lattice;
        resample_exact reports which), extracts the candidate symbol on
        doubled variables, and reports its frequency-decimated M^{inf, q}
        norm with the 1 (x) v_s weight.
    (c) decay exponent: log-log fit of the symbol's off-diagonal decay over
        radial shells; reported with its own pass flag (exponent >= s + margin).
    """
    g = T.grid
    n = g.n
    if n > config.experiment_max_n:
        raise KernelTooLarge(
            f"membership diagnostic needs n <= {config.experiment_max_n}, got {n}"
        )
    if not isinstance(S, SymplecticMat):
        S = SymplecticMat(np.asarray(S, dtype=float))
    k = wigner_kernel(T, DIRECT, config)
    radii = [float(R) for R in range(0, 9)]
    profile = concentration_profile(k, S, radii)
    off_tube = dict(profile).get(float(config.membership_radius))
    if off_tube is None:
        off_tube = profile[-1][1]
    passed = bool(off_tube < config.membership_tol)

    # (b) candidate symbol on doubled variables
    if np.linalg.cond(S.mat) > config.inverse_cond_max:
        raise IllConditionedS(
            "flow map too ill-conditioned for the symbol resample"
        )
    Sinv = S.inv().mat
    wx, wxi, resample_exact = _resample_indices(Sinv, n)
    H = k.tensor[:, :, (wx + n // 2) % n, (wxi + n // 2) % n]
    # sum_u H(z, u) e^{+2 pi i u . zeta} cell_u  ->  n * centered inverse FFT
    F = (n * n * g.h * g.h) * ctr_ifft(H, axes=(2, 3))
    cj = np.arange(n) - n // 2
    ph1 = np.exp(-2j * np.pi * np.multiply.outer(cj, cj) / n)          # x . zeta_1
    ph2 = np.exp(-1j * np.pi * np.multiply.outer(cj, cj) / n)          # xi . zeta_2
    F = F * ph1[:, None, :, None] * ph2[None, :, None, :]
    steps = (g.h, g.half_dual_step, g.h, g.h)
    m = weight_one_tensor_vs(s)
    norm, zeta_arr, raw = decimated_quasinorm(
        F, steps, np.inf, q, m, stride=config.stft_stride, return_samples=True
    )

    # (c) shell fit of the raw sup-values against 1 + |zeta|
    rmag = np.sqrt(np.sum(zeta_arr**2, axis=1))
    shells = {}
    for rv, val in zip(np.round(rmag, 6), raw):
        shells.setdefault(rv, []).append(val)
    rs = np.array(sorted(shells))
    tops = np.array([max(shells[rv]) for rv in rs])
    keep = tops > 0
    exponent = 0.0
    if np.sum(keep) >= 2:
        lx = np.log(1.0 + rs[keep])
        ly = np.log(tops[keep])
        slope = np.polyfit(lx, ly, 1)[0]
        exponent = float(-slope)
    exponent_pass = bool(exponent >= s + config.membership_exponent_margin)

    return {
        "profile": profile,
        "off_tube": float(off_tube),
        "passed": passed,
        "symbol_norm": float(norm),
        "exponent": exponent,
        "exponent_pass": exponent_pass,
        "resample_exact": bool(resample_exact),
        "q": float(q),
        "s": float(s),
    }
