"""Symplectic linear algebra: generators, flows, lifts, projections.

Block convention: a 2d x 2d matrix S acts on phase-space points z = (x, xi)
stacked position-first, with blocks S = [[A, B], [C, D]] and

    J = [[0, I], [-I, 0]],      S symplectic  <=>  S^T J S = J.

The 4d x 4d matrices produced by :func:`lift_tensor` act on doubled phase
space with the same position-first stacking ((x, y), (xi, eta)).
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import expm

from .config import OMEGA
from .errors import (
    NonSymmetricC,
    NotHamiltonian,
    NotSymplectic,
    OddDimension,
    SingularL,
)

# ---------------------------------------------------------------------------
# predicates and constructors
# ---------------------------------------------------------------------------

def make_J(d: int) -> np.ndarray:
    I = np.eye(d)
    Z = np.zeros((d, d))
    return np.block([[Z, I], [-I, Z]])


def _sympl_residual(mat: np.ndarray) -> float:
    d = mat.shape[0] // 2
    J = make_J(d)
    return float(np.max(np.abs(mat.T @ J @ mat - J)))


def is_symplectic(S, tol: float | None = None) -> bool:
    """True iff S^T J S = J within tol (default scales with ||S||^2)."""
    mat = S.mat if isinstance(S, SymplecticMat) else np.asarray(S, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise OddDimension("symplectic matrices must be square")
    if mat.shape[0] % 2 != 0:
        raise OddDimension(f"dimension {mat.shape[0]} is odd")
    if tol is None:
        scale = max(1.0, float(np.max(np.abs(mat))) ** 2)
        tol = 1e-12 * scale
    return _sympl_residual(mat) <= tol


class SymplecticMat:
    """A validated symplectic matrix; raises NotSymplectic on construction."""

    __slots__ = ("mat", "d")

    def __init__(self, mat, tol: float | None = None):
        mat = np.array(mat, dtype=float)
        if not is_symplectic(mat, tol=tol):
            raise NotSymplectic(
                f"S^T J S - J residual {_sympl_residual(mat):.3e} exceeds tolerance"
            )
        object.__setattr__(self, "mat", mat)
        object.__setattr__(self, "d", mat.shape[0] // 2)

    def __setattr__(self, *a):  # immutable
        raise AttributeError("SymplecticMat is immutable")

    def blocks(self):
        d = self.d
        m = self.mat
        return m[:d, :d], m[:d, d:], m[d:, :d], m[d:, d:]

    def inv(self) -> "SymplecticMat":
        # S^{-1} = J^T S^T J, exact for symplectic S
        J = make_J(self.d)
        return SymplecticMat(J.T @ self.mat.T @ J)

    def __matmul__(self, other: "SymplecticMat") -> "SymplecticMat":
        return SymplecticMat(self.mat @ other.mat)

    def __repr__(self):
        return f"SymplecticMat(d={self.d})"


class HamiltonianMat:
    """An infinitesimally symplectic matrix: S^T J + J S = 0."""

    __slots__ = ("mat", "d")

    def __init__(self, mat, tol: float = 1e-12):
        mat = np.array(mat, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] % 2:
            raise OddDimension("hamiltonian matrices must be even-dimensional square")
        d = mat.shape[0] // 2
        J = make_J(d)
        resid = float(np.max(np.abs(mat.T @ J + J @ mat)))
        scale = max(1.0, float(np.max(np.abs(mat))))
        if resid > tol * scale:
            raise NotHamiltonian(f"S^T J + J S residual {resid:.3e}")
        object.__setattr__(self, "mat", mat)
        object.__setattr__(self, "d", d)

    def __setattr__(self, *a):
        raise AttributeError("HamiltonianMat is immutable")

    def __repr__(self):
        return f"HamiltonianMat(d={self.d})"


class BigSymplecticMat(SymplecticMat):
    """A symplectic matrix on doubled phase space (dimension 4d)."""

    def __init__(self, mat, tol: float | None = None):
        mat = np.array(mat, dtype=float)
        if mat.shape[0] % 4 != 0:
            raise OddDimension("doubled phase space needs dimension divisible by 4")
        super().__init__(mat, tol=tol)

    @property
    def dd(self) -> int:
        """The base dimension d (a quarter of the matrix size)."""
        return self.d // 2

    def block4(self, i: int, j: int) -> np.ndarray:
        """(i, j) block of the 4 x 4 grid of d x d blocks (0-based)."""
        d = self.dd
        return self.mat[i * d:(i + 1) * d, j * d:(j + 1) * d]

    def E_sub(self) -> np.ndarray:
        """Shift submatrix E = [[A11, A13], [A21, A23]] in d x d blocks."""
        top = np.hstack([self.block4(0, 0), self.block4(0, 2)])
        bot = np.hstack([self.block4(1, 0), self.block4(1, 2)])
        return np.vstack([top, bot])


def make_VC(C) -> SymplecticMat:
    """Lower shear [[I, 0], [C, I]] for symmetric C (chirp multiplier)."""
    C = np.atleast_2d(np.asarray(C, dtype=float))
    if C.shape[0] != C.shape[1] or np.max(np.abs(C - C.T)) > 1e-12 * max(
        1.0, float(np.max(np.abs(C)))
    ):
        raise NonSymmetricC("chirp matrix C must be symmetric")
    d = C.shape[0]
    I = np.eye(d)
    Z = np.zeros((d, d))
    return SymplecticMat(np.block([[I, Z], [C, I]]))


def make_DL(L) -> SymplecticMat:
    """Dilation [[L^{-1}, 0], [0, L^T]] for invertible L."""
    L = np.atleast_2d(np.asarray(L, dtype=float))
    d = L.shape[0]
    if L.shape[0] != L.shape[1]:
        raise SingularL("dilation matrix must be square")
    det = float(np.linalg.det(L))
    if abs(det) < 1e-12 * max(1.0, float(np.max(np.abs(L))) ** d):
        raise SingularL(f"dilation matrix is singular (det = {det:.3e})")
    Linv = np.linalg.inv(L)
    Z = np.zeros((d, d))
    return SymplecticMat(np.block([[Linv, Z], [Z, L.T]]), tol=1e-9 * max(1.0, np.max(np.abs(Linv)) ** 2))


# ---------------------------------------------------------------------------
# flows
# ---------------------------------------------------------------------------

def hamiltonian_flow(Sham: HamiltonianMat, t: float, omega: float = OMEGA) -> SymplecticMat:
    """Flow map exp((t / omega) * Sham) of an infinitesimally symplectic matrix."""
    mat = expm((t / omega) * Sham.mat)
    scale = max(1.0, float(np.max(np.abs(mat))) ** 2)
    return SymplecticMat(mat, tol=1e-9 * scale)


def caustic_window(
    Sham: HamiltonianMat,
    t_max: float = 100.0,
    dt: float = 1e-3,
    tol: float = 1e-10,
    omega: float = OMEGA,
) -> float:
    """Smallest |t| at which det A(t) = 0 for the flow (t_max if none).

    Scans both time directions with an incrementally multiplied step map,
    then refines any sign change of det A by bisection on the exact flow.
    """
    dd = Sham.d

    def detA(t: float) -> float:
        m = expm((t / omega) * Sham.mat)
        return float(np.linalg.det(m[:dd, :dd]))

    def scan(sign: float, bound: float) -> float:
        step = expm((sign * dt / omega) * Sham.mat)
        cur = np.eye(2 * dd)
        f_prev = 1.0  # det A(0) = 1
        t_prev = 0.0
        nsteps = int(np.ceil(bound / dt))
        for k in range(1, nsteps + 1):
            cur = step @ cur
            t_cur = k * dt
            f_cur = float(np.linalg.det(cur[:dd, :dd]))
            if f_cur == 0.0:
                return t_cur
            if f_prev * f_cur < 0.0:
                lo, hi = t_prev, t_cur
                flo = detA(sign * lo)
                while hi - lo > tol:
                    mid = 0.5 * (lo + hi)
                    fm = detA(sign * mid)
                    if fm == 0.0:
                        return mid
                    if flo * fm < 0.0:
                        hi = mid
                    else:
                        lo, flo = mid, fm
                return 0.5 * (lo + hi)
            # dip without sign change (even-order touch): parabolic refine
            if abs(f_cur) < 1e-9 and abs(f_cur) <= abs(f_prev):
                ts = np.array([t_cur - dt, t_cur, t_cur + dt])
                fs = np.array([detA(sign * u) for u in ts])
                denom = fs[0] - 2 * fs[1] + fs[2]
                if denom != 0:
                    t_star = t_cur - 0.5 * dt * (fs[2] - fs[0]) / denom
                    if abs(detA(sign * t_star)) < 1e-8:
                        return float(t_star)
            t_prev, f_prev = t_cur, f_cur
        return bound

    t_pos = scan(+1.0, t_max)
    t_neg = scan(-1.0, min(t_max, t_pos)) if t_pos > 0 else t_pos
    return float(min(t_pos, t_neg, t_max))


# ---------------------------------------------------------------------------
# doubled phase space
# ---------------------------------------------------------------------------

def lift_tensor(S1: SymplecticMat, S2: SymplecticMat) -> BigSymplecticMat:
    """Tensor lift acting blockwise: ((x, y), (xi, eta)) position-first."""
    A1, B1, C1, D1 = S1.blocks()
    A2, B2, C2, D2 = S2.blocks()

    def bd(M, N):
        d1, d2 = M.shape[0], N.shape[0]
        out = np.zeros((d1 + d2, d1 + d2))
        out[:d1, :d1] = M
        out[d1:, d1:] = N
        return out

    A, B, C, D = bd(A1, A2), bd(B1, B2), bd(C1, C2), bd(D1, D2)
    return BigSymplecticMat(np.block([[A, B], [C, D]]))


def special_projections() -> dict:
    """Named covariance matrices for distinguished phase-space distributions.

    Keys: "FT2" (partial Fourier transform in the second slot), "A0"
    (Rihaczek), "AHALF" (Wigner), "A8" (the 8 x 8 kernel-intertwining map).
    """
    ft2 = np.array(
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0, 0.0],
        ]
    )
    a0 = np.array(
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, -1.0],
            [0.0, 0.0, 1.0, 1.0],
            [-1.0, 1.0, 0.0, 0.0],
        ]
    )
    ahalf = np.array(
        [
            [0.5, 0.5, 0.0, 0.0],
            [0.0, 0.0, 0.5, -0.5],
            [0.0, 0.0, 1.0, 1.0],
            [-1.0, 1.0, 0.0, 0.0],
        ]
    )
    a8 = np.array(
        [
            [0.25, 0.25, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.5, 0.25, -0.25, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.5, 0.5, -0.5, 0.0],
            [-0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, -0.5],
            [0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0],
            [-1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
            [-0.5, -0.5, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0, -0.5, 0.5, 0.0, 0.0],
        ]
    )
    return {
        "FT2": BigSymplecticMat(ft2),
        "A0": BigSymplecticMat(a0),
        "AHALF": BigSymplecticMat(ahalf),
        "A8": BigSymplecticMat(a8),
    }


def shift_invertible(A: BigSymplecticMat, tol: float = 1e-10) -> bool:
    """True iff the shift submatrix E_A is invertible."""
    E = A.E_sub()
    return bool(abs(np.linalg.det(E)) > tol)


def admissible_quantization(A: BigSymplecticMat, tol: float = 1e-12) -> bool:
    """True iff the lower block rows carry the conjugate-diagonal structure
    (third block row: B32 = -B31 and B34 = B33; fourth likewise)."""
    checks = [
        A.block4(2, 1) + A.block4(2, 0),
        A.block4(2, 3) - A.block4(2, 2),
        A.block4(3, 1) + A.block4(3, 0),
        A.block4(3, 3) - A.block4(3, 2),
    ]
    return bool(max(float(np.max(np.abs(c))) for c in checks) <= tol)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def mat_to_csv(M) -> str:
    """Row-major CSV: rows joined by ';', entries by ',', full precision."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    return ";".join(",".join(repr(float(v)) for v in row) for row in M)


def mat_from_csv(text: str) -> np.ndarray:
    rows = [r for r in text.strip().split(";") if r.strip()]
    data = [[float(v) for v in r.split(",")] for r in rows]
    M = np.array(data, dtype=float)
    if M.ndim != 2 or any(len(r) != M.shape[1] for r in data):
        raise ValueError("ragged matrix text")
    return M
