"""Discrete model of rapidly decreasing functions on R^d.

Centered grids, quadrature, inner products, test-signal constructors and
tensor products. Everything downstream (transforms, kernels, propagators)
is built on the two value types defined here:

* :class:`Signal` — complex samples on a centered lattice,
* :class:`PhaseField` — complex values on the doubled (phase-space) lattice.

Grid convention: n even samples per axis at x_j = (j - n/2) h with the
self-dual step h = 1/sqrt(n) by default, so the dual lattice has the same
step (frequency step 1/(n h) = h). All signals are treated as n-periodic;
test signals are expected to be concentrated (see :func:`tail_mass`).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimMismatch,
    GridMismatch,
    OffLattice,
    OrderTooHigh,
)

_LATTICE_RTOL = 1e-9


@dataclass(frozen=True)
class Grid:
    """Centered sampling lattice on R^d (d in {1, 2})."""

    d: int
    n: int
    h: float = 0.0

    def __post_init__(self):
        if self.d not in (1, 2):
            raise DimMismatch(f"grid dimension must be 1 or 2, got {self.d}")
        if self.n < 2 or self.n % 2 != 0:
            raise DimMismatch(f"grid size must be even and >= 2, got {self.n}")
        if self.h <= 0.0:
            object.__setattr__(self, "h", float(self.n) ** -0.5)

    @property
    def dual_step(self) -> float:
        """Frequency step of the full dual lattice, 1/(n h)."""
        return 1.0 / (self.n * self.h)

    @property
    def half_dual_step(self) -> float:
        """Frequency step of the half-dual lattice, 1/(2 n h)."""
        return 0.5 / (self.n * self.h)

    def axis(self) -> np.ndarray:
        """Sample points x_j = (j - n/2) h along one axis."""
        return (np.arange(self.n) - self.n // 2) * self.h

    def dual_axis(self, step: float | None = None) -> np.ndarray:
        """Frequency points xi_k = (k - n/2) * step (default: dual_step)."""
        s = self.dual_step if step is None else step
        return (np.arange(self.n) - self.n // 2) * s

    def shape(self) -> tuple:
        return (self.n,) * self.d

    def cell(self) -> float:
        """Quadrature cell h^d."""
        return self.h ** self.d

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Grid)
            and self.d == other.d
            and self.n == other.n
            and abs(self.h - other.h) <= 1e-15 * max(1.0, abs(self.h))
        )

    def __hash__(self):
        return hash((self.d, self.n, round(self.h, 15)))


@dataclass(frozen=True)
class Signal:
    """Complex samples on a :class:`Grid`."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=np.complex128)
        if vals.shape != self.grid.shape():
            vals = vals.reshape(self.grid.shape())
        if not np.all(np.isfinite(vals.real)) or not np.all(np.isfinite(vals.imag)):
            raise ValueError("signal contains non-finite entries")
        object.__setattr__(self, "values", vals)

    @property
    def d(self) -> int:
        return self.grid.d

    @property
    def n(self) -> int:
        return self.grid.n


@dataclass(frozen=True)
class PhaseField:
    """Complex values on the 2d-dimensional phase-space lattice.

    Axes are ordered position-block first, then frequency-block:
    (x_1..x_d, xi_1..xi_d). ``x_step``/``freq_step`` are the lattice steps,
    ``cell`` is the per-point quadrature measure of the *whole* 2d cell
    (the product over all axis pairs), fixed by the transform that created
    the field so that its Parseval/orthogonality identity is exact.
    """

    grid: Grid
    values: np.ndarray = field(repr=False)
    freq_step: float
    x_step: float
    cell: float

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.complex128)
        expect = (self.grid.n,) * (2 * self.grid.d)
        if vals.shape != expect:
            vals = vals.reshape(expect)
        object.__setattr__(self, "values", vals)

    @property
    def d(self) -> int:
        return self.grid.d

    @property
    def n(self) -> int:
        return self.grid.n

    def norm2(self) -> float:
        """L2 norm under the field's own cell measure."""
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.cell))

    def same_lattice(self, other: "PhaseField") -> bool:
        return (
            self.grid == other.grid
            and abs(self.freq_step - other.freq_step) <= 1e-15
            and abs(self.x_step - other.x_step) <= 1e-15
            and abs(self.cell - other.cell) <= 1e-18
        )


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def gaussian(grid: Grid) -> Signal:
    """Samples of exp(-pi |t|^2) (not normalized; squared L2 norm 2^{-d/2})."""
    x = grid.axis()
    g1 = np.exp(-np.pi * x * x)
    if grid.d == 1:
        vals = g1
    else:
        vals = np.multiply.outer(g1, g1)
    return Signal(grid, vals.astype(np.complex128))


def hermite(grid: Grid, k: int) -> Signal:
    """k-th L2-normalized Hermite function (d = 1 only).

    Built with the stable normalized recurrence in u = sqrt(2 pi) x, so
    that h_0 = 2^{1/4} exp(-pi x^2), <h_j, h_k> = delta_jk on the grid and
    dft(h_k) = (-i)^k h_k for k <= n/4.
    """
    if grid.d != 1:
        raise DimMismatch("hermite is defined for d = 1 grids")
    if k < 0 or k > grid.n // 4:
        raise OrderTooHigh(f"hermite order {k} exceeds n/4 = {grid.n // 4}")
    u = np.sqrt(2.0 * np.pi) * grid.axis()
    phi_prev = np.zeros_like(u)
    phi = np.pi ** -0.25 * np.exp(-0.5 * u * u)
    for j in range(k):
        phi_next = np.sqrt(2.0 / (j + 1)) * u * phi - np.sqrt(j / (j + 1.0)) * phi_prev
        phi_prev, phi = phi, phi_next
    vals = (2.0 * np.pi) ** 0.25 * phi
    return Signal(grid, vals.astype(np.complex128))


def one_hot(grid: Grid, index, scale: complex = 1.0) -> Signal:
    """Signal with a single nonzero entry (discrete point mass tests)."""
    vals = np.zeros(grid.shape(), dtype=np.complex128)
    vals[index] = scale
    return Signal(grid, vals)


# ---------------------------------------------------------------------------
# algebra
# ---------------------------------------------------------------------------

def _check_same_grid(f: Signal, g: Signal) -> None:
    if f.grid != g.grid:
        raise GridMismatch("signals live on different grids")


def inner(f: Signal, g: Signal) -> complex:
    """Quadrature inner product h^d sum conj(f) g (antilinear in f)."""
    _check_same_grid(f, g)
    return complex(np.sum(np.conj(f.values) * g.values) * f.grid.cell())


def norm(f: Signal) -> float:
    return float(np.sqrt(max(inner(f, f).real, 0.0)))


def tensor(f: Signal, g: Signal) -> Signal:
    """Tensor product f (x) g on the doubled grid (total dimension <= 2)."""
    _check_same_grid(f, g)
    if f.d + g.d > 2:
        raise DimMismatch("tensor output dimension exceeds 2")
    out_grid = Grid(f.d + g.d, f.n, f.grid.h)
    vals = np.multiply.outer(f.values, g.values)
    return Signal(out_grid, vals)


def _lattice_index(value: float, step: float, what: str) -> int:
    ratio = value / step
    j = int(np.rint(ratio))
    if abs(ratio - j) > _LATTICE_RTOL * max(1.0, abs(ratio)):
        raise OffLattice(f"{what} {value} is not a multiple of {step}")
    return j


def time_freq_shift(f: Signal, x0, xi0) -> Signal:
    """pi(x0, xi0) f = M_{xi0} T_{x0} f: circular shift, then modulation."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    xi0 = np.atleast_1d(np.asarray(xi0, dtype=float))
    if x0.size != f.d or xi0.size != f.d:
        raise DimMismatch("shift vectors must match the signal dimension")
    g = f.grid
    jx = [_lattice_index(x0[a], g.h, "shift") for a in range(f.d)]
    for a in range(f.d):
        _lattice_index(xi0[a], g.dual_step, "modulation")
    vals = f.values
    for a, j in enumerate(jx):
        vals = np.roll(vals, j, axis=a)
    x = g.axis()
    phase = np.exp(2j * np.pi * xi0[0] * x)
    if f.d == 1:
        vals = vals * phase
    else:
        phase2 = np.exp(2j * np.pi * xi0[1] * x)
        vals = vals * np.multiply.outer(phase, phase2)
    return Signal(g, vals)


def tail_mass(f: Signal) -> float:
    """Fraction of the squared L2 mass outside the central half-window.

    The concentration guard for the test battery: periodization is
    faithful only when this is tiny (<= 1e-12 for the standard signals).
    """
    n = f.n
    lo, hi = n // 4, 3 * n // 4
    total = float(np.sum(np.abs(f.values) ** 2))
    if total == 0.0:
        return 0.0
    sl = tuple(slice(lo, hi) for _ in range(f.d))
    central = float(np.sum(np.abs(f.values[sl]) ** 2))
    return 1.0 - central / total
