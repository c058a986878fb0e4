"""Periodic spectral grids approximating R^d, and the free Schrodinger group.

The box [-L, L)^d is sampled at n points per axis.  Wavenumbers follow the
standard FFT layout, ``k_m = pi*m/L``.  All integrals use the uniform cell
volume ``(2L/n)^d`` as quadrature weight, which makes grid norms and
spectral norms agree exactly (Parseval).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft
from scipy.signal import czt

# Grid points with max_j |x_j| above this fraction of L form the "boundary shell".
BOUNDARY_SHELL = 0.9


@dataclass(frozen=True)
class Grid:
    d: int
    n: int
    half_length: float

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError(f"dimension d must be 1, 2 or 3, got {self.d}")
        if self.n < 8 or self.n & (self.n - 1):
            raise ValueError(f"n must be a power of two >= 8, got {self.n}")
        if not (self.half_length > 0 and math.isfinite(self.half_length)):
            raise ValueError(f"half_length must be positive and finite, got {self.half_length}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.d

    @property
    def size(self) -> int:
        return self.n ** self.d

    @property
    def dx(self) -> float:
        return 2.0 * self.half_length / self.n

    @property
    def cell_volume(self) -> float:
        return self.dx ** self.d

    @property
    def k_nyquist(self) -> float:
        return math.pi / self.dx

    @cached_property
    def x(self) -> np.ndarray:
        """1D coordinates, identical on every axis."""
        return -self.half_length + self.dx * np.arange(self.n)

    @cached_property
    def k(self) -> np.ndarray:
        """1D wavenumbers in FFT order."""
        return 2.0 * np.pi * sfft.fftfreq(self.n, d=self.dx)

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        """Broadcastable coordinate arrays, one per axis."""
        return tuple(_axis_view(self.x, a, self.d) for a in range(self.d))

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        return tuple(_axis_view(self.k, a, self.d) for a in range(self.d))

    @cached_property
    def r2(self) -> np.ndarray:
        return sum(c ** 2 for c in self.coords) * np.ones(self.shape)

    @cached_property
    def k2(self) -> np.ndarray:
        return sum(k ** 2 for k in self.wavenumbers) * np.ones(self.shape)

    @cached_property
    def shell_mask(self) -> np.ndarray:
        inside = np.abs(self.x) <= BOUNDARY_SHELL * self.half_length
        core = np.ones(self.shape, dtype=bool)
        for a in range(self.d):
            core = core & _axis_view(inside, a, self.d)
        return ~core

    def rescaled(self, factor: float) -> "Grid":
        """Companion grid with the same n and d and half-length L*factor."""
        return Grid(self.d, self.n, self.half_length * factor)


def _axis_view(a: np.ndarray, axis: int, d: int) -> np.ndarray:
    shape = [1] * d
    shape[axis] = a.shape[0]
    return a.reshape(shape)


def make_grid(d: int, n: int, half_length: float) -> Grid:
    return Grid(int(d), int(n), float(half_length))


@dataclass(frozen=True)
class Field:
    """Complex samples of a function on a grid.

    ``diverged`` marks fields produced after the solver lost control; only
    such fields may hold non-finite entries.
    """

    grid: Grid
    values: np.ndarray
    diverged: bool = False

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.size != self.grid.size:
            raise ValueError(f"expected {self.grid.size} samples, got {vals.size}")
        vals = vals.reshape(self.grid.shape)
        if not self.diverged and not np.all(np.isfinite(vals)):
            raise ValueError("field has non-finite entries")
        object.__setattr__(self, "values", vals)

    def with_values(self, values: np.ndarray) -> "Field":
        return Field(self.grid, values)

    def __add__(self, other: "Field") -> "Field":
        _check_same_grid(self, other)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        _check_same_grid(self, other)
        return Field(self.grid, self.values - other.values)

    def scaled(self, c: complex) -> "Field":
        return Field(self.grid, c * self.values)


def _check_same_grid(a: Field, b: Field) -> None:
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")


def zeros(g: Grid) -> Field:
    return Field(g, np.zeros(g.shape, dtype=complex))


def sample(g: Grid, func) -> Field:
    """Evaluate ``func(*coords)`` on the grid."""
    return Field(g, np.broadcast_to(func(*g.coords), g.shape))


# -- transforms -------------------------------------------------------------

def fft(values: np.ndarray) -> np.ndarray:
    return sfft.fftn(values)


def ifft(values: np.ndarray) -> np.ndarray:
    return sfft.ifftn(values)


def free_multiplier(g: Grid, t: float) -> np.ndarray:
    """Fourier symbol of e^{it Laplacian}."""
    return np.exp(-1j * t * g.k2)


def free_propagate(f: Field, t: float) -> Field:
    """e^{it Laplacian} f by exact spectral multiplication (t may be negative)."""
    if t == 0:
        return f
    return Field(f.grid, ifft(fft(f.values) * free_multiplier(f.grid, t)))


def gradient(f: Field) -> list[np.ndarray]:
    fh = fft(f.values)
    return [ifft(1j * k * fh) for k in f.grid.wavenumbers]


# -- integrals --------------------------------------------------------------

def l2_norm_sq(f: Field | np.ndarray, g: Grid | None = None) -> float:
    if isinstance(f, Field):
        g, f = f.grid, f.values
    return float(np.sum(np.abs(f) ** 2) * g.cell_volume)


def l2_norm(f: Field) -> float:
    return math.sqrt(l2_norm_sq(f))


def spectral_l2_norm_sq(f: Field) -> float:
    fh = fft(f.values)
    return float(np.sum(np.abs(fh) ** 2) * f.grid.cell_volume / f.grid.size)


def grad_norm_sq(f: Field) -> float:
    """||grad f||_2^2 evaluated in Fourier space."""
    fh = fft(f.values)
    return float(np.sum(f.grid.k2 * np.abs(fh) ** 2) * f.grid.cell_volume / f.grid.size)


def lp_norm(f: Field, p: float) -> float:
    return float((np.sum(np.abs(f.values) ** p) * f.grid.cell_volume) ** (1.0 / p))


def h1_norm_sq(f: Field) -> float:
    return l2_norm_sq(f) + grad_norm_sq(f)


def boundary_mass_fraction(f: Field) -> float:
    """Fraction of the mass carried by the outer shell max_j|x_j| > 0.9 L."""
    dens = np.abs(f.values) ** 2
    total = float(np.sum(dens))
    if total == 0.0:
        return 0.0
    return float(np.sum(dens[f.grid.shell_mask]) / total)


# -- resampling -------------------------------------------------------------

def resample(f: Field, target: Grid) -> Field:
    """Evaluate the trigonometric interpolant of ``f`` on ``target``.

    Target points outside the source box are set to zero instead of taking
    values from the periodic images.  Uses a chirp-z transform per axis.
    """
    src = f.grid
    if target.d != src.d:
        raise ValueError("dimension mismatch")
    if target == src:
        return f
    n, m = src.n, target.n
    L = src.half_length
    # Coefficients in centred order: mode index p - n/2 for p = 0..n-1.
    c = sfft.fftshift(fft(f.values)) / src.size
    y0 = target.x[0]
    w = np.exp(1j * np.pi / L * target.dx)
    a = np.exp(-1j * np.pi / L * (y0 + L))
    pre = np.exp(-1j * np.pi / L * (n // 2) * (target.x + L))
    out = c
    for axis in range(src.d):
        # czt evaluates sum_p c_p (A W^{-j})^{-p}.
        out = czt(out, m=m, w=w, a=a, axis=axis)
        out = out * _axis_view(pre, axis, src.d)
    outside = np.abs(target.x) > L
    if np.any(outside):
        mask = np.ones(target.shape, dtype=bool)
        for axis in range(src.d):
            mask = mask & _axis_view(~outside, axis, src.d)
        out = np.where(mask, out, 0.0)
    return Field(target, out)
