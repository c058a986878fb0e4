"""Ground state of -Lap Q + Q = |Q|^alpha Q and the sharp Gagliardo-Nirenberg constant."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import grid as gr
from .dynamics import Params
from .grid import Field, Grid
from .observables import potential_integral


class NonConvergence(RuntimeError):
    pass


class DivergedIterate(RuntimeError):
    pass


@dataclass(frozen=True)
class GroundState:
    profile: Field
    params: Params
    residual: float
    iterations: int = 0

    @property
    def mass(self) -> float:
        return gr.l2_norm_sq(self.profile)

    @property
    def grad_sq(self) -> float:
        return gr.grad_norm_sq(self.profile)

    @property
    def potential(self) -> float:
        return potential_integral(self.profile, self.params.alpha)

    def energy(self, lam: float = 1.0) -> float:
        """E[Q] with coupling lam (lam = 1 is the normalization of the equation)."""
        return 0.5 * self.grad_sq - lam / (self.params.alpha + 2.0) * self.potential


def soliton_closed_form_1d(alpha: float, g: Grid) -> Field:
    if g.d != 1:
        raise ValueError("closed form only available in d = 1")
    if alpha <= 0:
        raise ValueError("alpha > 0 required")
    amp = ((alpha + 2.0) / 2.0) ** (1.0 / alpha)
    return Field(g, amp / np.cosh(alpha * g.x / 2.0) ** (2.0 / alpha))


def equation_residual(q: Field, alpha: float) -> float:
    """||-Lap q + q - |q|^alpha q||_2."""
    qh = gr.fft(q.values)
    lin = gr.ifft((1.0 + q.grid.k2) * qh)
    res = lin - np.abs(q.values) ** alpha * q.values
    return math.sqrt(gr.l2_norm_sq(res, q.grid))


def _symmetrize(w: np.ndarray) -> np.ndarray:
    """Average over grid reflections and axis permutations (exact on the lattice)."""
    d = w.ndim
    for ax in range(d):
        w = 0.5 * (w + np.roll(np.flip(w, axis=ax), 1, axis=ax))
    if d == 2:
        w = 0.5 * (w + w.T)
    elif d == 3:
        perms = [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]
        w = sum(np.transpose(w, pm) for pm in perms) / 6.0
    return w


def petviashvili(p: Params, g: Grid, init: Field, tol: float = 1e-12, max_iter: int = 2000) -> GroundState:
    """Petviashvili fixed-point iteration with exponent (alpha+1)/alpha.

    The iterate is kept real.  In d >= 2 it is symmetrized every step so it
    cannot drift toward a translate of the ground state.
    """
    if init.grid != g:
        raise ValueError("init must live on g")
    if tol <= 0:
        raise ValueError("tol must be positive")
    w = np.real(init.values).astype(float)
    if not np.any(w > 0) or np.any(w < 0):
        raise ValueError("init must be real, nonnegative and nonzero")
    a = p.alpha
    gamma = (a + 1.0) / a
    sym = 1.0 + g.k2
    change = math.inf
    for it in range(1, max_iter + 1):
        wh = gr.fft(w)
        nl = np.abs(w) ** a * w
        nlh = gr.fft(nl)
        num = float(np.sum(sym * np.abs(wh) ** 2))
        den = float(np.real(np.sum(np.conj(wh) * nlh)))
        if not (den > 0 and math.isfinite(num / den)):
            raise DivergedIterate(f"stabilizing factor left (0, inf) at iteration {it}")
        S = num / den
        w_new = np.real(gr.ifft(S ** gamma * nlh / sym))
        if g.d >= 2:
            w_new = _symmetrize(w_new)
        change = math.sqrt(float(np.sum((w_new - w) ** 2)) * g.cell_volume)
        w = w_new
        if not np.all(np.isfinite(w)):
            raise DivergedIterate(f"non-finite iterate at iteration {it}")
        if change < tol:
            prof = Field(g, w)
            return GroundState(prof, p, equation_residual(prof, a), it)
    raise NonConvergence(f"no convergence after {max_iter} iterations (last change {change:.3e})")


def ground_state(p: Params, g: Grid, tol: float = 1e-12, max_iter: int = 2000) -> GroundState:
    """Closed form in d = 1, Petviashvili from a Gaussian guess otherwise."""
    if g.d == 1:
        prof = soliton_closed_form_1d(p.alpha, g)
        return GroundState(prof, p, equation_residual(prof, p.alpha))
    init = gr.sample(g, lambda *xs: np.exp(-sum(x * x for x in xs) / 2.0) + 0j)
    return petviashvili(p, g, init, tol, max_iter)


def pohozaev_residuals(q: GroundState) -> tuple[float, float]:
    a, d = q.params.alpha, q.params.d
    m = q.mass
    r1 = abs(m - (4.0 - (d - 2) * a) / (a * d) * q.grad_sq) / m
    r2 = abs(m - (4.0 - (d - 2) * a) / (2.0 * (a + 2.0)) * q.potential) / m
    return r1, r2


def gn_functional(w: Field, alpha: float) -> float:
    """||w||_{a+2}^{a+2} / (||w||_2^{(4-(d-2)a)/2} ||grad w||_2^{ad/2})."""
    d = w.grid.d
    l2 = math.sqrt(gr.l2_norm_sq(w))
    gn = math.sqrt(gr.grad_norm_sq(w))
    return potential_integral(w, alpha) / (l2 ** ((4.0 - (d - 2) * alpha) / 2.0) * gn ** (alpha * d / 2.0))


def gn_constant(q: GroundState, p: Params | None = None) -> float:
    """Sharp constant, attained at the ground state."""
    p = p or q.params
    a, d = p.alpha, p.d
    l2 = math.sqrt(q.mass)
    if math.isclose(a * d, 4.0, rel_tol=0, abs_tol=1e-12):
        return (a + 2.0) / 2.0 * l2 ** (-a)
    sigma = (4.0 - (d - 2) * a) / (a * d - 4.0)
    base = l2 ** sigma * math.sqrt(q.grad_sq)
    return 2.0 * (a + 2.0) / (a * d) * base ** (-(a * d - 4.0) / 2.0)
