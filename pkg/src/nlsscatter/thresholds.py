"""Critical exponents and the mass/energy thresholds for global scattering."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

from .dynamics import Params
from .groundstate import GroundState
from .observables import ObservableRow

STRICT_MARGIN = 1e-9

Regime = Literal["MassCritical", "MassSupercritical", "NotApplicable"]


def alpha_crit(d: int) -> float:
    """alpha(d), positive root of d x^2 + (d-2) x - 4."""
    return (2.0 - d + math.sqrt(d * d + 12.0 * d + 4.0)) / (2.0 * d)


def alpha_small(d: int) -> float:
    """alpha_d, positive root of d x^2 + d x - 4."""
    return (-d + math.sqrt(d * d + 16.0 * d)) / (2.0 * d)


def theta_exponent(d: int, alpha: float, theta_d2: float | None = None) -> float | None:
    """Blow-up rate exponent of ||grad v(s)||^2 for the nonautonomous problem.

    d = 2 admits any value in (0, 1 - 1/alpha); the caller must pick one.
    """
    if d >= 3:
        return (d + 2) / 4.0 - 1.0 / alpha
    if d == 1:
        return 1.0 - 2.0 / alpha
    if theta_d2 is None:
        return None
    if not 0.0 < theta_d2 < 1.0 - 1.0 / alpha:
        raise ValueError("theta for d = 2 must lie in (0, 1 - 1/alpha)")
    return theta_d2


@dataclass(frozen=True)
class ExponentTable:
    d: int
    alpha: float
    alpha_crit: float
    alpha_small: float
    mass_crit: float
    energy_crit: float
    energy_crit_finite: bool
    conv_bound: float
    sigma: float | None
    tau: float | None
    beta: float
    theta: float | None
    a: float

    @property
    def free_decay(self) -> float:
        """Decay rate of ||e^{it Lap} phi||_{alpha+2}: d alpha / (2(alpha+2))."""
        return self.d * self.alpha / (2.0 * (self.alpha + 2.0))

    @property
    def lower_bound_rate(self) -> float | None:
        if self.theta is None:
            return None
        return 2.0 * (1.0 - self.theta) / (self.alpha + 2.0)


def exponents(d: int, alpha: float, theta_d2: float | None = None) -> ExponentTable:
    if d not in (1, 2, 3):
        raise ValueError("d must be 1, 2 or 3")
    if alpha <= 0:
        raise ValueError("alpha > 0 required")
    ad = alpha * d
    crit = ad == 4.0
    sigma = None if crit else (4.0 - (d - 2) * alpha) / (ad - 4.0)
    tau = None if crit else 2.0 / (ad - 4.0)
    a = 2.0 * alpha * (alpha + 2.0) / (4.0 - alpha * (d - 2))
    return ExponentTable(
        d=d, alpha=alpha,
        alpha_crit=alpha_crit(d), alpha_small=alpha_small(d),
        mass_crit=4.0 / d,
        energy_crit=4.0 / (d - 2) if d > 2 else math.inf,
        energy_crit_finite=d > 2,
        conv_bound=16.0 / (3.0 * d + 2.0),
        sigma=sigma, tau=tau,
        beta=1.0 / a,
        theta=theta_exponent(d, alpha, theta_d2),
        a=a,
    )


def _strictly_below(lhs: float, rhs: float) -> bool:
    return lhs < rhs - STRICT_MARGIN * abs(rhs)


@dataclass(frozen=True)
class ThresholdVerdict:
    regime: Regime
    below_mass_energy: bool
    below_mass_gradient: bool
    eta0: float | None
    admits_scattering_claim: bool
    t0: float | None = None
    detail: str = ""


def classify_threshold(u0_row: ObservableRow, q: GroundState, p: Params) -> ThresholdVerdict:
    """Evaluate the sufficient conditions for global existence and scattering."""
    a, d, lam = p.alpha, p.d, p.lam
    if lam < 0:
        return ThresholdVerdict("NotApplicable", False, False, None, False, detail="defocusing coupling")
    if a * d < 4.0 and not math.isclose(a * d, 4.0):
        return ThresholdVerdict("NotApplicable", False, False, None, False, detail="mass-subcritical power")
    if (q.params.d, q.params.alpha) != (d, a):
        raise ValueError("ground state computed for different (d, alpha)")
    m0 = u0_row.mass
    mq = q.mass
    if math.isclose(a * d, 4.0, rel_tol=1e-12):
        below = _strictly_below(math.sqrt(m0), lam ** (-1.0 / a) * math.sqrt(mq))
        return ThresholdVerdict("MassCritical", below, below, None, below,
                                detail="mass below lambda^(-1/alpha) ||Q||_2" if below else "mass not below")
    t = exponents(d, a)
    sigma, tau = t.sigma, t.tau
    e0, eq = u0_row.energy, q.energy(1.0)
    ref = mq ** sigma * eq
    lhs = m0 ** sigma * e0 if m0 > 0 else 0.0
    below_me = _strictly_below(lhs, lam ** (-2.0 * tau) * ref)
    grad_lhs = math.sqrt(m0) ** sigma * math.sqrt(u0_row.grad_l2_sq) if m0 > 0 else 0.0
    grad_rhs = lam ** (-tau) * math.sqrt(mq) ** sigma * math.sqrt(q.grad_sq)
    below_grad = _strictly_below(grad_lhs, grad_rhs)
    eta0 = lhs * lam ** (2.0 * tau) / ref
    t0 = None
    if e0 > 0 and 0 < eta0 < 1 and u0_row.variance > 0:
        t0 = u0_row.variance / math.sqrt(8.0 * e0) * (math.sqrt(1.0 / eta0) - 1.0) ** -0.5
    both = below_me and below_grad
    return ThresholdVerdict("MassSupercritical", below_me, below_grad, eta0, both, t0)


def f_eval(x: float, c_gn: float, alpha: float, d: int) -> float:
    """f(x) = x^2/2 - C_GN/(alpha+2) x^{alpha d/2}, the trapping function."""
    if x < 0:
        raise ValueError("x must be nonnegative")
    return 0.5 * x * x - c_gn / (alpha + 2.0) * x ** (alpha * d / 2.0)


def f_critical_point(c_gn: float, alpha: float, d: int) -> float:
    """Unique positive zero of f'(x) = x - C_GN (alpha d)/(2(alpha+2)) x^{alpha d/2 - 1}."""
    e = alpha * d / 2.0 - 2.0
    if e <= 0:
        raise ValueError("f has no positive critical point unless alpha d > 4")
    return (2.0 * (alpha + 2.0) / (c_gn * alpha * d)) ** (1.0 / e)
