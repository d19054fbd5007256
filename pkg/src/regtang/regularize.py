"""Smoothing of a two-zone field through a transition function.

The switching layer ``|h| <= eps`` is replaced by the convex combination

    Z_eps = (1 + Phi(h/eps))/2 * X_plus + (1 - Phi(h/eps))/2 * X_minus,

with ``Phi`` the saturated extension of a monotone odd bridge ``phi``.  The
module also carries the band (fast-variable) form of the flow used inside the
layer, and the slow-manifold expansion ``m(x, eps) = m0(x) + eps*m1(x) + ...``
of its attracting critical set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConditionViolated, DomainError, TransientNotDecayed
from .fields import FilippovSystem, PlanarField
from .integrate import IntegratorConfig, SectionSpec, flow_to_section_traj, sample_dense
from .phi import TransitionFunction, phi_inverse


# --------------------------------------------------------------------------
# regularized field in the original variables
# --------------------------------------------------------------------------

@dataclass
class RegularizedField:
    """Smooth field agreeing with X_plus above the band and X_minus below."""

    system: FilippovSystem
    tf: TransitionFunction
    eps: float

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be positive")

    def eval(self, x: float, y: float) -> np.ndarray:
        s = self.system.h.h(x, y) / self.eps
        c = 0.5 * (1.0 + self.tf.Phi(s))
        return c * self.system.x_plus.eval(x, y) + (1.0 - c) * self.system.x_minus.eval(x, y)

    def __call__(self, x: float, y: float) -> np.ndarray:
        return self.eval(x, y)

    def divergence(self) -> Callable[[float, float], float]:
        div_p = self.system.x_plus.divergence()
        div_m = self.system.x_minus.divergence()
        grad_h = self.system.h.grad_h
        tf, eps, sys_ = self.tf, self.eps, self.system

        def div(x: float, y: float) -> float:
            s = sys_.h.h(x, y) / eps
            c = 0.5 * (1.0 + tf.Phi(s))
            base = c * div_p(x, y) + (1.0 - c) * div_m(x, y)
            dphi = tf.Phi_prime(s)
            if dphi != 0.0:
                diff = sys_.x_plus.eval(x, y) - sys_.x_minus.eval(x, y)
                base += dphi / (2.0 * eps) * float(np.dot(grad_h(x, y), diff))
            return base

        return div


# --------------------------------------------------------------------------
# band coordinates (x, yhat = y/eps), fast time tau = t/eps
# --------------------------------------------------------------------------

def _require_vertical(system: FilippovSystem):
    h = system.h
    if h.poly is not None:
        from .polys import Poly2
        if h.poly == Poly2.y():
            return
    elif all(abs(h.h(x, y) - y) < 1e-14
             for x, y in ((0.3, 0.7), (-1.2, 0.1), (2.0, -0.5))):
        return
    raise ConditionViolated(
        "band coordinates require the switching function h(x, y) = y"
    )


@dataclass
class BandField:
    """The layer flow in (x, yhat) with yhat = y/eps, in fast time.

        dx/dtau    = eps * [c+ X1+(x, eps*yhat) + c- X1-(x, eps*yhat)]
        dyhat/dtau = c+ X2+(x, eps*yhat) + c- X2-(x, eps*yhat)

    where c+- = (1 +- Phi(yhat))/2.  With the saturation of Phi the same
    equations remain valid outside |yhat| <= 1 and match the slow flow there.
    """

    system: FilippovSystem
    tf: TransitionFunction
    eps: float

    def __post_init__(self):
        _require_vertical(self.system)
        if self.eps <= 0:
            raise ValueError("eps must be positive")

    def eval(self, x: float, yhat: float) -> np.ndarray:
        eps = self.eps
        c = 0.5 * (1.0 + self.tf.Phi(yhat))
        vp = self.system.x_plus.eval(x, eps * yhat)
        vm = self.system.x_minus.eval(x, eps * yhat)
        return np.array([
            eps * (c * vp[0] + (1.0 - c) * vm[0]),
            c * vp[1] + (1.0 - c) * vm[1],
        ])

    def __call__(self, x: float, yhat: float) -> np.ndarray:
        return self.eval(x, yhat)

    def divergence(self) -> Callable[[float, float], float]:
        """d/dx and d/dyhat trace of the fast field (for variational factors)."""
        div_p = self.system.x_plus.divergence()
        div_m = self.system.x_minus.divergence()
        tf, eps, sys_ = self.tf, self.eps, self.system

        def div(x: float, yhat: float) -> float:
            y = eps * yhat
            c = 0.5 * (1.0 + tf.Phi(yhat))
            base = eps * (c * div_p(x, y) + (1.0 - c) * div_m(x, y))
            dphi = tf.Phi_prime(yhat)
            if dphi != 0.0:
                diff = sys_.x_plus.eval(x, y)[1] - sys_.x_minus.eval(x, y)[1]
                base += 0.5 * dphi * diff
            return base

        return div


# --------------------------------------------------------------------------
# slow (critical) manifold of the layer problem
# --------------------------------------------------------------------------

@dataclass
class SlowManifold:
    """First-order expansion yhat = m0(x) + eps*m1(x) of the layer's slow set.

    Requires f(x) := X2+(x, 0) < 0 (attracting regime): then

        phi(m0) = (1 + f)/(1 - f),
        m0'     = 2 f_x / (phi'(m0) (1 - f)^2),
        m1      = -m0' (m0' X1+(x,0) - m0 * dX2+/dy(x,0)) / f_x.
    """

    system: FilippovSystem
    tf: TransitionFunction
    _fd_step: float = 1e-6

    def __post_init__(self):
        _require_vertical(self.system)
        xp = self.system.x_plus
        if xp.poly_form is not None:
            p1, p2 = xp.poly_form
            f_poly = p2.at_y0()
            fx_poly = f_poly.diff()
            theta_poly = p2.diff_y().at_y0()
            x1_poly = p1.at_y0()
            self._f = f_poly.__call__
            self._fx = fx_poly.__call__
            self._theta0 = theta_poly.__call__
            self._x10 = x1_poly.__call__
        else:
            ev = xp.eval
            hh = self._fd_step
            self._f = lambda x: float(ev(x, 0.0)[1])
            self._fx = lambda x: (float(ev(x + hh, 0.0)[1]) - float(ev(x - hh, 0.0)[1])) / (2 * hh)
            self._theta0 = lambda x: (float(ev(x, hh)[1]) - float(ev(x, -hh)[1])) / (2 * hh)
            self._x10 = lambda x: float(ev(x, 0.0)[0])

    def f0(self, x: float) -> float:
        return self._f(x)

    def m0(self, x: float) -> float:
        f = self._f(x)
        if f >= 0:
            raise DomainError(
                f"slow set undefined at x={x:g}: X2+(x,0)={f:g} is not negative"
            )
        return phi_inverse(self.tf, (1.0 + f) / (1.0 - f))

    def m0_prime(self, x: float) -> float:
        f = self._f(x)
        if f >= 0:
            raise DomainError(
                f"slow set undefined at x={x:g}: X2+(x,0)={f:g} is not negative"
            )
        m0 = phi_inverse(self.tf, (1.0 + f) / (1.0 - f))
        dphi = self.tf.deriv(1, m0)
        return 2.0 * self._fx(x) / (dphi * (1.0 - f) ** 2)

    def m1(self, x: float) -> float:
        fx = self._fx(x)
        if fx == 0.0:
            raise DomainError(f"m1 undefined where f_x vanishes (x={x:g})")
        m0 = self.m0(x)
        m0p = self.m0_prime(x)
        return -m0p * (m0p * self._x10(x) - m0 * self._theta0(x)) / fx

    def m(self, x: float, eps: float, order: int = 1) -> float:
        val = self.m0(x)
        if order >= 1:
            val += eps * self.m1(x)
        return val


def departure_coefficient(k: int, n: int, alpha: float, tf: TransitionFunction) -> float:
    """Coefficient C in 1 - m0(x) ~ C * |x|^{(2k-1)/n} as x -> 0-.

    Equivalent closed form: C = (2*alpha*n! / |phi^{(n)}(1)|)^{1/n}.
    """
    dn = abs(tf.deriv_exact(n, 1))
    if dn == 0:
        raise ConditionViolated(
            f"phi^({n})(1) = 0: the transition function is too flat for this order"
        )
    return float((2.0 * alpha * math.factorial(n) / float(dn)) ** (1.0 / n))


def sandwich_exponent(k: int, n: int) -> float:
    """Exponent p in the lower envelope m0 - eps*K / x^{p/n}-type bound."""
    return (2 * k * (n - 2) + 2) / n


def sandwich_constant(manifold: SlowManifold, k: int, n: int, L: float) -> float:
    """A constant K >= -L^{(2k(n-2)+2)/n} * m1(-L) making the envelope valid at -L."""
    p = sandwich_exponent(k, n)
    return max(0.0, -(L ** p) * manifold.m1(-L)) * 1.0000001


@dataclass
class SandwichReport:
    """Grid-wise verdict for the two-sided slow-manifold enclosure

        m0(x) - eps*K / |x|^p  <=  m_proxy(x, eps)  <=  m0(x),

    with p the sandwich exponent and K a user-supplied constant.  ``K_min``
    is the smallest constant for which the left inequality holds on the
    whole grid (0 when the proxy never dips below m0 minus nothing)."""

    eps: float
    lam: float
    exponent: float
    K: float
    K_min: float
    x: np.ndarray
    m0: np.ndarray
    m1: np.ndarray
    proxy: np.ndarray
    lower: np.ndarray
    holds: np.ndarray
    upper_ok: np.ndarray

    @property
    def all_hold(self) -> bool:
        return bool(np.all(self.holds))

    @property
    def upper_all_hold(self) -> bool:
        return bool(np.all(self.upper_ok))


def manifold_table_csv(report: SandwichReport) -> str:
    lines = ["x,m0,m1,m_proxy,lower_bound"]
    for row in zip(report.x, report.m0, report.m1, report.proxy, report.lower):
        lines.append(",".join(f"{v:.17g}" for v in row))
    return "\n".join(lines) + "\n"


def slow_manifold_sandwich_check(band: BandField, k: int, n: int, L: float,
                                 lam: float, K: float, grid_points: int = 50,
                                 integ: Optional[IntegratorConfig] = None) -> SandwichReport:
    """Check the slow-manifold enclosure on a grid over [-L, -eps**lam].

    The proxy for the true slow solution is a fast-time trajectory launched at
    (x, yhat) = (-L, m0(-L) + eps*m1(-L)); attraction at rate O(1/eps) in slow
    time makes it exponentially accurate once the launch transient (slow-time
    length ~ 5*eps*|log eps|) has decayed, which is verified on the fly.
    """
    eps = band.eps
    x_end = -(eps ** lam)
    if x_end <= -L:
        raise ConditionViolated(
            f"grid [-L, -eps^lam] = [{-L:g}, {x_end:g}] is empty"
        )
    x_dec = -L + 5.0 * eps * abs(math.log(eps))
    if x_dec >= x_end:
        raise TransientNotDecayed(
            f"launch transient (length {x_dec + L:g} in x) swallows the whole "
            f"grid [-L, -eps^lam] = [{-L:g}, {x_end:g}]"
        )
    sm = SlowManifold(band.system, band.tf)
    y0 = sm.m0(-L) + eps * sm.m1(-L)
    integ = integ or IntegratorConfig()
    sec = SectionSpec("vertical", x_end, ident="grid-end")
    hit, traj = flow_to_section_traj(band, (-L, y0), sec, integ,
                                     graze_probe=False)
    dense = sample_dense(traj, 20001)
    xs, ys = dense[:, 0], dense[:, 1]
    order = np.argsort(xs)
    xs, ys = xs[order], ys[order]
    y_dec = float(np.interp(x_dec, xs, ys))
    if abs(y_dec - sm.m(x_dec, eps)) > eps:
        raise TransientNotDecayed(
            f"proxy still {abs(y_dec - sm.m(x_dec, eps)):g} away from the slow "
            f"expansion at x = {x_dec:g}"
        )
    grid = np.linspace(-L, x_end, grid_points)
    proxy = np.interp(grid, xs, ys)
    m0g = np.array([sm.m0(x) for x in grid])
    m1g = np.array([sm.m1(x) for x in grid])
    p = sandwich_exponent(k, n)
    lower = m0g - eps * K / np.abs(grid) ** p
    K_min = max(0.0, float(np.max((m0g - proxy) * np.abs(grid) ** p / eps)))
    return SandwichReport(eps=eps, lam=lam, exponent=p, K=K, K_min=K_min,
                          x=grid, m0=m0g, m1=m1g, proxy=proxy, lower=lower,
                          holds=lower <= proxy, upper_ok=proxy <= m0g)
