"""Return maps, periodic-orbit location, and cycle diagnostics for smoothed
two-zone systems whose sliding segment ends at a visible even contact.

The full return map is integrated directly in the original variables (the
smoothed field is not stiff at the eps values of interest here); a composed
variant chains the layer transition map with the outer excursion and serves
as an independent cross-check when the return crossing sits above the layer.
Derivatives of section maps come from the variational formula

    P'(y0) = [F_x(p0) / F_x(p1)] * exp( integral of div F along the orbit ),

which is immune to the catastrophic cancellation a finite difference hits
when the contraction is below floating-point resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from .errors import (
    DomainExit,
    MaxRevolutions,
    NoBracket,
    NoCrossing,
    NoReturn,
    NotConverged,
)
from .fields import FilippovSystem
from .integrate import (
    IntegratorConfig,
    SectionSpec,
    Trajectory,
    flow_to_section_traj,
    sample_dense,
)
from .phi import TransitionFunction
from .regularize import RegularizedField


# --------------------------------------------------------------------------
# root finding on section maps
# --------------------------------------------------------------------------

@dataclass
class CycleResult:
    y_star: float
    iterations: int
    residual: float
    bracket: Tuple[float, float]


def find_cycle(return_fn: Callable[[float], float],
               bracket: Tuple[float, float],
               max_iter: int = 100,
               xtol: float = 1e-13) -> CycleResult:
    """Fixed point of y -> return_fn(y) by a bracketed secant (Illinois) method.

    Raises NoBracket when the displacement does not change sign over the
    bracket, NotConverged after max_iter iterations.
    """
    a, b = float(bracket[0]), float(bracket[1])
    fa = return_fn(a) - a
    fb = return_fn(b) - b
    if fa == 0.0:
        return CycleResult(a, 0, 0.0, (a, b))
    if fb == 0.0:
        return CycleResult(b, 0, 0.0, (a, b))
    if fa * fb > 0:
        raise NoBracket(
            f"displacement has the same sign at both ends of [{a:g}, {b:g}] "
            f"({fa:g} and {fb:g})"
        )
    lo, hi, flo, fhi = a, b, fa, fb
    side = 0
    x = lo
    for it in range(1, max_iter + 1):
        x = hi - fhi * (hi - lo) / (fhi - flo)
        # guard against stagnation at an endpoint
        if not (min(lo, hi) < x < max(lo, hi)):
            x = 0.5 * (lo + hi)
        fx = return_fn(x) - x
        if fx == 0.0 or abs(hi - lo) <= xtol * max(1.0, abs(x)):
            return CycleResult(x, it, fx, (a, b))
        if fx * fhi < 0:
            lo, flo = hi, fhi
            side = 0
        else:
            if side == 1:
                flo *= 0.5   # Illinois weighting keeps the bracket moving
            side = 1
        hi, fhi = x, fx
        if abs(fx) < 1e-300:
            return CycleResult(x, it, fx, (a, b))
    raise NotConverged(
        f"no fixed point to xtol={xtol:g} within {max_iter} iterations "
        f"(last y={x:g})"
    )


def multiplier_fd(return_fn: Callable[[float], float], y_star: float,
                  rel_step: float = 1e-6) -> dict:
    """Centered-difference slope of the return map at its fixed point.

    When the map is contracting below what the step can resolve, the honest
    answer is an upper bound; ``resolution_limited`` flags that case and
    ``value`` then reports the resolution itself.
    """
    scale = max(abs(y_star), 1e-12)
    h = rel_step * scale
    hi = return_fn(y_star + h)
    lo = return_fn(y_star - h)
    diff = hi - lo
    resolution = np.finfo(float).eps * max(abs(hi), abs(lo), 1e-300) / (2 * h)
    value = diff / (2 * h)
    limited = abs(diff) <= 8 * np.finfo(float).eps * max(abs(hi), abs(lo))
    return {
        "value": abs(value) if not limited else resolution,
        "signed_value": value,
        "step": h,
        "resolution": resolution,
        "resolution_limited": bool(limited),
    }


# --------------------------------------------------------------------------
# variational derivative of a planar section-to-section map
# --------------------------------------------------------------------------

def _augmented_rhs(eval2: Callable[[float, float], np.ndarray],
                   div2: Callable[[float, float], float]):
    def rhs(t, p):
        v = eval2(p[0], p[1])
        return np.array([v[0], v[1], div2(p[0], p[1])])
    return rhs


def section_map_derivative_factor(field_eval, p0, p1, s_integral: float,
                                  component: int = 0) -> float:
    """P'(y0) for a map between two sections transverse to the given component."""
    a = field_eval(p0[0], p0[1])[component]
    b = field_eval(p1[0], p1[1])[component]
    return a / b * math.exp(s_integral)


# --------------------------------------------------------------------------
# outer excursion (upper field only)
# --------------------------------------------------------------------------

def exterior_map(system: FilippovSystem, y_in: float, theta: float, rho: float,
                 integ: Optional[IntegratorConfig] = None,
                 y_window: Tuple[float, float] = (0.0, 1.0)) -> dict:
    """Follow the upper field from (theta, y_in) around the outer loop to the
    inflow section {x = -rho}, reporting the arrival height and the map's
    derivative K (variational; K > 0 and exponentially small for strongly
    dissipative loops).
    """
    integ = integ or IntegratorConfig()
    ev = system.x_plus.eval
    div = system.x_plus.divergence()
    rhs = _augmented_rhs(ev, div)
    sec = SectionSpec("vertical", -rho, interval=y_window, direction="up",
                      ident="inflow")
    try:
        hit, traj = flow_to_section_traj(rhs, (theta, y_in, 0.0), sec, integ,
                                         graze_probe=False)
    except (NoCrossing, DomainExit) as exc:
        raise NoReturn(f"outer excursion from (theta, {y_in:g}) lost: {exc}") from exc
    y_out = float(hit.point[1])
    s_int = float(hit.point[2])
    K = section_map_derivative_factor(ev, (theta, y_in), (-rho, y_out), s_int)
    return {"y_out": y_out, "t_flight": float(hit.t), "K": K,
            "s_integral": s_int, "trajectory": traj}


def loop_period(system: FilippovSystem, start: Tuple[float, float] = (0.0, 2.0),
                integ: Optional[IntegratorConfig] = None) -> float:
    """Period of the upper-field loop through ``start``: time of first return
    to the section {x = start_x} with y > 1, crossing in the same sense.
    """
    integ = integ or IntegratorConfig()
    sec = SectionSpec("vertical", start[0], interval=(1.0, math.inf),
                      direction="down", ident="top")
    hit, _ = flow_to_section_traj(system.x_plus, start, sec, integ,
                                  graze_probe=False)
    return float(hit.t)


# --------------------------------------------------------------------------
# full return map of the smoothed system
# --------------------------------------------------------------------------

@dataclass
class ReturnInfo:
    y_out: float
    t_return: float
    s_integral: Optional[float] = None
    trajectory: Optional[Trajectory] = None


def return_map(system: FilippovSystem, tf: TransitionFunction, eps: float,
               y_in: float, rho: float = 0.3,
               integ: Optional[IntegratorConfig] = None,
               with_divergence: bool = False,
               keep_trajectory: bool = False,
               max_revolutions: int = 4,
               max_time: float = 200.0,
               y_window: Tuple[float, float] = (0.0, math.inf),
               extra_records: Sequence[SectionSpec] = ()) -> ReturnInfo:
    """One revolution of the smoothed flow, section {x = -rho, y > 0} to itself,
    crossings counted only with x increasing.
    """
    reg = RegularizedField(system, tf, eps)
    base = integ or IntegratorConfig()
    integ = IntegratorConfig(rtol=base.rtol, atol=base.atol,
                             max_step=base.max_step, event_tol=base.event_tol,
                             max_time=max_time, norm_guard=base.norm_guard)
    sec = SectionSpec("vertical", -rho, interval=y_window, direction="up",
                      ident="return")
    counter = SectionSpec("vertical", -rho, ident="anycross")
    if with_divergence:
        rhs = _augmented_rhs(reg.eval, reg.divergence())
        p0 = (-rho, y_in, 0.0)
    else:
        rhs = reg
        p0 = (-rho, y_in)
    try:
        hit, traj = flow_to_section_traj(rhs, p0, sec, integ,
                                         record_sections=[counter, *extra_records],
                                         graze_probe=False)
    except (NoCrossing, DomainExit) as exc:
        raise NoReturn(
            f"orbit from (x=-{rho:g}, y={y_in:g}) did not come back: {exc}"
        ) from exc
    crossings = sum(1 for e in traj.events if e.section_id == "anycross")
    if crossings > 2 * max_revolutions:
        raise MaxRevolutions(
            f"{crossings} section crossings before an admissible return"
        )
    return ReturnInfo(
        y_out=float(hit.point[1]),
        t_return=float(hit.t),
        s_integral=float(hit.point[2]) if with_divergence else None,
        trajectory=traj if keep_trajectory else None,
    )


def cycle_multiplier(system: FilippovSystem, tf: TransitionFunction, eps: float,
                     y_star: float, rho: float = 0.3,
                     integ: Optional[IntegratorConfig] = None,
                     max_time: float = 200.0) -> dict:
    """Floquet multiplier of the closed orbit through (-rho, y_star):
    exp of the loop integral of the smoothed field's divergence.
    """
    info = return_map(system, tf, eps, y_star, rho=rho, integ=integ,
                      with_divergence=True, max_time=max_time)
    mult = math.exp(info.s_integral)
    return {"multiplier": mult, "log_multiplier": info.s_integral,
            "period": info.t_return, "closure_gap": abs(info.y_out - y_star)}


def cycle_arc_multiplier(system: FilippovSystem, tf: TransitionFunction,
                         eps: float, y_star: float, rho: float = 0.3,
                         integ: Optional[IntegratorConfig] = None,
                         max_time: float = 200.0) -> dict:
    """Derivative (magnitude) of the outer-arc map along the closed orbit.

    The arc runs on {y = eps} from the departure crossing (upward) to the
    re-entry crossing (downward); outside the layer the smoothed field equals
    the upper field, so this is the upper-field part of the cycle's
    contraction.  The layer portion of the cycle shrinks with eps, hence this
    factor tends to the upper-field loop rate exp(integral of div over one
    loop) while the full Floquet multiplier keeps the layer's extra
    squeezing on top of it.
    """
    roof = SectionSpec("horizontal", eps, ident="roof")
    info = return_map(system, tf, eps, y_star, rho=rho, integ=integ,
                      with_divergence=True, keep_trajectory=True,
                      max_time=max_time, extra_records=[roof])
    ups = [e for e in info.trajectory.events
           if e.section_id == "roof" and e.direction == "up"]
    if not ups:
        raise NoReturn("closed orbit never left the layer through its roof")
    up = ups[0]
    downs = [e for e in info.trajectory.events
             if e.section_id == "roof" and e.direction == "down" and e.t > up.t]
    if not downs:
        raise NoReturn("closed orbit never re-entered the layer after departing")
    dn = downs[0]
    s_arc = float(dn.point[2] - up.point[2])
    ev = system.x_plus.eval
    a = float(ev(up.point[0], up.point[1])[1])
    b = float(ev(dn.point[0], dn.point[1])[1])
    value = abs(a / b) * math.exp(s_arc)
    return {
        "multiplier_arc": value,
        "log_multiplier_arc": math.log(value),
        "s_arc": s_arc,
        "t_arc": float(dn.t - up.t),
        "x_departure": float(up.point[0]),
        "x_reentry": float(dn.point[0]),
    }


# --------------------------------------------------------------------------
# Hausdorff distance between closed polylines
# --------------------------------------------------------------------------

def resample_arclength(points: np.ndarray, delta: float) -> np.ndarray:
    """Resample a polyline at (approximately) uniform arc-length spacing delta."""
    pts = np.asarray(points, dtype=float)
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    total = s[-1]
    if total == 0.0:
        return pts[:1].copy()
    m = max(2, int(math.ceil(total / delta)) + 1)
    si = np.linspace(0.0, total, m)
    out = np.empty((m, pts.shape[1]))
    for j in range(pts.shape[1]):
        out[:, j] = np.interp(si, s, pts[:, j])
    return out


def hausdorff_distance(a: np.ndarray, b: np.ndarray,
                       delta_sample: float = 1e-3) -> float:
    """Symmetric Hausdorff distance between two polylines, after arc-length
    resampling at spacing delta_sample."""
    A = resample_arclength(np.asarray(a, dtype=float), delta_sample)
    B = resample_arclength(np.asarray(b, dtype=float), delta_sample)
    d_ab = cKDTree(B).query(A)[0].max()
    d_ba = cKDTree(A).query(B)[0].max()
    return float(max(d_ab, d_ba))


# --------------------------------------------------------------------------
# end-to-end cycle analysis
# --------------------------------------------------------------------------

@dataclass
class CycleInfo:
    eps: float
    fixed_point: float
    period: float
    multiplier: float
    log_multiplier: float
    multiplier_fd: dict
    iterations: int
    arc: Optional[dict] = None
    hausdorff: Optional[float] = None
    hausdorff_over_eps: Optional[float] = None
    polyline: Optional[np.ndarray] = None

    def as_dict(self) -> dict:
        out = {
            "eps": self.eps,
            "fixed_point": self.fixed_point,
            "period": self.period,
            "multiplier": self.multiplier,
            "log_multiplier": self.log_multiplier,
            "multiplier_fd": {k: v for k, v in self.multiplier_fd.items()},
            "iterations": self.iterations,
            "hausdorff": self.hausdorff,
            "hausdorff_over_eps": self.hausdorff_over_eps,
        }
        if self.arc is not None:
            out.update(self.arc)
        return out


def default_bracket(system: FilippovSystem, eps: float, rho: float,
                    integ: Optional[IntegratorConfig] = None) -> Tuple[float, float]:
    """Bracket on the inflow section containing the attracting fixed point in
    both regimes: return crossing inside the layer (y ~ eps * m0(-rho)) or
    above it (y ~ height of the grazing orbit + O(eps))."""
    integ = integ or IntegratorConfig()
    sec = SectionSpec("vertical", -rho)
    hit, _ = flow_to_section_traj(system.x_plus, (0.0, 0.0), sec, integ,
                                  t_direction="backward", graze_probe=False)
    y_bar = float(hit.point[1])
    return (0.25 * eps, y_bar + 4.0 * eps)


def cycle_analysis(system: FilippovSystem, tf: TransitionFunction, eps: float,
                   rho: float = 0.3,
                   bracket: Optional[Tuple[float, float]] = None,
                   integ: Optional[IntegratorConfig] = None,
                   reference: Optional[np.ndarray] = None,
                   delta_sample: float = 1e-3,
                   max_time: float = 200.0) -> CycleInfo:
    """Locate the attracting cycle of the smoothed system on {x = -rho, y > 0},
    compute its period and multiplier, and (optionally) its Hausdorff distance
    to a reference polyline."""
    if bracket is None:
        bracket = default_bracket(system, eps, rho, integ)

    def ret(y: float) -> float:
        return return_map(system, tf, eps, y, rho=rho, integ=integ,
                          max_time=max_time).y_out

    res = find_cycle(ret, bracket)
    mult = cycle_multiplier(system, tf, eps, res.y_star, rho=rho, integ=integ,
                            max_time=max_time)
    fd = multiplier_fd(ret, res.y_star)
    arc = cycle_arc_multiplier(system, tf, eps, res.y_star, rho=rho,
                               integ=integ, max_time=max_time)
    info = CycleInfo(
        eps=eps, fixed_point=res.y_star, period=mult["period"],
        multiplier=mult["multiplier"], log_multiplier=mult["log_multiplier"],
        multiplier_fd=fd, iterations=res.iterations, arc=arc,
    )
    if reference is not None:
        full = return_map(system, tf, eps, res.y_star, rho=rho, integ=integ,
                          keep_trajectory=True, max_time=max_time)
        n = max(2000, int(12.0 / delta_sample))
        pts = sample_dense(full.trajectory, n)[:, :2]
        info.polyline = pts
        info.hausdorff = hausdorff_distance(pts, reference, delta_sample)
        info.hausdorff_over_eps = info.hausdorff / eps
    return info


def unique_root_scan(return_fn: Callable[[float], float],
                     bracket: Tuple[float, float], pieces: int = 8,
                     xtol: float = 1e-13) -> List[float]:
    """Split the bracket, find a fixed point in every sign-changing piece, and
    return the list of roots found (callers assert uniqueness/consistency)."""
    a, b = bracket
    ys = np.linspace(a, b, pieces + 1)
    vals = [return_fn(float(y)) - float(y) for y in ys]
    roots = []
    for i in range(pieces):
        fa, fb = vals[i], vals[i + 1]
        if fa == 0.0:
            roots.append(float(ys[i]))
        elif fa * fb < 0:
            res = find_cycle(return_fn, (float(ys[i]), float(ys[i + 1])), xtol=xtol)
            roots.append(res.y_star)
    if vals[-1] == 0.0:
        roots.append(float(ys[-1]))
    return roots


def polyline_to_csv(points: np.ndarray) -> str:
    lines = ["x,y"]
    for x, y in np.asarray(points, dtype=float):
        lines.append(f"{x:.17g},{y:.17g}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# grazing half-maps near the fold with the layer roof
# --------------------------------------------------------------------------

def grazing_half_map(system: FilippovSystem, eps: float, x_in: float,
                     psi: float, side: str, theta: float, rho: float,
                     integ: Optional[IntegratorConfig] = None) -> float:
    """Upper-field half map on {y = eps} near the fold at x = psi.

    side='unstable': forward to the outflow section {x = theta};
    side='stable':   backward to the inflow section {x = -rho}.
    Both are pure upper-field constructions; the backward branch dips below
    the roof on its way (by design: the fold sits on y = eps).
    """
    integ = integ or IntegratorConfig()
    if side == "unstable":
        sec = SectionSpec("vertical", theta, ident="outflow")
        hit, _ = flow_to_section_traj(system.x_plus, (x_in, eps), sec, integ,
                                      graze_probe=False)
    elif side == "stable":
        sec = SectionSpec("vertical", -rho, ident="inflow")
        hit, _ = flow_to_section_traj(system.x_plus, (x_in, eps), sec, integ,
                                      t_direction="backward", graze_probe=False)
    else:
        raise ValueError("side must be 'unstable' or 'stable'")
    return float(hit.point[1])


def grazing_exponent_fit(system: FilippovSystem, eps: float, psi: float,
                         side: str, theta: float, rho: float,
                         offsets: Sequence[float],
                         integ: Optional[IntegratorConfig] = None) -> dict:
    """Fit |out(psi + d) - out(psi)| = |kappa| d^p over the given offsets d > 0.

    Returns the exponent p (expected 2k), the signed prefactor kappa, and the
    fit's r^2.  Offsets are measured from the fold on the grazing side
    (forward map: d > 0; backward map: d > 0 as well, both orbits graze)."""
    base = grazing_half_map(system, eps, psi, psi, side, theta, rho, integ)
    ds, gaps, signs = [], [], []
    for d in offsets:
        out = grazing_half_map(system, eps, psi + d, psi, side, theta, rho, integ)
        gap = out - base
        if gap == 0.0:
            continue
        ds.append(d)
        gaps.append(abs(gap))
        signs.append(math.copysign(1.0, gap))
    ld, lg = np.log(ds), np.log(gaps)
    A = np.column_stack([ld, np.ones_like(ld)])
    coef, *_ = np.linalg.lstsq(A, lg, rcond=None)
    fitted = A @ coef
    ss_res = float(np.sum((lg - fitted) ** 2))
    ss_tot = float(np.sum((lg - lg.mean()) ** 2))
    kappa = signs[0] * math.exp(coef[1])
    return {
        "exponent": float(coef[0]),
        "kappa": float(kappa),
        "r2": 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0,
        "base": base,
        "n_offsets": len(ds),
    }
