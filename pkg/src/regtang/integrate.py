"""Adaptive integration with dense output and refined section events.

Everything rides on DOP853 (8th-order embedded pair with a matching-order
interpolant).  Section crossings are located on the dense output and verified
against ``event_tol``; tangential touches are surfaced as ``TangentialGraze``
instead of being silently missed or "refined" to a bogus crossing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import DomainExit, NoCrossing, StepSizeUnderflow, TangentialGraze

RHS = Callable[[float, np.ndarray], np.ndarray]


@dataclass
class IntegratorConfig:
    rtol: float = 1e-10
    atol: float = 1e-12
    max_step: float = math.inf
    event_tol: float = 1e-12
    max_time: float = 1e6
    norm_guard: float = 1e6  # trajectory norm bound; beyond it -> DomainExit

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("tolerances must be positive")
        if self.event_tol > self.rtol:
            raise ValueError("event_tol must not exceed rtol")


@dataclass(frozen=True)
class EventHit:
    t: float
    point: np.ndarray
    section_id: str
    direction: str  # 'up' (residual increasing in integration time) or 'down'


@dataclass
class SectionSpec:
    kind: str                      # 'vertical' (x = c) or 'horizontal' (y = c)
    c: float
    interval: Tuple[float, float] = (-math.inf, math.inf)
    direction: Optional[str] = None  # 'up' / 'down' / None (both)
    ident: Optional[str] = None

    def __post_init__(self):
        if self.kind not in ("vertical", "horizontal"):
            raise ValueError(f"unknown section kind {self.kind!r}")
        if not self.interval[0] < self.interval[1]:
            raise ValueError("section interval is degenerate")
        if self.ident is None:
            self.ident = f"{self.kind}:{self.c:g}"

    def residual(self, p: Sequence[float]) -> float:
        return p[0] - self.c if self.kind == "vertical" else p[1] - self.c

    def other(self, p: Sequence[float]) -> float:
        return p[1] if self.kind == "vertical" else p[0]

    def admits(self, p: Sequence[float]) -> bool:
        lo, hi = self.interval
        return lo <= self.other(p) <= hi

    def residual_rate(self, dp: Sequence[float]) -> float:
        return dp[0] if self.kind == "vertical" else dp[1]


@dataclass
class Trajectory:
    t: np.ndarray
    points: np.ndarray                     # shape (n, 2)
    events: List[EventHit] = dc_field(default_factory=list)
    segments: list = dc_field(default_factory=list, repr=False)  # dense solutions

    @property
    def end(self) -> np.ndarray:
        return self.points[-1]

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    def __len__(self) -> int:
        return len(self.t)


def trajectory_to_csv(traj: Trajectory) -> str:
    """CSV with one row per accepted step; event rows carry the section id."""
    lines = ["t,x,y,event"]
    ev_by_t = {}
    for ev in traj.events:
        ev_by_t.setdefault(ev.t, ev.section_id)
    for ti, (xi, yi) in zip(traj.t, traj.points):
        lines.append(f"{ti:.17g},{xi:.17g},{yi:.17g},")
    for ev in traj.events:
        lines.append(
            f"{ev.t:.17g},{ev.point[0]:.17g},{ev.point[1]:.17g},{ev.section_id}"
        )
    return "\n".join(lines) + "\n"


def _as_rhs(field) -> RHS:
    if callable(field) and not hasattr(field, "eval"):
        return field
    ev = field.eval

    def rhs(t: float, p: np.ndarray) -> np.ndarray:
        return ev(p[0], p[1])

    return rhs


def _hit_direction(rate: float, forward: bool) -> str:
    along_orbit = rate if forward else -rate
    return "up" if along_orbit > 0 else "down"


# On smooth polynomial fields DOP853's error estimate can vanish and the step
# size explodes; scipy then only reports an event when the residual's sign
# differs at the step endpoints, so a dip across a section and back inside a
# single step is silently lost.  Crossings are therefore located by scanning
# the dense interpolant on a sub-step grid instead of trusting the endpoint
# test.
SCAN_SUBDIV = 8


def _scan_grid(sol) -> np.ndarray:
    ts = np.asarray(sol.t, dtype=float)
    if len(ts) < 2:
        return ts
    frac = np.arange(SCAN_SUBDIV) / SCAN_SUBDIV
    grid = ts[:-1, None] + np.diff(ts)[:, None] * frac[None, :]
    return np.append(grid.ravel(), ts[-1])


def _scan_crossings(sol, rhs: RHS, forward: bool, sections: Sequence[SectionSpec]):
    """Locate every section crossing on a solution's dense output.

    Sign changes of each residual are bracketed on the sub-step grid and
    polished with brentq on the interpolant.  Returns (t, point, section,
    rate) tuples ordered along the orbit.
    """
    if not sections or sol.sol is None or len(sol.t) == 0:
        return []
    ts = _scan_grid(sol)
    pts = sol.sol(ts)
    found = []
    for sec in sections:
        vals = (pts[0] if sec.kind == "vertical" else pts[1]) - sec.c
        sgn = np.sign(vals)
        for i in range(len(ts)):
            te = None
            if sgn[i] == 0.0:
                te = float(ts[i])
            elif i + 1 < len(ts) and sgn[i] * sgn[i + 1] < 0:
                lo, hi = sorted((float(ts[i]), float(ts[i + 1])))
                te = brentq(lambda s: sec.residual(sol.sol(s)), lo, hi,
                            xtol=1e-15, rtol=8.9e-16)
            if te is None:
                continue
            if found and found[-1][2] is sec and abs(te - found[-1][0]) < 1e-12:
                continue
            pe = np.array(sol.sol(te))
            rate = sec.residual_rate(rhs(te, pe))
            found.append((float(te), pe, sec, float(rate)))
    found.sort(key=lambda item: item[0], reverse=not forward)
    return found


def flow(
    field,
    p0: Sequence[float],
    t_span: Tuple[float, float],
    config: Optional[IntegratorConfig] = None,
    sections: Iterable[SectionSpec] = (),
) -> Trajectory:
    """Integrate over a fixed time span, recording (non-terminal) section hits."""
    config = config or IntegratorConfig()
    rhs = _as_rhs(field)
    sections = list(sections)
    forward = t_span[1] >= t_span[0]

    def guard(t, p):
        return float(np.max(np.abs(p))) - config.norm_guard
    guard.terminal = True

    sol = solve_ivp(
        rhs, t_span, np.asarray(p0, dtype=float),
        method="DOP853", rtol=config.rtol, atol=config.atol,
        max_step=config.max_step, dense_output=True, events=[guard],
    )
    if sol.status == -1:
        raise StepSizeUnderflow(sol.message)

    hits: List[EventHit] = []
    for te, pe, sec, rate in _scan_crossings(sol, rhs, forward, sections):
        if not sec.admits(pe):
            continue
        d = _hit_direction(rate, forward)
        if sec.direction is not None and d != sec.direction:
            continue
        hits.append(EventHit(te, pe, sec.ident, d))
    if len(sol.t_events[0]):
        raise DomainExit(
            f"trajectory norm exceeded {config.norm_guard:g} at t={sol.t_events[0][0]:g}"
        )
    return Trajectory(t=sol.t, points=sol.y.T.copy(), events=hits, segments=[sol])


def _nudge_off_section(rhs: RHS, t0: float, p0: np.ndarray, sec: SectionSpec,
                       config: IntegratorConfig, forward: bool) -> Tuple[float, np.ndarray]:
    """One small RK4 step so the residual clears the event band before restarting."""
    sgn = 1.0 if forward else -1.0
    rate = abs(sec.residual_rate(rhs(t0, p0)))
    dt = 50.0 * config.event_tol / max(rate, 1e-9)
    dt = sgn * min(max(dt, 1e-13), 1e-3)
    for _ in range(60):
        k1 = rhs(t0, p0)
        k2 = rhs(t0 + dt / 2, p0 + dt / 2 * k1)
        k3 = rhs(t0 + dt / 2, p0 + dt / 2 * k2)
        k4 = rhs(t0 + dt, p0 + dt * k3)
        p1 = p0 + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t1 = t0 + dt
        if abs(sec.residual(p1)) > 10 * config.event_tol:
            return t1, p1
        t0, p0 = t1, p1
    return t0, p0


def flow_to_section_traj(
    field,
    p0: Sequence[float],
    section: SectionSpec,
    config: Optional[IntegratorConfig] = None,
    t_direction: str = "forward",
    record_sections: Iterable[SectionSpec] = (),
    graze_probe: bool = True,
    max_restarts: int = 200,
) -> Tuple[EventHit, Trajectory]:
    """Integrate until the section is crossed in the admitted sense.

    The crossing is located on the dense output and verified to ``event_tol``.
    Crossings outside the section's interval are skipped.  If the residual
    merely touches zero (detected through a zero of its time derivative inside
    the near-section band), a ``TangentialGraze`` is raised.
    """
    config = config or IntegratorConfig()
    rhs = _as_rhs(field)
    forward = t_direction == "forward"
    record_sections = list(record_sections)

    t_cur = 0.0
    p_cur = np.asarray(p0, dtype=float)
    t_all: List[np.ndarray] = []
    p_all: List[np.ndarray] = []
    recorded: List[EventHit] = []
    segments = []

    # Starting on the target section: the degenerate t=0 "crossing" is not the
    # one asked for; step off the section before arming the terminal event.
    if abs(section.residual(p_cur)) <= 10 * config.event_tol:
        t_cur, p_cur = _nudge_off_section(rhs, t_cur, p_cur, section, config, forward)

    for _ in range(max_restarts):
        remaining = config.max_time - abs(t_cur)
        if remaining <= 0:
            break
        t_end = t_cur + (remaining if forward else -remaining)

        # The stopper only bounds the work per segment; crossings themselves
        # are located by the dense-output scan below, which also sees pairs
        # of crossings that cancel across one step.
        def stopper(t, p):
            return section.residual(p)
        stopper.terminal = True
        stopper.direction = 0.0

        events = [stopper]

        if graze_probe:
            def probe(t, p):
                return section.residual_rate(rhs(t, p))
            probe.terminal = True
            probe.direction = 0.0
            events.append(probe)

        def guard(t, p):
            return float(np.max(np.abs(p))) - config.norm_guard
        guard.terminal = True
        events.append(guard)

        sol = solve_ivp(
            rhs, (t_cur, t_end), p_cur,
            method="DOP853", rtol=config.rtol, atol=config.atol,
            max_step=config.max_step, dense_output=True, events=events,
        )
        if sol.status == -1:
            raise StepSizeUnderflow(sol.message)
        t_all.append(sol.t)
        p_all.append(sol.y.T)
        segments.append(sol)

        hit: Optional[EventHit] = None
        for te, pe, sec, rate in _scan_crossings(sol, rhs, forward,
                                                 [section] + record_sections):
            if not sec.admits(pe):
                continue
            d = _hit_direction(rate, forward)
            if sec.direction is not None and d != sec.direction:
                continue
            if sec is section:
                hit = EventHit(te, pe, section.ident, d)
                break
            recorded.append(EventHit(te, pe, sec.ident, d))

        # A root landing exactly on the segment endpoint (the stopper stops
        # *at* the section) leaves no sign change for the scan to bracket.
        if hit is None and len(sol.t_events[0]):
            te = float(sol.t_events[0][0])
            pe = np.array(sol.y_events[0][0])
            if abs(section.residual(pe)) <= config.event_tol and section.admits(pe):
                rate = section.residual_rate(rhs(te, pe))
                d = _hit_direction(rate, forward)
                if section.direction is None or d == section.direction:
                    hit = EventHit(te, pe, section.ident, d)

        if hit is not None:
            traj = _assemble(t_all, p_all, recorded, segments, forward, hit)
            return hit, traj

        if len(sol.t_events[-1]):
            raise DomainExit(
                f"trajectory norm exceeded {config.norm_guard:g} before reaching "
                f"section {section.ident}"
            )

        # Graze probe fired: rate of the residual vanished near the section.
        if graze_probe and len(sol.t_events[1]):
            for te, pe in zip(sol.t_events[1], sol.y_events[1]):
                if abs(section.residual(pe)) < math.sqrt(config.event_tol):
                    raise TangentialGraze(
                        f"residual of {section.ident} touched zero without "
                        f"crossing at t={te:g}",
                        t=float(te), point=np.array(pe),
                    )
            # harmless turning point far from the section: continue past it
            te = float(sol.t_events[1][-1])
            pe = np.array(sol.y_events[1][-1])
            dt = 1e-9 if forward else -1e-9
            t_cur, p_cur = te + dt, pe + dt * rhs(te, pe)
            continue

        # Stopper fired on a crossing the filters rejected: step past it.
        if len(sol.t_events[0]):
            te = float(sol.t_events[0][-1])
            pe = np.array(sol.y_events[0][-1])
            t_cur, p_cur = _nudge_off_section(rhs, te, pe, section, config, forward)
            continue

        break  # ran to max_time without terminal events

    raise NoCrossing(
        f"no admissible crossing of {section.ident} within max_time={config.max_time:g}"
    )


def flow_to_section(
    field,
    p0: Sequence[float],
    section: SectionSpec,
    config: Optional[IntegratorConfig] = None,
    t_direction: str = "forward",
    **kwargs,
) -> EventHit:
    hit, _ = flow_to_section_traj(field, p0, section, config, t_direction, **kwargs)
    return hit


def _assemble(t_all, p_all, recorded, segments, forward, hit: EventHit) -> Trajectory:
    t = np.concatenate(t_all) if t_all else np.array([0.0])
    p = np.vstack(p_all) if p_all else np.zeros((1, 2))
    keep = (t <= hit.t) if forward else (t >= hit.t)
    t = np.append(t[keep], hit.t)
    p = np.vstack([p[keep], hit.point])
    events = sorted(recorded + [hit], key=lambda h: h.t, reverse=not forward)
    return Trajectory(t=t, points=p, events=events, segments=segments)


def sample_dense(traj: Trajectory, n: int) -> np.ndarray:
    """Evaluate the dense output on n time points spanning the trajectory."""
    ts = np.linspace(traj.t[0], traj.t[-1], n)
    out = np.empty((n, traj.points.shape[1]))
    segs = traj.segments
    for i, ti in enumerate(ts):
        placed = False
        for sol in segs:
            lo, hi = sorted((sol.sol.t_min, sol.sol.t_max))
            if lo - 1e-12 <= ti <= hi + 1e-12:
                out[i] = sol.sol(ti)
                placed = True
                break
        if not placed:
            # fall back to nearest sample
            j = int(np.argmin(np.abs(traj.t - ti)))
            out[i] = traj.points[j]
    return out
