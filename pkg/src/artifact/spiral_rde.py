"""Spiral RDE in angle-ray form: solver, saturated spiral, divergence test.

For an angle-ray pair (phi, r(phi)) with ray-barrier angle beta the barrier
obeys r' = cot(beta) r - r(phi - 2pi - beta) / sin(beta) plus sources, and
the delay makes the problem solvable round by round (method of steps).
"""
from __future__ import annotations

import bisect
import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid, quad
from scipy.optimize import brentq

from .kernels import KernelParams, eval_G
from .spectral import TWO_PI

Fn = Callable[[float], float]


@dataclass
class PiecewiseCurve:
    """Function of one variable: closed-form pieces on [b_i, b_{i+1}) plus atoms.

    Pointwise evaluation is right-continuous and ignores atoms; integration
    adds the atom masses that fall inside the interval.  Outside the covered
    range the curve is zero.
    """

    breakpoints: list[float]
    pieces: list[Fn]
    atoms: list[tuple[float, float]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if len(self.pieces) != len(self.breakpoints) - 1:
            raise ValueError("need one piece per interval")
        if any(b1 <= b0 for b0, b1 in zip(self.breakpoints, self.breakpoints[1:])):
            raise ValueError("breakpoints must increase")

    @classmethod
    def zero(cls) -> "PiecewiseCurve":
        return cls([-math.inf, math.inf], [lambda x: 0.0])

    @classmethod
    def dirac(cls, location: float, mass: float = 1.0) -> "PiecewiseCurve":
        return cls([-math.inf, math.inf], [lambda x: 0.0], [(location, mass)])

    def evaluate(self, x: float, side: str = "right") -> float:
        b = self.breakpoints
        if side == "right":
            i = bisect.bisect_right(b, x) - 1
        else:
            i = bisect.bisect_left(b, x) - 1
        if i < 0 or i >= len(self.pieces):
            return 0.0
        return float(self.pieces[i](x))

    def __call__(self, x):
        if np.ndim(x) == 0:
            return self.evaluate(float(x))
        return np.array([self.evaluate(float(v)) for v in np.ravel(x)]).reshape(np.shape(x))

    def integrate(self, lo: float, hi: float) -> float:
        total = 0.0
        for (b0, b1), piece in zip(zip(self.breakpoints, self.breakpoints[1:]), self.pieces):
            u, v = max(lo, b0), min(hi, b1)
            if v > u:
                total += quad(piece, u, v, limit=200)[0]
        total += sum(m for x, m in self.atoms if lo <= x < hi)
        return total


@dataclass
class RdeSolution:
    """Dense output of the method-of-steps solver, read as a right-continuous curve."""

    nodes: np.ndarray
    r_right: np.ndarray
    r_left: np.ndarray
    d_right: np.ndarray
    d_left: np.ndarray
    history: PiecewiseCurve
    atoms: list[tuple[float, float]]
    closed: bool = False
    closing_angle: float | None = None

    @property
    def breakpoints(self) -> list[float]:
        return [float(self.nodes[0]), float(self.nodes[-1])]

    def evaluate(self, x: float, side: str = "right") -> float:
        nodes = self.nodes
        if x < nodes[0] or (side == "left" and x == nodes[0]):
            return self.history.evaluate(x, side)
        if x > nodes[-1]:
            return 0.0 if self.closed else math.nan
        if x == nodes[-1]:
            return float(self.r_left[-1] if side == "left" else self.r_right[-1])
        if side == "right":
            i = bisect.bisect_right(nodes, x) - 1
        else:
            i = bisect.bisect_left(nodes, x) - 1
        return _hermite(nodes[i], nodes[i + 1], self.r_right[i], self.r_left[i + 1], self.d_right[i], self.d_left[i + 1], x)

    def __call__(self, x):
        if np.ndim(x) == 0:
            return self.evaluate(float(x))
        return np.array([self.evaluate(float(v)) for v in np.ravel(x)]).reshape(np.shape(x))


def _hermite(x0, x1, y0, y1, d0, d1, x):
    h = x1 - x0
    t = (x - x0) / h
    t2, t3 = t * t, t * t * t
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * d1


def _mandatory_nodes(phi_start, phi_end, seeds, shift):
    """Seeds and their images under the forward delay map x -> shift(x)."""
    out = set()
    for s in seeds:
        if not math.isfinite(s):
            continue
        x = s
        while x <= phi_end:
            if x > phi_start:
                out.add(x)
            x = shift(x)
    return sorted(out)


def solve_rde_steps(
    initial: PiecewiseCurve,
    beta: float | Fn,
    source: PiecewiseCurve | None,
    phi_end: float,
    step: float,
    phi_start: float = 0.0,
) -> RdeSolution:
    """Method of steps for r' = cot(beta) r - r(psi)/sin(beta(psi)) + source.

    The delayed angle psi solves psi + 2pi + beta(psi) = phi.  `initial` gives
    r on the lead-in interval before phi_start; the value r(phi_start-) is
    taken from it.  Source atoms become jumps of r.  Stepping stops at the
    first zero of r, located by bisection on the dense output.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    source = source or PiecewiseCurve.zero()
    const_beta = not callable(beta)
    beta_fn: Fn = (lambda _x: float(beta)) if const_beta else beta  # type: ignore[assignment]
    min_delay = TWO_PI + (float(beta) if const_beta else 0.0)
    if step >= min_delay:
        raise ValueError("step must be shorter than the delay")

    def delayed_angle(phi: float) -> float:
        if const_beta:
            return phi - TWO_PI - float(beta)
        psi = phi - TWO_PI - beta_fn(phi)
        for _ in range(50):
            nxt = phi - TWO_PI - beta_fn(psi)
            if abs(nxt - psi) < 1e-14:
                break
            psi = nxt
        return psi

    atoms = sorted((x, m) for x, m in source.atoms if phi_start <= x <= phi_end)
    seeds = [x for x, _ in atoms] + list(source.breakpoints) + list(initial.breakpoints) + [phi_start]
    extra = _mandatory_nodes(phi_start, phi_end, seeds, lambda x: x + TWO_PI + beta_fn(x))
    grid = [phi_start]
    for target in extra + [phi_end]:
        if target <= grid[-1]:
            continue
        n = max(1, math.ceil((target - grid[-1]) / step - 1e-9))
        grid.extend(np.linspace(grid[-1], target, n + 1)[1:].tolist())
    nodes = np.array(grid)
    atom_at = {}
    for x, m in atoms:
        j = int(np.argmin(np.abs(nodes - x)))
        atom_at[j] = atom_at.get(j, 0.0) + m

    sol = RdeSolution(nodes, np.zeros_like(nodes), np.zeros_like(nodes), np.zeros_like(nodes), np.zeros_like(nodes), initial, atoms)

    snap = 1e-9 * step

    def rhs(phi: float, r: float, side: str) -> float:
        b = beta_fn(phi)
        psi = delayed_angle(phi)
        # a delayed node computed with rounding error must not cross a jump
        j = bisect.bisect_left(nodes, psi)
        for jj in (j - 1, j):
            if 0 <= jj < len(nodes) and abs(nodes[jj] - psi) < snap:
                psi = float(nodes[jj])
        return math.cos(b) / math.sin(b) * r - sol.evaluate(psi, side) / math.sin(beta_fn(psi)) + source.evaluate(phi, side)

    r = initial.evaluate(phi_start, "left") + atom_at.get(0, 0.0)
    sol.r_left[0] = initial.evaluate(phi_start, "left")
    sol.r_right[0] = r
    last = len(nodes) - 1
    for i in range(last):
        x0, x1 = nodes[i], nodes[i + 1]
        h = x1 - x0
        k1 = rhs(x0, r, "right")
        sol.d_right[i] = k1
        k2 = rhs(x0 + h / 2, r + h * k1 / 2, "right")
        k3 = rhs(x0 + h / 2, r + h * k2 / 2, "right")
        k4 = rhs(x1, r + h * k3, "left")
        r_end = r + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6
        sol.r_left[i + 1] = r_end
        sol.d_left[i + 1] = rhs(x1, r_end, "left")
        r = r_end + atom_at.get(i + 1, 0.0)
        sol.r_right[i + 1] = r
        if r_end <= 0.0 or r <= 0.0:
            if sol.r_right[i] > 0 and r_end <= 0.0:
                f = lambda x: _hermite(x0, x1, sol.r_right[i], r_end, k1, sol.d_left[i + 1], x)
                zero = brentq(f, x0, x1, xtol=1e-13) if f(x0) > 0 else x0
            else:
                zero = x1
            sol.nodes = nodes[: i + 2]
            for name in ("r_right", "r_left", "d_right", "d_left"):
                setattr(sol, name, getattr(sol, name)[: i + 2])
            sol.closed, sol.closing_angle = True, float(zero)
            return sol
    sol.d_right[last] = rhs(nodes[last], r, "right")
    return sol


def saturated_source() -> PiecewiseCurve:
    """Unit atom at 0 (start on the unit circle) and the -1 jump at 2pi."""
    z = PiecewiseCurve.zero()
    return PiecewiseCurve(z.breakpoints, z.pieces, [(0.0, 1.0), (TWO_PI, -1.0)])


def saturated_ray(phi, alpha: float):
    """Saturated spiral grown from the unit circle at constant angle alpha.

    Equals G(phi) - G(phi - 2pi): e^{cot phi} on [0, 2pi), then the unit
    downward jump, then the RDE.
    """
    p = KernelParams.for_angle(alpha)
    phi = np.asarray(phi, dtype=float)
    val = np.asarray(eval_G(phi, p)) - np.asarray(eval_G(phi - TWO_PI, p))
    return float(val) if val.ndim == 0 else val


def saturated_ray_rescaled(tau, alpha: float):
    """rho(tau) = r(P tau) e^{-c P tau}."""
    p = KernelParams.for_angle(alpha)
    tau = np.asarray(tau, dtype=float)
    return np.asarray(saturated_ray(tau * p.period, alpha)) * np.exp(-p.c * p.period * tau)


def first_zero(phi_grid: np.ndarray, values: np.ndarray) -> float | None:
    """First angle where the sampled ray changes sign (None if it never does)."""
    neg = np.flatnonzero(values <= 0)
    if neg.size == 0:
        return None
    j = int(neg[0])
    if j == 0:
        return float(phi_grid[0])
    x0, x1, y0, y1 = phi_grid[j - 1], phi_grid[j], values[j - 1], values[j]
    return float(x0 - y0 * (x1 - x0) / (y1 - y0))


def divergence_check(tau: Sequence[float], rho: Sequence[float], t0: float, a: float = 1.0) -> bool:
    """Criterion for linear divergence of rho' = a rho - rho(. - 1).

    True when rho > 0 on [t0 - 1, t0 + 1] and the value at t0 + 1 dominates
    rho on [t0, t0 + 1], strictly at a = 1.
    """
    t = np.asarray(tau, dtype=float)
    y = np.asarray(rho, dtype=float)
    win = (t >= t0 - 1 - 1e-12) & (t <= t0 + 1 + 1e-12)
    if not win.any() or np.any(y[win] <= 0):
        return False
    end = int(np.argmin(np.abs(t - (t0 + 1))))
    tail = (t >= t0 - 1e-12) & (t < t[end])
    if not tail.any():
        return False
    strict = abs(a - 1.0) < 1e-9
    peak = y[tail].max()
    return bool(y[end] > peak if strict else y[end] >= peak)


def monotone_variant(tau: Sequence[float], rho: Sequence[float], t0: float) -> bool:
    """rho increasing on [t0, t0 + 1] and positive on the window: rho' >= rho - rho(. - 1) >= 0."""
    t = np.asarray(tau, dtype=float)
    y = np.asarray(rho, dtype=float)
    win = (t >= t0 - 1e-12) & (t <= t0 + 1 + 1e-12)
    return bool(np.all(y[(t >= t0 - 1 - 1e-12) & (t <= t0 + 1 + 1e-12)] > 0) and np.all(np.diff(y[win]) > 0))


@dataclass
class SpiralTrace:
    phi: np.ndarray
    r: np.ndarray
    beta: np.ndarray
    s_minus: np.ndarray
    s_plus: np.ndarray = field(default_factory=lambda: np.zeros(0))
    L: np.ndarray = field(default_factory=lambda: np.zeros(0))
    A: np.ndarray = field(default_factory=lambda: np.zeros(0))
    burning_rate: np.ndarray = field(default_factory=lambda: np.zeros(0))
    rate_diverges: bool = False

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["phi", "r", "beta", "s_minus", "s_plus", "L", "A"])
        for row in zip(self.phi, self.r, self.beta, self.s_minus, self.s_plus, self.L, self.A):
            w.writerow([f"{v:.17g}" for v in row])
        return buf.getvalue()


def trace_length_and_admissibility(
    trace: SpiralTrace, sigma: float, base_time: float = 1.0, s_plus0: float = 0.0
) -> SpiralTrace:
    """Fill s+, L, the admissibility A = base_time + s- + r - s+/sigma and b+ = 1/cos(beta).

    base_time is the arrival time at the start of the barrier; 1 for a point
    ignition at distance 1.
    """
    speed = trace.r / np.sin(trace.beta)
    L = cumulative_trapezoid(speed, trace.phi, initial=0.0)
    trace.L = L
    trace.s_plus = s_plus0 + L
    trace.A = base_time + trace.s_minus + trace.r - trace.s_plus / sigma
    cosb = np.cos(trace.beta)
    trace.rate_diverges = bool(np.any(np.abs(cosb) < 1e-12))
    with np.errstate(divide="ignore"):
        trace.burning_rate = np.where(np.abs(cosb) < 1e-12, np.inf, 1.0 / cosb)
    return trace


def saturated_trace(alpha: float, phi_end: float, samples_per_round: int = 4096) -> SpiralTrace:
    """Trace of the saturated spiral grown from the unit ball.

    The first-round rays leave the ball at time 0 (s- = -1 encodes the base
    time r - 1); later rays leave the barrier at s-(phi) = s+(phi - 2pi - alpha),
    clamped at the barrier tip.
    """
    P = TWO_PI + alpha
    n = max(2, int(round(phi_end / P * samples_per_round)) + 1)
    phi = np.linspace(0.0, phi_end, n)
    r = np.asarray(saturated_ray(phi, alpha))
    beta = np.full_like(phi, alpha)
    s_plus = cumulative_trapezoid(r / np.sin(beta), phi, initial=0.0)
    s_minus = np.where(phi < TWO_PI, -1.0, np.maximum(0.0, np.interp(phi - P, phi, s_plus, left=0.0)))
    tr = SpiralTrace(phi, r, beta, s_minus)
    return trace_length_and_admissibility(tr, 1.0 / math.cos(alpha), base_time=0.0)
