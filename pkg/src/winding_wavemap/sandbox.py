"""Planar ODE sandbox: gradient vs Hamiltonian flow of the goat-tracks potential.

The potential is flat (= 1) inside the unit disk and

    f(r, theta) = 1 + exp(-1/(r-1)) (sin(1/(r-1) + theta) + 2)

outside.  The gradient flow relaxes toward the circle r = 1; the Hamiltonian
flow x'' = -grad f conserves E = |x'|^2 / 2 + f(x), so it cannot settle onto
the minimum circle with vanishing speed.  Trajectories carry the angular
coordinate as a continuously lifted real number, so winding is read off
directly from theta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import StepFailure


def _envelope(r):
    """exp(-1/(r-1)) for r > 1, exactly 0 otherwise (underflow included)."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    outside = r > 1.0
    with np.errstate(over="ignore", under="ignore"):
        out[outside] = np.exp(-1.0 / (r[outside] - 1.0))
    return out


def goat_f_polar(r, theta):
    r, theta = np.broadcast_arrays(np.asarray(r, dtype=float),
                                   np.asarray(theta, dtype=float))
    scalar = r.ndim == 0
    r = np.atleast_1d(r)
    theta = np.atleast_1d(theta)
    vals = np.ones_like(r)
    outside = r > 1.0
    if np.any(outside):
        u = 1.0 / (r[outside] - 1.0)
        with np.errstate(under="ignore"):
            vals[outside] = 1.0 + np.exp(-u) * (np.sin(u + theta[outside]) + 2.0)
    return vals[0] if scalar else vals


def goat_grad_polar(r, theta):
    """(df/dr, df/dtheta); analytic outside the unit disk, zero inside."""
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    dr = np.zeros_like(r)
    dth = np.zeros_like(r)
    outside = r > 1.0
    if np.any(outside):
        u = 1.0 / (r[outside] - 1.0)
        env = np.exp(-u)
        psi = u + theta[outside]
        dr[outside] = env * u * u * (np.sin(psi) + 2.0 - np.cos(psi))
        dth[outside] = env * np.cos(psi)
    if dr.shape:
        return dr, dth
    return dr[()], dth[()]


def goat_f(x) -> float:
    """Potential value at a Cartesian point."""
    x = np.asarray(x, dtype=float)
    return float(goat_f_polar(np.hypot(x[0], x[1]), np.arctan2(x[1], x[0])))


def goat_grad(x) -> np.ndarray:
    """Cartesian gradient; identically zero inside the unit disk and switched
    smoothly (the envelope and all its derivatives vanish as r decreases to 1)."""
    x = np.asarray(x, dtype=float)
    r = float(np.hypot(x[0], x[1]))
    if r <= 1.0:
        return np.zeros(2)
    theta = math.atan2(x[1], x[0])
    dr, dth = goat_grad_polar(r, theta)
    ct, st = math.cos(theta), math.sin(theta)
    return np.array([dr * ct - dth * st / r, dr * st + dth * ct / r])


@dataclass
class Trajectory:
    t: np.ndarray
    r: np.ndarray
    theta_lifted: np.ndarray
    energy: np.ndarray          # f along gradient flow; |x'|^2/2 + f along Hamiltonian flow
    mode: str
    summary: dict


def gradient_flow(x0, t_end: float, rtol: float = 1e-10, atol: float = 1e-12,
                  max_points: int = 4000) -> Trajectory:
    """Integrate x' = -grad f adaptively, in lifted polar coordinates.

    Solving for (r, theta) with theta real keeps the winding bookkeeping
    exact: theta never wraps.  Near r = 1 the gradient decays faster than
    any power, so the absolute tolerance governs the terminal creep.
    """
    x0 = np.asarray(x0, dtype=float)
    r0 = float(np.hypot(x0[0], x0[1]))
    th0 = math.atan2(x0[1], x0[0])
    if r0 <= 1.0:
        t = np.linspace(0.0, t_end, 2)
        return Trajectory(t, np.full(2, r0), np.full(2, th0), np.ones(2),
                          "gradient", {"stationary": True})

    def rhs(t, s):
        r, th = s
        if r <= 1.0:
            return [0.0, 0.0]
        dr, dth = goat_grad_polar(np.array([r]), np.array([th]))
        return [-float(dr[0]), -float(dth[0]) / (r * r)]

    t_eval = np.linspace(0.0, t_end, max_points)
    sol = solve_ivp(rhs, (0.0, t_end), [r0, th0], method="RK45",
                    rtol=rtol, atol=atol, t_eval=t_eval, dense_output=False)
    if not sol.success:
        raise StepFailure(f"gradient flow integration failed: {sol.message}")
    r, th = sol.y
    fvals = goat_f_polar(r, th)
    summary = {
        "stationary": False,
        "r_final": float(r[-1]),
        "theta_gain": float(th[-1] - th[0]),
        "theta_span": float(th.max() - th.min()),
        "f_monotone_violation": float(np.max(np.diff(fvals))),
    }
    return Trajectory(sol.t, r, th, fvals, "gradient", summary)


def hamiltonian_flow(x0, v0, t_end: float, dt: float = 1e-3,
                     record_every: int = 100) -> Trajectory:
    """Leapfrog integration of x'' = -grad f with conserved E = |x'|^2/2 + f.

    Tracks, over every step, the closest simultaneous approach to
    (r = 1, speed = 0): the conserved energy keeps speed^2/2 >= E0 - f >=
    E0 - 1 whenever the trajectory nears the minimum circle, which is the
    obstruction to gradient-flow-like relaxation.
    """
    x1, x2 = float(x0[0]), float(x0[1])
    v1, v2 = float(v0[0]), float(v0[1])
    n_steps = int(round(t_end / dt))
    e0 = 0.5 * (v1 * v1 + v2 * v2) + goat_f([x1, x2])

    def grad(px, py):
        r = math.hypot(px, py)
        if r <= 1.0:
            return 0.0, 0.0, r
        u = 1.0 / (r - 1.0)
        if u > 700.0:
            return 0.0, 0.0, r
        env = math.exp(-u)
        th = math.atan2(py, px)
        psi = u + th
        dr = env * u * u * (math.sin(psi) + 2.0 - math.cos(psi))
        dth = env * math.cos(psi)
        ct, st = px / r, py / r
        return dr * ct - dth * st / r, dr * st + dth * ct / r, r

    ts, rs, ths, es = [], [], [], []
    theta = math.atan2(x2, x1)
    min_joint = math.inf      # min over steps of max(|r-1|, speed): rules out joint approach
    min_rest = math.inf       # min over steps of |r-1| + speed^2: distance to relax-to-rest

    g1, g2, r = grad(x1, x2)
    for k in range(n_steps + 1):
        raw = math.atan2(x2, x1)
        delta = (raw - theta + math.pi) % (2.0 * math.pi) - math.pi
        if k:
            theta += delta
        speed = math.hypot(v1, v2)
        if k % record_every == 0 or k == n_steps:
            ts.append(k * dt)
            rs.append(r)
            ths.append(theta)
            es.append(0.5 * speed * speed + goat_f([x1, x2]))
        min_joint = min(min_joint, max(abs(r - 1.0), speed))
        min_rest = min(min_rest, abs(r - 1.0) + speed * speed)
        if k == n_steps:
            break
        v1 -= 0.5 * dt * g1
        v2 -= 0.5 * dt * g2
        x1 += dt * v1
        x2 += dt * v2
        g1, g2, r = grad(x1, x2)
        v1 -= 0.5 * dt * g1
        v2 -= 0.5 * dt * g2
        if not (math.isfinite(x1) and math.isfinite(x2) and math.isfinite(v1) and math.isfinite(v2)):
            raise StepFailure(f"hamiltonian flow produced non-finite state at t={k * dt}")

    es = np.asarray(es)
    summary = {
        "energy0": e0,
        "energy_drift_rel": float(np.abs(es - e0).max() / abs(e0)),
        "min_joint_approach": min_joint,
        "min_rest_approach": min_rest,
        "theta_gain": float(ths[-1] - ths[0]),
    }
    return Trajectory(np.asarray(ts), np.asarray(rs), np.asarray(ths), es,
                      "hamiltonian", summary)
