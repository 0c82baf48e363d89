"""Diagnostic functionals for the reduced flow.

Conventions.  All energy-type quantities share one normalization: the
density is

    e = (Y_r^2 + Y_t^2) / 2 + f(0, Y) e(alpha),
    e(alpha) = (alpha_r^2 + alpha_t^2 + sin^2 alpha / r^2) / 2,

and totals are 2 pi int e r dr.  The flux through the inward-translated
cone boundary is defined as 2 pi (T - A) (e + m) at r = T - A with
m = Y_r Y_t + f alpha_r alpha_t, which is exactly d/dT of the cone energy
in this normalization, so the cone-growth identity

    cone(T1, A) - cone(T2, A) = int_{T2}^{T1} flux dt

holds without stray factors.  The concentration scale lambda(t) uses the
spherical density e(alpha) alone (no f weight): lambda is half the radius
at which the cumulative spherical energy reaches the midpoint of the
admissible band [1, 2].

All functionals are pure functions of immutable snapshots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import geometry
from .errors import NoScaleError, OutOfDomain
from .geometry import ManifoldConfig
from .solver import DiagConfig, FieldState, radial_derivative, spherical_density_static


# ---------------------------------------------------------------------------
# densities and characteristic fields
# ---------------------------------------------------------------------------


def spherical_density(state: FieldState) -> np.ndarray:
    """e(alpha) with the velocity term, no f weight."""
    return spherical_density_static(state) + 0.5 * state.alpha_t ** 2


def energy_density(state: FieldState, mcfg: ManifoldConfig) -> np.ndarray:
    """Full energy density e at nodes."""
    yr = radial_derivative(state.Y, state.grid.dr, odd_at_origin=False)
    f = geometry.f_on_gamma(state.Y, mcfg)
    return 0.5 * (yr * yr + state.Y_t ** 2) + f * spherical_density(state)


def momentum_density(state: FieldState, mcfg: ManifoldConfig) -> np.ndarray:
    """m = <grad_x u, grad_t u> = Y_r Y_t + f alpha_r alpha_t at nodes."""
    dr = state.grid.dr
    yr = radial_derivative(state.Y, dr, odd_at_origin=False)
    ar = radial_derivative(state.alpha, dr, odd_at_origin=True)
    f = geometry.f_on_gamma(state.Y, mcfg)
    return yr * state.Y_t + f * ar * state.alpha_t


def total_energy(state: FieldState, mcfg: ManifoldConfig) -> float:
    """Total energy 2 pi int (Y_r^2/2 + Y_t^2/2 + f e(alpha)) r dr.

    Gradient terms are quadratured on the staggered faces where the
    conservative spatial operators live (with zero outer-face flux, matching
    the wall closure), velocity and potential terms at the nodes.  This is
    the discrete functional the scheme itself transports, so its drift
    reflects time-integration error alone, at second order.
    """
    g = state.grid
    dr = g.dr
    f = geometry.f_on_gamma(state.Y, mcfg)
    fbar = 0.5 * (f[1:] + f[:-1])
    dY = np.diff(state.Y) / dr
    dA = np.diff(state.alpha) / dr
    e_faces = 0.5 * dY * dY + fbar * 0.5 * dA * dA
    grad_part = float(np.sum(e_faces * g.faces)) * dr
    r = g.nodes
    e_nodes = 0.5 * state.Y_t ** 2 + f * (0.5 * state.alpha_t ** 2
                                          + 0.5 * np.sin(state.alpha) ** 2 / (r * r))
    node_part = float(np.sum(e_nodes * r)) * dr
    return 2.0 * math.pi * (grad_part + node_part)


@dataclass(frozen=True)
class CharFields:
    """Characteristic combinations of the energy-momentum fields at one time."""

    r: np.ndarray
    e: np.ndarray
    m: np.ndarray
    L: np.ndarray
    Asq: np.ndarray   # r (e + m)
    Bsq: np.ndarray   # r (e - m)


def char_fields(state: FieldState, mcfg: ManifoldConfig) -> CharFields:
    dr = state.grid.dr
    r = state.grid.nodes
    yr = radial_derivative(state.Y, dr, odd_at_origin=False)
    ar = radial_derivative(state.alpha, dr, odd_at_origin=True)
    f = geometry.f_on_gamma(state.Y, mcfg)
    grad2 = yr * yr + f * (ar * ar + np.sin(state.alpha) ** 2 / (r * r))
    vel2 = state.Y_t ** 2 + f * state.alpha_t ** 2
    e = 0.5 * (grad2 + vel2)
    m = yr * state.Y_t + f * ar * state.alpha_t
    L = 0.5 * (grad2 - vel2)
    return CharFields(r=r, e=e, m=m, L=L, Asq=r * (e + m), Bsq=r * (e - m))


def char_invariant_residuals(cf: CharFields) -> dict:
    """Relative violations of the characteristic-field inequalities.

    Checked pointwise: |m| <= e (Cauchy-Schwarz on the weighted inner
    product), Asq and Bsq nonnegative, and the sharp bound L^2 <= e^2 - m^2.
    The r-weighted form 8 r^2 (e^2 - m^2) >= L^2 follows from the sharp one
    exactly on {8 r^2 >= 1} and is reported on that region; near the origin
    the r^2 weight vanishes while L stays finite, so only the sharp form is
    meaningful there.
    """
    scale = np.maximum(cf.e, 1e-300)
    cauchy = float(((np.abs(cf.m) - cf.e) / scale).max())
    asq = float((-cf.Asq / np.maximum(cf.r * scale, 1e-300)).max())
    bsq = float((-cf.Bsq / np.maximum(cf.r * scale, 1e-300)).max())
    sharp = float(((cf.L ** 2 - (cf.e ** 2 - cf.m ** 2)) / scale ** 2).max())
    far = 8.0 * cf.r ** 2 >= 1.0
    if np.any(far):
        num = cf.L[far] ** 2 - 8.0 * cf.r[far] ** 2 * (cf.e[far] ** 2 - cf.m[far] ** 2)
        weighted = float((num / (8.0 * cf.r[far] ** 2 * scale[far] ** 2)).max())
    else:
        weighted = -math.inf
    return {"cauchy_schwarz": cauchy, "Asq_nonneg": asq, "Bsq_nonneg": bsq,
            "L_bound_sharp": sharp, "L_bound_weighted_far": weighted}


# ---------------------------------------------------------------------------
# radial integrals
# ---------------------------------------------------------------------------


def _cumulative_radial(values: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Cumulative trapezoid of 2 pi v r dr from the origin, prepending the
    exact zero at r = 0; returned on the extended abscissa (0, r_0, ..)."""
    integrand = np.concatenate([[0.0], values * r])
    rr = np.concatenate([[0.0], r])
    out = np.concatenate([[0.0], np.cumsum(0.5 * (integrand[1:] + integrand[:-1]) * np.diff(rr))])
    return 2.0 * math.pi * out, rr


def _radial_integral_to(values: np.ndarray, r: np.ndarray, rho: float) -> float:
    """2 pi int_0^rho v r dr with linear interpolation of the cumulative."""
    cum, rr = _cumulative_radial(values, r)
    rho = min(max(rho, 0.0), float(rr[-1]))
    return float(np.interp(rho, rr, cum))


# ---------------------------------------------------------------------------
# concentration scale
# ---------------------------------------------------------------------------


def lambda_of_t(state: FieldState) -> float:
    """Concentration scale: smallest lambda with the cumulative spherical
    energy at 2 lambda equal to the midpoint of the admissible band.

    The target is 1.5 (midpoint of [1, 2]); if the total spherical energy is
    in [1, 1.5) the midpoint of the achievable band [1, total] is used.
    Raises NoScaleError below total 1.
    """
    e_sph = spherical_density(state)
    cum, rr = _cumulative_radial(e_sph, state.grid.nodes)
    total = float(cum[-1])
    if total < 1.0:
        raise NoScaleError(f"total spherical energy {total:.4g} < 1")
    target = 1.5 if total >= 1.5 else 0.5 * (1.0 + total)
    k = int(np.searchsorted(cum, target))
    if k == 0:
        return float(rr[0]) / 2.0
    c0, c1 = cum[k - 1], cum[k]
    if c1 == c0:
        rho = rr[k - 1]
    else:
        rho = rr[k - 1] + (target - c0) / (c1 - c0) * (rr[k] - rr[k - 1])
    return float(rho) / 2.0


def y_at_radius(state: FieldState, rho: float) -> float:
    """Lifted torus coordinate interpolated at radius rho."""
    return float(np.interp(rho, state.grid.nodes, state.Y))


# ---------------------------------------------------------------------------
# cone energies and flux
# ---------------------------------------------------------------------------


def cone_energy(state: FieldState, A: float, mcfg: ManifoldConfig) -> float:
    """Energy inside the translated cone, 2 pi int_0^{t-A} e r dr.

    Empty cone (A >= t) gives 0; a cone wider than the grid saturates at the
    total (trapezoid) energy.
    """
    rho = state.t - A
    if rho <= 0.0:
        return 0.0
    return _radial_integral_to(energy_density(state, mcfg), state.grid.nodes, rho)


def annulus_energy(state: FieldState, lam_frac: float, A: float,
                   mcfg: ManifoldConfig) -> float:
    """Energy in the annulus lam_frac * t < r < t - A."""
    outer = state.t - A
    inner = lam_frac * state.t
    if outer <= inner:
        return 0.0
    e = energy_density(state, mcfg)
    return (_radial_integral_to(e, state.grid.nodes, outer)
            - _radial_integral_to(e, state.grid.nodes, inner))


def flux_at(state: FieldState, A: float, mcfg: ManifoldConfig) -> float:
    """Energy flux through the translated cone boundary at this state's time:
    2 pi (t - A) (e + m) at r = t - A (linear interpolation in r)."""
    rho = state.t - A
    if rho < 0.0:
        raise OutOfDomain(f"cone radius t - A = {rho:.4g} negative")
    if rho > state.grid.R:
        raise OutOfDomain(f"cone radius {rho:.4g} outside grid R = {state.grid.R}")
    if rho == 0.0:
        return 0.0
    cf = char_fields(state, mcfg)
    val = float(np.interp(rho, cf.r, cf.e + cf.m))
    return 2.0 * math.pi * rho * val


def _state_at(history: Sequence[FieldState], T: float) -> FieldState:
    for s in history:
        if abs(s.t - T) <= 1e-9 * max(1.0, abs(T)):
            return s
    raise OutOfDomain(f"no state at time {T} in history")


def flux(history: Sequence[FieldState], T: float, A: float,
         mcfg: ManifoldConfig) -> float:
    """Flux at time T taken from a history of snapshots."""
    return flux_at(_state_at(history, T), A, mcfg)


def flux_identity_residual(history: Sequence[FieldState], T2: float, T1: float,
                           A: float, mcfg: ManifoldConfig) -> float:
    """Relative mismatch between the cone-energy difference over [T2, T1] and
    the time quadrature (trapezoid over available snapshots) of the flux."""
    if not T2 < T1:
        raise OutOfDomain("need T2 < T1")
    ts = np.array([s.t for s in history if T2 - 1e-12 <= s.t <= T1 + 1e-12])
    if len(ts) < 2:
        raise OutOfDomain("need at least two snapshots in [T2, T1]")
    fl = np.array([flux_at(_state_at(history, t), A, mcfg) for t in ts])
    integral = float(np.trapezoid(fl, ts))
    dcone = (cone_energy(_state_at(history, T1), A, mcfg)
             - cone_energy(_state_at(history, T2), A, mcfg))
    scale = max(abs(dcone), abs(integral), 1e-30)
    return abs(dcone - integral) / scale


# ---------------------------------------------------------------------------
# kinetic-energy dispersion functional
# ---------------------------------------------------------------------------


def kinetic_inner_integral(state: FieldState, A: float, mcfg: ManifoldConfig) -> float:
    """int_0^{t-A} |d_t u|^2 r dr with |d_t u|^2 = Y_t^2 + f alpha_t^2."""
    rho = state.t - A
    if rho <= 0.0:
        return 0.0
    f = geometry.f_on_gamma(state.Y, mcfg)
    vel2 = state.Y_t ** 2 + f * state.alpha_t ** 2
    return _radial_integral_to(vel2, state.grid.nodes, rho) / (2.0 * math.pi)


def kinetic_cone_avg_from_samples(ts: Sequence[float], vals: Sequence[float],
                                  A: float, T: float) -> float:
    """(1/T) int_A^T I(t) dt by trapezoid over the sampled inner integrals."""
    if T <= A:
        return 0.0
    ts = np.asarray(ts, dtype=float)
    vals = np.asarray(vals, dtype=float)
    lo, hi = A, T
    inside = (ts > lo) & (ts < hi)
    tt = np.concatenate([[lo], ts[inside], [hi]])
    vv = np.concatenate([[np.interp(lo, ts, vals)], vals[inside],
                         [np.interp(hi, ts, vals)]])
    return float(np.trapezoid(vv, tt)) / T


def kinetic_cone_avg(history: Sequence[FieldState], A: float, T: float,
                     mcfg: ManifoldConfig) -> float:
    """(1/T) int_A^T int_0^{t-A} |d_t u|^2 r dr dt from a snapshot history."""
    if T <= A:
        raise OutOfDomain("need T > A")
    ts = [s.t for s in history if s.t <= T + 1e-12]
    vals = [kinetic_inner_integral(s, A, mcfg) for s in history if s.t <= T + 1e-12]
    if len(ts) < 2:
        raise OutOfDomain("need at least two snapshots up to T")
    return kinetic_cone_avg_from_samples(ts, vals, A, T)


# ---------------------------------------------------------------------------
# exterior oscillation and degree
# ---------------------------------------------------------------------------


def exterior_oscillation(state: FieldState, lam: float) -> float:
    """max over r >= lam * t of |alpha(r) - alpha at the outer edge|."""
    r_cut = lam * state.t
    if r_cut >= state.grid.R:
        raise OutOfDomain(f"lam * t = {r_cut:.4g} outside grid R = {state.grid.R}")
    sel = state.grid.nodes >= r_cut
    if not np.any(sel):
        return 0.0
    return float(np.abs(state.alpha[sel] - state.alpha[-1]).max())


def degree(state: FieldState) -> int:
    """Topological degree: nearest integer to alpha(R-)/pi."""
    return int(round(float(state.alpha[-1]) / math.pi))


# ---------------------------------------------------------------------------
# per-output record and the winding report
# ---------------------------------------------------------------------------


CSV_COLUMNS = ("t", "energy", "lambda", "Y_at_lambda", "z_wrap", "degree",
               "cone_energy_A", "annulus_energy", "flux_A", "kinetic_cone_avg")


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    energy: float
    lam: float                  # concentration scale; NaN when none exists
    Y_at_lambda: float          # lifted (not reduced mod 1)
    z_wrap: float               # Y_at_lambda mod 1
    degree: int
    cone_energy_A: float
    annulus_energy: float
    flux_A: float
    kinetic_cone_avg: float
    alpha_exterior_osc: float   # carried in the record, not in the CSV

    def to_row(self) -> list:
        return [self.t, self.energy, self.lam, self.Y_at_lambda, self.z_wrap,
                self.degree, self.cone_energy_A, self.annulus_energy,
                self.flux_A, self.kinetic_cone_avg]


def make_record(state: FieldState, mcfg: ManifoldConfig, diag: DiagConfig,
                kin_ts: Sequence[float], kin_vals: Sequence[float]) -> DiagnosticsRecord:
    try:
        lam = lambda_of_t(state)
        y_lam = y_at_radius(state, lam)
        z = y_lam % 1.0
    except NoScaleError:
        lam, y_lam, z = math.nan, math.nan, math.nan
    try:
        osc = exterior_oscillation(state, diag.lambda_frac)
    except OutOfDomain:
        osc = math.nan
    return DiagnosticsRecord(
        t=state.t,
        energy=total_energy(state, mcfg),
        lam=lam,
        Y_at_lambda=y_lam,
        z_wrap=z,
        degree=degree(state),
        cone_energy_A=cone_energy(state, diag.A, mcfg),
        annulus_energy=annulus_energy(state, diag.lambda_frac, diag.A, mcfg),
        flux_A=flux_at(state, diag.A, mcfg) if state.t >= diag.A else 0.0,
        kinetic_cone_avg=kinetic_cone_avg_from_samples(kin_ts, kin_vals, diag.A, state.t),
        alpha_exterior_osc=osc,
    )


@dataclass(frozen=True)
class WindingReport:
    wrap_count: float           # max - min of the lifted coordinate, in wraps
    monotone_from_t: Optional[float]
    monotone_increasing: Optional[bool]
    z_cover_fraction: float
    lambda_trend: dict

    def to_dict(self) -> dict:
        return {
            "wrap_count": self.wrap_count,
            "monotone_from_t": self.monotone_from_t,
            "monotone_increasing": self.monotone_increasing,
            "z_cover_fraction": self.z_cover_fraction,
            "lambda_trend": self.lambda_trend,
        }


def winding_series(records: Sequence[DiagnosticsRecord], bins: int = 100,
                   tol: float = 1e-9) -> WindingReport:
    """Winding diagnostics over a run's record series.

    wrap_count is the total range of the lifted coordinate at the
    concentration scale (one unit = one pass around the z circle);
    monotone_from_t is the earliest output time from which the lifted
    coordinate is monotone (direction chosen by the tail's net change);
    z_cover_fraction is the fraction of [0, 1) bins visited by z_wrap.
    """
    if not records:
        raise ValueError("empty record series")
    ts = np.array([rec.t for rec in records])
    ys = np.array([rec.Y_at_lambda for rec in records])
    zs = np.array([rec.z_wrap for rec in records])
    lams = np.array([rec.lam for rec in records])
    ok = np.isfinite(ys)
    ts, ys, zs, lams = ts[ok], ys[ok], zs[ok], lams[ok]
    if len(ys) == 0:
        return WindingReport(0.0, None, None, 0.0, {})

    wrap = float(ys.max() - ys.min())

    monotone_from = None
    increasing = None
    if len(ys) >= 3:
        d = np.diff(ys)
        sign = 1.0 if float(np.sum(d[-min(5, len(d)):])) >= 0.0 else -1.0
        good = sign * d >= -tol
        # longest suffix of steps all in the chosen direction
        idx = len(d)
        while idx > 0 and good[idx - 1]:
            idx -= 1
        if len(d) - idx >= 2:
            monotone_from = float(ts[idx])
            increasing = sign > 0
    occupied = np.zeros(bins, dtype=bool)
    occupied[np.floor(zs * bins).astype(int) % bins] = True
    cover = float(occupied.sum()) / bins

    lam_trend = {}
    if len(lams):
        lam_trend = {
            "start": float(lams[0]),
            "end": float(lams[-1]),
            "min": float(lams.min()),
            "max": float(lams.max()),
            "ratio_end_over_start": float(lams[-1] / lams[0]) if lams[0] else math.nan,
        }
    return WindingReport(wrap, monotone_from, increasing, cover, lam_trend)
