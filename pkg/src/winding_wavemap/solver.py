"""Finite-difference integrator for the reduced quasi-equivariant flow.

The dynamical fields are the torus coordinate Y(t, r) along the geodesic and
the spherical angle alpha(t, r), evolving under

    Y_tt     = Y_rr + Y_r / r - df/dy(0, Y) e(alpha),
    alpha_tt = alpha_rr + alpha_r / r - sin(2 alpha) / (2 r^2)
               + (df/dy / f)(0, Y) Y_r alpha_r,

with e(alpha) = (alpha_r^2 + alpha_t^2 + sin^2 alpha / r^2) / 2.  Both
radial operators are discretized in conservative form on a cell-centered
grid staggered off r = 0 (the origin face carries zero radius weight, so no
inner ghost is needed); the alpha operator uses face-averaged f so that it
is exactly (1/(r f)) d_r (r f alpha_r) discretely.  Nodal first derivatives
for energy densities use ghost reflection: alpha odd and Y even about the
origin, constant extrapolation at the outer edge (equivalently zero outer
flux; the run contract keeps the boundary causally disconnected from the
reported region).

Time stepping is kick-drift-kick.  The Y-kick force depends on alpha_t
through e(alpha); using the mean of the squared velocity before and after
the alpha-kick makes each kick an exact involution under dt -> -dt, so the
whole step is time reversible to roundoff.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import geometry
from .errors import BlowupDetected, CFLViolation, ConfigError
from .geometry import ManifoldConfig


# ---------------------------------------------------------------------------
# grid and state
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RadialGrid:
    R: float
    J: int

    def __post_init__(self):
        if self.R <= 0.0 or self.J < 8:
            raise ConfigError(f"invalid grid R={self.R}, J={self.J}")

    @property
    def dr(self) -> float:
        return self.R / self.J

    @property
    def nodes(self) -> np.ndarray:
        return (np.arange(self.J) + 0.5) * self.dr

    @property
    def faces(self) -> np.ndarray:
        """Interior faces r_{j+1/2}, j = 0..J-2."""
        return np.arange(1, self.J) * self.dr


@dataclass
class FieldState:
    """Full dynamical state of the reduced flow at one time."""

    t: float
    Y: np.ndarray
    Y_t: np.ndarray
    alpha: np.ndarray
    alpha_t: np.ndarray
    grid: RadialGrid

    def copy(self) -> "FieldState":
        return FieldState(self.t, self.Y.copy(), self.Y_t.copy(),
                          self.alpha.copy(), self.alpha_t.copy(), self.grid)

    def all_finite(self) -> bool:
        return bool(np.isfinite(self.Y).all() and np.isfinite(self.Y_t).all()
                    and np.isfinite(self.alpha).all() and np.isfinite(self.alpha_t).all())


def radial_derivative(u: np.ndarray, dr: float, odd_at_origin: bool) -> np.ndarray:
    """Second-order nodal derivative with ghost reflection at the origin
    (odd for alpha, even for Y) and a one-sided second-order stencil at the
    outer edge (the initial profiles have open tails, so a constant ghost
    would halve the boundary gradient)."""
    d = np.empty_like(u)
    d[1:-1] = (u[2:] - u[:-2]) / (2.0 * dr)
    inner_ghost = -u[0] if odd_at_origin else u[0]
    d[0] = (u[1] - inner_ghost) / (2.0 * dr)
    d[-1] = (3.0 * u[-1] - 4.0 * u[-2] + u[-3]) / (2.0 * dr)
    return d


# ---------------------------------------------------------------------------
# run configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InitConfig:
    """Initial data: Y = c, alpha the degree-one profile at scale lam0, plus
    compactly supported velocity bumps."""

    c: float = 0.0
    lam0: float = 1.0
    y1_amp: float = 0.0
    alpha1_amp: float = 0.0
    bump_radius: float = 4.0

    def __post_init__(self):
        if self.lam0 <= 0.0:
            raise ConfigError(f"lam0 = {self.lam0} must be positive")
        if self.bump_radius <= 0.0:
            raise ConfigError("bump_radius must be positive")


@dataclass(frozen=True)
class DiagConfig:
    """Cone translation A and annulus fraction used for the per-output diagnostics."""

    A: float = 1.0
    lambda_frac: float = 0.5
    winding_bins: int = 100


@dataclass(frozen=True)
class RunConfig:
    grid: RadialGrid = field(default_factory=lambda: RadialGrid(20.0, 512))
    cfl: float = 0.5
    t_end: float = 10.0
    output_dt: float = 0.5
    snapshot_every: int = 1            # snapshots every k-th output time; 0 disables
    init: InitConfig = field(default_factory=InitConfig)
    manifold: ManifoldConfig = field(default_factory=ManifoldConfig)
    diagnostics: DiagConfig = field(default_factory=DiagConfig)

    def __post_init__(self):
        if not 0.0 < self.cfl <= 1.0:
            raise ConfigError(f"cfl = {self.cfl} outside (0, 1]")
        if self.t_end < 0.0:
            raise ConfigError("t_end must be nonnegative")
        if self.output_dt <= 0.0:
            raise ConfigError("output_dt must be positive")
        if self.snapshot_every < 0:
            raise ConfigError("snapshot_every must be nonnegative")
        # domain of dependence: the outer boundary must stay causally
        # disconnected from the perturbed region over the whole run
        if self.t_end > self.grid.R - self.init.bump_radius:
            raise ConfigError(
                f"t_end = {self.t_end} exceeds R - bump_radius = "
                f"{self.grid.R - self.init.bump_radius}; outer boundary would "
                "causally contaminate the region of interest"
            )

    def to_dict(self) -> dict:
        return {
            "grid": {"R": self.grid.R, "J": self.grid.J},
            "cfl": self.cfl,
            "t_end": self.t_end,
            "output_dt": self.output_dt,
            "snapshot_every": self.snapshot_every,
            "init": {
                "c": self.init.c,
                "lam0": self.init.lam0,
                "y1_amp": self.init.y1_amp,
                "alpha1_amp": self.init.alpha1_amp,
                "bump_radius": self.init.bump_radius,
            },
            "manifold": self.manifold.to_dict(),
            "diagnostics": {
                "A": self.diagnostics.A,
                "lambda_frac": self.diagnostics.lambda_frac,
                "winding_bins": self.diagnostics.winding_bins,
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        gd = d.get("grid", {})
        idd = d.get("init", {})
        dd = d.get("diagnostics", {})
        return cls(
            grid=RadialGrid(float(gd.get("R", 20.0)), int(gd.get("J", 512))),
            cfl=float(d.get("cfl", 0.5)),
            t_end=float(d.get("t_end", 10.0)),
            output_dt=float(d.get("output_dt", 0.5)),
            snapshot_every=int(d.get("snapshot_every", 1)),
            init=InitConfig(
                c=float(idd.get("c", 0.0)),
                lam0=float(idd.get("lam0", 1.0)),
                y1_amp=float(idd.get("y1_amp", 0.0)),
                alpha1_amp=float(idd.get("alpha1_amp", 0.0)),
                bump_radius=float(idd.get("bump_radius", 4.0)),
            ),
            manifold=ManifoldConfig.from_dict(d.get("manifold", {})),
            diagnostics=DiagConfig(
                A=float(dd.get("A", 1.0)),
                lambda_frac=float(dd.get("lambda_frac", 0.5)),
                winding_bins=int(dd.get("winding_bins", 100)),
            ),
        )


# ---------------------------------------------------------------------------
# initial data
# ---------------------------------------------------------------------------


def mollifier(r: np.ndarray, radius: float) -> np.ndarray:
    """C-infinity bump, 1 at r = 0, support [0, radius)."""
    s = np.asarray(r, dtype=float) / radius
    out = np.zeros_like(s)
    inside = s < 1.0
    with np.errstate(over="ignore", under="ignore"):
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


def velocity_bump_even(r: np.ndarray, radius: float) -> np.ndarray:
    """Shape of the Y velocity perturbation (even about the origin)."""
    return mollifier(r, radius)


def velocity_bump_odd(r: np.ndarray, radius: float) -> np.ndarray:
    """Shape of the alpha velocity perturbation; vanishes linearly at the
    origin as alpha itself must, peaks near radius/2."""
    r = np.asarray(r, dtype=float)
    return (2.0 * r / radius) * mollifier(r, radius)


def init_data(cfg: RunConfig) -> FieldState:
    """Initial state: Y = c, alpha = 2 arctan(r / lam0), velocity bumps.

    Emits an EnergyConditionWarning when the total energy is not below the
    spherical ground-state level plus eps0/2 (the regime where the bubble
    classification pins the limit profile).
    """
    r = cfg.grid.nodes
    state = FieldState(
        t=0.0,
        Y=np.full(cfg.grid.J, cfg.init.c, dtype=float),
        Y_t=cfg.init.y1_amp * velocity_bump_even(r, cfg.init.bump_radius),
        alpha=2.0 * np.arctan(r / cfg.init.lam0),
        alpha_t=cfg.init.alpha1_amp * velocity_bump_odd(r, cfg.init.bump_radius),
        grid=cfg.grid,
    )
    ok, e0, threshold = energy_condition(state, cfg.manifold)
    if not ok:
        warnings.warn(
            f"initial energy {e0:.6f} is not below the ground-state threshold "
            f"{threshold:.6f}; low-energy bubble classification does not apply",
            EnergyConditionWarning,
        )
    return state


class EnergyConditionWarning(UserWarning):
    """Initial energy exceeds the ground-state gap threshold."""


def energy_condition(state: FieldState, mcfg: ManifoldConfig):
    """(holds, total energy, threshold E_sphere + eps0/2)."""
    from . import bubble, diagnostics

    e0 = diagnostics.total_energy(state, mcfg)
    threshold = bubble.ground_state_energy() + mcfg.eps0 / 2.0
    return e0 < threshold, e0, threshold


# ---------------------------------------------------------------------------
# spatial operators and accelerations
# ---------------------------------------------------------------------------


def _laplacian_radial(u: np.ndarray, grid: RadialGrid,
                      face_weight: Optional[np.ndarray] = None,
                      node_weight: Optional[np.ndarray] = None) -> np.ndarray:
    """(1 / (r q)) d_r (r w u_r) in conservative form, with optional face
    weight w and node weight q (both 1 when omitted).

    The face at r = 0 carries zero radius weight, so the origin needs no
    ghost.  The outer ghost is constant extrapolation, i.e. zero flux
    through the outer face: the semi-discrete flow then conserves a discrete
    energy exactly, at the price of a reflecting wall whose influence the
    run contract keeps causally away from the reported region.  (A one-sided
    quadratic closure was tried instead and supports an algebraically
    growing boundary mode under leapfrog.)
    """
    dr = grid.dr
    flux = grid.faces * np.diff(u)
    if face_weight is not None:
        flux = flux * face_weight
    out = np.empty_like(u)
    out[0] = flux[0]
    out[1:-1] = flux[1:] - flux[:-1]
    out[-1] = -flux[-1]
    out /= grid.nodes * dr * dr
    if node_weight is not None:
        out /= node_weight
    return out


def spherical_density_static(state: FieldState) -> np.ndarray:
    """(alpha_r^2 + sin^2 alpha / r^2) / 2 at nodes."""
    r = state.grid.nodes
    ar = radial_derivative(state.alpha, state.grid.dr, odd_at_origin=True)
    return 0.5 * (ar * ar + np.sin(state.alpha) ** 2 / (r * r))


def rhs(state: FieldState, mcfg: ManifoldConfig):
    """Accelerations (Y_tt, alpha_tt) of the reduced system."""
    e_pos = spherical_density_static(state)
    e_alpha = e_pos + 0.5 * state.alpha_t ** 2
    accel_Y = _accel_Y(state, mcfg, e_alpha)
    accel_alpha = _accel_alpha(state, mcfg)
    return accel_Y, accel_alpha


def _accel_Y(state: FieldState, mcfg: ManifoldConfig, e_alpha: np.ndarray) -> np.ndarray:
    lap = _laplacian_radial(state.Y, state.grid)
    return lap - geometry.df_dy_on_gamma(state.Y, mcfg) * e_alpha


def _accel_alpha(state: FieldState, mcfg: ManifoldConfig) -> np.ndarray:
    f = geometry.f_on_gamma(state.Y, mcfg)
    fbar = 0.5 * (f[1:] + f[:-1])
    lap = _laplacian_radial(state.alpha, state.grid, face_weight=fbar, node_weight=f)
    r = state.grid.nodes
    return lap - np.sin(2.0 * state.alpha) / (2.0 * r * r)


# ---------------------------------------------------------------------------
# time stepping
# ---------------------------------------------------------------------------


def _kick(state: FieldState, h: float, mcfg: ManifoldConfig) -> None:
    """Velocity update at frozen positions.  The alpha velocity is kicked
    first (its force is position-only); the Y kick averages the squared
    alpha velocity over the kick, making the map an exact involution."""
    at_old = state.alpha_t
    at_new = at_old + h * _accel_alpha(state, mcfg)
    e_avg = spherical_density_static(state) + 0.25 * (at_old ** 2 + at_new ** 2)
    state.alpha_t = at_new
    state.Y_t = state.Y_t + h * _accel_Y(state, mcfg, e_avg)


def step(state: FieldState, dt: float, cfg: RunConfig) -> FieldState:
    """One kick-drift-kick update; reversible: step(step(s, dt), -dt) = s."""
    bound = cfg.cfl * cfg.grid.dr
    if abs(dt) > bound * (1.0 + 1e-12):
        raise CFLViolation(f"|dt| = {abs(dt)} exceeds cfl * dr = {bound}")
    new = state.copy()
    _kick(new, 0.5 * dt, cfg.manifold)
    new.Y = new.Y + dt * new.Y_t
    new.alpha = new.alpha + dt * new.alpha_t
    _kick(new, 0.5 * dt, cfg.manifold)
    new.t = state.t + dt
    if not new.all_finite():
        raise BlowupDetected(new.t)
    return new


@dataclass
class RunResult:
    records: list
    snapshots: list
    status: str                   # 'completed' or 'blowup'
    blowup_time: Optional[float]
    config: RunConfig


def run(cfg: RunConfig) -> RunResult:
    """Integrate to t_end (or blow-up), emitting diagnostics every output_dt
    and snapshots every snapshot_every-th output time.  Deterministic: the
    step count per output interval is fixed by cfl and output times are
    assigned exactly."""
    from . import diagnostics

    state = init_data(cfg)
    records: list = []
    snapshots: list = []
    kin_ts: list = []
    kin_vals: list = []
    status = "completed"
    blowup_time = None

    n_out = int(math.ceil(cfg.t_end / cfg.output_dt - 1e-12)) if cfg.t_end > 0 else 0
    out_times = [min(k * cfg.output_dt, cfg.t_end) for k in range(n_out + 1)]

    dt0 = cfg.cfl * cfg.grid.dr

    def emit(s: FieldState, index: int):
        kin_ts.append(s.t)
        kin_vals.append(diagnostics.kinetic_inner_integral(s, cfg.diagnostics.A, cfg.manifold))
        records.append(diagnostics.make_record(
            s, cfg.manifold, cfg.diagnostics, kin_ts, kin_vals))
        if cfg.snapshot_every and index % cfg.snapshot_every == 0:
            snapshots.append(s.copy())

    emit(state, 0)
    for k in range(1, len(out_times)):
        span = out_times[k] - out_times[k - 1]
        n_sub = max(1, int(math.ceil(span / dt0 - 1e-12)))
        dt = span / n_sub
        try:
            for _ in range(n_sub):
                state = step(state, dt, cfg)
        except BlowupDetected as exc:
            status = "blowup"
            blowup_time = exc.t
            break
        state.t = out_times[k]
        emit(state, k)
    return RunResult(records, snapshots, status, blowup_time, cfg)
