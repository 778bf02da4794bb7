"""Direct time integration of the controlled two-component system.

Integrates

    u_t = u_xx - u + (1/eps) f(u)^2 T_o(u) v^2 / 3,
    v_t = eps^2 v_xx - v + f(u) v^2 + l'(0) (v - v_ref(x)),

on [-L, L] with zero-flux boundaries, measuring the deviation of (u, v)
from the stationary pulse.  The growth or decay rate of that deviation is
the time-domain counterpart of max Re(lambda) from the spectral module.

The leading-order pulse profile is only O(eps)-accurate, which would mask
perturbation-level dynamics; before perturbing, the profile is refined to a
discrete stationary state by Newton iteration on the half domain (evenness
pins the translation mode, keeping the Jacobian invertible).  The control
reference v_ref is that refined profile, so the control term vanishes
identically on the unperturbed pulse.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .errors import NumericalBlowup
from .model import ModelParams, PowerLawModel, pulse_profile

RELAX_TOL = 1e-12
BLOWUP_NORM = 1e12


@dataclass
class SimConfig:
    """Grid, time window, and perturbation for one simulation run."""

    model: PowerLawModel
    params: ModelParams
    t_end: float
    half_length: float = 10.0
    dx: float | None = None
    dt: float | None = None
    eta: float = 1e-4
    perturbation_shape: str = "even_bump"  # or "random"
    seed: int = 0
    sample_interval: float = 0.005

    def __post_init__(self):
        if self.dx is None:
            self.dx = self.params.eps / 4.0
        if self.dt is None:
            # diffusion is implicit; dx^2/4 also keeps the explicit reaction
            # terms (Lipschitz constant O(1/eps)) well inside stability
            self.dt = self.dx ** 2 / 4.0
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if not 0 < self.dx <= self.params.eps / 4.0 + 1e-15:
            raise ValueError("dx must satisfy dx <= eps/4")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.perturbation_shape not in ("even_bump", "random"):
            raise ValueError("perturbation_shape must be even_bump or random")
        induced = self.model.induced_params(self.params.eps,
                                            self.params.control_slope)
        for name in ("u_star", "f_val", "f_der", "to_log_der"):
            a, b = getattr(induced, name), getattr(self.params, name)
            if abs(a - b) > 1e-10 * max(1.0, abs(b)):
                raise ValueError(f"model and params disagree on {name}")
        u_p, v_p = pulse_profile(self.params, self.half_length)
        if not v_p < 1e-12:
            raise ValueError("half_length too small: v_p(L) >= 1e-12")
        if not u_p < 1e-4 * self.params.u_star:
            raise ValueError("half_length too small: u_p(L) >= 1e-4 u*")

    @property
    def x(self) -> np.ndarray:
        n_half = int(round(self.half_length / self.dx))
        return self.dx * np.arange(-n_half, n_half + 1)


@dataclass
class SimTrace:
    """Deviation-norm time series with a fitted exponential rate."""

    times: np.ndarray
    deviation_norms: np.ndarray
    fitted_rate: float
    fit_r2: float
    early_exit: str | None = None
    diagnostics: dict = field(default_factory=dict)


def _reaction(u, v, config: SimConfig, v_ref):
    m = config.model
    eps = config.params.eps
    gain = config.params.control_slope
    fu = m.f(u)
    du = -u + fu ** 2 * m.t_o(u) * v ** 2 / (3.0 * eps)
    dv = -v + fu * v ** 2 + gain * (v - v_ref)
    return du, dv


def _neumann_laplacian(w, dx):
    out = np.empty_like(w)
    out[1:-1] = w[:-2] - 2.0 * w[1:-1] + w[2:]
    out[0] = 2.0 * (w[1] - w[0])
    out[-1] = 2.0 * (w[-2] - w[-1])
    return out / dx ** 2


def rhs(state, config: SimConfig, v_ref=None):
    """Discrete right-hand side with zero-flux boundaries."""
    u, v = state
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise NumericalBlowup()
    if v_ref is None:
        v_ref = v
    eps = config.params.eps
    du, dv = _reaction(u, v, config, v_ref)
    du += _neumann_laplacian(u, config.dx)
    dv += eps ** 2 * _neumann_laplacian(v, config.dx)
    if not (np.all(np.isfinite(du)) and np.all(np.isfinite(dv))):
        raise NumericalBlowup()
    return du, dv


def _implicit_bands(n, dx, dt, diffusivity):
    """Banded form of I - dt*diffusivity*Laplacian with zero-flux rows."""
    r = dt * diffusivity / dx ** 2
    ab = np.zeros((3, n))
    ab[0, 1:] = -r
    ab[1, :] = 1.0 + 2.0 * r
    ab[2, :-1] = -r
    ab[0, 1] = -2.0 * r
    ab[2, -2] = -2.0 * r
    return ab


class _StepContext:
    """Precomputed implicit-diffusion solves shared across steps."""

    def __init__(self, config: SimConfig, v_ref):
        n = config.x.size
        self.ab_u = _implicit_bands(n, config.dx, config.dt, 1.0)
        self.ab_v = _implicit_bands(n, config.dx, config.dt,
                                    config.params.eps ** 2)
        self.v_ref = v_ref


def step(state, dt, config: SimConfig, context: _StepContext | None = None):
    """One IMEX step: implicit diffusion, explicit reaction and control."""
    u, v = state
    if context is None:
        context = _StepContext(config, v)
    if abs(dt - config.dt) > 1e-15 * config.dt:
        raise ValueError("dt must match the config (bands are precomputed)")
    du, dv = _reaction(u, v, config, context.v_ref)
    if not (np.all(np.isfinite(du)) and np.all(np.isfinite(dv))):
        raise NumericalBlowup()
    u_new = solve_banded((1, 1), context.ab_u, u + dt * du)
    v_new = solve_banded((1, 1), context.ab_v, v + dt * dv)
    if not (np.all(np.isfinite(u_new)) and np.all(np.isfinite(v_new))):
        raise NumericalBlowup()
    return u_new, v_new


def _half_residual(u, v, config: SimConfig):
    """rhs at gain 0 on the half grid [0, L] with symmetry at x = 0."""
    eps = config.params.eps
    m = config.model
    fu = m.f(u)
    ru = -u + fu ** 2 * m.t_o(u) * v ** 2 / (3.0 * eps)
    rv = -v + fu * v ** 2
    ru += _neumann_laplacian(u, config.dx)
    rv += eps ** 2 * _neumann_laplacian(v, config.dx)
    return ru, rv


def _half_jacobian_bands(u, v, config: SimConfig):
    """Banded Jacobian of the half-grid residual, state interleaved (u,v)."""
    eps = config.params.eps
    m = config.model
    dx2 = config.dx ** 2
    n = u.size
    fu = m.f(u)
    fpu = m.f_prime(u)
    tou = m.t_o(u)
    topu = m.t_o_prime(u)
    # d(ru)/du includes the diffusion diagonal; neighbors couple at offset 2
    c_uu = -2.0 / dx2 - 1.0 + (2.0 * fu * fpu * tou + fu ** 2 * topu) * v ** 2 / (3.0 * eps)
    c_uv = 2.0 * fu ** 2 * tou * v / (3.0 * eps)
    c_vu = fpu * v ** 2
    c_vv = -2.0 * eps ** 2 / dx2 - 1.0 + 2.0 * fu * v

    size = 2 * n
    ab = np.zeros((5, size))  # offsets +2, +1, 0, -1, -2
    ab[2, 0::2] = c_uu
    ab[2, 1::2] = c_vv
    # du/dv coupling sits one column right of each u-row
    ab[1, 1::2] = c_uv
    # dv/du coupling sits one column left of each v-row
    ab[3, 0::2] = c_vu
    # diffusion neighbors: superdiagonal +2 holds J[i, i+2]
    off_u = np.full(n - 1, 1.0 / dx2)
    off_v = np.full(n - 1, eps ** 2 / dx2)
    up_u = off_u.copy()
    up_u[0] = 2.0 / dx2          # symmetry row at x = 0
    lo_u = off_u.copy()
    lo_u[-1] = 2.0 / dx2         # zero-flux row at x = L
    up_v = off_v.copy()
    up_v[0] = 2.0 * eps ** 2 / dx2
    lo_v = off_v.copy()
    lo_v[-1] = 2.0 * eps ** 2 / dx2
    ab[0, 2::2] = up_u
    ab[0, 3::2] = up_v
    ab[4, 0:-2:2] = lo_u
    ab[4, 1:-1:2] = lo_v
    return ab


def relax_profile(config: SimConfig, max_iter: int = 40):
    """Newton-refine the leading-order pulse to a discrete stationary state.

    Works on the half domain so the translation (odd) null mode cannot enter;
    the result is mirrored onto the full grid.  Raises if the residual cannot
    be driven to RELAX_TOL.
    """
    x = config.x
    n_half = (x.size - 1) // 2
    x_half = x[n_half:]
    u, v = pulse_profile(config.params, x_half)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)

    def res_norm(uu, vv):
        ru, rv = _half_residual(uu, vv, config)
        return max(np.max(np.abs(ru)), np.max(np.abs(rv))), ru, rv

    # absolute 1e-12 is below the roundoff floor of the O(1/eps) reaction
    # term, so the tolerance is taken relative to its magnitude
    m = config.model
    fu0 = float(m.f(config.params.u_star))
    v0 = 1.5 / config.params.f_val
    reaction_scale = max(1.0, fu0 ** 2 * float(m.t_o(config.params.u_star))
                         * v0 ** 2 / (3.0 * config.params.eps))
    tol = RELAX_TOL * reaction_scale

    norm, ru, rv = res_norm(u, v)
    for _ in range(max_iter):
        if norm <= tol:
            break
        ab = _half_jacobian_bands(u, v, config)
        rhs_vec = np.empty(2 * u.size)
        rhs_vec[0::2] = ru
        rhs_vec[1::2] = rv
        delta = solve_banded((2, 2), ab, rhs_vec)
        du, dv = delta[0::2], delta[1::2]
        scale = 1.0
        for _ in range(30):
            u_try = u - scale * du
            v_try = v - scale * dv
            if np.all(u_try > 0):
                norm_try, ru_try, rv_try = res_norm(u_try, v_try)
                if norm_try < norm:
                    u, v, norm, ru, rv = u_try, v_try, norm_try, ru_try, rv_try
                    break
            scale *= 0.5
        else:
            break
    if norm > tol:
        raise NumericalBlowup(time=0.0)
    u_full = np.concatenate([u[:0:-1], u])
    v_full = np.concatenate([v[:0:-1], v])
    return u_full, v_full


def perturbation(config: SimConfig):
    """Initial deviation (du, dv) of amplitude eta.

    The v-part is confined to the pulse core by a sech^2 envelope: for
    gamma < 0 the reaction f(u) v^2 grows like u^gamma in the tails, so
    unenveloped v-noise there would inject spurious stiffness.
    """
    x = config.x
    eps = config.params.eps
    core = 1.0 / np.cosh(x / (2.0 * eps)) ** 2
    if config.perturbation_shape == "even_bump":
        du = config.eta * np.exp(-x ** 2)
        dv = config.eta * core
    else:
        rng = np.random.default_rng(config.seed)
        du = config.eta * rng.standard_normal(x.size) * np.exp(-np.abs(x))
        dv = config.eta * rng.standard_normal(x.size) * core
    return du, dv


def deviation_norm(u, v, u_ref, v_ref, config: SimConfig) -> float:
    """Discrete L2 norm of the deviation; v weighted by sqrt(eps)."""
    eps = config.params.eps
    du = u - u_ref
    dv = v - v_ref
    return float(np.sqrt(config.dx * (np.sum(du ** 2) + eps * np.sum(dv ** 2))))


def _line_r2(t, y):
    slope, intercept = np.polyfit(t, y, 1)
    pred = slope * t + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return float(slope), r2


def _best_window_fit(times, lognorms, min_width=8, frac=0.4):
    n = len(times)
    width = max(min_width, int(frac * n))
    best = (0.0, -1.0)
    stride = max(1, (n - width) // 60)
    for start in range(0, n - width + 1, stride):
        cand = _line_r2(times[start:start + width],
                        lognorms[start:start + width])
        if cand[1] > best[1]:
            best = cand
    return best


def _fit_rate(times, lognorms):
    """Slope of log-deviation versus time on its most linear stretch.

    A dominant complex eigenvalue pair makes the norm oscillate under the
    exponential envelope; when the direct fit is poor, the envelope rate is
    recovered from the sequence of local maxima instead.
    """
    n = len(times)
    if n < 8:
        return 0.0, 0.0
    best = _best_window_fit(times, lognorms)
    if best[1] >= 0.99:
        return best
    peaks = [i for i in range(1, n - 1)
             if lognorms[i] > lognorms[i - 1] and lognorms[i] >= lognorms[i + 1]]
    if len(peaks) >= 5:
        t_p = times[peaks]
        y_p = lognorms[peaks]
        cand = _best_window_fit(t_p, y_p, min_width=5, frac=0.6)
        if cand[1] > best[1]:
            best = cand
    return best


def run(config: SimConfig) -> SimTrace:
    """Relax, perturb, integrate, and fit the deviation growth rate.

    Exits early once the deviation exceeds 1e6 * eta (growth has left the
    linear regime) or falls below 1e-12 (decayed to the relaxation floor).
    """
    u_ref, v_ref = relax_profile(config)
    du0, dv0 = perturbation(config)
    u = u_ref + du0
    v = v_ref + dv0
    context = _StepContext(config, v_ref)

    dt = config.dt
    n_steps = int(np.ceil(config.t_end / dt))
    sample_every = max(1, int(round(config.sample_interval / dt)))
    grow_limit = 1e6 * config.eta
    times = [0.0]
    norms = [deviation_norm(u, v, u_ref, v_ref, config)]
    early_exit = None
    t = 0.0
    for k in range(1, n_steps + 1):
        try:
            u, v = step((u, v), dt, config, context)
        except NumericalBlowup:
            raise NumericalBlowup(time=t)
        t = k * dt
        if k % sample_every == 0 or k == n_steps:
            norm = deviation_norm(u, v, u_ref, v_ref, config)
            times.append(t)
            norms.append(norm)
            if norm > grow_limit:
                early_exit = "unstable"
                break
            if norm < 1e-12:
                early_exit = "stable"
                break

    times = np.array(times)
    norms = np.array(norms)
    positive = norms > 0
    rate, r2 = _fit_rate(times[positive], np.log(norms[positive]))
    return SimTrace(
        times=times,
        deviation_norms=norms,
        fitted_rate=rate,
        fit_r2=r2,
        early_exit=early_exit,
        diagnostics={
            "n_steps": int(k),
            "dt": dt,
            "dx": config.dx,
            "grid_points": int(config.x.size),
        },
    )
