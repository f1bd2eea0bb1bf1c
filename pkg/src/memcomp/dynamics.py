"""Method-of-lines integration of the delayed system and outcome
classification.

The delay is held on a ring buffer with tau = m*dt exactly, so the lag
lookup is an array read, never an interpolation. Diffusion advances by
Crank-Nicolson (one symmetric tridiagonal solve per species per step);
the memory flux and the reaction terms are explicit.

The explicit treatment of the lagged flux carries its own stability
requirement: the per-delay-cycle amplification of the stiffest mode
stays at its continuum value only when dt * lambda_max <= 2, i.e.
dt <= h^2/2. The default step policy enforces that cap; the 2e-3
ceiling applies on coarse grids where h^2/2 is larger.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg as sla

from ._kernels import step_chunk, thomas_factor
from .errors import BracketError, ConvergenceError
from .grid import Field, Grid
from .model import ModelParams
from .steady import SteadyState, memory_strength_margins

PERTURBATION_PROFILES = {
    "sin2x": lambda x: np.sin(2.0 * x),
    "sinx": lambda x: np.sin(x),
    "none": lambda x: np.zeros_like(x),
}

OUTCOMES = (
    "ConvergedToSteadyState",
    "SustainedOscillation",
    "DecayToBoundary",
    "Inconclusive",
)


@dataclass(frozen=True)
class SimConfig:
    """Time-integration and classification settings."""

    n: int = 128
    dt: float = 2e-3  # requested ceiling; lowered by the stability cap
    t_end: float = 400.0
    eps: float = 0.01
    perturbation: str = "sin2x"
    series_interval: float = 0.25
    snapshot_interval: float = 5.0
    transient_fraction: float = 0.5
    tol_conv: float = 1e-2
    tol_osc: float = 1e-2
    tol_extinct: float = 1e-8

    def __post_init__(self):
        if not 0.0 < self.transient_fraction < 1.0:
            raise ValueError("transient_fraction must lie in (0, 1)")
        if self.perturbation not in PERTURBATION_PROFILES:
            raise ValueError(f"unknown perturbation profile {self.perturbation!r}")
        if self.dt <= 0 or self.t_end <= 0:
            raise ValueError("dt and t_end must be positive")


@dataclass
class History:
    """Ring buffer of the last m+1 states; tau = m*dt to the last bit."""

    dt: float
    m: int
    bufu: np.ndarray
    bufv: np.ndarray
    ptr: int = 0

    @classmethod
    def constant(cls, u0: np.ndarray, v0: np.ndarray, dt: float, m: int) -> "History":
        return cls(
            dt=dt,
            m=m,
            bufu=np.tile(u0, (m + 1, 1)),
            bufv=np.tile(v0, (m + 1, 1)),
        )

    def lagged(self) -> tuple[np.ndarray, np.ndarray]:
        """The stored pair exactly m steps back."""
        lag = (self.ptr + 1) % (self.m + 1)
        return self.bufu[lag], self.bufv[lag]

    def current(self) -> tuple[np.ndarray, np.ndarray]:
        return self.bufu[self.ptr], self.bufv[self.ptr]

    def push(self, u: np.ndarray, v: np.ndarray):
        self.ptr = (self.ptr + 1) % (self.m + 1)
        self.bufu[self.ptr] = u
        self.bufv[self.ptr] = v


@dataclass(frozen=True)
class SimulationResult:
    times: np.ndarray
    l2_u: np.ndarray
    l2_v: np.ndarray
    max_u: np.ndarray
    max_v: np.ndarray
    dev_u: np.ndarray
    dev_v: np.ndarray
    min_uv: np.ndarray
    snapshots: list  # list of (t, Field, Field)
    outcome: str
    amplitude: float
    period_estimate: float | None
    negativity_flag: bool
    dt: float
    tau: float
    blowup_time: float | None = None
    config: SimConfig | None = None


def stable_dt(grid: Grid, requested: float) -> float:
    """Requested step capped by the explicit-lagged-flux bound h^2/2."""
    return min(requested, grid.h**2 / 2.0)


def snap_dt_to_tau(tau: float, dt_target: float) -> tuple[float, int]:
    """Largest dt <= dt_target that divides tau exactly; (dt, m)."""
    if tau <= 0.0:
        return dt_target, 0
    m = max(1, int(math.ceil(tau / dt_target - 1e-12)))
    return tau / m, m


def rhs(
    u: Field, v: Field, u_lag: Field, v_lag: Field, params: ModelParams, t: float = 0.0
) -> tuple[Field, Field]:
    """Right-hand side of the coupled delayed system at one instant."""
    from .grid import flux_divergence, laplacian

    grid = u.grid
    p = params.on_grid(grid)
    r1 = p.r1.samples.values
    r2 = p.r2.samples.values
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            fu = (
                laplacian(u).values
                + p.d1 * flux_divergence(u, u_lag).values
                + p.lambda1 * u.values * (r1 - p.a11 * u.values - p.a12 * v.values)
            )
            fv = (
                laplacian(v).values
                + p.d2 * flux_divergence(v, v_lag).values
                + p.lambda2 * v.values * (r2 - p.a21 * u.values - p.a22 * v.values)
            )
    except ValueError as exc:  # overflow inside an intermediate field
        raise ConvergenceError(f"non-finite right-hand side at t={t}") from exc
    if not (np.all(np.isfinite(fu)) and np.all(np.isfinite(fv))):
        raise ConvergenceError(f"non-finite right-hand side at t={t}")
    return Field(grid, fu), Field(grid, fv)


def step(
    u: np.ndarray,
    v: np.ndarray,
    u_lag: np.ndarray,
    v_lag: np.ndarray,
    params: ModelParams,
    grid: Grid,
    dt: float,
) -> tuple[np.ndarray, np.ndarray]:
    """One IMEX update (reference implementation used by the tests).

    Crank-Nicolson for the diffusion, forward Euler for the memory flux
    and the reaction evaluated at the current time with the lag fields.
    """
    p = params.on_grid(grid)
    h = grid.h
    r1 = p.r1.samples.values
    r2 = p.r2.samples.values

    def lagged_flux(w, wlag):
        we = np.concatenate(([0.0], w, [0.0]))
        ge = np.concatenate(([0.0], wlag, [0.0]))
        return np.diff(0.5 * (we[:-1] + we[1:]) * np.diff(ge)) / h**2

    eu = p.d1 * lagged_flux(u, u_lag) + p.lambda1 * u * (r1 - p.a11 * u - p.a12 * v)
    ev = p.d2 * lagged_flux(v, v_lag) + p.lambda2 * v * (r2 - p.a21 * u - p.a22 * v)
    ab = np.zeros((2, grid.n))
    ab[0, 1:] = -dt / (2 * h**2)
    ab[1, :] = 1.0 + dt / h**2

    def lap(w):
        we = np.concatenate(([0.0], w, [0.0]))
        return (we[:-2] - 2.0 * w + we[2:]) / h**2

    rhs_u = u + 0.5 * dt * lap(u) + dt * eu
    rhs_v = v + 0.5 * dt * lap(v) + dt * ev
    un = sla.solveh_banded(ab, rhs_u)
    vn = sla.solveh_banded(ab, rhs_v)
    return un, vn


def classify_outcome(
    times: np.ndarray,
    deviation: np.ndarray,
    l2_u: np.ndarray,
    l2_v: np.ndarray,
    transient_fraction: float = 0.5,
    tol_conv: float = 1e-2,
    tol_osc: float = 1e-2,
    tol_extinct: float = 1e-8,
) -> tuple[str, float, float | None]:
    """Label a deviation series; returns (outcome, amplitude, period).

    After discarding the transient window: converged when the
    peak-to-peak amplitude and the final deviation are both small;
    sustained oscillation when the last-quarter amplitude holds at least
    80% of the third-quarter amplitude and exceeds the oscillation
    floor, with the period taken from the mean spacing of the peaks;
    decay to the boundary when either species' norm collapses.
    """
    if len(times) < 8:
        return "Inconclusive", float("nan"), None
    t_end = times[-1]
    post = times >= transient_fraction * t_end
    if post.sum() < 4:
        return "Inconclusive", float("nan"), None
    dev_post = deviation[post]
    t_post = times[post]
    amplitude = float(dev_post.max() - dev_post.min())
    final = float(dev_post[-1])

    if amplitude < tol_conv and final < tol_conv:
        return "ConvergedToSteadyState", amplitude, None

    third = deviation[(times >= 0.5 * t_end) & (times < 0.75 * t_end)]
    fourth = deviation[times >= 0.75 * t_end]
    amp3 = float(third.max() - third.min()) if len(third) else 0.0
    amp4 = float(fourth.max() - fourth.min()) if len(fourth) else 0.0
    if amp4 >= 0.8 * amp3 and amp4 > tol_osc:
        period = _mean_peak_spacing(t_post, dev_post)
        return "SustainedOscillation", amp4, period

    if float(l2_u[-1]) < tol_extinct or float(l2_v[-1]) < tol_extinct:
        return "DecayToBoundary", amplitude, None
    return "Inconclusive", amplitude, None


def _mean_peak_spacing(t: np.ndarray, y: np.ndarray) -> float | None:
    lo, hi = y.min(), y.max()
    if hi <= lo:
        return None
    floor = lo + 0.25 * (hi - lo)
    inner = (y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:]) & (y[1:-1] > floor)
    peaks = t[1:-1][inner]
    if len(peaks) < 2:
        return None
    return float(np.mean(np.diff(peaks)))


def simulate(
    params: ModelParams, tau: float, init: SteadyState, config: SimConfig | None = None
) -> SimulationResult:
    """Integrate the delayed system from a perturbed steady state.

    The initial history is constant in time: init * (1 + eps * rho(x)).
    The memory-strength condition is checked against the initial state
    and only warned about when violated; it is the theory's sufficient
    condition, not a scheme requirement.
    """
    config = config or SimConfig()
    grid = init.grid
    p = params.on_grid(grid)

    margins = memory_strength_margins(p, init)
    if not margins["satisfied"]:
        warnings.warn(
            "memory-strength condition violated by the initial state "
            f"(|d1|*max u = {margins['u_strength']:.3f}, "
            f"|d2|*max v = {margins['v_strength']:.3f}); high-wavenumber "
            "delayed modes may grow",
            RuntimeWarning,
            stacklevel=2,
        )

    dt_target = stable_dt(grid, config.dt)
    dt, m = snap_dt_to_tau(tau, dt_target)
    nsteps = int(round(config.t_end / dt))
    series_stride = max(1, int(round(config.series_interval / dt)))
    snap_stride = (
        max(1, int(round(config.snapshot_interval / dt)))
        if config.snapshot_interval > 0
        else 0
    )

    rho = PERTURBATION_PROFILES[config.perturbation](grid.x)
    u0 = init.u.values * (1.0 + config.eps * rho)
    v0 = init.v.values * (1.0 + config.eps * rho)
    hist = History.constant(u0, v0, dt, m)

    cp, dp = thomas_factor(grid.n, 1.0 + dt / grid.h**2, -0.5 * dt / grid.h**2)
    n_series = nsteps // series_stride + 2
    series = np.zeros((n_series, 8))
    n_snaps = (nsteps // snap_stride + 2) if snap_stride else 1
    snaps_u = np.zeros((n_snaps, grid.n))
    snaps_v = np.zeros((n_snaps, grid.n))

    u = u0.copy()
    v = v0.copy()
    ptr, ns_count, snap_count, blow_step = step_chunk(
        u,
        v,
        hist.bufu,
        hist.bufv,
        hist.ptr,
        m,
        nsteps,
        dt,
        grid.h,
        p.d1,
        p.d2,
        p.lambda1,
        p.lambda2,
        p.a11,
        p.a12,
        p.a21,
        p.a22,
        p.r1.samples.values.copy(),
        p.r2.samples.values.copy(),
        cp,
        dp,
        series,
        series_stride,
        init.u.values.copy(),
        init.v.values.copy(),
        snaps_u,
        snaps_v,
        snap_stride,
    )

    series = series[:ns_count]
    times = series[:, 0]
    deviation = np.sqrt(series[:, 5] ** 2 + series[:, 6] ** 2)
    snapshots = [
        (
            (i + 1) * snap_stride * dt,
            Field(grid, snaps_u[i]),
            Field(grid, snaps_v[i]),
        )
        for i in range(snap_count)
        if np.all(np.isfinite(snaps_u[i])) and np.all(np.isfinite(snaps_v[i]))
    ]

    if blow_step > 0:
        blow_time = blow_step * dt
        finite = np.isfinite(series).all(axis=1)
        partial = SimulationResult(
            times=times[finite],
            l2_u=series[finite, 1],
            l2_v=series[finite, 2],
            max_u=series[finite, 3],
            max_v=series[finite, 4],
            dev_u=series[finite, 5],
            dev_v=series[finite, 6],
            min_uv=series[finite, 7],
            snapshots=snapshots,
            outcome="Inconclusive",
            amplitude=float("nan"),
            period_estimate=None,
            negativity_flag=bool((series[finite, 7] < 0).any()),
            dt=dt,
            tau=tau,
            blowup_time=blow_time,
            config=config,
        )
        raise ConvergenceError(
            f"simulation blew up at t = {blow_time:.2f} (tau = {tau}, dt = {dt:.3e})",
            partial_result=partial,
        )

    outcome, amplitude, period = classify_outcome(
        times,
        deviation,
        series[:, 1],
        series[:, 2],
        config.transient_fraction,
        config.tol_conv,
        config.tol_osc,
        config.tol_extinct,
    )
    return SimulationResult(
        times=times,
        l2_u=series[:, 1],
        l2_v=series[:, 2],
        max_u=series[:, 3],
        max_v=series[:, 4],
        dev_u=series[:, 5],
        dev_v=series[:, 6],
        min_uv=series[:, 7],
        snapshots=snapshots,
        outcome=outcome,
        amplitude=amplitude,
        period_estimate=period,
        negativity_flag=bool((series[:, 7] < 0).any()),
        dt=dt,
        tau=tau,
        config=config,
    )


def find_hopf_threshold(
    params: ModelParams,
    tau_lo: float,
    tau_hi: float,
    init: SteadyState,
    config: SimConfig | None = None,
    tol: float = 0.25,
) -> tuple[float, list[tuple[float, float]]]:
    """Bisect the delay between a converging and an oscillating run.

    Returns the bracket midpoint once the bracket is narrower than
    ``tol``, together with the full bracket history (for monotone
    shrinkage checks). Each probe re-snaps dt so the delay stays an
    integer number of steps.
    """
    config = config or SimConfig()

    def probe(tau):
        try:
            return simulate(params, tau, init, config).outcome
        except ConvergenceError:
            return "NumericalFailure"

    lo_out = probe(tau_lo)
    if lo_out != "ConvergedToSteadyState":
        raise BracketError(
            f"lower bracket tau={tau_lo} classified {lo_out}, need convergence"
        )
    hi_out = probe(tau_hi)
    if hi_out != "SustainedOscillation":
        raise BracketError(
            f"upper bracket tau={tau_hi} classified {hi_out}, need oscillation"
        )

    lo, hi = tau_lo, tau_hi
    history = [(lo, hi)]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        out = probe(mid)
        if out == "Inconclusive" or out == "NumericalFailure":
            widened = replace(config, t_end=1.5 * config.t_end)
            try:
                out = simulate(params, mid, init, widened).outcome
            except ConvergenceError:
                out = "NumericalFailure"
        if out == "ConvergedToSteadyState":
            lo = mid
        elif out == "SustainedOscillation":
            hi = mid
        else:
            raise ConvergenceError(
                f"probe at tau={mid} stayed {out} after widening; cannot bisect"
            )
        history.append((lo, hi))
    return 0.5 * (lo + hi), history
