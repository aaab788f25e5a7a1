"""Time integration: well-balanced and standard schemes, step-size policies."""

from __future__ import annotations

import logging
import math
import time
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any, Literal

import numpy as np

from wbflux import kernels
from wbflux.errors import StateBlowup
from wbflux.flux import SplitFlux, eo_flux, make_split_flux
from wbflux.grid import (
    Discretization,
    SolverState,
    Topography,
    boundary_average_series,
    boundary_averages,
    project_initial,
    project_topography,
)
from wbflux.model import FluxModel, Problem, evaluate_D, invert_D, lipschitz_on

logger = logging.getLogger(__name__)

SchemeKind = Literal["well_balanced", "standard"]

#: ratio between the blowup threshold and the boundedness envelope
BLOWUP_FACTOR = 10.0
#: steps handed to the kernel per call (bounds the boundary-data buffers)
CHUNK_STEPS = 1 << 16
#: target number of points in the stored max|u| trajectory
TRAJECTORY_POINTS = 100_000


# {{{ reconstruction and single steps


def reconstruct_interface_states(
    model: FluxModel, topo: Topography, u: Sequence[float], j: int
) -> tuple[float, float]:
    """Neighbour values moved to the topography level of cell *j*.

    *u* holds the extended values ``u_{j_l - 1}, ..., u_{j_r + 1}`` (ghosts
    included), so cell ``j`` sits at ``u[j + 1]``.

    :returns: ``(u_{j-1,+}, u_{j+1,-})`` with
        ``D(u_{j-1,+}) = D(u_{j-1}) + z_{j-1} - z_j`` and
        ``D(u_{j+1,-}) = D(u_{j+1}) + z_{j+1} - z_j``.
    """
    z = topo.cell_values
    left, right = _reconstruct(
        model, np.asarray([u[j]]), np.asarray([u[j + 2]]),
        np.asarray([z[j] - z[j + 1]]), np.asarray([z[j + 2] - z[j + 1]]),
    )
    return float(left[0]), float(right[0])


def _shift(model: FluxModel, u: np.ndarray, dz: np.ndarray) -> np.ndarray:
    if model.d_identity:
        return u + dz

    out = u.copy()
    mask = dz != 0.0
    if np.any(mask):
        out[mask] = invert_D(model, np.asarray(evaluate_D(model, u[mask])) + dz[mask])
    return out


def _reconstruct(
    model: FluxModel,
    u_left: np.ndarray,
    u_right: np.ndarray,
    dz_left: np.ndarray,
    dz_right: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    return _shift(model, u_left, dz_left), _shift(model, u_right, dz_right)


def reconstruct_all(
    model: FluxModel, topo: Topography, state: SolverState
) -> tuple[np.ndarray, np.ndarray]:
    """``(u_{j-1,+}, u_{j+1,-})`` for every interior cell."""
    ext = state.extended
    z = topo.cell_values
    return _reconstruct(model, ext[:-2], ext[2:], z[:-2] - z[1:-1], z[2:] - z[1:-1])


def _next_state(
    state: SolverState,
    new: np.ndarray,
    dt: float,
    problem: Problem | None,
    bound: float,
) -> SolverState:
    if not np.all(np.isfinite(new)) or np.max(np.abs(new)) > bound:
        raise StateBlowup(
            f"|u| = {np.max(np.abs(new)):.3e} exceeds {bound:.3e} at step {state.n + 1}",
            step=state.n + 1,
        )

    t = state.t + dt
    if problem is None:
        gl, gr = state.ghost_left, state.ghost_right
    else:
        gl, gr = boundary_averages(problem, state.n + 1, dt, t_start=t)

    return SolverState(state.n + 1, t, new, gl, gr)


def well_balanced_step(
    model: FluxModel,
    topo: Topography,
    split: SplitFlux,
    state: SolverState,
    dt: float,
    dx: float,
    *,
    problem: Problem | None = None,
    bound: float = math.inf,
) -> SolverState:
    """One step of the well-balanced scheme.

    If *problem* is given the ghosts of the new state are the inflow
    averages over ``[t + dt, t + 2 dt]``; otherwise they are carried over.
    """
    u = state.interior
    um, up = reconstruct_all(model, topo, state)
    new = u - (dt / dx) * (eo_flux(split, u, up) - eo_flux(split, um, u))
    return _next_state(state, new, dt, problem, bound)


def standard_step(
    model: FluxModel,
    topo: Topography,
    split: SplitFlux,
    state: SolverState,
    dt: float,
    dx: float,
    *,
    problem: Problem | None = None,
    bound: float = math.inf,
) -> SolverState:
    """One step of the conservative scheme with a pointwise source term."""
    ext = state.extended
    u = state.interior
    flux = eo_flux(split, ext[:-1], ext[1:])
    new = u - (dt / dx) * (flux[1:] - flux[:-1]) - dt * topo.slopes * np.asarray(model.b(u))
    return _next_state(state, new, dt, problem, bound)


def step(kind: SchemeKind, *args: Any, **kwargs: Any) -> SolverState:
    if kind == "well_balanced":
        return well_balanced_step(*args, **kwargs)
    if kind == "standard":
        return standard_step(*args, **kwargs)
    raise ValueError(f"unknown scheme {kind!r}")

# }}}


# {{{ bounds and step size


@dataclass(frozen=True)
class BoundEnvelope:
    """A priori bound ``C^dx_T`` on the numerical solution."""

    m: float
    c_dx_T: float

    @property
    def k_interval(self) -> tuple[float, float]:
        return (-self.c_dx_T, self.c_dx_T)


def compute_bound_envelope(
    problem: Problem, dx: float, topo: Topography | None = None, *, m: float | None = None
) -> BoundEnvelope:
    """Evaluate

    .. math::

        C = M e^{2 T B Z} + dx \\frac{Z}{\\inf D'} e^{4 T B Z}
            + |b(0)| e^{2 T (B + 1) Z}

    with ``B = ||b'||``, ``Z = ||z'||`` and ``M`` the data bound.
    """
    model = problem.model
    if m is None:
        m = problem.data_bound()
    T = problem.horizon
    bp = model.b_lipschitz
    zp = topo.sup_slope if topo is not None else problem.topo.sup_slope
    b0 = abs(float(model.b(0.0)))

    c = (
        m * math.exp(2 * T * bp * zp)
        + dx * zp / model.d_prime_lower_bound * math.exp(4 * T * bp * zp)
        + b0 * math.exp(2 * T * (bp + 1) * zp)
    )
    return BoundEnvelope(m=m, c_dx_T=c)


@dataclass(frozen=True)
class StepPolicy:
    """How the time step is chosen.

    ``explicit`` replays a fixed ``dt``; ``paper_bound`` uses the CFL
    condition on the boundedness envelope; ``adaptive`` uses the current
    maximum of ``|u|`` (including ghosts and reconstructed states) with a
    safety factor.
    """

    mode: Literal["explicit", "paper_bound", "adaptive"] = "adaptive"
    dt: float | None = None
    cfl_target: float = 1.0
    safety: float = 0.9
    dt_max: float = 1.0e-1

    def __post_init__(self) -> None:
        if self.mode not in ("explicit", "paper_bound", "adaptive"):
            raise ValueError(f"unknown dt mode {self.mode!r}")
        if self.mode == "explicit" and not (self.dt is not None and self.dt > 0):
            raise ValueError("explicit dt mode needs a positive dt")
        if not 0 < self.safety <= 1:
            raise ValueError(f"safety must lie in (0, 1], got {self.safety}")
        if not 0 < self.cfl_target <= 1:
            raise ValueError(f"cfl target must lie in (0, 1], got {self.cfl_target}")
        if not self.dt_max > 0:
            raise ValueError("dt_max must be positive")


def current_speed_bound(
    model: FluxModel, topo: Topography | None, state: SolverState
) -> float:
    """``C*``: max of ``|u|`` over interior, ghost and reconstructed values."""
    c = state.max_abs()
    if topo is not None:
        um, up = reconstruct_all(model, topo, state)
        c = max(c, float(np.max(np.abs(um))), float(np.max(np.abs(up))))
    return c


def choose_dt(
    policy: StepPolicy,
    envelope: BoundEnvelope | None,
    model: FluxModel,
    dx: float,
    state: SolverState | None = None,
    topo: Topography | None = None,
) -> float:
    if policy.mode == "explicit":
        assert policy.dt is not None
        return policy.dt

    if policy.mode == "paper_bound":
        if envelope is None:
            raise ValueError("paper_bound mode needs a bound envelope")
        lip = lipschitz_on(model, envelope.c_dx_T)
        return min(policy.dt_max, policy.cfl_target * dx / lip) if lip > 0 else policy.dt_max

    if state is None:
        raise ValueError("adaptive mode needs the current state")
    lip = lipschitz_on(model, current_speed_bound(model, topo, state))
    if lip <= 0:
        return policy.dt_max
    return min(policy.dt_max, policy.safety * dx / lip)


def cfl_satisfied(model: FluxModel, dt: float, dx: float, c: float) -> bool:
    return lipschitz_on(model, c) * dt / dx <= 1.0 + 1.0e-12

# }}}


# {{{ run


@dataclass(frozen=True)
class History:
    """Full space-time record of a run.

    ``states[n]`` holds ``u^n_j``; ``ghost_left[n]``, ``ghost_right[n]`` and
    ``dts[n]`` belong to the step from ``t^n`` to ``t^{n+1}``.
    """

    times: np.ndarray
    states: np.ndarray
    ghost_left: np.ndarray
    ghost_right: np.ndarray
    dts: np.ndarray


@dataclass(frozen=True)
class RunResult:
    problem: Problem
    disc: Discretization
    topo: Topography
    scheme_kind: SchemeKind
    policy: StepPolicy
    initial: SolverState
    final: SolverState
    snapshots: dict[float, SolverState]
    n_steps: int
    wall_time_s: float
    envelope: BoundEnvelope
    max_abs_steps: np.ndarray
    max_abs: np.ndarray
    dt_min: float
    dt_max: float
    cfl_paper_bound_ok: bool
    cfl_observed_ok: bool
    truncated_last_step: bool
    backend: str
    history: History | None = field(default=None, repr=False)

    @property
    def t_final(self) -> float:
        return self.final.t

    @property
    def observed_max_abs(self) -> float:
        return float(np.max(self.max_abs)) if self.max_abs.size else self.initial.max_abs()


class _Trajectory:
    """Downsampled running maxima of ``|u|``."""

    def __init__(self, stride: int) -> None:
        self.stride = max(1, stride)
        self.steps: list[int] = []
        self.values: list[float] = []
        self._pending = -math.inf
        self._count = 0

    def extend(self, first_step: int, values: np.ndarray) -> None:
        for i, v in enumerate(values):
            self._pending = max(self._pending, float(v))
            self._count += 1
            if self._count % self.stride == 0:
                self.steps.append(first_step + i + 1)
                self.values.append(self._pending)
                self._pending = -math.inf

    def finish(self, last_step: int) -> tuple[np.ndarray, np.ndarray]:
        if self._pending > -math.inf:
            self.steps.append(last_step)
            self.values.append(self._pending)
        return np.array(self.steps, dtype=np.int64), np.array(self.values)


def _kernel_flux_kind(split: SplitFlux, model: FluxModel) -> int | None:
    if not model.d_identity or model.source_affine is None:
        return None
    if split.closed_form == "burgers":
        return kernels.FLUX_BURGERS
    if split.closed_form == "linear":
        return kernels.FLUX_LINEAR
    return None


def _time_grid(
    policy: StepPolicy, dt: float, T: float, snapshot_times: Sequence[float]
) -> tuple[int, float, bool, dict[int, float]]:
    n_steps = max(1, math.ceil(T / dt - 1.0e-9)) if T > 0 else 0
    last_dt = T - (n_steps - 1) * dt if n_steps else dt
    truncated = n_steps > 0 and abs(last_dt - dt) > 1.0e-9 * dt

    marks: dict[int, float] = {}
    for ts in snapshot_times:
        if not 0 <= ts <= T:
            raise ValueError(f"snapshot time {ts} outside [0, {T}]")
        n = min(n_steps, round(ts / dt)) if dt > 0 else 0
        if ts >= T:
            n = n_steps
        marks[n] = ts
    return n_steps, last_dt, truncated, marks


def run(
    problem: Problem,
    disc: Discretization,
    policy: StepPolicy,
    scheme_kind: SchemeKind = "well_balanced",
    snapshot_times: Sequence[float] = (),
    *,
    history: bool = False,
    force_python: bool = False,
) -> RunResult:
    """Integrate *problem* up to its horizon.

    Snapshots requested at times that are not multiples of a fixed ``dt``
    are taken at the nearest step and keyed by the requested time.

    :raises StateBlowup: when ``|u|`` exceeds ``10 C^dx_T`` or turns
        non-finite; :attr:`StateBlowup.step` is the failing step index.
    """
    if scheme_kind not in ("well_balanced", "standard"):
        raise ValueError(f"unknown scheme {scheme_kind!r}")

    model = problem.model
    topo = project_topography(problem.topo, disc)
    split = make_split_flux(model)
    dx = disc.dx
    T = problem.horizon
    envelope = compute_bound_envelope(problem, dx, topo)
    blowup = BLOWUP_FACTOR * envelope.c_dx_T

    flux_kind = None if force_python else _kernel_flux_kind(split, model)
    backend = kernels.BACKEND if flux_kind is not None else "generic"
    advance = kernels.advance if flux_kind is not None else None
    if flux_kind is not None and force_python:
        advance = kernels.python_advance

    start = time.perf_counter()
    if policy.mode == "adaptive":
        result = _run_adaptive(
            problem, disc, topo, split, policy, envelope, scheme_kind,
            snapshot_times, history, flux_kind, advance, blowup,
        )
    else:
        dt = choose_dt(policy, envelope, model, dx)
        if policy.mode == "paper_bound" and T > 0:
            # shrink dt so that T / dt is an integer; this keeps the CFL bound
            dt = T / math.ceil(T / dt - 1.0e-9)
        result = _run_fixed(
            problem, disc, topo, split, policy, envelope, scheme_kind, dt,
            snapshot_times, history, flux_kind, advance, blowup,
        )
    wall = time.perf_counter() - start

    (initial, final, snapshots, n_steps, steps, traj, dt_lo, dt_hi, truncated, hist, worst_cfl) = result

    lip_envelope = lipschitz_on(model, envelope.c_dx_T)
    observed = float(np.max(traj)) if traj.size else initial.max_abs()
    if n_steps:
        cfl_envelope = lip_envelope * dt_hi / dx <= 1.0 + 1.0e-12
        if worst_cfl is None:
            # constant dt: the largest |u| met during the run is the binding one
            cfl_observed = cfl_satisfied(model, dt_hi, dx, observed)
        else:
            # adaptive dt: each step was checked against its own input state
            cfl_observed = worst_cfl <= 1.0 + 1.0e-12
    else:
        cfl_envelope = cfl_observed = True
    if not cfl_observed:
        logger.warning(
            "CFL violated: dt up to %.3e, dx = %.3e, max|u| = %.3e", dt_hi, dx, observed
        )

    return RunResult(
        problem=problem, disc=disc, topo=topo, scheme_kind=scheme_kind,
        policy=policy, initial=initial, final=final, snapshots=snapshots,
        n_steps=n_steps, wall_time_s=wall, envelope=envelope,
        max_abs_steps=steps, max_abs=traj, dt_min=dt_lo, dt_max=dt_hi,
        cfl_paper_bound_ok=cfl_envelope, cfl_observed_ok=cfl_observed,
        truncated_last_step=truncated, backend=backend, history=hist,
    )


class _Recorder:
    def __init__(self, enabled: bool, initial: SolverState) -> None:
        self.enabled = enabled
        self.times = [initial.t]
        self.states = [np.array(initial.interior)]
        self.gl: list[float] = []
        self.gr: list[float] = []
        self.dts: list[float] = []

    def add(self, gl: float, gr: float, dt: float, new: SolverState) -> None:
        if not self.enabled:
            return
        self.gl.append(gl)
        self.gr.append(gr)
        self.dts.append(dt)
        self.times.append(new.t)
        self.states.append(np.array(new.interior))

    def finish(self) -> History | None:
        if not self.enabled:
            return None
        return History(
            times=np.array(self.times),
            states=np.array(self.states),
            ghost_left=np.array(self.gl),
            ghost_right=np.array(self.gr),
            dts=np.array(self.dts),
        )


def _generic_step(
    model: FluxModel, topo: Topography, split: SplitFlux, scheme_kind: SchemeKind,
    state: SolverState, dt: float, dx: float, blowup: float,
) -> tuple[SolverState, float]:
    new = step(scheme_kind, model, topo, split, state, dt, dx, bound=blowup)
    peak = max(float(np.max(np.abs(new.interior))), abs(state.ghost_left), abs(state.ghost_right))
    if scheme_kind == "well_balanced":
        um, up = reconstruct_all(model, topo, state)
        peak = max(peak, float(np.max(np.abs(um))), float(np.max(np.abs(up))))
    return new, peak


def _advance_fixed(
    problem: Problem, topo: Topography, split: SplitFlux, scheme_kind: SchemeKind,
    state: SolverState, dt: float, dx: float, n_from: int, n_to: int,
    flux_kind: int | None, advance: Any, blowup: float,
    traj: _Trajectory, recorder: _Recorder, *, per_step: bool = False,
) -> SolverState:
    """Steps ``n_from -> n_to`` with constant *dt*, starting at ``state.t``."""
    model = problem.model
    if n_to <= n_from:
        return state

    if flux_kind is not None and not recorder.enabled and not per_step:
        u = np.array(state.interior)
        b0, b1 = model.source_affine  # type: ignore[misc]
        scheme_id = (
            kernels.SCHEME_WELL_BALANCED if scheme_kind == "well_balanced" else kernels.SCHEME_STANDARD
        )
        z_ext = np.ascontiguousarray(topo.cell_values, dtype=np.float64)
        slopes = np.ascontiguousarray(topo.slopes, dtype=np.float64)

        n = n_from
        while n < n_to:
            m = min(CHUNK_STEPS, n_to - n)
            t0 = state.t + (np.arange(m) + (n - n_from)) * dt
            gl, gr = boundary_average_series(problem, t0, dt)
            buf = np.empty(m)
            done = advance(
                u, gl, gr, z_ext, slopes, dt / dx, dt, flux_kind, split.speed,
                b0, b1, scheme_id, blowup, buf,
            )
            traj.extend(n, buf[:done])
            if done < m:
                raise StateBlowup(
                    f"|u| = {buf[done]:.3e} exceeds {blowup:.3e} at step {n + done + 1}",
                    step=n + done + 1,
                )
            n += m

        t = state.t + (n_to - n_from) * dt
        gl, gr = boundary_averages(problem, n_to, dt, t_start=t)
        return SolverState(n_to, t, u, gl, gr)

    t_base = state.t
    for n in range(n_from, n_to):
        gl, gr = boundary_averages(problem, n, dt, t_start=t_base + (n - n_from) * dt)
        current = SolverState(n, t_base + (n - n_from) * dt, state.interior, gl, gr)
        if flux_kind is not None:
            new_u = np.array(current.interior)
            buf = np.empty(1)
            b0, b1 = model.source_affine  # type: ignore[misc]
            done = advance(
                new_u, np.array([gl]), np.array([gr]),
                np.ascontiguousarray(topo.cell_values), np.ascontiguousarray(topo.slopes),
                dt / dx, dt, flux_kind, split.speed, b0, b1,
                kernels.SCHEME_WELL_BALANCED if scheme_kind == "well_balanced" else kernels.SCHEME_STANDARD,
                blowup, buf,
            )
            if done < 1:
                raise StateBlowup(f"|u| exceeds {blowup:.3e} at step {n + 1}", step=n + 1)
            state = SolverState(n + 1, current.t + dt, new_u, gl, gr)
            peak = float(buf[0])
        else:
            try:
                state, peak = _generic_step(model, topo, split, scheme_kind, current, dt, dx, blowup)
            except StateBlowup as exc:
                raise StateBlowup(str(exc), step=n + 1) from exc
        traj.extend(n, np.array([peak]))
        recorder.add(gl, gr, dt, state)

    gl, gr = boundary_averages(problem, n_to, dt, t_start=state.t)
    return SolverState(state.n, state.t, state.interior, gl, gr)


def _run_fixed(
    problem: Problem, disc: Discretization, topo: Topography, split: SplitFlux,
    policy: StepPolicy, envelope: BoundEnvelope, scheme_kind: SchemeKind, dt: float,
    snapshot_times: Sequence[float], history: bool, flux_kind: int | None,
    advance: Any, blowup: float,
) -> tuple:
    T = problem.horizon
    n_steps, last_dt, truncated, marks = _time_grid(policy, dt, T, snapshot_times)
    if truncated:
        logger.info("T / dt = %.6f is not an integer; last step uses dt = %.3e", T / dt, last_dt)

    initial = project_initial(problem, disc, dt if n_steps else None)
    recorder = _Recorder(history, initial)
    traj = _Trajectory(max(1, n_steps // TRAJECTORY_POINTS))
    snapshots: dict[float, SolverState] = {}
    if 0 in marks:
        snapshots[marks[0]] = initial

    state = initial
    full_steps = n_steps - 1 if truncated else n_steps
    stops = sorted({n for n in marks if 0 < n <= full_steps} | {full_steps})
    n = 0
    for stop in stops:
        state = _advance_fixed(
            problem, topo, split, scheme_kind, state, dt, disc.dx, n, stop,
            flux_kind, advance, blowup, traj, recorder,
        )
        n = stop
        if stop in marks:
            snapshots[marks[stop]] = state

    if truncated:
        t_last = state.t
        gl, gr = boundary_averages(problem, n, last_dt, t_start=t_last)
        state = SolverState(n, t_last, state.interior, gl, gr)
        state = _advance_fixed(
            problem, topo, split, scheme_kind, state, last_dt, disc.dx, n, n + 1,
            flux_kind, advance, blowup, traj, recorder,
        )
        state = SolverState(n_steps, T, state.interior, state.ghost_left, state.ghost_right)
        if n_steps in marks:
            snapshots[marks[n_steps]] = state

    steps, values = traj.finish(n_steps)
    dt_lo = min(dt, last_dt) if n_steps else dt
    return (
        initial, state, snapshots, n_steps, steps, values, dt_lo, dt, truncated,
        recorder.finish(), None,
    )


def _run_adaptive(
    problem: Problem, disc: Discretization, topo: Topography, split: SplitFlux,
    policy: StepPolicy, envelope: BoundEnvelope, scheme_kind: SchemeKind,
    snapshot_times: Sequence[float], history: bool, flux_kind: int | None,
    advance: Any, blowup: float,
) -> tuple:
    model = problem.model
    T = problem.horizon
    dx = disc.dx
    targets = sorted({float(t) for t in snapshot_times if 0 < t < T} | ({T} if T > 0 else set()))
    for ts in snapshot_times:
        if not 0 <= ts <= T:
            raise ValueError(f"snapshot time {ts} outside [0, {T}]")

    initial = project_initial(problem, disc, None)
    recorder = _Recorder(history, initial)
    traj = _Trajectory(1)
    snapshots: dict[float, SolverState] = {}
    if any(t == 0 for t in snapshot_times):
        snapshots[0.0] = initial

    wb = scheme_kind == "well_balanced"
    state = initial
    n = 0
    dt_lo, dt_hi = math.inf, 0.0
    worst_cfl = 0.0
    for target in targets:
        while state.t < target * (1 - 1.0e-14):
            # ghosts depend on dt and dt on the ghosts: iterate to a fixed point
            probe = state
            for _ in range(4):
                dt = choose_dt(policy, envelope, model, dx, probe, topo if wb else None)
                dt = min(dt, target - state.t)
                if target - (state.t + dt) < 1.0e-12 * max(1.0, target):
                    dt = target - state.t
                gl, gr = boundary_averages(problem, n, dt, t_start=state.t)
                probe = SolverState(n, state.t, state.interior, gl, gr)
                dt_check = choose_dt(policy, envelope, model, dx, probe, topo if wb else None)
                if dt <= dt_check * (1 + 1.0e-12):
                    break

            c_now = current_speed_bound(model, topo if wb else None, probe)
            worst_cfl = max(worst_cfl, lipschitz_on(model, c_now) * dt / dx)

            state = _advance_fixed(
                problem, topo, split, scheme_kind, probe, dt, dx, n, n + 1,
                flux_kind, advance, blowup, traj, recorder, per_step=True,
            )
            if target - state.t < 1.0e-12 * max(1.0, target):
                state = SolverState(state.n, target, state.interior, state.ghost_left, state.ghost_right)
            n += 1
            dt_lo, dt_hi = min(dt_lo, dt), max(dt_hi, dt)

        for ts in snapshot_times:
            if ts == target:
                snapshots[ts] = state

    steps, values = traj.finish(n)
    if n == 0:
        dt_lo = dt_hi = 0.0
    return (
        initial, state, snapshots, n, steps, values, dt_lo, dt_hi, False,
        recorder.finish(), worst_cfl,
    )

# }}}
