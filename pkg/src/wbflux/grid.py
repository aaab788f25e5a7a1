"""Uniform cell decomposition, cell/time averages and solver states."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property
from typing import Any

import numpy as np

from wbflux.errors import GridError, QuadratureFailure
from wbflux.model import Problem, RealFn, TopographyProfile

#: relative tolerance on ``(x_r - x_l) / dx`` being an integer
INTEGRALITY_RTOL = 1.0e-9

_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(5)


def gauss_nodes(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Five-point Gauss-Legendre nodes and weights on each ``[a_i, b_i]``.

    :returns: arrays of shape ``(n, 5)``; the weights include the Jacobian
        ``(b - a) / 2``.
    """
    a = np.atleast_1d(np.asarray(a, dtype=np.float64))
    b = np.atleast_1d(np.asarray(b, dtype=np.float64))
    mid = 0.5 * (a + b)[:, None]
    half = 0.5 * (b - a)[:, None]
    return mid + half * _GAUSS_X[None, :], half * _GAUSS_W[None, :]


def _evaluate(fn: RealFn, x: np.ndarray) -> np.ndarray:
    try:
        values = np.asarray(fn(x), dtype=np.float64)
        if values.shape != x.shape:
            values = np.broadcast_to(values, x.shape)
    except (TypeError, ValueError):
        values = np.vectorize(lambda s: float(fn(float(s))), otypes=[np.float64])(x)

    if not np.all(np.isfinite(values)):
        raise QuadratureFailure(f"non-finite values from {getattr(fn, '__name__', fn)}")
    return values


def integrate_intervals(
    fn: RealFn, a: np.ndarray, b: np.ndarray, jumps: Sequence[float] = ()
) -> np.ndarray:
    """Integrate *fn* over each ``[a_i, b_i]`` with 5-point Gauss.

    Intervals containing a declared jump abscissa are split there and
    integrated piecewise.
    """
    a = np.atleast_1d(np.asarray(a, dtype=np.float64))
    b = np.atleast_1d(np.asarray(b, dtype=np.float64))

    x, w = gauss_nodes(a, b)
    result = np.sum(w * _evaluate(fn, x), axis=1)

    for xj in jumps:
        width = b - a
        inside = (a + 1.0e-12 * width < xj) & (xj < b - 1.0e-12 * width)
        for i in np.flatnonzero(inside):
            xl, wl = gauss_nodes(a[i : i + 1], np.array([xj]))
            xr, wr = gauss_nodes(np.array([xj]), b[i : i + 1])
            result[i] = np.sum(wl * _evaluate(fn, xl)) + np.sum(wr * _evaluate(fn, xr))

    return result


# {{{ discretization


@dataclass(frozen=True)
class Discretization:
    """Uniform grid of ``n_cells`` cells ``C_j = ]x_{j-1/2}, x_{j+1/2}[``.

    Interior cells are indexed ``j_l = 0, ..., j_r = n_cells - 1``.
    """

    x_l: float
    x_r: float
    n_cells: int

    def __post_init__(self) -> None:
        if not self.x_l < self.x_r:
            raise GridError(f"empty domain ({self.x_l}, {self.x_r})")
        if self.n_cells < 1:
            raise GridError(f"need at least one cell, got {self.n_cells}")

    @classmethod
    def uniform(cls, x_l: float, x_r: float, dx: float) -> Discretization:
        """Grid with spacing *dx*; ``(x_r - x_l) / dx`` must be an integer."""
        if not dx > 0:
            raise GridError(f"dx must be positive, got {dx}")

        ratio = (x_r - x_l) / dx
        n = round(ratio)
        if n < 1 or abs(ratio - n) > INTEGRALITY_RTOL * max(ratio, 1.0):
            raise GridError(
                f"(x_r - x_l) / dx = {ratio!r} is not an integer for dx = {dx!r}"
            )
        return cls(float(x_l), float(x_r), int(n))

    @property
    def j_l(self) -> int:
        return 0

    @property
    def j_r(self) -> int:
        return self.n_cells - 1

    @property
    def dx(self) -> float:
        return (self.x_r - self.x_l) / self.n_cells

    @cached_property
    def faces(self) -> np.ndarray:
        """Interface abscissas ``x_{j-1/2}``, ``j = 0, ..., n_cells``."""
        faces = self.x_l + self.dx * np.arange(self.n_cells + 1)
        faces[-1] = self.x_r
        faces.flags.writeable = False
        return faces

    @cached_property
    def centers(self) -> np.ndarray:
        centers = self.x_l + (np.arange(self.n_cells) + 0.5) * self.dx
        centers.flags.writeable = False
        return centers

    def is_refinement_of(self, other: Discretization) -> bool:
        return (
            self.x_l == other.x_l
            and self.x_r == other.x_r
            and self.n_cells % other.n_cells == 0
        )

    def cell_averages(self, fn: RealFn, jumps: Sequence[float] = ()) -> np.ndarray:
        f = self.faces
        return integrate_intervals(fn, f[:-1], f[1:], jumps) / self.dx


@dataclass(frozen=True)
class SolverState:
    """Cell values ``u^n_j`` and the ghost (inflow) values of step ``n``."""

    n: int
    t: float
    interior: np.ndarray
    ghost_left: float
    ghost_right: float

    def __post_init__(self) -> None:
        u = np.array(self.interior, dtype=np.float64)
        u.flags.writeable = False
        object.__setattr__(self, "interior", u)

    @property
    def extended(self) -> np.ndarray:
        """Values including one ghost cell on each side."""
        return np.concatenate([[self.ghost_left], self.interior, [self.ghost_right]])

    def max_abs(self) -> float:
        return float(
            max(np.max(np.abs(self.interior)), abs(self.ghost_left), abs(self.ghost_right))
        )

# }}}


# {{{ projections


def boundary_averages(
    problem: Problem, n: int, dt: float, *, t_start: float | None = None
) -> tuple[float, float]:
    """Time averages ``(u^n_l, u^n_r)`` of the inflow data over one step.

    The window is ``[n dt, (n + 1) dt]`` unless *t_start* is given.
    """
    t0 = n * dt if t_start is None else t_start
    ul, ur = boundary_average_series(problem, np.array([t0]), np.array([dt]))
    return float(ul[0]), float(ur[0])


def boundary_average_series(
    problem: Problem, t_start: np.ndarray, dt: np.ndarray | float
) -> tuple[np.ndarray, np.ndarray]:
    t_start = np.atleast_1d(np.asarray(t_start, dtype=np.float64))
    dt = np.broadcast_to(np.asarray(dt, dtype=np.float64), t_start.shape)

    t, w = gauss_nodes(t_start, t_start + dt)
    ul = np.sum(w * _evaluate(problem.left_bc, t), axis=1) / dt
    ur = np.sum(w * _evaluate(problem.right_bc, t), axis=1) / dt
    return ul, ur


def project_initial(
    problem: Problem, disc: Discretization, dt: float | None = None
) -> SolverState:
    """Cell averages of ``u_0``; ghosts are averages over ``[0, dt]``.

    Without *dt* the ghosts take the point values ``u_l(0)``, ``u_r(0)``.
    """
    if (disc.x_l, disc.x_r) != tuple(problem.domain):
        raise GridError("discretization does not tile the problem domain")

    u0 = disc.cell_averages(problem.initial, problem.initial_jumps)
    if dt is None or dt <= 0:
        gl, gr = float(problem.left_bc(0.0)), float(problem.right_bc(0.0))
    else:
        gl, gr = boundary_averages(problem, 0, dt)

    return SolverState(0, 0.0, u0, gl, gr)


@dataclass(frozen=True)
class Topography:
    """Discrete topography on a grid.

    .. attribute:: cell_values

        ``z_j`` for ``j = j_l - 1, ..., j_r + 1`` (one constant ghost on each
        side), so ``cell_values[j + 1]`` belongs to cell ``j``.

    .. attribute:: slopes

        ``z'_j`` used by the standard scheme: the difference of interface
        values over ``dx``, with one-sided limits at declared jumps.
    """

    profile: TopographyProfile
    cell_values: np.ndarray
    slopes: np.ndarray

    @property
    def z(self) -> RealFn:
        return self.profile.z

    @property
    def sup_slope(self) -> float:
        return self.profile.sup_slope

    @property
    def nonconforming(self) -> bool:
        return self.profile.nonconforming

    @property
    def interior(self) -> np.ndarray:
        return self.cell_values[1:-1]

    @property
    def is_flat(self) -> bool:
        return bool(np.all(self.cell_values == self.cell_values[0]))


def project_topography(profile: TopographyProfile, disc: Discretization) -> Topography:
    zj = disc.cell_averages(profile.z, profile.jumps)
    values = np.concatenate([[zj[0]], zj, [zj[-1]]])
    values.flags.writeable = False

    faces = disc.faces
    right = np.array([profile.one_sided(x, -1) for x in faces[1:]])
    left = np.array([profile.one_sided(x, +1) for x in faces[:-1]])
    slopes = (right - left) / disc.dx
    slopes.flags.writeable = False

    return Topography(profile, values, slopes)


# }}}
