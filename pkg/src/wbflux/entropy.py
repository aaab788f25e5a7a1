"""Entropy pairs and discrete entropy diagnostics."""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass
from typing import Any, Literal

import numpy as np

from wbflux.errors import HistoryUnavailable, IncompatibleGrids
from wbflux.flux import SplitFlux, entropy_flux_G, scheme_operator_H
from wbflux.grid import SolverState, gauss_nodes
from wbflux.model import FluxModel, lipschitz_on

Sign = Literal["plus", "minus"]

_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)


@dataclass(frozen=True)
class EntropyPair:
    """Convex entropy ``eta`` with flux ``q`` (``q' = eta' f'``).

    .. attribute:: anchor

        ``w`` with ``eta(w) = eta'(w) = q(w) = 0`` for boundary pairs.

    .. attribute:: breakpoints

        Abscissas where ``eta`` changes its formula; quadratures split there.
    """

    eta: Callable[[Any], Any]
    eta_prime: Callable[[Any], Any]
    q: Callable[[Any], Any]
    kind: str
    anchor: float | None = None
    params: tuple[float, ...] = ()
    breakpoints: tuple[float, ...] = ()

    @property
    def smooth(self) -> bool:
        return not self.kind.startswith("semi_kruzkov")


def _integrate_polyweighted(
    weight: Callable[[np.ndarray], np.ndarray],
    df: Callable[[Any], Any],
    a: np.ndarray,
    b: np.ndarray,
) -> np.ndarray:
    """``\\int_a^b weight(xi) f'(xi) dxi`` with 24-point Gauss per interval."""
    mid = 0.5 * (a + b)[..., None]
    half = 0.5 * (b - a)[..., None]
    xi = mid + half * _GL_X
    return np.sum(half * _GL_W * weight(xi) * np.asarray(df(xi)), axis=-1)


def quadratic_pair(model: FluxModel, w: float = 0.0) -> EntropyPair:
    """``eta = (s - w)^2 / 2`` anchored at *w*."""

    def eta(s: Any) -> Any:
        return 0.5 * np.square(np.asarray(s, dtype=np.float64) - w)

    def eta_prime(s: Any) -> Any:
        return np.asarray(s, dtype=np.float64) - w

    if model.kind == "burgers_hopf":

        def q(s: Any) -> Any:
            s = np.asarray(s, dtype=np.float64)
            return s**3 / 3 - w * s**2 / 2 - (w**3 / 3 - w**3 / 2)

    else:

        def q(s: Any) -> Any:
            s = np.asarray(s, dtype=np.float64)
            return _integrate_polyweighted(lambda x: x - w, model.df, np.full(s.shape, w), s)

    return EntropyPair(eta, eta_prime, q, kind="smooth", anchor=w, params=(w,))


def semi_kruzkov_pair(model: FluxModel, k: float, sign: Sign) -> EntropyPair:
    """``eta = (s - k)^{+/-}``, ``q = sign^{+/-}(s - k) (f(s) - f(k))``.

    ``sign^+`` is 1 for positive arguments and 0 otherwise; ``sign^-`` is
    -1 for negative arguments and 0 otherwise, so ``eta^-(s) = (k - s)^+``.
    The derivative at ``s = k`` is taken to be 0.
    """
    fk = float(model.f(k))

    if sign == "plus":

        def sgn(s: Any) -> Any:
            return (np.asarray(s, dtype=np.float64) > k).astype(np.float64)

    elif sign == "minus":

        def sgn(s: Any) -> Any:
            return -(np.asarray(s, dtype=np.float64) < k).astype(np.float64)

    else:
        raise ValueError(f"sign must be 'plus' or 'minus', got {sign!r}")

    def eta(s: Any) -> Any:
        return sgn(s) * (np.asarray(s, dtype=np.float64) - k)

    def q(s: Any) -> Any:
        return sgn(s) * (np.asarray(model.f(s), dtype=np.float64) - fk)

    return EntropyPair(
        eta, sgn, q, kind=f"semi_kruzkov_{sign}", anchor=k, params=(k,), breakpoints=(k,)
    )


def smoothed_boundary_pair(model: FluxModel, k: float, delta: float, sign: Sign) -> EntropyPair:
    """C^2 approximation of the semi-Kruzkov pair of width *delta*.

    On ``[k, k + delta]`` the ``plus`` entropy is the quartic
    ``-(s - k)^4 / (2 delta^3) + (s - k)^3 / delta^2``, which joins ``0``
    and the line ``(s - k) - delta/2`` with matching first and second
    derivatives.  The ``minus`` variant is its mirror image about ``k``.
    """
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if sign not in ("plus", "minus"):
        raise ValueError(f"sign must be 'plus' or 'minus', got {sign!r}")

    d = float(delta)
    mirror = 1.0 if sign == "plus" else -1.0

    def _r(s: Any) -> np.ndarray:
        return mirror * (np.asarray(s, dtype=np.float64) - k)

    def eta(s: Any) -> Any:
        r = _r(s)
        rc = np.clip(r, 0.0, d)
        poly = -(rc**4) / (2 * d**3) + rc**3 / d**2
        return np.where(r <= 0, 0.0, np.where(r >= d, r - 0.5 * d, poly))

    def eta_prime(s: Any) -> Any:
        r = _r(s)
        rc = np.clip(r, 0.0, d)
        dpoly = -2 * rc**3 / d**3 + 3 * rc**2 / d**2
        return mirror * np.where(r <= 0, 0.0, np.where(r >= d, 1.0, dpoly))

    edge = k + mirror * d
    f_edge = float(model.f(edge))

    def q(s: Any) -> Any:
        s = np.asarray(s, dtype=np.float64)
        r = _r(s)
        # quartic part, integrated from k up to min(s, edge) on the active side
        upper = np.where(r <= 0, k, np.where(r >= d, edge, s))
        poly_part = _integrate_polyweighted(eta_prime, model.df, np.full(s.shape, float(k)), upper)
        linear_part = np.where(r >= d, mirror * (np.asarray(model.f(s)) - f_edge), 0.0)
        out = poly_part + linear_part
        return out if out.ndim else float(out)

    lo, hi = sorted((k, edge))
    return EntropyPair(
        eta, eta_prime, q, kind=f"smoothed_{sign}", anchor=k, params=(k, d),
        breakpoints=(lo, hi),
    )


def kruzkov_flux_F(model: FluxModel, a: Any, b: Any) -> Any:
    """``F(a, b) = sign(a - b) (f(a) - f(b))``."""
    return np.sign(np.asarray(a) - np.asarray(b)) * (np.asarray(model.f(a)) - np.asarray(model.f(b)))


def cell_entropy_residual(
    split: SplitFlux, pair: EntropyPair, lam: float, u: float, v: float, w: float
) -> float:
    """``eta(H(u, v, w)) - eta(v) + lam (G(v, w) - G(u, v))``.

    Nonpositive under the CFL condition ``lam sup|f'| <= 1``.
    """
    if not pair.smooth:
        raise ValueError("cell entropy residual needs a C^2 entropy; use smoothed_boundary_pair")
    h = scheme_operator_H(split, lam, u, v, w)
    return float(
        pair.eta(h) - pair.eta(v)
        + lam * (entropy_flux_G(split, pair, v, w) - entropy_flux_G(split, pair, u, v))
    )


# {{{ weak entropy residual


@dataclass(frozen=True)
class SeparableTestFunction:
    """``phi(x, t) = psi(x) theta(t)`` with the derivatives supplied."""

    psi: Callable[[Any], Any]
    dpsi: Callable[[Any], Any]
    theta: Callable[[Any], Any]
    dtheta: Callable[[Any], Any]

    def __call__(self, x: Any, t: Any) -> Any:
        return np.asarray(self.psi(x)) * np.asarray(self.theta(t))

    def dt(self, x: Any, t: Any) -> Any:
        return np.asarray(self.psi(x)) * np.asarray(self.dtheta(t))

    def dx(self, x: Any, t: Any) -> Any:
        return np.asarray(self.dpsi(x)) * np.asarray(self.theta(t))


def bump_test_function(center: float, width: float, horizon: float) -> SeparableTestFunction:
    """``exp(-((x - c) / w)^2) (1 - t / T)^3`` for ``t < T``; zero at ``t = T``."""

    def psi(x: Any) -> Any:
        return np.exp(-np.square((np.asarray(x) - center) / width))

    def dpsi(x: Any) -> Any:
        x = np.asarray(x)
        return -2 * (x - center) / width**2 * psi(x)

    def theta(t: Any) -> Any:
        return np.clip(1 - np.asarray(t) / horizon, 0.0, None) ** 3

    def dtheta(t: Any) -> Any:
        return -3 / horizon * np.clip(1 - np.asarray(t) / horizon, 0.0, None) ** 2

    return SeparableTestFunction(psi, dpsi, theta, dtheta)


def zero_test_function() -> SeparableTestFunction:
    def zero(x: Any) -> Any:
        return np.zeros(np.shape(x))

    return SeparableTestFunction(zero, zero, zero, zero)


def weak_entropy_residual(run: Any, pair: EntropyPair, test_fn: SeparableTestFunction) -> float:
    """Discrete weak form of the entropy inequality for a finished run.

    Space integrals use the cell midpoints of the piecewise constant
    solution and time integrals the left endpoint of each step; the initial
    and inflow terms use Gauss quadrature of the exact data.  For a
    convergent scheme the result is bounded below by ``-c dx``.

    :raises HistoryUnavailable: if *run* did not keep its space-time history.
    """
    hist = run.history
    if hist is None:
        raise HistoryUnavailable("run was made without history retention")

    problem = run.problem
    model = problem.model
    disc = run.disc
    dx = disc.dx
    x = disc.centers
    slopes = run.topo.slopes

    states = hist.states[:-1]
    times = hist.times[:-1]
    dts = hist.dts

    u = states
    tt = times[:, None]
    integrand = (
        pair.eta(u) * test_fn.dt(x[None, :], tt)
        + pair.q(u) * test_fn.dx(x[None, :], tt)
        - pair.eta_prime(u) * np.asarray(model.b(u)) * slopes[None, :] * test_fn(x[None, :], tt)
    )
    interior = float(np.sum(dts[:, None] * dx * integrand))

    faces = disc.faces
    xg, wg = gauss_nodes(faces[:-1], faces[1:])
    initial = float(np.sum(wg * pair.eta(problem.initial(xg)) * test_fn(xg, 0.0)))

    c = max(
        float(np.max(np.abs(hist.states))),
        float(np.max(np.abs(hist.ghost_left), initial=0.0)),
        float(np.max(np.abs(hist.ghost_right), initial=0.0)),
        abs(pair.anchor or 0.0),
    )
    lip = lipschitz_on(model, c)

    tg, wt = gauss_nodes(times, times + dts)
    t_first = times[:, None]
    left = np.sum(wt * pair.eta(problem.left_bc(tg)) * test_fn(x[0], t_first))
    right = np.sum(wt * pair.eta(problem.right_bc(tg)) * test_fn(x[-1], t_first))

    return interior + initial + lip * float(left + right)

# }}}


def equilibrium_drift(state: SolverState, reference: SolverState, dx: float) -> float:
    """L1 distance ``dx sum |u_j - ref_j|`` of two states on the same grid."""
    a, b = state.interior, reference.interior
    if a.shape != b.shape:
        raise IncompatibleGrids(f"states have {a.size} and {b.size} cells")
    return float(dx * np.sum(np.abs(a - b)))
