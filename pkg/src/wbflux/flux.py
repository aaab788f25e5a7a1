"""Engquist-Osher flux, the three-point scheme operator and entropy fluxes.

Sign convention: ``(f')^+ = max(f', 0)`` and ``(f')^- = max(-f', 0)``, both
nonnegative, so that

.. math::

    g(u, v) = \\int_0^u (f')^+ - \\int_0^v (f')^- + f(0)

and ``g(u, u) = f(u)``.
"""

from __future__ import annotations

import threading
import warnings
from collections.abc import Callable
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any

import numpy as np
from scipy import integrate, optimize

from wbflux.errors import QuadratureFailure
from wbflux.model import FluxModel, RealFn

if TYPE_CHECKING:
    from wbflux.entropy import EntropyPair


# {{{ split integrals for generic models


class _VariationSplit:
    """Exact split integrals from the critical points of ``f``.

    With ``V(u) = \\int_0^u |f'|`` (signed total variation of ``f``),
    ``\\int_0^u (f')^+ = (f(u) - f(0) + V(u)) / 2``.  ``V`` only needs ``f`` at
    the zeros of ``f'``, which are located on a lazily extended window.
    """

    def __init__(self, f: RealFn, df: RealFn, window: float = 8.0, samples_per_unit: int = 256) -> None:
        self.f = f
        self.df = df
        self.samples_per_unit = samples_per_unit
        self._lock = threading.Lock()
        self._radius = 0.0
        self._crit = np.empty(0)
        self._extend(window)

    def _roots_in(self, a: float, b: float) -> list[float]:
        n = max(2, int((b - a) * self.samples_per_unit) + 1)
        x = np.linspace(a, b, n)
        d = np.asarray(self.df(x), dtype=np.float64)

        roots = [float(xi) for xi, di in zip(x, d) if di == 0.0]
        sign_change = np.flatnonzero(d[:-1] * d[1:] < 0)
        for i in sign_change:
            roots.append(optimize.brentq(lambda s: float(self.df(s)), x[i], x[i + 1], xtol=1.0e-15))
        return roots

    def _extend(self, radius: float) -> None:
        with self._lock:
            if radius <= self._radius:
                return
            old = self._radius
            new = [*self._roots_in(-radius, -old), *self._roots_in(old, radius)]
            crit = np.unique(np.concatenate([self._crit, new]))
            self._crit = crit
            self._radius = radius

    def variation(self, u: Any) -> Any:
        u_arr = np.asarray(u, dtype=np.float64)
        bound = float(np.max(np.abs(u_arr))) if u_arr.size else 0.0
        if bound > self._radius:
            self._extend(max(2.0 * self._radius, bound * 1.25))

        crit = self._crit
        f0 = float(self.f(0.0))
        out = np.empty_like(u_arr)

        pos = crit[crit > 0]
        neg = crit[crit < 0][::-1]
        knots_pos = np.concatenate([[0.0], pos])
        knots_neg = np.concatenate([[0.0], neg])
        f_pos = np.asarray(self.f(knots_pos), dtype=np.float64)
        f_neg = np.asarray(self.f(knots_neg), dtype=np.float64)
        f_pos[0] = f_neg[0] = f0
        cum_pos = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(f_pos)))])
        cum_neg = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(f_neg)))])

        fu = np.asarray(self.f(u_arr), dtype=np.float64)
        flat = u_arr.reshape(-1)
        fu_flat = np.broadcast_to(fu, u_arr.shape).reshape(-1)
        res = out.reshape(-1)

        mpos = flat >= 0
        i = np.searchsorted(knots_pos, flat[mpos], side="right") - 1
        res[mpos] = cum_pos[i] + np.abs(fu_flat[mpos] - f_pos[i])

        mneg = ~mpos
        i = np.searchsorted(-knots_neg, -flat[mneg], side="right") - 1
        res[mneg] = -(cum_neg[i] + np.abs(fu_flat[mneg] - f_neg[i]))

        return out if u_arr.ndim else float(out)

# }}}


# {{{ SplitFlux


@dataclass(frozen=True)
class SplitFlux:
    """The Engquist-Osher splitting of a model's flux.

    .. attribute:: closed_form

        ``"burgers"``, ``"linear"`` or *None*; closed forms are also what
        the compiled kernels implement.
    """

    fplus_int: RealFn
    fminus_int: RealFn
    f_at_zero: float
    dfplus: RealFn
    dfminus: RealFn
    closed_form: str | None = None
    speed: float = 0.0

    @classmethod
    def from_model(cls, model: FluxModel) -> SplitFlux:
        def dfplus(xi: Any) -> Any:
            return np.maximum(model.df(xi), 0.0)

        def dfminus(xi: Any) -> Any:
            return np.maximum(-np.asarray(model.df(xi)), 0.0)

        if model.kind == "burgers_hopf":
            return cls(
                fplus_int=lambda u: 0.5 * np.square(np.maximum(u, 0.0)),
                fminus_int=lambda v: -0.5 * np.square(np.minimum(v, 0.0)),
                f_at_zero=0.0,
                dfplus=dfplus,
                dfminus=dfminus,
                closed_form="burgers",
            )

        if model.kind == "linear_advection":
            ap, am = max(model.speed, 0.0), max(-model.speed, 0.0)
            return cls(
                fplus_int=lambda u: ap * np.asarray(u, dtype=np.float64),
                fminus_int=lambda v: am * np.asarray(v, dtype=np.float64),
                f_at_zero=0.0,
                dfplus=dfplus,
                dfminus=dfminus,
                closed_form="linear",
                speed=model.speed,
            )

        var = _VariationSplit(model.f, model.df)
        f0 = float(model.f(0.0))

        def fplus_int(u: Any) -> Any:
            return 0.5 * (np.asarray(model.f(u)) - f0 + var.variation(u))

        def fminus_int(v: Any) -> Any:
            return 0.5 * (var.variation(v) - np.asarray(model.f(v)) + f0)

        return cls(fplus_int, fminus_int, f0, dfplus, dfminus)


def make_split_flux(model: FluxModel) -> SplitFlux:
    return SplitFlux.from_model(model)

# }}}


# {{{ flux and scheme operator


def eo_flux(split: SplitFlux, u: Any, v: Any) -> Any:
    """Engquist-Osher numerical flux ``g(u, v)``."""
    if split.closed_form == "burgers":
        return 0.5 * np.square(np.maximum(u, 0.0)) + 0.5 * np.square(np.minimum(v, 0.0))

    return split.fplus_int(u) - split.fminus_int(v) + split.f_at_zero


def scheme_operator_H(split: SplitFlux, lam: float, u: Any, v: Any, w: Any) -> Any:
    """``H(u, v, w) = v - lam (g(v, w) - g(u, v))``."""
    return v - lam * (eo_flux(split, v, w) - eo_flux(split, u, v))


def chi(s: Any, xi: Any) -> Any:
    """Signed indicator: 1 on ``]0, s[``, -1 on ``]s, 0[``, else 0."""
    s = np.asarray(s, dtype=np.float64)
    xi = np.asarray(xi, dtype=np.float64)
    return ((0 < xi) & (xi < s)).astype(np.float64) - ((s < xi) & (xi < 0)).astype(np.float64)


def chi_density_h(split: SplitFlux, lam: float, u: Any, v: Any, w: Any, xi: Any) -> Any:
    """Kinetic density ``h(u, v, w)(xi)`` whose integral over ``xi`` is ``H``.

    .. math::

        h = \chi_v - \lambda (f'^+ \chi_v - f'^- \chi_w)
            + \lambda (f'^+ \chi_u - f'^- \chi_v)

    i.e. ``(1 - lam |f'|) chi_v + lam f'^+ chi_u + lam f'^- chi_w``, a convex
    combination of the three indicators under the CFL condition.
    """
    cu, cv, cw = chi(u, xi), chi(v, xi), chi(w, xi)
    fp, fm = split.dfplus(xi), split.dfminus(xi)
    return cv - lam * (fp * cv - fm * cw) + lam * (fp * cu - fm * cv)

# }}}


# {{{ entropy flux


def _quad(fn: Callable[[float], float], a: float, b: float, points: list[float]) -> float:
    if a == b:
        return 0.0

    lo, hi = min(a, b), max(a, b)
    inner = sorted({p for p in points if lo < p < hi})
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, _ = integrate.quad(
                fn, a, b, points=inner or None, epsabs=1.0e-13, epsrel=1.0e-12, limit=200
            )
        except integrate.IntegrationWarning as exc:
            raise QuadratureFailure(f"quadrature on [{a}, {b}] failed: {exc}") from exc

    if not np.isfinite(value):
        raise QuadratureFailure(f"non-finite integrand on [{a}, {b}]")
    return float(value)


def entropy_flux_G(split: SplitFlux, pair: EntropyPair, u: float, v: float) -> float:
    """Numerical entropy flux matching the Engquist-Osher flux.

    .. math::

        G(u, v) = \\int_0^u \\eta' (f')^+ - \\int_0^v \\eta' (f')^- + q(0)
    """
    points = [0.0, *pair.breakpoints]

    def plus(xi: float) -> float:
        return float(pair.eta_prime(xi)) * float(split.dfplus(xi))

    def minus(xi: float) -> float:
        return float(pair.eta_prime(xi)) * float(split.dfminus(xi))

    return (
        _quad(plus, 0.0, float(u), points)
        - _quad(minus, 0.0, float(v), points)
        + float(pair.q(0.0))
    )

# }}}
