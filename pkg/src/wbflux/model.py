"""Flux models, the equilibrium map ``D`` and topography profiles.

A balance law

.. math::

    \\partial_t u + \\partial_x f(u) + z'(x) b(u) = 0

is described by a :class:`FluxModel` (``f``, ``f'``, ``b`` and the map
``D(s) = \\int_0^s f'/b``) and a :class:`TopographyProfile` (``z``).
Stationary states satisfy ``D(u) + z = const``.
"""

from __future__ import annotations

import math
import threading
import warnings
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy import integrate

from wbflux.errors import (
    AssumptionViolation,
    ConfigError,
    ConvergenceFailure,
    NonIntegrableSource,
)

RealFn = Callable[[Any], Any]

TOL_ROOT = 1.0e-12
NEWTON_MAX_ITER = 50
BISECTION_MAX_ITER = 200
LIPSCHITZ_SAMPLES = 2**12
LIPSCHITZ_SAFETY = 1.01


# {{{ expressions

_EXPR_NAMESPACE: dict[str, Any] = {
    name: getattr(np, name)
    for name in (
        "sin", "cos", "tan", "exp", "log", "sqrt", "abs", "sinh", "cosh",
        "tanh", "arctan", "minimum", "maximum", "sign", "where", "pi",
    )
}
_EXPR_NAMESPACE["e"] = np.e


def compile_expression(expr: str, var: str) -> RealFn:
    """Turn a numpy expression string in one variable into a callable.

    Only the names in a small whitelist of numpy functions are visible.
    """
    try:
        code = compile(expr, f"<{var}: {expr}>", "eval")
    except SyntaxError as exc:
        raise ConfigError(f"invalid expression {expr!r}: {exc.msg}") from exc

    for name in code.co_names:
        if name != var and name not in _EXPR_NAMESPACE:
            raise ConfigError(f"unknown name {name!r} in expression {expr!r}")

    def fn(x: Any) -> Any:
        x = np.asarray(x, dtype=np.float64)
        result = eval(code, {"__builtins__": {}}, {**_EXPR_NAMESPACE, var: x})  # noqa: S307
        return np.broadcast_to(result, x.shape).astype(np.float64) if x.ndim else float(result)

    fn.__name__ = f"expr[{expr}]"
    return fn

# }}}


# {{{ quadrature-backed D


class _QuadratureD:
    """``D(s) = \\int_0^s f'/b`` by adaptive quadrature with memoized anchors.

    Anchors sit at integer multiples of ``spacing``; ``D`` at an anchor is
    accumulated outwards from zero and cached, so each evaluation only
    integrates over at most one anchor interval.
    """

    def __init__(self, df: RealFn, b: RealFn, spacing: float = 0.5) -> None:
        self.df = df
        self.b = b
        self.spacing = spacing
        self._anchors: dict[int, float] = {0: 0.0}
        self._lock = threading.Lock()

    def integrand(self, xi: float) -> float:
        den = float(self.b(xi))
        if den == 0.0:
            return math.inf
        return float(self.df(xi)) / den

    def _integrate(self, a: float, b: float) -> float:
        if a == b:
            return 0.0

        probe = np.linspace(a, b, 7)
        with np.errstate(divide="ignore", invalid="ignore"):
            values = np.array([self.integrand(x) for x in probe])
        if not np.all(np.isfinite(values)):
            raise NonIntegrableSource(f"f'/b is not finite on [{a}, {b}]")
        if np.any(values <= 0.0):
            raise AssumptionViolation(f"D' = f'/b <= 0 sampled on [{a}, {b}]")

        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                value, _ = integrate.quad(
                    self.integrand, a, b, epsabs=1.0e-14, epsrel=1.0e-12, limit=200
                )
            except (integrate.IntegrationWarning, ZeroDivisionError) as exc:
                raise NonIntegrableSource(
                    f"f'/b could not be integrated on [{a}, {b}]: {exc}"
                ) from exc

        if not math.isfinite(value):
            raise NonIntegrableSource(f"f'/b is not integrable on [{a}, {b}]")
        return value

    def _anchor(self, k: int) -> float:
        with self._lock:
            if k in self._anchors:
                return self._anchors[k]

        step = 1 if k > 0 else -1
        i = 0
        value = 0.0
        while i != k:
            nxt = i + step
            with self._lock:
                cached = self._anchors.get(nxt)
            if cached is None:
                cached = value + self._integrate(i * self.spacing, nxt * self.spacing)
                with self._lock:
                    self._anchors[nxt] = cached
            value = cached
            i = nxt

        return value

    def __call__(self, s: Any) -> Any:
        s_arr = np.asarray(s, dtype=np.float64)
        out = np.empty_like(s_arr)
        for idx, si in np.ndenumerate(s_arr):
            k = int(si / self.spacing)
            out[idx] = self._anchor(k) + self._integrate(k * self.spacing, float(si))

        return out if s_arr.ndim else float(out)

# }}}


# {{{ FluxModel


@dataclass(frozen=True)
class FluxModel:
    """Scalar balance law data.

    All callables must accept scalars and :class:`numpy.ndarray` inputs.

    .. attribute:: d_prime_lower_bound

        A positive lower bound for ``D' = f'/b`` on all of ``R``.

    .. attribute:: b_lipschitz

        ``||b'||_inf``, used by the boundedness envelope.

    .. attribute:: df_monotone

        If *True*, ``f'`` is monotone and ``sup |f'|`` on ``[-c, c]`` is
        attained at an endpoint.
    """

    name: str
    f: RealFn
    df: RealFn
    b: RealFn
    d_prime_lower_bound: float
    b_lipschitz: float
    d_eval: RealFn | None = None
    d_inverse: RealFn | None = None
    df_monotone: bool = False
    d_identity: bool = False
    kind: str = "custom"
    speed: float = 0.0

    _quad_d: _QuadratureD | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.d_prime_lower_bound > 0:
            raise AssumptionViolation(
                f"inf D' must be positive, got {self.d_prime_lower_bound}"
            )
        if self.b_lipschitz < 0:
            raise ValueError("b_lipschitz must be nonnegative")
        if self.d_eval is None:
            object.__setattr__(self, "_quad_d", _QuadratureD(self.df, self.b))

    @property
    def source_affine(self) -> tuple[float, float] | None:
        """Coefficients ``(b0, b1)`` when ``b(u) = b0 + b1 u`` is known."""
        if self.kind == "burgers_hopf":
            return 0.0, 1.0
        if self.kind == "linear_advection":
            return self.speed, 0.0
        return None


def burgers_hopf() -> FluxModel:
    """``f = u^2/2``, ``b = u``: the ratio ``f'/b = 1`` so ``D(s) = s``."""
    return FluxModel(
        name="burgers_hopf",
        f=lambda u: 0.5 * np.square(u),
        df=_as_float,
        b=_as_float,
        d_prime_lower_bound=1.0,
        b_lipschitz=1.0,
        d_eval=_identity,
        d_inverse=_identity,
        df_monotone=True,
        d_identity=True,
        kind="burgers_hopf",
    )


def linear_advection(speed: float = 1.0) -> FluxModel:
    """``f = a u`` with ``b = a`` (so that again ``D(s) = s``)."""
    if speed == 0.0:
        raise AssumptionViolation("linear advection needs a nonzero speed")

    a = float(speed)

    def f(u: Any) -> Any:
        return a * np.asarray(u, dtype=np.float64) if np.ndim(u) else a * float(u)

    def const(u: Any) -> Any:
        return np.full(np.shape(u), a) if np.ndim(u) else a

    # D(s) = s * sign(a) * |a| / a = s; b = a keeps f'/b = 1 for either sign
    return FluxModel(
        name="linear_advection",
        f=f,
        df=const,
        b=const,
        d_prime_lower_bound=1.0,
        b_lipschitz=0.0,
        d_eval=_identity,
        d_inverse=_identity,
        df_monotone=True,
        d_identity=True,
        kind="linear_advection",
        speed=a,
    )


def custom_model(
    f: str,
    df: str,
    b: str,
    *,
    d: str | None = None,
    d_inverse: str | None = None,
    d_prime_min: float | None = None,
    b_lipschitz: float | None = None,
    df_monotone: bool = False,
    sample_range: tuple[float, float] = (-10.0, 10.0),
) -> FluxModel:
    """Build a model from expression strings in the variable ``u``.

    Missing ``d_prime_min`` and ``b_lipschitz`` are estimated by sampling
    over *sample_range*, which is only a heuristic.
    """
    f_fn = compile_expression(f, "u")
    df_fn = compile_expression(df, "u")
    b_fn = compile_expression(b, "u")
    d_fn = compile_expression(d, "u") if d is not None else None
    dinv_fn = compile_expression(d_inverse, "u") if d_inverse is not None else None

    s = np.linspace(*sample_range, 4097)
    if d_prime_min is None:
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = df_fn(s) / b_fn(s)
        ratio = ratio[np.isfinite(ratio)]
        if ratio.size == 0:
            raise AssumptionViolation("cannot estimate inf D' from samples")
        d_prime_min = float(ratio.min())

    if b_lipschitz is None:
        h = s[1] - s[0]
        b_lipschitz = float(np.max(np.abs(np.diff(b_fn(s))) / h)) * LIPSCHITZ_SAFETY

    return FluxModel(
        name="custom",
        f=f_fn,
        df=df_fn,
        b=b_fn,
        d_prime_lower_bound=d_prime_min,
        b_lipschitz=b_lipschitz,
        d_eval=d_fn,
        d_inverse=dinv_fn,
        df_monotone=df_monotone,
        kind="custom",
    )


def _identity(s: Any) -> Any:
    return s


def _as_float(u: Any) -> Any:
    return np.array(u, dtype=np.float64) if np.ndim(u) else float(u)


def get_model(name: str, **kwargs: Any) -> FluxModel:
    if name == "burgers_hopf":
        return burgers_hopf()
    if name == "linear_advection":
        return linear_advection(kwargs.get("speed", 1.0))
    if name == "custom":
        return custom_model(**kwargs)

    raise ConfigError(f"unknown model {name!r}")

# }}}


# {{{ operations


def evaluate_D(model: FluxModel, s: Any) -> Any:
    """Evaluate ``D(s) = \\int_0^s f'(\\xi)/b(\\xi) d\\xi``."""
    if model.d_eval is not None:
        return model.d_eval(s)

    assert model._quad_d is not None
    return model._quad_d(s)


def _d_prime(model: FluxModel, s: float) -> float:
    return float(model.df(s)) / float(model.b(s))


def _invert_scalar(model: FluxModel, y: float, tol: float) -> float:
    m = model.d_prime_lower_bound
    # D(0) = 0 and D' >= m imply |s| <= |y| / m
    lo, hi = min(0.0, y / m), max(0.0, y / m)
    tol = max(tol, 4.0 * np.finfo(np.float64).eps * abs(y))

    def residual(s: float) -> float:
        return float(evaluate_D(model, s)) - y

    r_lo = residual(lo)
    if abs(r_lo) <= tol:
        return lo
    r_hi = residual(hi)
    if abs(r_hi) <= tol:
        return hi

    s = 0.5 * (lo + hi)
    for _ in range(NEWTON_MAX_ITER):
        r = residual(s)
        if abs(r) <= tol:
            return s

        if (r < 0) == (r_lo < 0):
            lo, r_lo = s, r
        else:
            hi, r_hi = s, r

        try:
            slope = _d_prime(model, s)
        except ZeroDivisionError:
            slope = 0.0
        step_ok = math.isfinite(slope) and slope > 0
        s_new = s - r / slope if step_ok else 0.5 * (lo + hi)
        if not lo < s_new < hi:
            s_new = 0.5 * (lo + hi)
        s = s_new

    for _ in range(BISECTION_MAX_ITER):
        s = 0.5 * (lo + hi)
        r = residual(s)
        if abs(r) <= tol or hi - lo <= 2 * np.finfo(np.float64).eps * max(1.0, abs(s)):
            if abs(r) <= max(tol, 1.0e3 * np.finfo(np.float64).eps * max(1.0, abs(y))):
                return s
            break
        if (r < 0) == (r_lo < 0):
            lo, r_lo = s, r
        else:
            hi = s

    raise ConvergenceFailure(
        f"could not invert D at y = {y!r} (|D(s) - y| = {abs(residual(s)):.3e})"
    )


def invert_D(model: FluxModel, y: Any, tol: float = TOL_ROOT) -> Any:
    """Solve ``D(s) = y``.

    Uses the closed form when the model provides one and a safeguarded
    Newton iteration with bisection fallback otherwise.
    """
    if model.d_inverse is not None:
        return model.d_inverse(y)

    y_arr = np.asarray(y, dtype=np.float64)
    if y_arr.ndim == 0:
        return _invert_scalar(model, float(y_arr), tol)

    out = np.empty_like(y_arr)
    for idx, yi in np.ndenumerate(y_arr):
        out[idx] = _invert_scalar(model, float(yi), tol)
    return out


def lipschitz_on(model: FluxModel, c: float) -> float:
    """Return ``Lip_{[-c, c]}(f) = sup |f'|`` on ``[-c, c]``.

    For a model with monotone ``f'`` the supremum is taken at an endpoint.
    Otherwise ``f'`` is sampled at ``2^12`` points and the maximum is
    inflated by 1%.
    """
    if c < 0:
        raise ValueError(f"c must be nonnegative, got {c}")

    if model.df_monotone:
        return float(max(abs(model.df(-c)), abs(model.df(c))))

    s = np.linspace(-c, c, LIPSCHITZ_SAMPLES)
    return LIPSCHITZ_SAFETY * float(np.max(np.abs(model.df(s))))


def check_assumptions(
    model: FluxModel,
    *,
    sample_range: tuple[float, float] = (-5.0, 5.0),
    n: int = 101,
    tol: float = 1.0e-6,
) -> None:
    """Sample-based check of the structural assumptions on *model*.

    :raises AssumptionViolation: if ``f'`` is inconsistent with ``f``, if
        ``D`` is not increasing with slope at least ``inf D'`` or if the
        numerical inverse of ``D`` is inaccurate.
    """
    s = np.linspace(*sample_range, n)
    h = 1.0e-6
    fd = (model.f(s + h) - model.f(s - h)) / (2 * h)
    err = np.abs(fd - model.df(s))
    if np.any(err > tol * np.maximum(1.0, np.abs(fd))):
        raise AssumptionViolation("df is inconsistent with f (finite differences)")

    d = np.asarray(evaluate_D(model, s), dtype=np.float64)
    slopes = np.diff(d) / np.diff(s)
    if np.any(slopes < model.d_prime_lower_bound * (1 - 1.0e-9)):
        raise AssumptionViolation("D grows slower than d_prime_lower_bound")

    if model.d_eval is None or model.d_inverse is None:
        back = np.asarray(invert_D(model, d), dtype=np.float64)
        if np.any(np.abs(np.asarray(evaluate_D(model, back)) - d) > 10 * TOL_ROOT * np.maximum(1, np.abs(d))):
            raise AssumptionViolation("numerical D inverse is inaccurate")

# }}}


# {{{ topography


@dataclass(frozen=True)
class TopographyProfile:
    """Elevation profile ``z`` on the domain.

    .. attribute:: jumps

        Declared discontinuities of ``z``; never detected automatically.

    .. attribute:: sup_slope

        ``||z'||_inf`` on the domain, or a user surrogate if ``z`` jumps.
    """

    name: str
    z: RealFn
    sup_slope: float
    jumps: tuple[float, ...] = ()

    @property
    def nonconforming(self) -> bool:
        return len(self.jumps) > 0

    def __call__(self, x: Any) -> Any:
        return self.z(x)

    def one_sided(self, x: float, side: int) -> float:
        """Value of ``z`` at *x*; at a declared jump, the limit from *side*."""
        for xj in self.jumps:
            if abs(x - xj) <= 1.0e-12 * max(1.0, abs(xj)):
                eps = 1.0e-9 * max(1.0, abs(xj))
                return float(self.z(xj + side * eps))
        return float(self.z(x))


def _bump(fn: Callable[[Any], Any], a: float, b: float) -> RealFn:
    def z(x: Any) -> Any:
        x_arr = np.asarray(x, dtype=np.float64)
        out = np.where((x_arr > a) & (x_arr < b), fn(np.pi * x_arr), 0.0)
        return out if x_arr.ndim else float(out)

    return z


def cos_bump() -> TopographyProfile:
    """``z = cos(pi x)`` on ``(3/2, 5/2)`` and zero elsewhere (continuous)."""
    return TopographyProfile("cos_bump", _bump(np.cos, 1.5, 2.5), sup_slope=np.pi)


def sin_jump() -> TopographyProfile:
    """``z = sin(pi x)`` on ``(3/2, 5/2)`` and zero elsewhere.

    The profile jumps by ``-1`` at ``x = 3/2`` and by ``-1`` at ``x = 5/2``
    (from ``1`` back to ``0``).  The slope surrogate is the smooth part's.
    """
    return TopographyProfile(
        "sin_jump", _bump(np.sin, 1.5, 2.5), sup_slope=np.pi, jumps=(1.5, 2.5)
    )


def zero_topography() -> TopographyProfile:
    def z(x: Any) -> Any:
        return np.zeros(np.shape(x)) if np.ndim(x) else 0.0

    return TopographyProfile("zero", z, sup_slope=0.0)


def tabulated_topography(samples: Sequence[Sequence[float]]) -> TopographyProfile:
    """Piecewise linear interpolation of ``(x, z)`` samples."""
    arr = np.asarray(samples, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 2:
        raise ConfigError("tabulated topography needs a list of [x, z] pairs")
    if np.any(np.diff(arr[:, 0]) <= 0):
        raise ConfigError("tabulated topography abscissas must increase")

    xs, zs = arr[:, 0].copy(), arr[:, 1].copy()

    def z(x: Any) -> Any:
        out = np.interp(x, xs, zs)
        return out if np.ndim(x) else float(out)

    slope = float(np.max(np.abs(np.diff(zs) / np.diff(xs))))
    return TopographyProfile("tabulated", z, sup_slope=slope)


def get_topography(spec: Any) -> TopographyProfile:
    if isinstance(spec, str):
        table = {"cos_bump": cos_bump, "sin_jump": sin_jump, "zero": zero_topography}
        if spec not in table:
            raise ConfigError(f"unknown topography {spec!r}")
        return table[spec]()

    return tabulated_topography(spec)

# }}}


# {{{ problem


def constant(value: float) -> RealFn:
    value = float(value)

    def fn(x: Any) -> Any:
        return np.full(np.shape(x), value) if np.ndim(x) else value

    fn.__name__ = f"constant[{value!r}]"
    return fn


@dataclass(frozen=True)
class Problem:
    """Initial boundary value problem on ``]x_l, x_r[ x ]0, T[``."""

    model: FluxModel
    topo: TopographyProfile
    domain: tuple[float, float]
    horizon: float
    initial: RealFn
    left_bc: RealFn
    right_bc: RealFn
    initial_jumps: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        x_l, x_r = self.domain
        if not x_l < x_r:
            raise ValueError(f"empty domain ({x_l}, {x_r})")
        if not self.horizon >= 0:
            raise ValueError(f"horizon must be nonnegative, got {self.horizon}")

    @property
    def x_l(self) -> float:
        return self.domain[0]

    @property
    def x_r(self) -> float:
        return self.domain[1]

    def data_bound(self, n: int = 4001) -> float:
        """Sampled ``M = max(sup|u_0|, sup|u_l|, sup|u_r|)``."""
        x = np.linspace(self.x_l, self.x_r, n)
        t = np.linspace(0.0, max(self.horizon, 0.0), n)
        values = [
            np.asarray(self.initial(x), dtype=np.float64),
            np.asarray(self.left_bc(t), dtype=np.float64),
            np.asarray(self.right_bc(t), dtype=np.float64),
        ]
        m = max(float(np.max(np.abs(v))) for v in values)
        if not math.isfinite(m):
            raise ValueError("initial or boundary data are not bounded")
        return m

# }}}
