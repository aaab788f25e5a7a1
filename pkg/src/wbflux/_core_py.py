"""Pure numpy twin of the compiled time loop in ``_core.pyx``."""

from __future__ import annotations

import numpy as np

FLUX_BURGERS = 0
FLUX_LINEAR = 1
SCHEME_WELL_BALANCED = 0
SCHEME_STANDARD = 1


def _g(kind: int, ap: float, am: float, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    if kind == FLUX_BURGERS:
        p = np.maximum(u, 0.0)
        m = np.minimum(v, 0.0)
        return 0.5 * (p * p) + 0.5 * (m * m)
    return ap * u - am * v + 0.0


def advance(
    u: np.ndarray,
    ghost_left: np.ndarray,
    ghost_right: np.ndarray,
    z_ext: np.ndarray,
    slopes: np.ndarray,
    lam: float,
    dt: float,
    flux_kind: int,
    speed: float,
    b0: float,
    b1: float,
    scheme: int,
    blowup: float,
    max_abs: np.ndarray,
) -> int:
    """Advance *u* in place by ``len(ghost_left)`` steps of size *dt*.

    :returns: the number of completed steps; fewer than requested means the
        next step produced a non-finite value or exceeded *blowup*, and *u*
        holds the last admissible state.
    """
    ap, am = max(speed, 0.0), max(-speed, 0.0)
    dz_left = z_ext[:-2] - z_ext[1:-1]
    dz_right = z_ext[2:] - z_ext[1:-1]
    ext = np.empty(u.size + 2)

    for k in range(ghost_left.size):
        gl, gr = ghost_left[k], ghost_right[k]
        ext[0], ext[-1] = gl, gr
        ext[1:-1] = u

        if scheme == SCHEME_WELL_BALANCED:
            um = ext[:-2] + dz_left
            up = ext[2:] + dz_right
            new = u - lam * (_g(flux_kind, ap, am, u, up) - _g(flux_kind, ap, am, um, u))
            peak = max(
                abs(gl), abs(gr),
                float(np.max(np.abs(new))),
                float(np.max(np.abs(um))),
                float(np.max(np.abs(up))),
            )
        else:
            flux = _g(flux_kind, ap, am, ext[:-1], ext[1:])
            new = u - lam * (flux[1:] - flux[:-1]) - dt * slopes * (b0 + b1 * u)
            peak = max(abs(gl), abs(gr), float(np.max(np.abs(new))))

        if not np.all(np.isfinite(new)):
            max_abs[k] = np.inf
            return k
        if peak > blowup:
            max_abs[k] = peak
            return k

        u[:] = new
        max_abs[k] = peak

    return ghost_left.size
