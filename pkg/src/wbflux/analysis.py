"""Error norms, reference comparisons and convergence tables."""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Sequence
from dataclasses import dataclass, replace

import numpy as np

from wbflux.errors import IncompatibleGrids
from wbflux.grid import Discretization, SolverState, gauss_nodes
from wbflux.model import RealFn

CSV_COLUMNS = ("dx", "dt", "l1_error", "num_error", "eoc", "wall_time_s")

#: subintervals per cell searched for sign changes of ``u_j - exact``
SIGN_SUBDIVISIONS = 4
BISECTION_STEPS = 60


@dataclass(frozen=True)
class ErrorReport:
    dx: float
    dt: float
    l1_error: float
    numerical_error: float
    wall_time_s: float = 0.0
    eoc: float | None = None


def _abs_integral(
    values: np.ndarray, exact: RealFn, a: np.ndarray, b: np.ndarray
) -> np.ndarray:
    """``\\int_a^b |c - exact|`` per interval, split at one sign change."""

    def diff(x: np.ndarray) -> np.ndarray:
        return values - np.asarray(exact(x), dtype=np.float64)

    lo, hi = a.copy(), b.copy()
    # nudge inside so that a jump sitting on an endpoint is read one-sidedly
    eps = 1.0e-12 * (b - a)
    d_lo, d_hi = diff(a + eps), diff(b - eps)
    crossing = d_lo * d_hi < 0

    root = b.copy()
    if np.any(crossing):
        lo_c, hi_c, dlo_c = lo[crossing], hi[crossing], d_lo[crossing]
        vals_c = values[crossing]
        for _ in range(BISECTION_STEPS):
            mid = 0.5 * (lo_c + hi_c)
            dm = vals_c - np.asarray(exact(mid), dtype=np.float64)
            left = dm * dlo_c > 0
            lo_c = np.where(left, mid, lo_c)
            dlo_c = np.where(left, dm, dlo_c)
            hi_c = np.where(left, hi_c, mid)
        root[crossing] = 0.5 * (lo_c + hi_c)

    total = np.zeros_like(values)
    for p, q in ((a, root), (root, b)):
        x, w = gauss_nodes(p, q)
        total += np.sum(w * np.abs(values[:, None] - np.asarray(exact(x), dtype=np.float64)), axis=1)
    return total


def l1_error_vs_exact(
    state: SolverState, exact: RealFn, disc: Discretization, jumps: Sequence[float] = ()
) -> float:
    """``sum_j \\int_{C_j} |u_j - exact(x)| dx``.

    Each cell is cut into a few subintervals (and at declared *jumps*); on
    each subinterval one sign change of ``u_j - exact`` is located by
    bisection so the Gauss rule never straddles a kink of ``|.|``.
    """
    faces = disc.faces
    m = SIGN_SUBDIVISIONS
    frac = np.linspace(0.0, 1.0, m + 1)
    a = (faces[:-1, None] + frac[None, :-1] * disc.dx).ravel()
    b = (faces[:-1, None] + frac[None, 1:] * disc.dx).ravel()
    b[m - 1 :: m] = faces[1:]
    values = np.repeat(state.interior, m)

    for xj in jumps:
        inside = (a < xj) & (xj < b)
        if np.any(inside):
            idx = np.flatnonzero(inside)
            a = np.concatenate([a, np.full(idx.size, xj)])
            b_new = b.copy()
            b_new[idx] = xj
            b = np.concatenate([b_new, b[idx]])
            values = np.concatenate([values, values[idx]])

    per_piece = _abs_integral(values, exact, a, b)
    return float(math.fsum(per_piece))


def l1_error_vs_projection(
    state: SolverState, exact: RealFn, disc: Discretization, jumps: Sequence[float] = ()
) -> float:
    """``dx sum_j |u_j - (1/dx) \\int_{C_j} exact|``."""
    projected = disc.cell_averages(exact, jumps)
    return float(disc.dx * math.fsum(np.abs(state.interior - projected)))


def projection_error(exact: RealFn, disc: Discretization, jumps: Sequence[float] = ()) -> float:
    """L1 distance between *exact* and its piecewise constant projection."""
    projected = disc.cell_averages(exact, jumps)
    return l1_error_vs_exact(SolverState(0, 0.0, projected, 0.0, 0.0), exact, disc, jumps)


def l1_distance_states(
    a: SolverState, disc_a: Discretization, b: SolverState, disc_b: Discretization
) -> float:
    """Exact L1 distance between two piecewise constant functions.

    One grid must be an integer refinement of the other.
    """
    if disc_b.is_refinement_of(disc_a):
        coarse, fine, dc, df = a, b, disc_a, disc_b
    elif disc_a.is_refinement_of(disc_b):
        coarse, fine, dc, df = b, a, disc_b, disc_a
    else:
        raise IncompatibleGrids(
            f"grids with {disc_a.n_cells} and {disc_b.n_cells} cells are not nested"
        )
    if coarse.interior.size != dc.n_cells or fine.interior.size != df.n_cells:
        raise IncompatibleGrids("state size does not match its grid")

    r = df.n_cells // dc.n_cells
    coarse_on_fine = np.repeat(coarse.interior, r)
    return float(df.dx * math.fsum(np.abs(coarse_on_fine - fine.interior)))


def eoc(e_coarse: float, e_fine: float, dx_coarse: float, dx_fine: float) -> float:
    if e_coarse == e_fine:
        return 0.0
    return math.log(e_coarse / e_fine) / math.log(dx_coarse / dx_fine)


def convergence_table(rows: Sequence[ErrorReport], *, column: str = "l1_error") -> list[ErrorReport]:
    """Fill in the experimental order of convergence between consecutive rows.

    *column* selects the error used (``l1_error`` or ``numerical_error``).
    """
    out: list[ErrorReport] = []
    for i, row in enumerate(rows):
        if i == 0:
            out.append(replace(row, eoc=None))
            continue
        prev = rows[i - 1]
        if not prev.dx > row.dx:
            raise ValueError("rows must be sorted by decreasing dx")
        e0, e1 = getattr(prev, column), getattr(row, column)
        value = eoc(e0, e1, prev.dx, row.dx) if e0 > 0 and e1 > 0 else math.nan
        out.append(replace(row, eoc=value))
    return out


def _fmt(value: float | None) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return repr(float(value))


def table_to_csv(rows: Sequence[ErrorReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow([
            _fmt(r.dx), _fmt(r.dt), _fmt(r.l1_error), _fmt(r.numerical_error),
            _fmt(r.eoc), _fmt(r.wall_time_s),
        ])
    return buf.getvalue()
