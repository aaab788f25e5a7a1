"""Burgers-Hopf test cases on ``]0, 4[`` and the drivers for their error tables."""

from __future__ import annotations

import hashlib
import json
import os
from collections.abc import Callable, Iterable, Mapping, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np

from wbflux.analysis import (
    ErrorReport,
    convergence_table,
    l1_distance_states,
    l1_error_vs_exact,
    l1_error_vs_projection,
    table_to_csv,
)
from wbflux.grid import Discretization, SolverState
from wbflux.model import (
    Problem,
    RealFn,
    TopographyProfile,
    burgers_hopf,
    constant,
    cos_bump,
    sin_jump,
)
from wbflux.scheme import RunResult, SchemeKind, StepPolicy, run

DOMAIN = (0.0, 4.0)
#: bump in the cache key whenever the numerics of the reference run change
REFERENCE_CACHE_VERSION = 1
DEFAULT_REFERENCE_CELLS = 4000
FIGURE_DX = 0.1

PRESET_IDS = ("tc1_equilibrium", "tc2_riemann", "tc3_zero", "tc4_discontinuous_z")
ALIASES = {pid.split("_", 1)[0]: pid for pid in PRESET_IDS}


@dataclass(frozen=True)
class TableRow:
    """One published row: grid, step and the values printed next to them."""

    dx: float
    dt: float
    l1_error: float
    num_error: float | None = None
    cpu_time_s: float | None = None
    expensive: bool = False


@dataclass(frozen=True)
class Tolerance:
    """Acceptance band for one table.

    ``l1_rel`` and ``num_rel`` are relative bands around the published
    values; ``num_abs`` is an absolute ceiling used where the published
    value is zero.  ``eoc`` optionally pins the order between rows 1 and 2.
    """

    l1_rel: float
    num_rel: float | None = None
    num_abs: float | None = None
    eoc: tuple[float, float] | None = None


#: acceptance bands around the published values, one entry per reproduced table
TOLERANCES: dict[tuple[str, str], Tolerance] = {
    ("tc1_equilibrium", "well_balanced"): Tolerance(l1_rel=0.02, num_abs=1.0e-8),
    ("tc1_equilibrium", "standard"): Tolerance(l1_rel=0.25, num_rel=0.25, eoc=(1.0, 0.15)),
    ("tc3_zero", "well_balanced"): Tolerance(l1_rel=0.10),
}


@dataclass(frozen=True)
class TestCasePreset:
    """A fully specified test case.

    ``table_rows`` maps a scheme kind to its published rows.  ``exact`` is
    ``None`` when only a reference solution exists; ``reference_spec`` then
    names the scheme and cell count used to build it.
    """

    __test__ = False  # keep pytest from collecting this class

    id: str
    problem: Problem
    table_rows: Mapping[str, tuple[TableRow, ...]]
    snapshot_times: tuple[float, ...]
    exact: RealFn | None = None
    exact_jumps: tuple[float, ...] = ()
    reference_spec: tuple[str, int] | None = None
    figure_dx: float = FIGURE_DX
    description: str = ""


def _equilibrium(topo: TopographyProfile, level: float = 2.0) -> RealFn:
    def u(x: Any) -> Any:
        return level - topo(x)

    u.__name__ = f"equilibrium[{level}-{topo.name}]"
    return u


def _tc1() -> TestCasePreset:
    topo = cos_bump()
    u2 = _equilibrium(topo)
    problem = Problem(burgers_hopf(), topo, DOMAIN, 3.0, u2, constant(2.0), constant(2.0))
    rows = {
        "well_balanced": (
            TableRow(1e-1, 5.7e-6, 5.02e-2, 0.0, 0.62),
            TableRow(1e-2, 3.5e-6, 5.00e-3, 0.0, 8.83),
            TableRow(1e-3, 7.3e-7, 5.00e-4, 0.0, 423.2, expensive=True),
            TableRow(1e-4, 8e-8, 5.00e-5, 0.0, 42688.0, expensive=True),
        ),
        "standard": (
            TableRow(2e-2, 4.5e-6, 5.07e-2, 4.90e-2, 2.94),
            TableRow(2e-3, 1.3e-6, 5.09e-3, 4.91e-3, 97.6, expensive=True),
            TableRow(2e-4, 1.6e-7, 5.09e-4, 4.92e-4, 10885.0, expensive=True),
            TableRow(2e-5, 2e-8, 5.06e-5, 4.97e-5, None, expensive=True),
        ),
    }
    return TestCasePreset(
        "tc1_equilibrium", problem, rows, (3.0,), exact=u2,
        description="equilibrium data 2 - z with a cosine bump, u_l = u_r = 2, T = 3",
    )


def _tc2() -> TestCasePreset:
    problem = Problem(
        burgers_hopf(), cos_bump(), DOMAIN, 2.75, constant(1.0), constant(2.0), constant(1.0)
    )
    return TestCasePreset(
        "tc2_riemann", problem, {}, (0.25, 0.75, 1.75, 2.75),
        reference_spec=("standard", DEFAULT_REFERENCE_CELLS),
        description="u_0 = 1 with inflow u_l = 2, u_r = 1 over the cosine bump",
    )


def _tc3() -> TestCasePreset:
    problem = Problem(
        burgers_hopf(), cos_bump(), DOMAIN, 2.5, constant(0.0), constant(0.0), constant(0.0)
    )
    rows = {
        "well_balanced": (
            TableRow(1e-1, 6.14e-6, 4.388e-1, None, 0.90),
            TableRow(1e-2, 6.14e-6, 3.164e-1, None, 5.23),
            TableRow(1e-3, 6.14e-6, 2.678e-2, None, 47.9, expensive=True),
            TableRow(1e-4, 6.14e-6, 8.421e-4, None, 740.8, expensive=True),
        ),
    }
    return TestCasePreset(
        "tc3_zero", problem, rows, (2.5,), exact=constant(0.0),
        description="zero data; the scheme is attracted by the competing equilibrium -z",
    )


def _tc4() -> TestCasePreset:
    topo = sin_jump()
    u2 = _equilibrium(topo)
    problem = Problem(
        burgers_hopf(), topo, DOMAIN, 3.0, u2, constant(2.0), constant(2.0),
        initial_jumps=topo.jumps,
    )
    return TestCasePreset(
        "tc4_discontinuous_z", problem, {}, (3.0,), exact=u2, exact_jumps=topo.jumps,
        description="equilibrium data 2 - z with a sine bump that jumps at 3/2 and 5/2",
    )


_FACTORIES: dict[str, Callable[[], TestCasePreset]] = {
    "tc1_equilibrium": _tc1,
    "tc2_riemann": _tc2,
    "tc3_zero": _tc3,
    "tc4_discontinuous_z": _tc4,
}


def resolve_preset_id(name: str) -> str:
    pid = ALIASES.get(name, name)
    if pid not in _FACTORIES:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESET_IDS)}")
    return pid


def preset(preset_id: str) -> TestCasePreset:
    """Build the preset *preset_id* (``tc1`` .. ``tc4`` are accepted as short names)."""
    return _FACTORIES[resolve_preset_id(preset_id)]()


def with_horizon(p: TestCasePreset, horizon: float) -> TestCasePreset:
    """Copy of *p* integrated only up to *horizon*."""
    problem = replace(p.problem, horizon=horizon)
    snaps = tuple(t for t in p.snapshot_times if t <= horizon) or (horizon,)
    return replace(p, problem=problem, snapshot_times=snaps)


# {{{ single runs


def discretize(p: TestCasePreset, dx: float) -> Discretization:
    return Discretization.uniform(p.problem.x_l, p.problem.x_r, dx)


def run_preset(
    p: TestCasePreset,
    scheme_kind: SchemeKind,
    dx: float,
    policy: StepPolicy | None = None,
    *,
    snapshot_times: Sequence[float] | None = None,
    history: bool = False,
) -> RunResult:
    policy = policy if policy is not None else StepPolicy("adaptive")
    snaps = p.snapshot_times if snapshot_times is None else tuple(snapshot_times)
    return run(p.problem, discretize(p, dx), policy, scheme_kind, snaps, history=history)


def error_report(p: TestCasePreset, result: RunResult) -> ErrorReport:
    """L1 and projection errors of the final state against the exact solution."""
    if p.exact is None:
        raise ValueError(f"preset {p.id} has no exact solution")
    disc = result.disc
    return ErrorReport(
        dx=disc.dx,
        dt=result.dt_max,
        l1_error=l1_error_vs_exact(result.final, p.exact, disc, p.exact_jumps),
        numerical_error=l1_error_vs_projection(result.final, p.exact, disc, p.exact_jumps),
        wall_time_s=result.wall_time_s,
    )

# }}}


# {{{ reference solution


def reference_cache_key(p: TestCasePreset, scheme_kind: str, n_cells: int) -> str:
    payload = {
        "version": REFERENCE_CACHE_VERSION,
        "preset": p.id,
        "scheme": scheme_kind,
        "n_cells": n_cells,
        "domain": list(p.problem.domain),
        "horizon": p.problem.horizon,
        "snapshots": list(p.snapshot_times),
        "policy": "adaptive",
    }
    text = json.dumps(payload, sort_keys=True)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def default_cache_dir() -> Path:
    env = os.environ.get("WBFLUX_CACHE")
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "wbflux"


def reference_solution(
    p: TestCasePreset,
    n_cells: int | None = None,
    *,
    cache_dir: Path | None | bool = None,
) -> tuple[Discretization, dict[float, SolverState]]:
    """Snapshots of the fine-grid reference run named by ``p.reference_spec``.

    Results are cached under a hash of the configuration.  Pass
    ``cache_dir=False`` to disable caching.
    """
    if p.reference_spec is None:
        raise ValueError(f"preset {p.id} defines no reference solution")
    scheme_kind, default_cells = p.reference_spec
    n = n_cells or default_cells
    disc = Discretization(p.problem.x_l, p.problem.x_r, n)

    path = None
    if cache_dir is not False:
        root = default_cache_dir() if cache_dir is None or cache_dir is True else Path(cache_dir)
        path = root / f"reference-{p.id}-{reference_cache_key(p, scheme_kind, n)}.npz"
        if path.exists():
            data = np.load(path)
            snaps = {
                float(t): SolverState(0, float(t), data[f"u{i}"], 0.0, 0.0)
                for i, t in enumerate(data["times"])
            }
            return disc, snaps

    result = run(p.problem, disc, StepPolicy("adaptive"), scheme_kind, p.snapshot_times)  # type: ignore[arg-type]
    snaps = dict(sorted(result.snapshots.items()))
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        arrays = {f"u{i}": s.interior for i, s in enumerate(snaps.values())}
        tmp = path.with_suffix(".tmp.npz")
        np.savez(tmp, times=np.array(list(snaps)), **arrays)
        os.replace(tmp, path)
    return disc, snaps


def reference_distances(
    p: TestCasePreset, dx: float = FIGURE_DX, *, n_ref: int | None = None,
    cache_dir: Path | None | bool = None,
) -> dict[str, dict[float, float]]:
    """L1 distance of both coarse schemes to the reference at every snapshot."""
    ref_disc, ref = reference_solution(p, n_ref, cache_dir=cache_dir)
    out: dict[str, dict[float, float]] = {}
    for kind in ("well_balanced", "standard"):
        res = run_preset(p, kind, dx)  # type: ignore[arg-type]
        out[kind] = {
            t: l1_distance_states(res.snapshots[t], res.disc, ref[t], ref_disc)
            for t in p.snapshot_times
        }
    return out

# }}}


# {{{ tables


@dataclass(frozen=True)
class RowCheck:
    index: int
    row: TableRow
    report: ErrorReport | None
    checks: tuple[tuple[str, bool, str], ...] = ()
    gated: bool = False

    @property
    def passed(self) -> bool:
        return not self.gated and all(ok for _, ok, _ in self.checks)


@dataclass(frozen=True)
class TableOutcome:
    preset_id: str
    scheme_kind: str
    rows: tuple[RowCheck, ...]
    extra_checks: tuple[tuple[str, bool, str], ...] = field(default_factory=tuple)

    @property
    def reports(self) -> list[ErrorReport]:
        return [r.report for r in self.rows if r.report is not None]

    @property
    def passed(self) -> bool:
        ran = [r for r in self.rows if not r.gated]
        return bool(ran) and all(r.passed for r in ran) and all(ok for _, ok, _ in self.extra_checks)

    def csv(self) -> str:
        return table_to_csv(self.reports)

    def diff_report(self) -> str:
        lines = [f"# {self.preset_id} / {self.scheme_kind}"]
        for rc in self.rows:
            head = f"row {rc.index} dx={rc.row.dx:g} dt={rc.row.dt:g}"
            if rc.gated:
                lines.append(f"{head}: GATED (expensive; rerun with --expensive)")
                continue
            for name, ok, detail in rc.checks:
                lines.append(f"{head} {name}: {'PASS' if ok else 'FAIL'} {detail}")
        for name, ok, detail in self.extra_checks:
            lines.append(f"{name}: {'PASS' if ok else 'FAIL'} {detail}")
        return "\n".join(lines) + "\n"


def _rel_check(name: str, got: float, want: float, rel: float) -> tuple[str, bool, str]:
    dev = (got - want) / want
    return name, abs(dev) <= rel, f"got {got:.4e} published {want:.4e} ({dev:+.1%}, band ±{rel:.0%})"


def _row_checks(row: TableRow, rep: ErrorReport, tol: Tolerance) -> tuple[tuple[str, bool, str], ...]:
    out = [_rel_check("l1", rep.l1_error, row.l1_error, tol.l1_rel)]
    if tol.num_abs is not None:
        out.append((
            "num", rep.numerical_error <= tol.num_abs,
            f"got {rep.numerical_error:.3e} ceiling {tol.num_abs:.0e}",
        ))
    elif tol.num_rel is not None and row.num_error:
        out.append(_rel_check("num", rep.numerical_error, row.num_error, tol.num_rel))
    return tuple(out)


def parse_rows(spec: str | None, n_rows: int) -> list[int]:
    """``"1-2"``, ``"1,3"`` or ``None`` (all) to 1-based row indices."""
    if spec is None or spec.strip() in ("", "all"):
        return list(range(1, n_rows + 1))
    out: list[int] = []
    for part in spec.split(","):
        part = part.strip()
        if "-" in part:
            lo, hi = (int(s) for s in part.split("-", 1))
            out.extend(range(lo, hi + 1))
        else:
            out.append(int(part))
    bad = [i for i in out if not 1 <= i <= n_rows]
    if bad:
        raise ValueError(f"row indices {bad} outside 1..{n_rows}")
    return sorted(set(out))


def _execute_row(preset_id: str, scheme_kind: str, index: int, dt_mode: str) -> ErrorReport:
    p = preset(preset_id)
    row = p.table_rows[scheme_kind][index - 1]
    policy = StepPolicy("explicit", dt=row.dt) if dt_mode == "published" else StepPolicy("adaptive")
    return error_report(p, run_preset(p, scheme_kind, row.dx, policy))  # type: ignore[arg-type]


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("WBFLUX_THREADS", "1")))
    except ValueError:
        return 1


def run_table(
    p: TestCasePreset | str,
    scheme_kind: str,
    row_filter: Iterable[int] | str | None = None,
    *,
    include_expensive: bool = False,
    dt_mode: str = "published",
    tolerance: Tolerance | None = None,
) -> TableOutcome:
    """Run the selected rows of a published table and diff them against it.

    Rows flagged as expensive are reported as gated unless
    *include_expensive* is set.  With ``dt_mode="published"`` every row replays
    its published time step; ``"adaptive"`` uses the CFL-adaptive policy.
    """
    p = preset(p) if isinstance(p, str) else p
    if scheme_kind not in p.table_rows:
        raise KeyError(f"preset {p.id} has no table for scheme {scheme_kind!r}")
    if dt_mode not in ("published", "adaptive"):
        raise ValueError(f"dt_mode must be 'published' or 'adaptive', got {dt_mode!r}")
    rows = p.table_rows[scheme_kind]
    if row_filter is None or isinstance(row_filter, str):
        indices = parse_rows(row_filter, len(rows))
    else:
        indices = sorted(set(row_filter))
    tol = tolerance or TOLERANCES[(p.id, scheme_kind)]

    todo = [i for i in indices if include_expensive or not rows[i - 1].expensive]
    workers = min(worker_count(), len(todo)) if todo else 1
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {i: pool.submit(_execute_row, p.id, scheme_kind, i, dt_mode) for i in todo}
            done = {i: fut.result() for i, fut in futures.items()}
    else:
        done = {i: _execute_row(p.id, scheme_kind, i, dt_mode) for i in todo}

    with_eoc = {
        r.dx: r
        for r in convergence_table(
            [done[i] for i in todo],
            column="numerical_error" if scheme_kind == "standard" else "l1_error",
        )
    }

    checks = []
    for i in indices:
        row = rows[i - 1]
        if i not in done:
            checks.append(RowCheck(i, row, None, gated=True))
            continue
        rep = with_eoc[done[i].dx]
        checks.append(RowCheck(i, row, rep, _row_checks(row, rep, tol)))

    extra: list[tuple[str, bool, str]] = []
    if tol.eoc is not None and 1 in done and 2 in done:
        target, band = tol.eoc
        got = with_eoc[done[2].dx].eoc
        assert got is not None
        extra.append(("eoc rows 1-2", abs(got - target) <= band, f"got {got:.3f} want {target}±{band}"))

    return TableOutcome(p.id, scheme_kind, tuple(checks), tuple(extra))

# }}}


# {{{ output files


def _num(v: float) -> str:
    return repr(float(v))


def snapshot_csv(disc: Discretization, state: SolverState) -> str:
    lines = ["x,u"]
    lines.extend(f"{_num(x)},{_num(u)}" for x, u in zip(disc.centers, state.interior))
    return "\n".join(lines) + "\n"


def snapshot_dat(disc: Discretization, snapshots: Mapping[float, SolverState]) -> str:
    """Gnuplot data blocks, one per time, separated by two blank lines."""
    blocks = []
    for t, state in sorted(snapshots.items()):
        body = "\n".join(f"{_num(x)} {_num(u)}" for x, u in zip(disc.centers, state.interior))
        blocks.append(f"# t = {_num(t)}\n{body}\n")
    return "\n\n".join(blocks)


def write_snapshots(
    out_dir: Path, stem: str, disc: Discretization, snapshots: Mapping[float, SolverState]
) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for i, (t, state) in enumerate(sorted(snapshots.items())):
        path = out_dir / f"{stem}_snap{i:02d}_t{t:g}.csv"
        path.write_text(snapshot_csv(disc, state), encoding="utf-8", newline="\n")
        written.append(path)
    dat = out_dir / f"{stem}.dat"
    dat.write_text(snapshot_dat(disc, snapshots), encoding="utf-8", newline="\n")
    written.append(dat)
    return written

# }}}
