"""Parameter sweeps over the closed-form protocol performance.

The closed-form fidelity depends on the coefficient vector only through the
aggregates (p_u, gap), where gap = d - (sum_i alpha_i)^2 (or the P analog),
so contour grids are evaluated directly from those scalars without building
states.  Where a row is feasible, an explicit coefficient vector is also
solved (one distinct coefficient, the rest equal, pivot minimal) and the
protocol engine is run on it to fill the independent ``fidelity_numeric``
column.  Infeasible grid points are emitted with ``feasible=False`` rather
than dropped, so grids keep their full rectangular shape.

Rows are emitted in deterministic lexicographic order: driver value, then
dimension/party axis, then copy count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import InvalidSpecError
from .states import Family, GhzSpec, WSpec
from .ted import (
    ProtocolConfig,
    fidelity_from_success,
    run_ted,
    w_success_probability,
)

CSV_SCHEMA_VERSION = 1

CSV_COLUMNS = (
    "family", "d", "p", "q", "s", "n",
    "alpha0_or_pu", "coeff_gap",
    "ps_per_copy", "ps_overall",
    "fidelity_closed", "fidelity_numeric",
    "feasible",
)

FEAS_TOL = 1e-12


def solve_ghz_coefficients(d: int, alpha0: float, gap: float) -> tuple[float, ...] | None:
    """A coefficient vector with the given first entry and gap, or None.

    Searches the one-distinct-rest-equal family: alpha = (a, y, ..., y, z)
    with (d-2) copies of y, subject to sum of squares 1, sum of entries
    sqrt(d - gap), and a remaining the minimum.
    """
    a = float(alpha0)
    if not 0.0 < a < 1.0:
        return None
    if d * a * a > 1.0 + FEAS_TOL:
        return None  # a cannot be the minimal coefficient
    t2 = d - gap
    if t2 < 0.0:
        return None
    s1 = math.sqrt(t2) - a       # required tail sum
    s2 = 1.0 - a * a             # required tail power
    if s1 <= 0.0 or s2 <= 0.0:
        return None
    if d == 2:
        z = math.sqrt(s2)
        if abs(s1 * s1 - s2) > 1e-9 or z < a - FEAS_TOL:
            return None
        return (a, z)
    k = d - 2
    inner = k * ((k + 1) * s2 - s1 * s1)
    if inner < -1e-9:
        return None
    inner = max(inner, 0.0)
    for sign in (1.0, -1.0):
        y = (s1 * k + sign * math.sqrt(inner)) / (k * (k + 1))
        z = s1 - k * y
        if y >= a - FEAS_TOL and z >= a - FEAS_TOL:
            return (a,) + (y,) * k + (z,)
    return None


def equal_tail_ghz(d: int, p: int, alpha0: float) -> GhzSpec:
    """GHZ spec with all tail coefficients equal: the convergence-curve family."""
    tail = math.sqrt((1.0 - alpha0 * alpha0) / (d - 1))
    return GhzSpec(d, p, (alpha0,) + (tail,) * (d - 1))


def equal_head_w(p: int, beta0: float) -> WSpec:
    """W spec with the first p-1 coefficients equal to beta0."""
    last = 1.0 - (p - 1) * beta0 * beta0
    if last < beta0 * beta0 - FEAS_TOL:
        raise InvalidSpecError(f"beta0 = {beta0} leaves no maximal last coefficient")
    return WSpec(p, (beta0,) * (p - 1) + (math.sqrt(max(last, 0.0)),))


@dataclass(frozen=True)
class SweepGrid:
    """Axis definitions for one sweep; see the preset constructors below."""

    family: Family
    mode: str
    n_values: tuple[int, ...]
    d_values: tuple[int, ...] = ()
    p_values: tuple[int, ...] = ()
    alpha0_values: tuple[float, ...] = ()
    beta0_values: tuple[float, ...] = ()
    pu: float | None = None
    gap: float | None = None
    p: int = 2
    representation: str = "compact"
    extra: dict = field(default_factory=dict, compare=False)


def _base_row(family: str, d: int, p: int, q: int, n: int, driver: float, gap: float) -> dict:
    return {
        "family": family, "d": d, "p": p, "q": q, "s": 0, "n": n,
        "alpha0_or_pu": driver, "coeff_gap": gap,
        "ps_per_copy": math.nan, "ps_overall": math.nan,
        "fidelity_closed": math.nan, "fidelity_numeric": math.nan,
        "feasible": False,
    }


def _fill_from_report(row: dict, report) -> None:
    row["ps_per_copy"] = report.p_success_per_copy
    row["ps_overall"] = report.p_success_overall
    row["fidelity_numeric"] = report.fidelity_numeric
    row["feasible"] = True


def _ghz_gap_rows(grid: SweepGrid) -> list[dict]:
    rows = []
    for a0 in grid.alpha0_values:
        for d in grid.d_values:
            coeffs = solve_ghz_coefficients(d, a0, grid.gap)
            spec = GhzSpec(d, grid.p, coeffs) if coeffs is not None else None
            pu = d * a0 * a0
            for n in grid.n_values:
                row = _base_row("ghz", d, grid.p, 1, n, a0, grid.gap)
                if pu <= 1.0 + FEAS_TOL:
                    row["ps_per_copy"] = min(pu, 1.0)
                    row["ps_overall"] = 1.0 - (1.0 - min(pu, 1.0)) ** (n - 1)
                    row["fidelity_closed"] = fidelity_from_success(
                        min(pu, 1.0), d, grid.gap, n
                    )
                if spec is not None:
                    config = ProtocolConfig(
                        n, Family.GHZ_DIAGONAL, spec, q=1,
                        representation=grid.representation,
                    )
                    _fill_from_report(row, run_ted(config))
                rows.append(row)
    return rows


def _ghz_convergence_rows(grid: SweepGrid) -> list[dict]:
    rows = []
    if len(grid.d_values) != 1:
        raise InvalidSpecError("convergence sweeps take a single dimension value")
    d = grid.d_values[0]
    for a0 in grid.alpha0_values:
        spec = equal_tail_ghz(d, grid.p, a0)
        gap = d - sum(spec.alphas) ** 2
        for n in grid.n_values:
            row = _base_row("ghz", d, grid.p, 1, n, a0, gap)
            config = ProtocolConfig(
                n, Family.GHZ_DIAGONAL, spec, q=1,
                representation=grid.representation,
            )
            report = run_ted(config)
            row["fidelity_closed"] = report.fidelity_closed_form
            _fill_from_report(row, report)
            rows.append(row)
    return rows


def _w_contour_rows(grid: SweepGrid) -> list[dict]:
    rows = []
    pu = grid.pu
    for p in grid.p_values:
        feasible = 0.0 < pu <= 1.0 and 0.0 <= grid.gap <= p - 1
        for n in grid.n_values:
            row = _base_row("w", 2, p, p - 1, n, pu, grid.gap)
            if 0.0 < pu <= 1.0:
                row["ps_per_copy"] = pu
                row["ps_overall"] = 1.0 - (1.0 - pu) ** (n - 1)
                row["fidelity_closed"] = fidelity_from_success(pu, p, grid.gap, n)
            row["feasible"] = feasible
            rows.append(row)
    return rows


def _w_convergence_rows(grid: SweepGrid) -> list[dict]:
    rows = []
    if len(grid.p_values) != 1:
        raise InvalidSpecError("convergence sweeps take a single party count")
    p = grid.p_values[0]
    for b0 in grid.beta0_values:
        spec = equal_head_w(p, b0)
        gap = p - sum(spec.betas) ** 2
        pu = w_success_probability(spec)
        for n in grid.n_values:
            row = _base_row("w", 2, p, p - 1, n, b0, gap)
            config = ProtocolConfig(
                n, Family.W_SINGLE_EXCITATION, spec, q=p - 1,
                representation=grid.representation,
            )
            report = run_ted(config)
            row["fidelity_closed"] = report.fidelity_closed_form
            _fill_from_report(row, report)
            rows.append(row)
    return rows


def grid_rows(grid: SweepGrid) -> list[dict]:
    """Materialize a grid as CSV-ready row dicts in deterministic order."""
    if grid.mode in ("ghz-contour", "ghz-dimension"):
        return _ghz_gap_rows(grid)
    if grid.mode == "ghz-convergence":
        return _ghz_convergence_rows(grid)
    if grid.mode == "w-contour":
        return _w_contour_rows(grid)
    if grid.mode == "w-convergence":
        return _w_convergence_rows(grid)
    raise ValueError(f"unknown sweep mode {grid.mode!r}")


def preset_grid(name: str, **overrides) -> SweepGrid:
    """Named sweeps for the standard performance grids."""
    presets = {
        # fidelity contour over (N, d) at fixed alpha0 and gap
        "ghz-contour": dict(
            family=Family.GHZ_DIAGONAL, mode="ghz-contour",
            alpha0_values=(1.0 / math.sqrt(10.0),), gap=0.5,
            d_values=tuple(range(2, 11)), n_values=tuple(range(2, 21)), p=2,
        ),
        # fidelity vs N for three starting overlaps, equal tail coefficients
        "ghz-convergence": dict(
            family=Family.GHZ_DIAGONAL, mode="ghz-convergence",
            alpha0_values=(
                1.0 / math.sqrt(8.0), 1.0 / math.sqrt(9.0), 1.0 / math.sqrt(10.0)
            ),
            d_values=(3,), n_values=tuple(range(2, 51)), p=3,
        ),
        # fidelity and success probability vs d at fixed N
        "ghz-dimension": dict(
            family=Family.GHZ_DIAGONAL, mode="ghz-dimension",
            alpha0_values=(1.0 / math.sqrt(10.0),), gap=0.5,
            d_values=tuple(range(2, 11)), n_values=(2,), p=2,
        ),
        # fidelity contour over (N, P) driven directly by (p_u, gap)
        "w-contour": dict(
            family=Family.W_SINGLE_EXCITATION, mode="w-contour",
            pu=0.3, gap=0.5,
            p_values=tuple(range(3, 21)), n_values=tuple(range(2, 21)),
        ),
        # fidelity vs N for three starting first coefficients
        "w-convergence": dict(
            family=Family.W_SINGLE_EXCITATION, mode="w-convergence",
            beta0_values=(0.5, 1.0 / math.sqrt(5.0), 1.0 / math.sqrt(6.0)),
            p_values=(3,), n_values=tuple(range(2, 51)),
        ),
    }
    if name not in presets:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(presets)}")
    cfg = presets[name]
    cfg.update(overrides)
    return SweepGrid(**cfg)
