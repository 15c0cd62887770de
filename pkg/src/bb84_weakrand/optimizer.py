"""Deterministic box-constrained minimization of the split-processing rate.

The worst case over eavesdropper strategies reduces to a five-variable
box search: the basis-side hidden-variable weight, one conditional
basis probability, and three of the four bit error rates.  The second
conditional basis probability is eliminated by the observed basis
balance, the fourth bit error rate by the observed QBER, and the phase
errors by their closed-form adversarial worst case.  A coarse
deterministic grid seeds a handful of Nelder-Mead refinements;
reproducibility is favoured over solver sophistication.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibilityError, ValidationError
from .keyrate import (
    DeviationParams,
    HiddenVariableModel,
    KeyRateResult,
    TwoStepScenario,
    evaluate_two_step_scenario,
    one_step_delta,
    phase_gap_bound,
)

PENALTY_BASE = 1e3
PENALTY_CAP = 1e6
DEGENERATE_AXIS_TOL = 1e-15
_TINY = 1e-15


@dataclass(frozen=True)
class SolverOptions:
    """Knobs for the grid-plus-simplex search; defaults favour reproducibility."""

    grid_points: int = 9
    refine_starts: int = 10
    max_iterations: int = 500
    objective_tol: float = 1e-6
    variable_tol: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.grid_points < 2:
            raise ValidationError("grid_points must be at least 2")
        if self.refine_starts < 0:
            raise ValidationError("refine_starts must be non-negative")
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be positive")


@dataclass(frozen=True)
class TwoStepProblem:
    """Observed quantities pinning the worst-case search.

    q_target is the total sifted QBER; observed_basis_prob the measured
    rectilinear-basis probability (1/2 in the symmetric protocol).
    """

    q_target: float
    dev: DeviationParams
    observed_basis_prob: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.q_target <= 0.5:
            raise ValidationError(f"q_target={self.q_target!r} outside [0, 0.5]")
        if not 0.0 < self.observed_basis_prob < 1.0:
            raise ValidationError(
                f"observed_basis_prob={self.observed_basis_prob!r} outside (0, 1)"
            )


@dataclass(frozen=True)
class OptimizationResult:
    """Worst-case rate, the scenario achieving it, and solver bookkeeping."""

    min_rate: KeyRateResult
    argmin: TwoStepScenario
    solver_report: dict

    def to_dict(self) -> dict:
        return {
            "min_rate": self.min_rate.to_dict(),
            "argmin": self.argmin.to_dict(),
            "solver_report": dict(self.solver_report),
        }


def _entropy_vec(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, 0.0, 1.0)
    out = np.zeros_like(x)
    interior = (x > 0.0) & (x < 1.0)
    xi = x[interior]
    out[interior] = -xi * np.log2(xi) - (1.0 - xi) * np.log2(1.0 - xi)
    return out


def _worst_phase_vec(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    return np.where((lo <= 0.5) & (0.5 <= hi), 0.5, np.where(hi < 0.5, hi, lo))


def _reduced_objective_vec(problem: TwoStepProblem, points: np.ndarray) -> np.ndarray:
    """Penalised rate at each row (p_lambda1, a0, e_b00, e_b01, e_b10).

    Feasible rows get the exact split-processing rate with worst-case
    phase errors; rows whose eliminated variables fall outside their own
    bounds get the rate at the clamped point plus a large finite penalty
    and the distance to feasibility.
    """
    p = points[:, 0]
    a0 = points[:, 1]
    e00 = points[:, 2]
    e01 = points[:, 3]
    e10 = points[:, 4]
    q = problem.q_target
    rec_target = problem.observed_basis_prob
    gap = phase_gap_bound(problem.dev.eps0)
    band_lo = max(0.0, 0.5 - problem.dev.eps1)
    band_hi = min(1.0, 0.5 + problem.dev.eps1)

    penalty = np.zeros_like(p)
    one_minus_p = 1.0 - p
    collapsed = one_minus_p < _TINY

    # Eliminate the second basis probability via the observed basis balance.
    a1 = np.where(collapsed, 0.5, (rec_target - p * a0) / np.maximum(one_minus_p, _TINY))
    penalty += np.where(collapsed, np.abs(p * a0 - rec_target), 0.0)
    penalty += np.maximum(band_lo - a1, 0.0) + np.maximum(a1 - band_hi, 0.0)
    a1 = np.clip(a1, band_lo, band_hi)

    p_rec1 = p * a0
    p_rec2 = one_minus_p * a1
    p_dia1 = p * (1.0 - a0)
    p_dia2 = one_minus_p * (1.0 - a1)

    # Eliminate the last bit error rate via the observed QBER.
    residual = q - p_rec1 * e00 - p_rec2 * e10 - p_dia1 * e01
    weightless = p_dia2 < _TINY
    e11 = np.where(weightless, 0.0, residual / np.maximum(p_dia2, _TINY))
    penalty += np.where(weightless, np.abs(residual), 0.0)
    penalty += np.maximum(-e11, 0.0) + np.maximum(e11 - 1.0, 0.0)
    e11 = np.clip(e11, 0.0, 1.0)

    p_rec = p_rec1 + p_rec2
    p_dia = p_dia1 + p_dia2
    rec_safe = np.maximum(p_rec, _TINY)
    dia_safe = np.maximum(p_dia, _TINY)

    e_recbit = (p_rec1 * e00 + p_rec2 * e10) / rec_safe
    e_diabit = (p_dia1 * e01 + p_dia2 * e11) / dia_safe

    # Adversarial phase errors: the weighted cross-basis band point nearest 1/2.
    rec_lo = (p_rec1 * np.maximum(e01 - gap, 0.0) + p_rec2 * np.maximum(e11 - gap, 0.0)) / rec_safe
    rec_hi = (p_rec1 * np.minimum(e01 + gap, 1.0) + p_rec2 * np.minimum(e11 + gap, 1.0)) / rec_safe
    dia_lo = (p_dia1 * np.maximum(e00 - gap, 0.0) + p_dia2 * np.maximum(e10 - gap, 0.0)) / dia_safe
    dia_hi = (p_dia1 * np.minimum(e00 + gap, 1.0) + p_dia2 * np.minimum(e10 + gap, 1.0)) / dia_safe
    e_recpha = _worst_phase_vec(rec_lo, rec_hi)
    e_diapha = _worst_phase_vec(dia_lo, dia_hi)

    rec_term = np.where(
        p_rec > 0.0, p_rec * (1.0 - _entropy_vec(e_recbit) - _entropy_vec(e_recpha)), 0.0
    )
    dia_term = np.where(
        p_dia > 0.0, p_dia * (1.0 - _entropy_vec(e_diabit) - _entropy_vec(e_diapha)), 0.0
    )
    rate = rec_term + dia_term
    penalty = np.minimum(penalty, PENALTY_CAP)
    return np.where(penalty > 0.0, rate + PENALTY_BASE + penalty, rate)


def _entropy(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def _reduced_objective_scalar(
    problem: TwoStepProblem, p: float, a0: float, e00: float, e01: float, e10: float
) -> float:
    """Plain-float twin of :func:`_reduced_objective_vec` for simplex calls."""
    q = problem.q_target
    rec_target = problem.observed_basis_prob
    gap = phase_gap_bound(problem.dev.eps0)
    band_lo = max(0.0, 0.5 - problem.dev.eps1)
    band_hi = min(1.0, 0.5 + problem.dev.eps1)

    penalty = 0.0
    one_minus_p = 1.0 - p
    if one_minus_p < _TINY:
        a1 = 0.5
        penalty += abs(p * a0 - rec_target)
    else:
        a1 = (rec_target - p * a0) / one_minus_p
    penalty += max(band_lo - a1, 0.0) + max(a1 - band_hi, 0.0)
    a1 = min(max(a1, band_lo), band_hi)

    p_rec1, p_rec2 = p * a0, one_minus_p * a1
    p_dia1, p_dia2 = p * (1.0 - a0), one_minus_p * (1.0 - a1)

    residual = q - p_rec1 * e00 - p_rec2 * e10 - p_dia1 * e01
    if p_dia2 < _TINY:
        e11 = 0.0
        penalty += abs(residual)
    else:
        e11 = residual / p_dia2
    penalty += max(-e11, 0.0) + max(e11 - 1.0, 0.0)
    e11 = min(max(e11, 0.0), 1.0)

    p_rec = p_rec1 + p_rec2
    p_dia = p_dia1 + p_dia2
    rate = 0.0
    if p_rec > 0.0:
        e_recbit = (p_rec1 * e00 + p_rec2 * e10) / p_rec
        lo = (p_rec1 * max(e01 - gap, 0.0) + p_rec2 * max(e11 - gap, 0.0)) / p_rec
        hi = (p_rec1 * min(e01 + gap, 1.0) + p_rec2 * min(e11 + gap, 1.0)) / p_rec
        e_recpha = 0.5 if lo <= 0.5 <= hi else (hi if hi < 0.5 else lo)
        rate += p_rec * (1.0 - _entropy(min(max(e_recbit, 0.0), 1.0)) - _entropy(e_recpha))
    if p_dia > 0.0:
        e_diabit = (p_dia1 * e01 + p_dia2 * e11) / p_dia
        lo = (p_dia1 * max(e00 - gap, 0.0) + p_dia2 * max(e10 - gap, 0.0)) / p_dia
        hi = (p_dia1 * min(e00 + gap, 1.0) + p_dia2 * min(e10 + gap, 1.0)) / p_dia
        e_diapha = 0.5 if lo <= 0.5 <= hi else (hi if hi < 0.5 else lo)
        rate += p_dia * (1.0 - _entropy(min(max(e_diabit, 0.0), 1.0)) - _entropy(e_diapha))

    if penalty > 0.0:
        return rate + PENALTY_BASE + min(penalty, PENALTY_CAP)
    return rate


def _grid_axes(bounds: list[tuple[float, float]], grid_points: int) -> list[np.ndarray]:
    axes = []
    for lo, hi in bounds:
        if hi < lo:
            raise ValidationError(f"empty box: bound ({lo!r}, {hi!r})")
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValidationError(f"bounds must be finite, got ({lo!r}, {hi!r})")
        if hi - lo <= DEGENERATE_AXIS_TOL:
            axes.append(np.array([lo]))
        else:
            axes.append(np.linspace(lo, hi, grid_points))
    return axes


def _grid_points_array(axes: list[np.ndarray]) -> np.ndarray:
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _refine(objective, start, bounds, opts):
    """Nelder-Mead polish of one start, with degenerate axes held fixed."""
    from scipy.optimize import minimize

    free = [i for i, (lo, hi) in enumerate(bounds) if hi - lo > DEGENERATE_AXIS_TOL]
    if not free:
        return np.asarray(start, dtype=float), float(objective(np.asarray(start))), 0

    template = np.asarray(start, dtype=float).copy()

    def reduced(x):
        full = template.copy()
        full[free] = x
        return objective(full)

    result = minimize(
        reduced,
        x0=template[free],
        method="Nelder-Mead",
        bounds=[bounds[i] for i in free],
        options={
            "maxiter": opts.max_iterations,
            "fatol": opts.objective_tol,
            "xatol": opts.variable_tol,
        },
    )
    point = template.copy()
    point[free] = np.clip(
        result.x, [bounds[i][0] for i in free], [bounds[i][1] for i in free]
    )
    return point, float(objective(point)), int(result.nit)


def _box_search(objective, bounds, opts, vectorized=None):
    """Grid scan plus simplex refinement; returns (point, value, report)."""
    axes = _grid_axes(bounds, opts.grid_points)
    points = _grid_points_array(axes)
    if vectorized is not None:
        values = np.asarray(vectorized(points), dtype=float)
    else:
        values = np.array([objective(row) for row in points], dtype=float)

    # Grid enumeration is lexicographic, so a stable sort makes tie-breaking
    # on the best cells deterministic.
    order = np.argsort(values, kind="stable")
    best_idx = order[0]
    best_point = points[best_idx].copy()
    best_value = float(values[best_idx])
    trace = [best_value]

    total_iterations = 0
    n_starts = min(opts.refine_starts, len(points))
    for idx in order[:n_starts]:
        point, value, iterations = _refine(objective, points[idx], bounds, opts)
        total_iterations += iterations
        if value < best_value or (
            value == best_value and tuple(point) < tuple(best_point)
        ):
            best_value = value
            best_point = point
        trace.append(best_value)

    report = {
        "grid_points_per_axis": opts.grid_points,
        "grid_evaluations": int(len(points)),
        "restarts": int(n_starts),
        "iterations": int(total_iterations),
        "best_objective_trace": [float(v) for v in trace],
        "seed": int(opts.seed),
    }
    return best_point, best_value, report


def minimize_box(objective, bounds, opts: SolverOptions | None = None):
    """Deterministic minimum of ``objective`` over a finite box.

    Scans a uniform grid (``opts.grid_points`` per non-degenerate axis),
    then polishes the best ``opts.refine_starts`` cells with Nelder-Mead.
    Returns ``(point, value)``; identical inputs give identical output.
    """
    opts = opts or SolverOptions()
    bounds = [(float(lo), float(hi)) for lo, hi in bounds]
    point, value, _ = _box_search(objective, bounds, opts)
    return point, value


def _reconstruct_scenario(problem: TwoStepProblem, v: np.ndarray) -> TwoStepScenario:
    """Rebuild the full scenario (eliminated variables included) from a point."""
    p, a0, e00, e01, e10 = (float(x) for x in v)
    rec_target = problem.observed_basis_prob
    gap = phase_gap_bound(problem.dev.eps0)
    band_lo = max(0.0, 0.5 - problem.dev.eps1)
    band_hi = min(1.0, 0.5 + problem.dev.eps1)

    if 1.0 - p < _TINY:
        a1 = 0.5
    else:
        a1 = (rec_target - p * a0) / (1.0 - p)
    a1 = min(max(a1, band_lo), band_hi)

    p_rec1, p_rec2 = p * a0, (1.0 - p) * a1
    p_dia1, p_dia2 = p * (1.0 - a0), (1.0 - p) * (1.0 - a1)
    residual = problem.q_target - p_rec1 * e00 - p_rec2 * e10 - p_dia1 * e01
    e11 = 0.0 if p_dia2 < _TINY else residual / p_dia2
    e11 = min(max(e11, 0.0), 1.0)

    def realize(weights: tuple[float, float], cross: tuple[float, float]) -> tuple[float, float]:
        """Per-component phase errors achieving the worst weighted average."""
        total = weights[0] + weights[1]
        if total <= 0.0:
            return cross
        los = [max(0.0, c - gap) for c in cross]
        his = [min(1.0, c + gap) for c in cross]
        lo = (weights[0] * los[0] + weights[1] * los[1]) / total
        hi = (weights[0] * his[0] + weights[1] * his[1]) / total
        if lo <= 0.5 <= hi:
            worst = 0.5
        else:
            worst = hi if hi < 0.5 else lo
        t = 0.0 if hi - lo <= 0.0 else (worst - lo) / (hi - lo)
        return (
            los[0] + t * (his[0] - los[0]),
            los[1] + t * (his[1] - los[1]),
        )

    e_p00, e_p10 = realize((p_rec1, p_rec2), (e01, e11))
    e_p01, e_p11 = realize((p_dia1, p_dia2), (e00, e10))

    eps0 = problem.dev.eps0
    hv = HiddenVariableModel(
        p_lambda0=0.5,
        p_lambda1=p,
        p_x0_given_l0=(min(1.0, 0.5 + eps0), max(0.0, 0.5 - eps0)),
        p_x1_given_l1=(a0, a1),
    )
    return TwoStepScenario(
        hv=hv,
        e_b00=e00,
        e_b01=e01,
        e_b10=e10,
        e_b11=e11,
        e_p00=e_p00,
        e_p01=e_p01,
        e_p10=e_p10,
        e_p11=e_p11,
    )


def constraint_residuals(problem: TwoStepProblem, scenario: TwoStepScenario) -> dict:
    """Violation amounts (zero when satisfied) of every search constraint."""
    gap = phase_gap_bound(problem.dev.eps0)
    res = {}
    res["basis_balance_rec"] = abs(scenario.p_rec - problem.observed_basis_prob)
    res["basis_balance_dia"] = abs(scenario.p_dia - (1.0 - problem.observed_basis_prob))
    e_recbit = (
        scenario.p_rec1 * scenario.e_b00 + scenario.p_rec2 * scenario.e_b10
    ) / scenario.p_rec if scenario.p_rec > 0 else 0.0
    e_diabit = (
        scenario.p_dia1 * scenario.e_b01 + scenario.p_dia2 * scenario.e_b11
    ) / scenario.p_dia if scenario.p_dia > 0 else 0.0
    res["qber"] = abs(
        scenario.p_rec * e_recbit + scenario.p_dia * e_diabit - problem.q_target
    )
    for i, prob in enumerate(scenario.hv.p_x1_given_l1):
        res[f"basis_band_{i}"] = max(0.0, abs(prob - 0.5) - problem.dev.eps1)
    for i, prob in enumerate(scenario.hv.p_x0_given_l0):
        res[f"bit_band_{i}"] = max(0.0, abs(prob - 0.5) - problem.dev.eps0)
    bands = (
        ("phase_band_rec_0", scenario.e_p00, scenario.e_b01),
        ("phase_band_rec_1", scenario.e_p10, scenario.e_b11),
        ("phase_band_dia_0", scenario.e_p01, scenario.e_b00),
        ("phase_band_dia_1", scenario.e_p11, scenario.e_b10),
    )
    for name, e_p, cross in bands:
        res[name] = max(0.0, abs(e_p - cross) - gap)
    for name in ("e_b00", "e_b01", "e_b10", "e_b11", "e_p00", "e_p01", "e_p10", "e_p11"):
        value = getattr(scenario, name)
        res[f"range_{name}"] = max(0.0, -value) + max(0.0, value - 1.0)
    return res


def solve_two_step(
    problem: TwoStepProblem, opts: SolverOptions | None = None
) -> OptimizationResult:
    """Worst-case split-processing rate compatible with the observations.

    Searches the reduced five-variable box, reconstructs the eliminated
    variables for the minimizer, and re-evaluates it through the exact
    scenario calculator so the reported rate and the reported scenario
    cannot drift apart.
    """
    opts = opts or SolverOptions()
    eps1 = problem.dev.eps1
    bounds = [
        (0.0, 1.0),
        (max(0.0, 0.5 - eps1), min(1.0, 0.5 + eps1)),
        (0.0, 1.0),
        (0.0, 1.0),
        (0.0, 1.0),
    ]

    def scalar(v) -> float:
        return _reduced_objective_scalar(
            problem, float(v[0]), float(v[1]), float(v[2]), float(v[3]), float(v[4])
        )

    def vectorized(points: np.ndarray) -> np.ndarray:
        return _reduced_objective_vec(problem, points)

    point, value, report = _box_search(scalar, bounds, opts, vectorized=vectorized)

    if value >= PENALTY_BASE:
        raise InfeasibilityError(
            f"no feasible eavesdropper strategy found for Q={problem.q_target!r}",
            residual=value - PENALTY_BASE,
        )

    scenario = _reconstruct_scenario(problem, point)
    min_rate = evaluate_two_step_scenario(scenario, problem.dev, use_worst_phase=True)
    residuals = constraint_residuals(problem, scenario)
    report["feasibility_residual"] = max(residuals.values())
    report["one_step_delta"] = one_step_delta(problem.dev)
    return OptimizationResult(min_rate=min_rate, argmin=scenario, solver_report=report)
