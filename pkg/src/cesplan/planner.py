"""Multi-objective siting pipeline: comparison-matrix weighting, per-location
normalization bounds, weighted solves and exhaustive location enumeration.

Siting is a one-hot choice over the non-slack nodes, so the mixed-integer
program is solved exactly by enumerating one convex QP pipeline per
candidate and taking the best weighted objective; ties go to the lowest
node id.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .cesopt import (
    CesDesign,
    ModelInstance,
    Schedule,
    build_model,
    evaluate_objectives,
    extract_schedule,
)
from .errors import (
    AllLocationsInfeasible,
    DegenerateSpan,
    InconsistentJudgments,
    NonReciprocal,
    SolveFailed,
)
from .netmodel import line_flows
from .qpcore import QpSolution, SolverSettings, Status, solve_qp
from .scenario import Scenario

logger = logging.getLogger(__name__)

OBJECTIVES = ("loss", "trade", "invest")

# Saaty random consistency indices by matrix order.
RANDOM_INDEX = {1: 0.0, 2: 0.0, 3: 0.58, 4: 0.9, 5: 1.12, 6: 1.24, 7: 1.32, 8: 1.41, 9: 1.45}

SPAN_REL_TOL = 1e-9


@dataclass(frozen=True)
class AhpResult:
    """Principal-eigenvector weights of a pairwise comparison matrix."""

    weights: tuple[float, ...]
    lambda_max: float
    consistency_index: float
    consistency_ratio: float


def ahp_weights(matrix) -> AhpResult:
    """Weights from a reciprocal Saaty-scale comparison matrix.

    Power iteration on the principal right eigenvector to 1e-12; a
    consistency ratio above 0.1 warns but does not fail.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 2:
        raise NonReciprocal(f"comparison matrix must be square, got {m.shape}")
    n = m.shape[0]
    if np.any(m <= 0):
        raise NonReciprocal("comparison entries must be positive")
    if not np.allclose(np.diag(m), 1.0, atol=1e-9):
        raise NonReciprocal("comparison matrix diagonal must be 1")
    if not np.allclose(m * m.T, 1.0, rtol=1e-6, atol=1e-9):
        raise NonReciprocal("matrix violates reciprocity m[i][j] = 1/m[j][i]")
    if np.any(m > 9.0 + 1e-9) or np.any(m < 1.0 / 9.0 - 1e-12):
        raise NonReciprocal("entries outside the Saaty scale [1/9, 9]")

    v = np.full(n, 1.0 / n)
    for _ in range(10_000):
        w = m @ v
        v_new = w / w.sum()
        if np.max(np.abs(v_new - v)) < 1e-12:
            v = v_new
            break
        v = v_new
    lambda_max = float((m @ v).sum())
    ci = (lambda_max - n) / (n - 1)
    cr = ci / RANDOM_INDEX.get(n, 1.49) if n > 2 else 0.0
    if cr > 0.1:
        warnings.warn(
            f"consistency ratio {cr:.3f} exceeds 0.1", InconsistentJudgments
        )
    return AhpResult(
        weights=tuple(float(x) for x in v),
        lambda_max=lambda_max,
        consistency_index=float(ci),
        consistency_ratio=float(cr),
    )


@dataclass(frozen=True)
class NormalizationContext:
    """Utopia/nadir bounds and the full objective matrix behind them.

    ``objective_matrix[k][i]`` is objective i evaluated at the minimizer of
    objective k; utopia is its diagonal, nadir the column maximum.  An
    objective whose nadir-utopia span vanishes is flagged degenerate and
    dropped from the weighted combination.
    """

    utopia: np.ndarray
    nadir: np.ndarray
    objective_matrix: np.ndarray = field(repr=False)
    degenerate: np.ndarray = field(repr=False)

    def spans(self) -> np.ndarray:
        return self.nadir - self.utopia


def nadir_utopia(objective_matrix) -> NormalizationContext:
    """Bounds per objective from the three single-objective minimizers."""
    f_mat = np.asarray(objective_matrix, dtype=float)
    if f_mat.shape != (3, 3) or not np.all(np.isfinite(f_mat)):
        raise ValueError(f"objective matrix must be finite 3x3, got {f_mat.shape}")
    utopia = np.diag(f_mat).copy()
    nadir = f_mat.max(axis=0)
    degenerate = (nadir - utopia) <= SPAN_REL_TOL * np.maximum(1.0, np.abs(utopia))
    if degenerate.all():
        raise DegenerateSpan("all objectives have coincident utopia and nadir")
    return NormalizationContext(
        utopia=utopia, nadir=nadir, objective_matrix=f_mat, degenerate=degenerate
    )


@dataclass(frozen=True)
class SolveDiagnostics:
    status: str
    iterations: int
    primal_residual: float
    dual_residual: float
    polished: bool

    @classmethod
    def from_solution(cls, sol: QpSolution) -> "SolveDiagnostics":
        return cls(
            status=sol.status.value,
            iterations=sol.iterations,
            primal_residual=sol.primal_residual,
            dual_residual=sol.dual_residual,
            polished=sol.polished,
        )


@dataclass(frozen=True)
class SingleObjectiveResult:
    which: str
    x: np.ndarray = field(repr=False)
    values: tuple[float, float, float]
    diagnostics: SolveDiagnostics


def solve_single_objective(
    model: ModelInstance, which: str, settings: SolverSettings | None = None
) -> SingleObjectiveResult:
    """Minimize one raw objective over the full feasible set; reports all
    three objective values at the minimizer."""
    coeffs = {name: float(name == which) for name in OBJECTIVES}
    if which not in coeffs:
        raise ValueError(f"unknown objective {which!r}")
    sol = solve_qp(
        model.qp(coeffs["loss"], coeffs["trade"], coeffs["invest"]),
        settings or model.scenario.solver,
    )
    if sol.status is not Status.OPTIMAL:
        raise SolveFailed(
            f"{which} solve at node {model.location}: {sol.status.value}"
        )
    return SingleObjectiveResult(
        which=which,
        x=sol.x,
        values=evaluate_objectives(model, sol.x),
        diagnostics=SolveDiagnostics.from_solution(sol),
    )


@dataclass(frozen=True)
class WeightedResult:
    x: np.ndarray = field(repr=False)
    raw: tuple[float, float, float]
    normalized: float
    weights: tuple[float, float, float]
    effective_weights: tuple[float, float, float]
    diagnostics: SolveDiagnostics


def normalized_value(ctx: NormalizationContext, raw, weights) -> float:
    """Weighted sum of the normalized objective terms (degenerate spans
    dropped)."""
    raw = np.asarray(raw, dtype=float)
    w = np.asarray(weights, dtype=float)
    spans = ctx.spans()
    total = 0.0
    for i in range(3):
        if not ctx.degenerate[i]:
            total += w[i] * (raw[i] - ctx.utopia[i]) / spans[i]
    return float(total)


def _effective_weights(ctx: NormalizationContext, weights) -> np.ndarray:
    """Normalize to sum one; weight on degenerate objectives is
    redistributed proportionally over the remaining ones."""
    w = np.asarray(weights, dtype=float)
    if w.shape != (3,):
        raise ValueError("exactly three weights required")
    if np.any(w < 0) or w.sum() <= 0:
        raise ValueError("weights must be nonnegative with positive sum")
    w = w / w.sum()
    active = ~ctx.degenerate
    if not active.any():
        raise DegenerateSpan("no objective with a usable normalization span")
    w_active = np.where(active, w, 0.0)
    if w_active.sum() <= 0:
        # All weight sat on degenerate objectives; spread it evenly instead.
        w_active = active / active.sum()
    else:
        w_active = w_active / w_active.sum()
    if ctx.degenerate.any():
        dropped = [OBJECTIVES[i] for i in range(3) if ctx.degenerate[i]]
        logger.warning("degenerate normalization span for %s; weight redistributed", dropped)
    return w_active


def solve_weighted(
    model: ModelInstance,
    ctx: NormalizationContext,
    weights,
    settings: SolverSettings | None = None,
) -> WeightedResult:
    """Minimize the weighted sum of span-normalized objectives."""
    w_in = np.asarray(weights, dtype=float)
    w_eff = _effective_weights(ctx, w_in)
    spans = ctx.spans()
    coeffs = np.where(ctx.degenerate, 0.0, w_eff / np.where(ctx.degenerate, 1.0, spans))
    sol = solve_qp(
        model.qp(float(coeffs[0]), float(coeffs[1]), float(coeffs[2])),
        settings or model.scenario.solver,
    )
    if sol.status is not Status.OPTIMAL:
        raise SolveFailed(
            f"weighted solve at node {model.location}: {sol.status.value}"
        )
    raw = evaluate_objectives(model, sol.x)
    return WeightedResult(
        x=sol.x,
        raw=raw,
        normalized=normalized_value(ctx, raw, w_eff),
        weights=tuple(float(v) for v in (w_in / w_in.sum())),
        effective_weights=tuple(float(v) for v in w_eff),
        diagnostics=SolveDiagnostics.from_solution(sol),
    )


@dataclass(frozen=True)
class CandidateReport:
    """Planning outcome for one candidate location (a leaderboard row)."""

    location: int
    feasible: bool
    reason: str
    e_cap_kwh: float
    p_rate_kw: float
    loss_kwh: float
    trade_aud: float
    invest_aud: float
    weighted_objective: float
    context: NormalizationContext | None = field(repr=False, default=None)
    diagnostics: dict = field(repr=False, default_factory=dict)


@dataclass(frozen=True)
class PlanResult:
    """Chosen siting/sizing with its schedule and the full leaderboard."""

    location: int
    design: CesDesign
    schedule: Schedule
    weights: tuple[float, float, float]
    raw_objectives: tuple[float, float, float]
    loss_kwh: float
    normalized_objective: float
    leaderboard: tuple[CandidateReport, ...]
    normalization: str


def resolve_weights(scenario: Scenario, weights=None) -> tuple[float, float, float]:
    """Explicit weights win; otherwise the scenario's weights config (values
    or comparison matrix)."""
    if weights is not None:
        w = np.asarray(weights, dtype=float)
    elif scenario.weights.values is not None:
        w = np.asarray(scenario.weights.values, dtype=float)
    else:
        w = np.asarray(ahp_weights(scenario.weights.ahp_matrix).weights, dtype=float)
    if w.shape != (3,) or np.any(w < 0) or w.sum() <= 0:
        raise ValueError("weights must be three nonnegative values with positive sum")
    return tuple(float(v) for v in (w / w.sum()))


def plan(
    scenario: Scenario,
    weights=None,
    fixed_location: int | None = None,
    normalization: str = "per_location",
    settings: SolverSettings | None = None,
) -> PlanResult:
    """Full siting study: per candidate location, compute the normalization
    bounds and the weighted optimum; pick the best candidate.

    ``fixed_location`` restricts the enumeration to one node (the arbitrary-
    placement comparison cases).  ``normalization`` is per_location or
    global (one shared utopia/nadir across candidates).
    """
    if normalization not in ("per_location", "global"):
        raise ValueError("normalization must be 'per_location' or 'global'")
    w = resolve_weights(scenario, weights)
    settings = settings or scenario.solver
    dt = scenario.horizon.dt_hours
    candidates = (
        [fixed_location] if fixed_location is not None
        else list(range(1, scenario.network.node_count + 1))
    )

    models: dict[int, ModelInstance] = {}
    singles: dict[int, dict[str, SingleObjectiveResult]] = {}
    failures: dict[int, str] = {}
    for node in candidates:
        try:
            model = build_model(scenario, node)
            singles[node] = {
                which: solve_single_objective(model, which, settings)
                for which in OBJECTIVES
            }
            models[node] = model
        except SolveFailed as exc:
            failures[node] = str(exc)

    contexts: dict[int, NormalizationContext] = {}
    if normalization == "global" and singles:
        shared = _global_context(singles)
        contexts = {node: shared for node in singles}
    else:
        for node, res in singles.items():
            try:
                contexts[node] = nadir_utopia([res[w_].values for w_ in OBJECTIVES])
            except DegenerateSpan as exc:
                failures[node] = str(exc)

    rows: list[CandidateReport] = []
    winners: dict[int, WeightedResult] = {}
    for node in candidates:
        if node in failures:
            rows.append(
                CandidateReport(
                    location=node,
                    feasible=False,
                    reason=failures[node],
                    e_cap_kwh=float("nan"),
                    p_rate_kw=float("nan"),
                    loss_kwh=float("nan"),
                    trade_aud=float("nan"),
                    invest_aud=float("nan"),
                    weighted_objective=float("inf"),
                )
            )
            continue
        model = models[node]
        ctx = contexts[node]
        try:
            result = solve_weighted(model, ctx, w, settings)
        except (SolveFailed, DegenerateSpan) as exc:
            rows.append(
                CandidateReport(
                    location=node,
                    feasible=False,
                    reason=str(exc),
                    e_cap_kwh=float("nan"),
                    p_rate_kw=float("nan"),
                    loss_kwh=float("nan"),
                    trade_aud=float("nan"),
                    invest_aud=float("nan"),
                    weighted_objective=float("inf"),
                )
            )
            continue
        winners[node] = result
        design, _ = extract_schedule(model, result.x)
        rows.append(
            CandidateReport(
                location=node,
                feasible=True,
                reason="",
                e_cap_kwh=design.e_cap_kwh,
                p_rate_kw=design.p_rate_kw,
                loss_kwh=result.raw[0] * dt,
                trade_aud=result.raw[1],
                invest_aud=result.raw[2],
                weighted_objective=result.normalized,
                context=ctx,
                diagnostics={
                    "weighted": result.diagnostics.__dict__,
                    "singles": {
                        which: singles[node][which].diagnostics.__dict__
                        for which in OBJECTIVES
                    },
                },
            )
        )

    if not winners:
        raise AllLocationsInfeasible(
            "; ".join(f"node {n}: {r}" for n, r in sorted(failures.items()))
        )

    best_node = min(winners, key=lambda n: (winners[n].normalized, n))
    best = winners[best_node]
    design, schedule = extract_schedule(models[best_node], best.x)
    return PlanResult(
        location=best_node,
        design=design,
        schedule=schedule,
        weights=w,
        raw_objectives=best.raw,
        loss_kwh=best.raw[0] * dt,
        normalized_objective=best.normalized,
        leaderboard=tuple(rows),
        normalization=normalization,
    )


def _global_context(singles) -> NormalizationContext:
    """Shared bounds: each objective's global minimizer over all candidates
    defines a row of the shared objective matrix."""
    f_rows = []
    for k, which in enumerate(OBJECTIVES):
        best_node = min(singles, key=lambda n: (singles[n][which].values[k], n))
        f_rows.append(singles[best_node][which].values)
    return nadir_utopia(f_rows)


@dataclass(frozen=True)
class BaselineResult:
    """Objectives of the network without any storage unit."""

    loss_kw_steps: float
    loss_kwh: float
    trade_aud: float
    customers_grid_kw: np.ndarray = field(repr=False)
    loss_kw: np.ndarray = field(repr=False)


def baseline_no_ces(scenario: Scenario) -> BaselineResult:
    """Evaluate loss and trading cost with every customer transacting its
    full net position with the grid and no storage anywhere."""
    net = scenario.network
    p_fixed, q_fixed = scenario.nodal_fixed_absorption()
    flows_p, flows_q = line_flows(net, p_fixed, q_fixed)
    r_vec = np.array([line.r_ohm for line in net.lines])
    loss_kw = (r_vec[:, None] * (flows_p**2 + flows_q**2) * 1e3 / net.u0).sum(axis=0)
    price = scenario.price_series()
    dt = scenario.horizon.dt_hours
    customers_grid = p_fixed.sum(axis=0)
    trade = float(np.sum(price * customers_grid) * dt)
    loss_total = float(loss_kw.sum())
    return BaselineResult(
        loss_kw_steps=loss_total,
        loss_kwh=loss_total * dt,
        trade_aud=trade,
        customers_grid_kw=customers_grid,
        loss_kw=loss_kw,
    )
