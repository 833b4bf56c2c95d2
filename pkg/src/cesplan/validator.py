"""Independent replay of a (design, schedule) pair against the scenario.

Every constraint family and all three objectives are recomputed from the raw
series by direct summation and per-line recursion; nothing is reused from
the optimization model or the solver, so a bug on either side shows up as a
disagreement here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cesopt import CesDesign, Schedule
from .errors import DimensionMismatch
from .scenario import Scenario


@dataclass(frozen=True)
class Tolerances:
    """Acceptance slack per unit; one order looser than solver accuracy."""

    kw: float = 1e-6
    kwh: float = 1e-6
    v2: float = 1e-7
    objective_rel: float = 1e-5
    simultaneous_kw: float = 1e-6


@dataclass(frozen=True)
class FamilyCheck:
    name: str
    max_violation: float
    worst: str
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "max_violation": self.max_violation,
            "worst": self.worst,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[FamilyCheck, ...]
    objectives: tuple[float, float, float]
    reported_objectives: tuple[float, float, float] | None
    objective_mismatch: float
    flags: dict = field(default_factory=dict)
    passed: bool = True

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
            "objectives": {
                "loss_kw_steps": self.objectives[0],
                "trade_aud": self.objectives[1],
                "invest_aud": self.objectives[2],
            },
            "reported_objectives": (
                None
                if self.reported_objectives is None
                else {
                    "loss_kw_steps": self.reported_objectives[0],
                    "trade_aud": self.reported_objectives[1],
                    "invest_aud": self.reported_objectives[2],
                }
            ),
            "objective_mismatch_rel": self.objective_mismatch,
            "flags": self.flags,
        }


def _worst_index(values: np.ndarray) -> tuple:
    flat = int(np.argmax(values))
    return np.unravel_index(flat, values.shape)


def validate(
    scenario: Scenario,
    design: CesDesign,
    schedule: Schedule,
    reported_objectives=None,
    tolerances: Tolerances | None = None,
) -> ValidationReport:
    """Recompute every constraint family and objective for the given plan."""
    tol = tolerances or Tolerances()
    net = scenario.network
    ces = scenario.ces
    steps = scenario.horizon.steps
    dt = scenario.horizon.dt_hours
    n_cust = len(scenario.customers)

    for name, series, shape in (
        ("charge_kw", schedule.charge_kw, (steps,)),
        ("discharge_kw", schedule.discharge_kw, (steps,)),
        ("energy_kwh", schedule.energy_kwh, (steps,)),
        ("grid_ces_kw", schedule.grid_ces_kw, (steps,)),
        ("grid_customer_kw", schedule.grid_customer_kw, (n_cust, steps)),
        ("ces_customer_kw", schedule.ces_customer_kw, (n_cust, steps)),
    ):
        if np.asarray(series).shape != shape:
            raise DimensionMismatch(f"{name} has shape {np.asarray(series).shape}, expected {shape}")

    checks = []

    # Siting: one unit at a non-slack node.
    siting_violation = 0.0 if 1 <= design.location <= net.node_count else 1.0
    checks.append(
        FamilyCheck("siting", siting_violation, f"location={design.location}", 0.0)
    )

    # Customer split: grid + storage share equals load minus PV, and the
    # grid share obeys the deficit/surplus branch bounds.
    net_pos = np.array([c.net_position() for c in scenario.customers]).reshape(n_cust, steps)
    split_gap = np.abs(
        schedule.grid_customer_kw + schedule.ces_customer_kw - net_pos
    )
    g = schedule.grid_customer_kw
    lower = np.where(net_pos >= 0, 0.0, net_pos)
    upper = np.where(net_pos >= 0, net_pos, 0.0)
    bound_gap = np.maximum(lower - g, 0.0) + np.maximum(g - upper, 0.0)
    exchange_violation = np.maximum(split_gap, bound_gap)
    worst = _worst_index(exchange_violation)
    checks.append(
        FamilyCheck(
            "customer_exchange",
            float(exchange_violation.max()) if exchange_violation.size else 0.0,
            f"customer={worst[0]}, t={worst[1]}" if exchange_violation.size else "",
            tol.kw,
        )
    )

    # Storage-grid identity.
    identity_gap = np.abs(
        schedule.grid_ces_kw
        - schedule.ces_customer_kw.sum(axis=0)
        - schedule.charge_kw
        + schedule.discharge_kw
    )
    checks.append(
        FamilyCheck(
            "ces_grid_identity",
            float(identity_gap.max()),
            f"t={int(np.argmax(identity_gap))}",
            tol.kw,
        )
    )

    # Ratings.
    rating_violation = np.maximum.reduce(
        [
            np.maximum(-schedule.charge_kw, 0.0),
            np.maximum(schedule.charge_kw - design.p_rate_kw, 0.0),
            np.maximum(-schedule.discharge_kw, 0.0),
            np.maximum(schedule.discharge_kw - design.p_rate_kw, 0.0),
        ]
    )
    checks.append(
        FamilyCheck(
            "rating",
            float(rating_violation.max()),
            f"t={int(np.argmax(rating_violation))}",
            tol.kw,
        )
    )

    # Stored-energy recursion replay from the initial level.
    level = schedule.energy0_kwh
    recursion_gap = np.zeros(steps)
    for t in range(steps):
        level = level + (
            ces.eta_ch * schedule.charge_kw[t]
            - schedule.discharge_kw[t] / ces.eta_dis
        ) * dt
        recursion_gap[t] = abs(level - schedule.energy_kwh[t])
        level = schedule.energy_kwh[t]
    init_gap = abs(
        schedule.energy0_kwh - ces.initial_soc_fraction * design.e_cap_kwh
    )
    checks.append(
        FamilyCheck(
            "soc_recursion",
            float(max(recursion_gap.max(), init_gap)),
            f"t={int(np.argmax(recursion_gap))}",
            tol.kwh,
        )
    )

    # SoC band.
    soc_violation = np.maximum(
        ces.lambda_min * design.e_cap_kwh - schedule.energy_kwh, 0.0
    ) + np.maximum(schedule.energy_kwh - ces.lambda_max * design.e_cap_kwh, 0.0)
    checks.append(
        FamilyCheck(
            "soc_bounds",
            float(soc_violation.max()),
            f"t={int(np.argmax(soc_violation))}",
            tol.kwh,
        )
    )

    # Day continuity.
    day_ends = np.arange(1, scenario.horizon.day_count + 1) * 24 - 1
    continuity_gap = np.abs(
        schedule.energy_kwh[day_ends] - schedule.energy0_kwh
    ) - ces.epsilon_continuity_kwh
    continuity_violation = np.maximum(continuity_gap, 0.0)
    checks.append(
        FamilyCheck(
            "day_continuity",
            float(continuity_violation.max()),
            f"day={int(np.argmax(continuity_violation)) + 1}",
            tol.kwh,
        )
    )

    # Sizing boxes with the unit present.
    sizing_violation = max(
        max(ces.e_cap_min_kwh - design.e_cap_kwh, 0.0),
        max(design.e_cap_kwh - ces.e_cap_max_kwh, 0.0),
        max(ces.p_rate_min_kw - design.p_rate_kw, 0.0),
        max(design.p_rate_kw - ces.p_rate_max_kw, 0.0),
    )
    checks.append(FamilyCheck("sizing", float(sizing_violation), "", tol.kwh))

    # Voltage band from replayed absorptions, flows and per-line drops.
    p_nodal, q_nodal = scenario.nodal_fixed_absorption()
    p_nodal = p_nodal.copy()
    p_nodal[design.location - 1] += schedule.charge_kw - schedule.discharge_kw
    flows_p, flows_q, voltages = _replay_network(net, p_nodal, q_nodal)
    voltage_violation = np.maximum(net.u_min - voltages, 0.0) + np.maximum(
        voltages - net.u_max, 0.0
    )
    worst = _worst_index(voltage_violation)
    checks.append(
        FamilyCheck(
            "voltage",
            float(voltage_violation.max()),
            f"node={worst[0] + 1}, t={worst[1]}",
            tol.v2,
        )
    )

    # Objectives recomputed by direct summation.
    r_vec = np.array([line.r_ohm for line in net.lines])
    loss_kw = (r_vec[:, None] * (flows_p**2 + flows_q**2) * 1e3 / net.u0).sum(axis=0)
    loss = float(loss_kw.sum())
    price = scenario.price_series()
    trade = float(
        np.sum(price * (schedule.grid_customer_kw.sum(axis=0) + schedule.grid_ces_kw)) * dt
    )
    invest = float(
        ces.gamma_fixed_aud + ces.delta_aud_per_kwh * design.e_cap_kwh
    )
    objectives = (loss, trade, invest)

    mismatch = 0.0
    if reported_objectives is not None:
        reported = tuple(float(v) for v in reported_objectives)
        mismatch = max(
            abs(a - b) / max(1.0, abs(b)) for a, b in zip(objectives, reported)
        )
    else:
        reported = None

    flags = {
        "simultaneous_charge_discharge": bool(
            np.minimum(schedule.charge_kw, schedule.discharge_kw).max()
            > tol.simultaneous_kw
        )
        if steps
        else False,
    }

    passed = all(c.passed for c in checks)
    if reported is not None:
        passed = passed and mismatch <= tol.objective_rel

    return ValidationReport(
        checks=tuple(checks),
        objectives=objectives,
        reported_objectives=reported,
        objective_mismatch=mismatch,
        flags=flags,
        passed=passed,
    )


def _replay_network(net, p_nodal, q_nodal):
    """Flows by leaf-to-root accumulation and voltages by root-to-leaf
    drops, written against the line list only."""
    n = net.node_count
    steps = p_nodal.shape[1]
    children: dict[int, list[int]] = {j: [] for j in range(n + 1)}
    for line in net.lines:
        children[line.parent].append(line.child)

    flows_p = np.zeros((n, steps))
    flows_q = np.zeros((n, steps))
    order = sorted(range(1, n + 1), key=lambda j: -len(net.downstream[j]))
    for j in reversed(order):
        acc_p = p_nodal[j - 1].copy()
        acc_q = q_nodal[j - 1].copy()
        for child in children[j]:
            acc_p += flows_p[child - 1]
            acc_q += flows_q[child - 1]
        flows_p[j - 1] = acc_p
        flows_q[j - 1] = acc_q

    voltages = np.zeros((n, steps))
    for j in order:
        line = net.lines[j - 1]
        upstream = net.u0 if line.parent == 0 else voltages[line.parent - 1]
        drop = 2e3 * (line.r_ohm * flows_p[j - 1] + line.x_ohm * flows_q[j - 1])
        voltages[j - 1] = upstream - drop
    return flows_p, flows_q, voltages
