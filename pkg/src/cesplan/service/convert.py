"""Payload <-> domain conversions for the service layer."""

from __future__ import annotations

import numpy as np

from .. import scenario as sc
from ..cesopt import CesDesign, Schedule
from ..planner import BaselineResult, PlanResult
from ..validator import Tolerances, ValidationReport
from . import schemas as sm


def scenario_from_payload(payload: sm.ScenarioPayload) -> sc.Scenario:
    """Build and validate the domain scenario from a request payload."""
    lines = [
        (ln.from_node, ln.to_node, ln.r_ohm, ln.x_ohm) for ln in payload.network.lines
    ]
    raw_customers = [c.model_dump() for c in payload.customers]
    tariff = sc.tariff_from_payload(payload.tariff.model_dump(exclude_none=True))
    config = {
        "voltage_base_v": payload.network.voltage_base_v,
        "u0_pu": payload.network.u0_pu,
        "u_min_pu": payload.network.u_min_pu,
        "u_max_pu": payload.network.u_max_pu,
        "horizon": payload.horizon.model_dump(),
        "ces": payload.ces.model_dump(exclude_none=True),
    }
    if payload.weights is not None:
        config["weights"] = payload.weights.model_dump(exclude_none=True)
    if payload.solver is not None:
        config["solver"] = payload.solver
    return sc.scenario_from_parts(lines, raw_customers, tariff, config)


def schedule_to_payload(scenario: sc.Scenario, schedule: Schedule) -> sm.SchedulePayload:
    return sm.SchedulePayload(
        customers=[c.key for c in scenario.customers],
        charge_kw=schedule.charge_kw.tolist(),
        discharge_kw=schedule.discharge_kw.tolist(),
        energy_kwh=schedule.energy_kwh.tolist(),
        energy0_kwh=schedule.energy0_kwh,
        grid_ces_kw=schedule.grid_ces_kw.tolist(),
        grid_customer_kw=schedule.grid_customer_kw.tolist(),
        ces_customer_kw=schedule.ces_customer_kw.tolist(),
    )


def schedule_from_payload(payload: sm.SchedulePayload) -> Schedule:
    return Schedule(
        charge_kw=np.asarray(payload.charge_kw, dtype=float),
        discharge_kw=np.asarray(payload.discharge_kw, dtype=float),
        energy_kwh=np.asarray(payload.energy_kwh, dtype=float),
        energy0_kwh=float(payload.energy0_kwh),
        grid_ces_kw=np.asarray(payload.grid_ces_kw, dtype=float),
        grid_customer_kw=np.asarray(payload.grid_customer_kw, dtype=float),
        ces_customer_kw=np.asarray(payload.ces_customer_kw, dtype=float),
    )


def design_from_payload(payload: sm.DesignPayload, scenario: sc.Scenario) -> CesDesign:
    return CesDesign(
        location=payload.location,
        e_cap_kwh=payload.e_cap_kwh,
        p_rate_kw=payload.p_rate_kw,
        params=scenario.ces,
    )


def plan_to_response(
    scenario: sc.Scenario, result: PlanResult, baseline: BaselineResult
) -> sm.PlanResponse:
    rows = []
    for row in result.leaderboard:
        if row.feasible:
            rows.append(
                sm.LeaderboardRowPayload(
                    location=row.location,
                    feasible=True,
                    e_cap_kwh=row.e_cap_kwh,
                    p_rate_kw=row.p_rate_kw,
                    loss_kwh=row.loss_kwh,
                    trade_aud=row.trade_aud,
                    invest_aud=row.invest_aud,
                    weighted_objective=row.weighted_objective,
                    utopia=row.context.utopia.tolist() if row.context else None,
                    nadir=row.context.nadir.tolist() if row.context else None,
                )
            )
        else:
            rows.append(
                sm.LeaderboardRowPayload(
                    location=row.location, feasible=False, reason=row.reason
                )
            )
    loss, trade, invest = result.raw_objectives
    return sm.PlanResponse(
        location=result.location,
        design=sm.DesignPayload(
            location=result.design.location,
            e_cap_kwh=result.design.e_cap_kwh,
            p_rate_kw=result.design.p_rate_kw,
        ),
        schedule=schedule_to_payload(scenario, result.schedule),
        weights=list(result.weights),
        normalization=result.normalization,
        objectives=sm.ObjectivesPayload(
            loss_kw_steps=loss,
            loss_kwh=result.loss_kwh,
            trade_aud=trade,
            invest_aud=invest,
            weighted_normalized=result.normalized_objective,
        ),
        baseline=sm.BaselineTotalsPayload(
            loss_kw_steps=baseline.loss_kw_steps,
            loss_kwh=baseline.loss_kwh,
            trade_aud=baseline.trade_aud,
        ),
        loss_pct_of_baseline=100.0 * result.loss_kwh / baseline.loss_kwh
        if baseline.loss_kwh
        else float("nan"),
        trade_pct_of_baseline=100.0 * trade / baseline.trade_aud
        if baseline.trade_aud
        else float("nan"),
        leaderboard=rows,
    )


def baseline_to_response(baseline: BaselineResult) -> sm.BaselineResponse:
    return sm.BaselineResponse(
        loss_kw_steps=baseline.loss_kw_steps,
        loss_kwh=baseline.loss_kwh,
        trade_aud=baseline.trade_aud,
        customers_grid_kw=baseline.customers_grid_kw.tolist(),
        loss_kw=baseline.loss_kw.tolist(),
    )


def report_to_response(report: ValidationReport) -> sm.ValidateResponse:
    return sm.ValidateResponse(
        passed=report.passed,
        checks=[sm.CheckPayload(**c.to_dict()) for c in report.checks],
        objectives=sm.ObjectivesTriple(
            loss_kw_steps=report.objectives[0],
            trade_aud=report.objectives[1],
            invest_aud=report.objectives[2],
        ),
        reported_objectives=(
            None if report.reported_objectives is None else list(report.reported_objectives)
        ),
        objective_mismatch_rel=report.objective_mismatch,
        flags=report.flags,
    )


def tolerances_from_payload(payload: sm.TolerancesPayload | None) -> Tolerances | None:
    if payload is None:
        return None
    return Tolerances(**payload.model_dump())


def fixture_to_payload(data: dict) -> sm.ScenarioPayload:
    """Wrap generator output (plain lists/dicts) as a scenario payload."""
    return sm.ScenarioPayload(
        network=sm.NetworkPayload(
            lines=[
                sm.LinePayload(from_node=a, to_node=b, r_ohm=r, x_ohm=x)
                for a, b, r, x in data["lines"]
            ],
            voltage_base_v=data["config"]["voltage_base_v"],
            u0_pu=data["config"]["u0_pu"],
            u_min_pu=data["config"]["u_min_pu"],
            u_max_pu=data["config"]["u_max_pu"],
        ),
        customers=[sm.CustomerPayload(**c) for c in data["customers"]],
        tariff=sm.TariffPayload(
            windows=[
                sm.TouWindowPayload(start_hour=s, end_hour=e, price_aud_per_kwh=p)
                for s, e, p in data["tariff_windows"]
            ]
        ),
        horizon=sm.HorizonPayload(**data["config"]["horizon"]),
        ces=sm.CesPayload(**data["config"].get("ces", {})),
        weights=sm.WeightsPayload(**data["config"]["weights"])
        if "weights" in data["config"]
        else None,
    )
