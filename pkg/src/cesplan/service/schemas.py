"""Request/response models of the planning service.

These define the wire format; the CLI builds the same payloads from the
documented CSV/JSON files and the service converts them into domain objects.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field


class LinePayload(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    from_node: int = Field(alias="from")
    to_node: int = Field(alias="to")
    r_ohm: float
    x_ohm: float


class NetworkPayload(BaseModel):
    lines: list[LinePayload]
    voltage_base_v: float = 400.0
    u0_pu: float = 1.0
    u_min_pu: float = 0.9025
    u_max_pu: float = 1.1025


class CustomerPayload(BaseModel):
    node: int
    customer: str
    p_load_kw: list[float]
    q_load_kvar: list[float] | None = None
    p_pv_kw: list[float] | None = None


class TouWindowPayload(BaseModel):
    start_hour: int
    end_hour: int
    price_aud_per_kwh: float


class TariffPayload(BaseModel):
    windows: list[TouWindowPayload] | None = None
    hourly_price: list[float] | None = None


class HorizonPayload(BaseModel):
    steps: int
    dt_hours: float = 1.0


class CesPayload(BaseModel):
    eta_ch: float = 0.98
    eta_dis: float = 1.02
    lambda_min: float = 0.05
    lambda_max: float = 1.0
    e_cap_min_kwh: float = 200.0
    e_cap_max_kwh: float = 2000.0
    p_rate_min_kw: float = 20.0
    p_rate_max_kw: float = 200.0
    gamma_fixed_aud: float = 24000.0
    delta_aud_per_kwh: float = 300.0
    epsilon_continuity_kwh: float = 1e-4
    soc_init_fraction: float | None = None


class WeightsPayload(BaseModel):
    values: list[float] | None = None
    ahp_matrix: list[list[float]] | None = None


class ScenarioPayload(BaseModel):
    network: NetworkPayload
    customers: list[CustomerPayload]
    tariff: TariffPayload
    horizon: HorizonPayload
    ces: CesPayload = CesPayload()
    weights: WeightsPayload | None = None
    solver: dict | None = None


class PlanRequest(BaseModel):
    scenario: ScenarioPayload
    weights: list[float] | None = None
    fixed_location: int | None = None
    normalization: Literal["per_location", "global"] = "per_location"


class DesignPayload(BaseModel):
    location: int
    e_cap_kwh: float
    p_rate_kw: float


class SchedulePayload(BaseModel):
    customers: list[str]
    charge_kw: list[float]
    discharge_kw: list[float]
    energy_kwh: list[float]
    energy0_kwh: float
    grid_ces_kw: list[float]
    grid_customer_kw: list[list[float]]
    ces_customer_kw: list[list[float]]


class ObjectivesPayload(BaseModel):
    loss_kw_steps: float
    loss_kwh: float
    trade_aud: float
    invest_aud: float
    weighted_normalized: float


class LeaderboardRowPayload(BaseModel):
    location: int
    feasible: bool
    reason: str = ""
    e_cap_kwh: float | None = None
    p_rate_kw: float | None = None
    loss_kwh: float | None = None
    trade_aud: float | None = None
    invest_aud: float | None = None
    weighted_objective: float | None = None
    utopia: list[float] | None = None
    nadir: list[float] | None = None


class BaselineTotalsPayload(BaseModel):
    loss_kw_steps: float
    loss_kwh: float
    trade_aud: float


class PlanResponse(BaseModel):
    schema_version: int = 1
    location: int
    design: DesignPayload
    schedule: SchedulePayload
    weights: list[float]
    normalization: str
    objectives: ObjectivesPayload
    baseline: BaselineTotalsPayload
    # Value with the unit over value without, as percentages.
    loss_pct_of_baseline: float
    trade_pct_of_baseline: float
    leaderboard: list[LeaderboardRowPayload]


class BaselineRequest(BaseModel):
    scenario: ScenarioPayload


class BaselineResponse(BaseModel):
    schema_version: int = 1
    loss_kw_steps: float
    loss_kwh: float
    trade_aud: float
    customers_grid_kw: list[float]
    loss_kw: list[float]


class TolerancesPayload(BaseModel):
    kw: float = 1e-6
    kwh: float = 1e-6
    v2: float = 1e-7
    objective_rel: float = 1e-5
    simultaneous_kw: float = 1e-6


class ValidateRequest(BaseModel):
    scenario: ScenarioPayload
    design: DesignPayload
    schedule: SchedulePayload
    reported_objectives: list[float] | None = None
    tolerances: TolerancesPayload | None = None


class CheckPayload(BaseModel):
    name: str
    max_violation: float
    worst: str
    tolerance: float
    passed: bool


class ObjectivesTriple(BaseModel):
    loss_kw_steps: float
    trade_aud: float
    invest_aud: float


class ValidateResponse(BaseModel):
    schema_version: int = 1
    passed: bool
    checks: list[CheckPayload]
    objectives: ObjectivesTriple
    reported_objectives: list[float] | None
    objective_mismatch_rel: float
    flags: dict


class AhpRequest(BaseModel):
    matrix: list[list[float]]


class AhpResponse(BaseModel):
    weights: list[float]
    lambda_max: float
    consistency_index: float
    consistency_ratio: float


class FixtureRequest(BaseModel):
    seed: int = 0
    days: int = 7
    customers: int = 30


class FixtureResponse(BaseModel):
    seed: int
    scenario: ScenarioPayload


class HealthResponse(BaseModel):
    status: str
    version: str
