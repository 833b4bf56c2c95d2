"""FastAPI application over the planning core.

Route functions are plain synchronous callables, so the CLI invokes them
directly in local mode; over HTTP the same payloads travel as JSON.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import AllLocationsInfeasible, CesplanError, SolveFailed
from ..fixture import make_fixture
from ..planner import ahp_weights, baseline_no_ces, plan, resolve_weights
from ..validator import validate
from . import convert
from . import schemas as sm

app = FastAPI(
    title="cesplan",
    description="Siting, sizing and scheduling studies for one community "
    "storage unit on a radial low-voltage feeder.",
    version=__version__,
)


@app.exception_handler(CesplanError)
def _domain_error(request, exc: CesplanError):
    status = 409 if isinstance(exc, (AllLocationsInfeasible, SolveFailed)) else 400
    return JSONResponse(
        status_code=status,
        content={"error": type(exc).__name__, "detail": str(exc)},
    )


@app.exception_handler(ValueError)
def _value_error(request, exc: ValueError):
    return JSONResponse(
        status_code=400, content={"error": "ValueError", "detail": str(exc)}
    )


@app.get("/health", response_model=sm.HealthResponse)
def health() -> sm.HealthResponse:
    return sm.HealthResponse(status="ok", version=__version__)


@app.post("/plan", response_model=sm.PlanResponse)
def plan_endpoint(request: sm.PlanRequest) -> sm.PlanResponse:
    scenario = convert.scenario_from_payload(request.scenario)
    weights = resolve_weights(scenario, request.weights)
    result = plan(
        scenario,
        weights=weights,
        fixed_location=request.fixed_location,
        normalization=request.normalization,
    )
    baseline = baseline_no_ces(scenario)
    return convert.plan_to_response(scenario, result, baseline)


@app.post("/baseline", response_model=sm.BaselineResponse)
def baseline_endpoint(request: sm.BaselineRequest) -> sm.BaselineResponse:
    scenario = convert.scenario_from_payload(request.scenario)
    return convert.baseline_to_response(baseline_no_ces(scenario))


@app.post("/validate", response_model=sm.ValidateResponse)
def validate_endpoint(request: sm.ValidateRequest) -> sm.ValidateResponse:
    scenario = convert.scenario_from_payload(request.scenario)
    design = convert.design_from_payload(request.design, scenario)
    schedule = convert.schedule_from_payload(request.schedule)
    report = validate(
        scenario,
        design,
        schedule,
        reported_objectives=request.reported_objectives,
        tolerances=convert.tolerances_from_payload(request.tolerances),
    )
    return convert.report_to_response(report)


@app.post("/ahp", response_model=sm.AhpResponse)
def ahp_endpoint(request: sm.AhpRequest) -> sm.AhpResponse:
    result = ahp_weights(request.matrix)
    return sm.AhpResponse(
        weights=list(result.weights),
        lambda_max=result.lambda_max,
        consistency_index=result.consistency_index,
        consistency_ratio=result.consistency_ratio,
    )


@app.post("/fixture", response_model=sm.FixtureResponse)
def fixture_endpoint(request: sm.FixtureRequest) -> sm.FixtureResponse:
    if request.days <= 0 or request.customers <= 0:
        raise HTTPException(status_code=400, detail="days and customers must be positive")
    data = make_fixture(seed=request.seed, days=request.days, n_customers=request.customers)
    return sm.FixtureResponse(seed=request.seed, scenario=convert.fixture_to_payload(data))
