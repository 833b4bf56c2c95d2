"""Tests for the HTTP service layer and its client."""


import pytest
from fastapi.testclient import TestClient

from cesplan.service import schemas as sm
from cesplan.service.app import app
from cesplan.service.client import ServiceClient


@pytest.fixture(scope="module")
def http():
    with TestClient(app) as client:
        yield client


@pytest.fixture(scope="module")
def fixture_payload(http):
    response = http.post("/fixture", json={"seed": 0, "days": 1, "customers": 8})
    assert response.status_code == 200
    return sm.FixtureResponse.model_validate(response.json()).scenario


def small_scenario_dict(fixture_payload, **overrides):
    data = fixture_payload.model_dump(mode="json", by_alias=True)
    data.update(overrides)
    return data


class TestHealth:
    def test_health(self, http):
        response = http.get("/health")
        assert response.status_code == 200
        body = response.json()
        assert body["status"] == "ok"


class TestAhp:
    def test_weights(self, http):
        response = http.post(
            "/ahp", json={"matrix": [[1, 0.25, 0.25], [4, 1, 1], [4, 1, 1]]}
        )
        assert response.status_code == 200
        weights = response.json()["weights"]
        assert weights == pytest.approx([1 / 9, 4 / 9, 4 / 9])

    def test_non_reciprocal_is_400(self, http):
        response = http.post("/ahp", json={"matrix": [[1, 2], [3, 1]]})
        assert response.status_code == 400
        assert response.json()["error"] == "NonReciprocal"


class TestFixture:
    def test_deterministic(self, http):
        a = http.post("/fixture", json={"seed": 3, "days": 1}).json()
        b = http.post("/fixture", json={"seed": 3, "days": 1}).json()
        assert a == b

    def test_bad_args(self, http):
        assert http.post("/fixture", json={"days": 0}).status_code == 400


class TestPlan:
    def test_plan_roundtrip(self, http, fixture_payload):
        request = {
            "scenario": small_scenario_dict(fixture_payload),
            "fixed_location": 3,
        }
        response = http.post("/plan", json=request)
        assert response.status_code == 200
        plan = sm.PlanResponse.model_validate(response.json())
        assert plan.location == 3
        assert len(plan.leaderboard) == 1
        assert plan.schedule.customers
        assert len(plan.schedule.charge_kw) == 24
        # Percentages follow value-with over value-without.
        assert plan.loss_pct_of_baseline == pytest.approx(
            100.0 * plan.objectives.loss_kwh / plan.baseline.loss_kwh
        )

    def test_plan_validates_via_service(self, http, fixture_payload):
        request = {"scenario": small_scenario_dict(fixture_payload), "fixed_location": 2}
        plan = sm.PlanResponse.model_validate(http.post("/plan", json=request).json())
        validate_request = {
            "scenario": small_scenario_dict(fixture_payload),
            "design": plan.design.model_dump(),
            "schedule": plan.schedule.model_dump(),
            "reported_objectives": [
                plan.objectives.loss_kw_steps,
                plan.objectives.trade_aud,
                plan.objectives.invest_aud,
            ],
        }
        response = http.post("/validate", json=validate_request)
        assert response.status_code == 200
        assert response.json()["passed"] is True

    def test_tampered_schedule_fails_validation(self, http, fixture_payload):
        request = {"scenario": small_scenario_dict(fixture_payload), "fixed_location": 2}
        plan = sm.PlanResponse.model_validate(http.post("/plan", json=request).json())
        schedule = plan.schedule.model_dump()
        schedule["energy_kwh"][5] += 25.0
        response = http.post(
            "/validate",
            json={
                "scenario": small_scenario_dict(fixture_payload),
                "design": plan.design.model_dump(),
                "schedule": schedule,
            },
        )
        assert response.status_code == 200
        assert response.json()["passed"] is False

    def test_cycle_network_is_400(self, http, fixture_payload):
        data = small_scenario_dict(fixture_payload)
        data["network"]["lines"].append(
            {"from": 7, "to": 1, "r_ohm": 0.01, "x_ohm": 0.01}
        )
        response = http.post("/plan", json={"scenario": data})
        assert response.status_code == 400
        assert response.json()["error"] == "CycleDetected"

    def test_infeasible_band_is_409(self, http, fixture_payload):
        data = small_scenario_dict(fixture_payload)
        data["network"]["u_min_pu"] = 1.5
        data["network"]["u_max_pu"] = 1.6
        response = http.post("/plan", json={"scenario": data, "fixed_location": 1})
        assert response.status_code == 409

    def test_malformed_request_is_422(self, http):
        assert http.post("/plan", json={"scenario": {}}).status_code == 422


class TestServiceClient:
    def test_local_equals_http(self, http, fixture_payload):
        request = sm.PlanRequest(scenario=fixture_payload, fixed_location=4)
        local = ServiceClient().plan(request)
        remote = ServiceClient(http_client=http).plan(request)
        assert local.model_dump() == remote.model_dump()

    def test_http_error_mapping(self, http):
        from cesplan.service.client import RemoteServiceError

        client = ServiceClient(http_client=http)
        with pytest.raises(RemoteServiceError):
            client.ahp(sm.AhpRequest(matrix=[[1, 2], [3, 1]]))
