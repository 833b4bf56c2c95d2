"""Client for the planning service.

Local mode invokes the route functions in process; remote mode posts the
same payloads to a running server.  Both return the response models, and
both surface failures as the same exception types so callers map them to
exit codes once.
"""

from __future__ import annotations

import httpx

from ..errors import AllLocationsInfeasible, CesplanError
from . import schemas as sm
from .app import (
    ahp_endpoint,
    baseline_endpoint,
    fixture_endpoint,
    plan_endpoint,
    validate_endpoint,
)


class RemoteServiceError(CesplanError):
    """The remote service rejected the request or was unreachable."""

    def __init__(self, message: str, status_code: int | None = None):
        super().__init__(message)
        self.status_code = status_code


class ServiceClient:
    """Dispatches requests either in process or to ``base_url``."""

    def __init__(self, base_url: str | None = None, http_client: httpx.Client | None = None):
        if http_client is not None:
            self._http = http_client
        elif base_url:
            self._http = httpx.Client(base_url=base_url, timeout=600.0)
        else:
            self._http = None

    def plan(self, request: sm.PlanRequest) -> sm.PlanResponse:
        if self._http is None:
            return plan_endpoint(request)
        return sm.PlanResponse.model_validate(self._post("/plan", request))

    def baseline(self, request: sm.BaselineRequest) -> sm.BaselineResponse:
        if self._http is None:
            return baseline_endpoint(request)
        return sm.BaselineResponse.model_validate(self._post("/baseline", request))

    def validate(self, request: sm.ValidateRequest) -> sm.ValidateResponse:
        if self._http is None:
            return validate_endpoint(request)
        return sm.ValidateResponse.model_validate(self._post("/validate", request))

    def ahp(self, request: sm.AhpRequest) -> sm.AhpResponse:
        if self._http is None:
            return ahp_endpoint(request)
        return sm.AhpResponse.model_validate(self._post("/ahp", request))

    def fixture(self, request: sm.FixtureRequest) -> sm.FixtureResponse:
        if self._http is None:
            return fixture_endpoint(request)
        return sm.FixtureResponse.model_validate(self._post("/fixture", request))

    def _post(self, path: str, request) -> dict:
        try:
            response = self._http.post(path, json=request.model_dump(mode="json"))
        except httpx.HTTPError as exc:
            raise RemoteServiceError(f"service unreachable: {exc}") from exc
        if response.status_code == 409:
            raise AllLocationsInfeasible(_detail(response))
        if response.status_code >= 400:
            raise RemoteServiceError(
                f"service returned {response.status_code}: {_detail(response)}",
                status_code=response.status_code,
            )
        return response.json()


def _detail(response: httpx.Response) -> str:
    try:
        body = response.json()
    except ValueError:
        return response.text[:500]
    return str(body.get("detail", body))
