"""Scenario ingestion and validation: customer profiles, tariff, storage
parameters and the study horizon.

File formats
------------
Profiles CSV: ``node,customer,t,p_load_kw,q_load_kvar,p_pv_kw`` with one row
per customer per hourly step; the reactive and PV columns may be empty and
default to zero.  Tariff: either a CSV ``t,price`` describing one 24 h day
(or several identical days) or a JSON document with time-of-use windows
``{"windows": [{"start_hour", "end_hour", "price_aud_per_kwh"}, ...]}``
covering [0, 24).  Network CSV: ``from,to,r_ohm,x_ohm``.  Config JSON keys:
``voltage_base_v``, ``u0_pu``, ``u_min_pu``, ``u_max_pu`` (squared-voltage
per unit), ``horizon``, ``ces``, ``weights`` and optional ``solver``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .errors import (
    InfeasibleBoxes,
    LengthMismatch,
    NegativeLoadOrPv,
    OutOfRange,
    ParseError,
    UnknownNode,
)
from .netmodel import Network, build_network
from .qpcore import SolverSettings


@dataclass(frozen=True)
class Horizon:
    """Hourly study horizon covering whole days."""

    steps: int
    dt_hours: float = 1.0

    def __post_init__(self):
        if self.steps <= 0 or self.steps % 24 != 0:
            raise LengthMismatch(
                f"horizon must cover whole 24 h days, got {self.steps} steps"
            )
        if self.dt_hours <= 0:
            raise ValueError("dt_hours must be positive")

    @property
    def day_count(self) -> int:
        return self.steps // 24


@dataclass(frozen=True)
class CustomerProfile:
    """Per-customer demand and PV series in kW / kVAR."""

    node: int
    key: str
    p_load: np.ndarray
    q_load: np.ndarray
    p_pv: np.ndarray

    def net_position(self, t: int | None = None):
        """Load minus PV (kW); nonnegative values mean a deficit met by the
        grid and the storage unit, negative values a surplus to export."""
        if t is None:
            return self.p_load - self.p_pv
        return float(self.p_load[t] - self.p_pv[t])


@dataclass(frozen=True)
class Tariff:
    """Grid energy price as one 24-hour daily pattern (AUD/kWh)."""

    hourly_price: np.ndarray

    def __post_init__(self):
        price = np.asarray(self.hourly_price, dtype=float)
        if price.shape != (24,):
            raise ParseError(f"tariff needs 24 hourly prices, got {price.shape}")
        if np.any(price <= 0):
            raise ParseError("tariff prices must be positive")
        price.setflags(write=False)
        object.__setattr__(self, "hourly_price", price)

    @classmethod
    def from_windows(cls, windows) -> "Tariff":
        """Build from (start_hour, end_hour, price) windows covering [0, 24)."""
        price = np.full(24, np.nan)
        for start, end, value in windows:
            if not (0 <= start < end <= 24):
                raise ParseError(f"bad tariff window [{start}, {end})")
            if np.any(np.isfinite(price[start:end])):
                raise ParseError("tariff windows overlap")
            price[start:end] = value
        if np.any(np.isnan(price)):
            raise ParseError("tariff windows do not cover [0, 24)")
        return cls(hourly_price=price)

    def series(self, steps: int) -> np.ndarray:
        """Price per step over a horizon, repeating the daily pattern."""
        return np.tile(self.hourly_price, (steps + 23) // 24)[:steps]


def tou_price(tariff: Tariff, t: int, horizon: Horizon | None = None) -> float:
    """Price at hour index ``t``; the pattern repeats with period 24."""
    limit = horizon.steps if horizon is not None else 24 * 365
    if t < 0 or t >= limit:
        raise OutOfRange(f"hour {t} outside horizon of {limit} steps")
    return float(tariff.hourly_price[t % 24])


@dataclass(frozen=True)
class CesParameters:
    """Storage device constants and sizing bounds."""

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

    def __post_init__(self):
        if not (0.0 <= self.lambda_min < self.lambda_max <= 1.0):
            raise ValueError("need 0 <= lambda_min < lambda_max <= 1")
        if not (0.0 < self.e_cap_min_kwh <= self.e_cap_max_kwh):
            raise InfeasibleBoxes("need 0 < e_cap_min <= e_cap_max")
        if not (0.0 < self.p_rate_min_kw <= self.p_rate_max_kw):
            raise InfeasibleBoxes("need 0 < p_rate_min <= p_rate_max")
        if not (0.0 < self.eta_ch <= 1.0):
            raise ValueError("eta_ch must be in (0, 1]")
        if self.eta_dis < 1.0:
            raise ValueError("eta_dis uses the divide-by convention, >= 1")
        if self.epsilon_continuity_kwh <= 0:
            raise ValueError("epsilon_continuity must be positive")
        s0 = self.initial_soc_fraction
        if not (self.lambda_min <= s0 <= self.lambda_max):
            raise ValueError("soc_init_fraction outside SoC band")

    @property
    def initial_soc_fraction(self) -> float:
        return self.lambda_min if self.soc_init_fraction is None else self.soc_init_fraction


@dataclass(frozen=True)
class WeightsConfig:
    """Objective weighting: explicit values or a pairwise comparison matrix."""

    values: tuple[float, float, float] | None = None
    ahp_matrix: tuple[tuple[float, ...], ...] | None = None

    def __post_init__(self):
        if (self.values is None) == (self.ahp_matrix is None):
            raise ValueError("exactly one of values/ahp_matrix must be set")


@dataclass(frozen=True)
class Scenario:
    """Validated study inputs: network, customers, tariff and parameters."""

    network: Network
    customers: tuple[CustomerProfile, ...]
    tariff: Tariff
    horizon: Horizon
    ces: CesParameters
    weights: WeightsConfig
    solver: SolverSettings = field(default_factory=SolverSettings)

    @property
    def customers_by_node(self) -> dict[int, tuple[CustomerProfile, ...]]:
        grouped: dict[int, list[CustomerProfile]] = {}
        for c in self.customers:
            grouped.setdefault(c.node, []).append(c)
        return {node: tuple(v) for node, v in grouped.items()}

    def nodal_fixed_absorption(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-node load-minus-PV real power and reactive demand, (N, T) kW
        and kVAR; the storage contribution is excluded."""
        n, t = self.network.node_count, self.horizon.steps
        p = np.zeros((n, t))
        q = np.zeros((n, t))
        for c in self.customers:
            p[c.node - 1] += c.p_load - c.p_pv
            q[c.node - 1] += c.q_load
        return p, q

    def price_series(self) -> np.ndarray:
        return self.tariff.series(self.horizon.steps)


def net_position(customer: CustomerProfile, t: int) -> float:
    """Load minus PV of one customer at step t (kW)."""
    return customer.net_position(t)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def parse_network_csv(text: str):
    """Line tuples from a ``from,to,r_ohm,x_ohm`` CSV."""
    rows = list(csv.DictReader(text.splitlines()))
    if not rows:
        raise ParseError("network CSV has no data rows")
    try:
        return [
            (int(r["from"]), int(r["to"]), float(r["r_ohm"]), float(r["x_ohm"]))
            for r in rows
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad network CSV: {exc}") from exc


def parse_profiles_csv(text: str) -> list[dict]:
    """Per-customer series dicts from the profiles CSV, in first-seen order.

    Missing or empty q_load/p_pv cells default to zero; series are keyed by
    (node, customer) and must cover t = 0..T-1 exactly once each.
    """
    rows = list(csv.DictReader(text.splitlines()))
    if not rows:
        raise ParseError("profiles CSV has no data rows")
    series: dict[tuple[int, str], dict[int, tuple[float, float, float]]] = {}
    order: list[tuple[int, str]] = []
    for r in rows:
        try:
            node = int(r["node"])
            key = str(r["customer"])
            t = int(r["t"])
            p_load = float(r["p_load_kw"])
            q_load = float(r["q_load_kvar"]) if (r.get("q_load_kvar") or "").strip() else 0.0
            p_pv = float(r["p_pv_kw"]) if (r.get("p_pv_kw") or "").strip() else 0.0
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad profiles CSV row {r}: {exc}") from exc
        ident = (node, key)
        if ident not in series:
            series[ident] = {}
            order.append(ident)
        if t in series[ident]:
            raise ParseError(f"duplicate step {t} for customer {ident}")
        series[ident][t] = (p_load, q_load, p_pv)

    out = []
    for ident in order:
        node, key = ident
        steps = series[ident]
        t_max = max(steps)
        if set(steps) != set(range(t_max + 1)):
            raise LengthMismatch(f"customer {ident} series has gaps")
        triples = [steps[t] for t in range(t_max + 1)]
        out.append(
            {
                "node": node,
                "customer": key,
                "p_load_kw": [v[0] for v in triples],
                "q_load_kvar": [v[1] for v in triples],
                "p_pv_kw": [v[2] for v in triples],
            }
        )
    return out


def parse_tariff_file(path: Path) -> Tariff:
    """Tariff from a ``t,price`` CSV or a ToU-window JSON document."""
    text = path.read_text()
    if path.suffix.lower() == ".json":
        return tariff_from_payload(json.loads(text))
    rows = list(csv.DictReader(text.splitlines()))
    if not rows:
        raise ParseError("tariff CSV has no data rows")
    try:
        pairs = sorted((int(r["t"]), float(r["price"])) for r in rows)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad tariff CSV: {exc}") from exc
    prices = np.array([p for _, p in pairs])
    if [t for t, _ in pairs] != list(range(len(pairs))):
        raise ParseError("tariff CSV steps must be 0..T-1 without gaps")
    if len(prices) % 24 != 0:
        raise ParseError("tariff CSV length must be a multiple of 24")
    days = prices.reshape(-1, 24)
    if not np.all(days == days[0]):
        raise ParseError("tariff series must repeat with period 24")
    return Tariff(hourly_price=days[0])


def tariff_from_payload(payload: dict) -> Tariff:
    """Tariff from a parsed JSON object (windows or explicit series)."""
    if "windows" in payload:
        try:
            windows = [
                (int(w["start_hour"]), int(w["end_hour"]), float(w["price_aud_per_kwh"]))
                for w in payload["windows"]
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad tariff windows: {exc}") from exc
        return Tariff.from_windows(windows)
    if "hourly_price" in payload:
        return Tariff(hourly_price=np.asarray(payload["hourly_price"], dtype=float))
    raise ParseError("tariff JSON needs 'windows' or 'hourly_price'")


def _build_customers(raw: list[dict], horizon: Horizon, network: Network):
    customers = []
    for entry in raw:
        node = int(entry["node"])
        if not (1 <= node <= network.node_count):
            raise UnknownNode(f"customer {entry['customer']} at unknown node {node}")
        arrays = {}
        for col in ("p_load_kw", "q_load_kvar", "p_pv_kw"):
            values = entry.get(col)
            arr = (
                np.zeros(horizon.steps)
                if values is None
                else np.asarray(values, dtype=float)
            )
            if arr.shape != (horizon.steps,):
                raise LengthMismatch(
                    f"customer {entry['customer']} column {col} has "
                    f"{arr.size} steps, horizon has {horizon.steps}"
                )
            arr.setflags(write=False)
            arrays[col] = arr
        if np.any(arrays["p_load_kw"] < 0) or np.any(arrays["p_pv_kw"] < 0):
            raise NegativeLoadOrPv(f"customer {entry['customer']} has negative load or PV")
        customers.append(
            CustomerProfile(
                node=node,
                key=str(entry["customer"]),
                p_load=arrays["p_load_kw"],
                q_load=arrays["q_load_kvar"],
                p_pv=arrays["p_pv_kw"],
            )
        )
    return tuple(customers)


def scenario_from_parts(
    lines,
    raw_customers: list[dict],
    tariff: Tariff,
    config: dict,
    horizon_override: int | None = None,
) -> Scenario:
    """Assemble and validate a scenario from parsed pieces."""
    try:
        base_v = float(config["voltage_base_v"])
        u0 = float(config["u0_pu"]) * base_v**2
        u_min = float(config["u_min_pu"]) * base_v**2
        u_max = float(config["u_max_pu"]) * base_v**2
        horizon_cfg = config["horizon"]
        steps = int(horizon_override if horizon_override is not None else horizon_cfg["steps"])
        horizon = Horizon(steps=steps, dt_hours=float(horizon_cfg.get("dt_hours", 1.0)))
        ces = CesParameters(**config.get("ces", {}))
        weights = _weights_from_config(config.get("weights"))
        solver = _solver_from_config(config.get("solver"))
    except (KeyError, TypeError) as exc:
        raise ParseError(f"bad config: {exc}") from exc
    network = build_network(lines, u0, u_min, u_max)
    if horizon_override is not None:
        raw_customers = [
            {**c, **{col: c[col][:steps] for col in ("p_load_kw", "q_load_kvar", "p_pv_kw")}}
            for c in raw_customers
        ]
    customers = _build_customers(raw_customers, horizon, network)
    return Scenario(
        network=network,
        customers=customers,
        tariff=tariff,
        horizon=horizon,
        ces=ces,
        weights=weights,
        solver=solver,
    )


def _weights_from_config(entry) -> WeightsConfig:
    if entry is None:
        return WeightsConfig(values=(1 / 3, 1 / 3, 1 / 3))
    if "values" in entry:
        values = tuple(float(v) for v in entry["values"])
        if len(values) != 3:
            raise ParseError("weights.values needs exactly three entries")
        return WeightsConfig(values=values)
    if "ahp_matrix" in entry:
        matrix = tuple(tuple(float(v) for v in row) for row in entry["ahp_matrix"])
        return WeightsConfig(ahp_matrix=matrix)
    raise ParseError("weights needs 'values' or 'ahp_matrix'")


def _solver_from_config(entry) -> SolverSettings:
    if not entry:
        return SolverSettings()
    known = {f.name for f in fields(SolverSettings)}
    unknown = set(entry) - known
    if unknown:
        raise ParseError(f"unknown solver settings: {sorted(unknown)}")
    return replace(SolverSettings(), **entry)


def load_scenario(
    profiles_path,
    tariff_path,
    network_path,
    config_path,
    horizon_override: int | None = None,
) -> Scenario:
    """Read, parse and validate the four input files into a scenario."""
    profiles_path, tariff_path = Path(profiles_path), Path(tariff_path)
    network_path, config_path = Path(network_path), Path(config_path)
    lines = parse_network_csv(network_path.read_text())
    raw_customers = parse_profiles_csv(profiles_path.read_text())
    tariff = parse_tariff_file(tariff_path)
    try:
        config = json.loads(config_path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"config is not valid JSON: {exc}") from exc
    return scenario_from_parts(lines, raw_customers, tariff, config, horizon_override)


# ---------------------------------------------------------------------------
# Writing (used by the fixture generator and for round-trip checks)
# ---------------------------------------------------------------------------


def write_network_csv(lines, path) -> None:
    rows = ["from,to,r_ohm,x_ohm"]
    rows += [f"{a},{b},{float(r)!r},{float(x)!r}" for a, b, r, x in lines]
    Path(path).write_text("\n".join(rows) + "\n")


def write_profiles_csv(customers, path) -> None:
    rows = ["node,customer,t,p_load_kw,q_load_kvar,p_pv_kw"]
    for c in customers:
        for t in range(len(c.p_load)):
            rows.append(
                f"{c.node},{c.key},{t},{float(c.p_load[t])!r},"
                f"{float(c.q_load[t])!r},{float(c.p_pv[t])!r}"
            )
    Path(path).write_text("\n".join(rows) + "\n")


def write_tariff_json(windows, path) -> None:
    payload = {
        "windows": [
            {"start_hour": s, "end_hour": e, "price_aud_per_kwh": p}
            for s, e, p in windows
        ]
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")
