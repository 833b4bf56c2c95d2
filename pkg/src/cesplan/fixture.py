"""Seeded synthetic study fixture: a 7-node low-voltage feeder with 30
customers, day-night load shapes and midday PV bumps.

Real feeder measurements are site-specific, so studies ship with this
generator instead of data files; identical seeds reproduce identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import scenario as sc

# Victorian-style residential time-of-use windows (AUD/kWh).
VIC_TOU_WINDOWS = (
    (0, 7, 0.24871),
    (7, 15, 0.31207),
    (15, 21, 0.52602),
    (21, 22, 0.31207),
    (22, 24, 0.24871),
)

# 400 V feeder, voltage band 0.95..1.05 expressed on squared magnitudes.
DEFAULT_CONFIG = {
    "voltage_base_v": 400.0,
    "power_base_kva": 100.0,
    "u0_pu": 1.0,
    "u_min_pu": 0.9025,
    "u_max_pu": 1.1025,
    "horizon": {"steps": 168, "dt_hours": 1.0},
    "ces": {},
    "weights": {"ahp_matrix": [[1, 0.25, 0.25], [4, 1, 1], [4, 1, 1]]},
}

# Short underground LV segments; node 3 sits at the electrical center.
FEEDER_LINES = (
    (0, 1, 0.016, 0.009),
    (1, 2, 0.022, 0.012),
    (2, 3, 0.019, 0.01),
    (3, 4, 0.021, 0.011),
    (2, 5, 0.028, 0.014),
    (5, 6, 0.024, 0.013),
    (3, 7, 0.025, 0.013),
)


def _load_shape(rng, hours):
    """Residential profile: overnight base, morning shoulder, evening peak."""
    h = hours % 24
    base = 0.45
    morning = 1.1 * np.exp(-0.5 * ((h - 7.5) / 1.6) ** 2)
    evening = 2.9 * np.exp(-0.5 * ((h - 19.0) / 2.1) ** 2)
    scale = rng.uniform(0.7, 1.4)
    noise = rng.normal(0.0, 0.06, h.size)
    return np.maximum(0.1, scale * (base + morning + evening) + noise)


def _pv_shape(rng, hours, days):
    """Clear-sky bell between 06:00 and 18:00 with a per-day weather factor."""
    h = hours % 24
    cap = rng.uniform(3.6, 6.4)
    bell = np.where((h >= 6) & (h <= 18), np.sin(np.pi * (h - 6) / 12.0) ** 2, 0.0)
    weather = np.repeat(rng.uniform(0.72, 1.0, days), 24)[: h.size]
    noise = rng.normal(0.0, 0.05, h.size)
    return np.maximum(0.0, cap * bell * weather + noise * bell)


def make_fixture(seed: int = 0, days: int = 7, n_customers: int = 30) -> dict:
    """Generate the fixture as plain payload pieces (lines, customers,
    tariff windows, config)."""
    rng = np.random.default_rng(seed)
    steps = 24 * days
    hours = np.arange(steps, dtype=float)
    nodes = rng.integers(1, 8, n_customers)
    customers = []
    for i in range(n_customers):
        customers.append(
            {
                "node": int(nodes[i]),
                "customer": f"c{i:02d}",
                "p_load_kw": _load_shape(rng, hours).tolist(),
                "q_load_kvar": np.zeros(steps).tolist(),
                "p_pv_kw": _pv_shape(rng, hours, days).tolist(),
            }
        )
    config = json.loads(json.dumps(DEFAULT_CONFIG))
    config["horizon"]["steps"] = steps
    return {
        "lines": [list(line) for line in FEEDER_LINES],
        "customers": customers,
        "tariff_windows": [list(w) for w in VIC_TOU_WINDOWS],
        "config": config,
        "seed": seed,
    }


def fixture_scenario(seed: int = 0, days: int = 7, n_customers: int = 30) -> sc.Scenario:
    """Generate and validate the fixture as a ready scenario."""
    data = make_fixture(seed=seed, days=days, n_customers=n_customers)
    tariff = sc.Tariff.from_windows([tuple(w) for w in data["tariff_windows"]])
    return sc.scenario_from_parts(data["lines"], data["customers"], tariff, data["config"])


def write_fixture(out_dir, seed: int = 0, days: int = 7, n_customers: int = 30) -> dict:
    """Write network.csv, profiles.csv, tariff.json and config.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    data = make_fixture(seed=seed, days=days, n_customers=n_customers)
    sc.write_network_csv(data["lines"], out / "network.csv")
    customers = [
        sc.CustomerProfile(
            node=c["node"],
            key=c["customer"],
            p_load=np.array(c["p_load_kw"]),
            q_load=np.array(c["q_load_kvar"]),
            p_pv=np.array(c["p_pv_kw"]),
        )
        for c in data["customers"]
    ]
    sc.write_profiles_csv(customers, out / "profiles.csv")
    sc.write_tariff_json([tuple(w) for w in data["tariff_windows"]], out / "tariff.json")
    (out / "config.json").write_text(json.dumps(data["config"], indent=2) + "\n")
    return {
        "network": str(out / "network.csv"),
        "profiles": str(out / "profiles.csv"),
        "tariff": str(out / "tariff.json"),
        "config": str(out / "config.json"),
    }
