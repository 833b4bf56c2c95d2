"""Shared test fixtures: small hand-built scenarios and the bundled
synthetic study fixture."""

import numpy as np
import pytest

from cesplan import fixture as fx
from cesplan.netmodel import build_network
from cesplan.scenario import (
    CesParameters,
    CustomerProfile,
    Horizon,
    Scenario,
    Tariff,
    WeightsConfig,
)

U0 = 160000.0


def day_load(peak=2.0, base=0.3):
    h = np.arange(24, dtype=float)
    return base + peak * np.exp(-0.5 * ((h - 19.0) / 2.0) ** 2)


def day_pv(cap=3.0):
    h = np.arange(24, dtype=float)
    return np.where((h >= 6) & (h <= 18), cap * np.sin(np.pi * (h - 6) / 12.0) ** 2, 0.0)


def small_ces(**overrides):
    params = dict(
        e_cap_min_kwh=2.0,
        e_cap_max_kwh=50.0,
        p_rate_min_kw=1.0,
        p_rate_max_kw=20.0,
    )
    params.update(overrides)
    return CesParameters(**params)


@pytest.fixture
def tiny_scenario():
    """Two-node chain, two customers, one day; small storage boxes."""
    net = build_network(
        [(0, 1, 0.05, 0.03), (1, 2, 0.08, 0.04)], U0, 0.9025 * U0, 1.1025 * U0
    )
    tariff = Tariff.from_windows(fx.VIC_TOU_WINDOWS)
    horizon = Horizon(steps=24)
    customers = (
        CustomerProfile(
            node=1, key="a", p_load=day_load(), q_load=np.zeros(24), p_pv=day_pv()
        ),
        CustomerProfile(
            node=2, key="b", p_load=day_load(1.5, 0.4), q_load=np.zeros(24), p_pv=np.zeros(24)
        ),
    )
    return Scenario(
        network=net,
        customers=customers,
        tariff=tariff,
        horizon=horizon,
        ces=small_ces(),
        weights=WeightsConfig(values=(1 / 9, 4 / 9, 4 / 9)),
    )


@pytest.fixture(scope="session")
def desk_scenario():
    """The bundled 7-node fixture at a 2-day horizon for mid-size tests."""
    scn = fx.fixture_scenario(seed=0, days=2)
    return scn
