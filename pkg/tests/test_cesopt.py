"""Tests for the per-location model builder and schedule extraction."""

import numpy as np
import pytest

from cesplan.cesopt import build_model, evaluate_objectives, extract_schedule, objective_vectors
from cesplan.errors import DimensionMismatch, SlackLocation
from cesplan.netmodel import lindistflow_voltages
from cesplan.qpcore import Status, solve_qp


class TestLayout:
    def test_variable_count(self, tiny_scenario):
        # 24 * (4 + 2) + 2
        model = build_model(tiny_scenario, 1)
        assert model.layout.n == 146
        assert model.A.shape[1] == 146

    def test_single_customer_count(self, tiny_scenario):
        from dataclasses import replace

        scn = replace(tiny_scenario, customers=tiny_scenario.customers[:1])
        model = build_model(scn, 1)
        assert model.layout.n == 24 * 5 + 2

    def test_bijective_indices(self, tiny_scenario):
        model = build_model(tiny_scenario, 2)
        layout = model.layout
        seen = set()
        for t in range(24):
            for idx in (layout.charge(t), layout.discharge(t), layout.energy(t), layout.grid_ces(t)):
                seen.add(idx)
            for c in range(2):
                seen.add(layout.grid_customer(c, t))
        seen |= {layout.e_cap, layout.p_rate}
        assert seen == set(range(layout.n))


class TestConstraints:
    def test_slack_location_rejected(self, tiny_scenario):
        with pytest.raises(SlackLocation):
            build_model(tiny_scenario, 0)
        with pytest.raises(SlackLocation):
            build_model(tiny_scenario, 99)

    def test_no_pv_means_deficit_branch(self, tiny_scenario):
        from dataclasses import replace

        customers = tuple(
            replace(c, p_pv=np.zeros(24)) for c in tiny_scenario.customers
        )
        scn = replace(tiny_scenario, customers=customers)
        model = build_model(scn, 1)
        rows = model.families["exchange"]
        assert np.all(model.l[rows] == 0.0)
        assert np.all(model.u[rows] >= 0.0)

    def test_surplus_branch_bounds(self, tiny_scenario):
        model = build_model(tiny_scenario, 1)
        rows = model.families["exchange"]
        lower = model.l[rows]
        upper = model.u[rows]
        net = model.net_positions.reshape(-1)
        surplus = net < 0
        assert np.allclose(lower[surplus], net[surplus])
        assert np.all(upper[surplus] == 0.0)
        assert np.all(lower[~surplus] == 0.0)
        assert np.allclose(upper[~surplus], net[~surplus])

    def test_recursion_row_arithmetic(self, tiny_scenario):
        # eta_ch = 0.98: charging 10 kW for 1 h from 100 kWh must land at 109.8.
        model = build_model(tiny_scenario, 1)
        layout = model.layout
        t = 5
        row_idx = model.families["soc_recursion"].start + t
        row = model.A[row_idx].toarray().ravel()
        x = np.zeros(layout.n)
        x[layout.energy(t - 1)] = 100.0
        x[layout.charge(t)] = 10.0
        x[layout.energy(t)] = 100.0 + 0.98 * 10.0
        assert np.isclose(row @ x, 0.0, atol=1e-12)
        x[layout.energy(t)] = 110.0
        assert abs(row @ x) > 1e-3

    def test_day_continuity_rows(self, desk_scenario):
        model = build_model(desk_scenario, 3)
        rows = model.families["day_continuity"]
        assert rows.stop - rows.start == desk_scenario.horizon.day_count
        eps = desk_scenario.ces.epsilon_continuity_kwh
        assert np.all(model.l[rows] == -eps)
        assert np.all(model.u[rows] == eps)

    def test_voltage_rows_cover_all_nodes(self, desk_scenario):
        model = build_model(desk_scenario, 2)
        rows = model.families["voltage"]
        assert rows.stop - rows.start == 7 * desk_scenario.horizon.steps


class TestObjectives:
    def test_investment_formula(self, tiny_scenario):
        model = build_model(tiny_scenario, 1)
        layout = model.layout
        obj = objective_vectors(model)
        for e_cap, expected in [(482.15, 168645.0), (601.32, 204396.0), (547.69, 188307.0)]:
            x = np.zeros(layout.n)
            x[layout.e_cap] = e_cap
            invest = obj.invest_lin @ x + obj.invest_const
            assert np.isclose(invest, expected, rtol=1e-12)

    def test_zero_activity_zero_trade(self, tiny_scenario):
        model = build_model(tiny_scenario, 1)
        x = np.zeros(model.layout.n)
        _, trade, _ = evaluate_objectives(model, x)
        assert trade == 0.0

    def test_trade_prices_by_window(self, tiny_scenario):
        model = build_model(tiny_scenario, 1)
        layout = model.layout
        x = np.zeros(layout.n)
        x[layout.grid_ces(16)] = 1.0  # 1 kW for 1 h in the peak window
        _, trade, _ = evaluate_objectives(model, x)
        assert np.isclose(trade, 0.52602)

    def test_loss_matches_network_evaluation(self, tiny_scenario):
        # An arbitrary (infeasible) vector must still evaluate to the loss of
        # the implied nodal absorptions.
        model = build_model(tiny_scenario, 2)
        layout = model.layout
        rng = np.random.default_rng(2)
        x = np.zeros(layout.n)
        for t in range(24):
            x[layout.charge(t)] = rng.uniform(0, 3)
            x[layout.discharge(t)] = rng.uniform(0, 3)
        loss, _, _ = evaluate_objectives(model, x)

        p, q = tiny_scenario.nodal_fixed_absorption()
        p = p.copy()
        for t in range(24):
            p[1, t] += x[layout.charge(t)] - x[layout.discharge(t)]
        from cesplan.netmodel import line_flows

        P, Q = line_flows(tiny_scenario.network, p, q)
        direct = 0.0
        for k, line in enumerate(tiny_scenario.network.lines):
            direct += np.sum(
                line.r_ohm * ((P[k] * 1e3) ** 2 + (Q[k] * 1e3) ** 2)
            ) / tiny_scenario.network.u0 / 1e3
        assert np.isclose(loss, direct, rtol=1e-10)


class TestSolveAndExtract:
    def solve(self, scenario, location, coeffs=(1.0, 1.0, 0.001)):
        model = build_model(scenario, location)
        sol = solve_qp(model.qp(*coeffs), scenario.solver)
        assert sol.status is Status.OPTIMAL
        return model, sol

    def test_extract_zero_vector(self, tiny_scenario):
        model = build_model(tiny_scenario, 1)
        design, schedule = extract_schedule(model, np.zeros(model.layout.n))
        assert design.e_cap_kwh == 0.0
        assert np.all(schedule.charge_kw == 0.0)
        assert np.allclose(
            schedule.ces_customer_kw, model.net_positions
        )  # all demand met by the storage split when grid share is zero

    def test_dimension_check(self, tiny_scenario):
        model = build_model(tiny_scenario, 1)
        with pytest.raises(DimensionMismatch):
            extract_schedule(model, np.zeros(3))

    def test_feasible_solution_identities(self, tiny_scenario):
        model, sol = self.solve(tiny_scenario, 2)
        design, schedule = extract_schedule(model, sol.x)
        net = model.net_positions

        # Customer split identity holds exactly by construction.
        assert np.allclose(
            schedule.grid_customer_kw + schedule.ces_customer_kw, net, atol=1e-12
        )
        # Storage-grid identity within solver accuracy.
        lhs = (
            schedule.grid_ces_kw
            - schedule.ces_customer_kw.sum(axis=0)
            - schedule.charge_kw
            + schedule.discharge_kw
        )
        assert np.max(np.abs(lhs)) <= 1e-7
        # Energy recursion replays.
        ces = tiny_scenario.ces
        level = schedule.energy0_kwh
        for t in range(24):
            level = level + (
                ces.eta_ch * schedule.charge_kw[t]
                - schedule.discharge_kw[t] / ces.eta_dis
            )
            assert abs(level - schedule.energy_kwh[t]) <= 1e-7
        # SoC band.
        assert np.all(schedule.energy_kwh >= ces.lambda_min * design.e_cap_kwh - 1e-6)
        assert np.all(schedule.energy_kwh <= ces.lambda_max * design.e_cap_kwh + 1e-6)
        # Voltages recomputed from the extracted schedule stay in band.
        p, q = tiny_scenario.nodal_fixed_absorption()
        p = p.copy()
        p[model.location - 1] += schedule.charge_kw - schedule.discharge_kw
        u = lindistflow_voltages(tiny_scenario.network, p, q)
        assert u.min() >= tiny_scenario.network.u_min - 1e-7
        assert u.max() <= tiny_scenario.network.u_max + 1e-7

    def test_day_continuity_holds(self, tiny_scenario):
        model, sol = self.solve(tiny_scenario, 1)
        _, schedule = extract_schedule(model, sol.x)
        assert abs(schedule.energy_kwh[23] - schedule.energy0_kwh) <= 1e-4 + 1e-7
