"""Per-location optimization model: variable layout, constraint assembly and
the three objective slices (network loss, grid trading cost, investment).

For a fixed storage location the problem is a convex QP.  Decision variables
per step: charging and discharging power, end-of-step stored energy, the
storage unit's own grid exchange, and each customer's grid exchange; plus
the two sizing scalars (capacity and power rating).  Each customer's storage
exchange is eliminated through the power-balance identity
``grid + storage = load - pv`` and reconstructed on extraction.

Stored energy starts at a configurable fraction of the capacity (default:
the lower SoC limit), which keeps the model linear in the capacity variable
and gives the day-continuity constraint a fixed reference.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatch, SlackLocation
from .netmodel import W_PER_KW, loss_quadratic_form
from .qpcore import QuadraticProgram
from .scenario import CesParameters, Scenario


@dataclass(frozen=True)
class VariableLayout:
    """Contiguous index map over the decision vector.

    Blocks: charge (T), discharge (T), energy (T, end-of-step), storage-grid
    exchange (T), customer-grid exchange (customer-major, C*T), then the
    capacity and rating scalars.
    """

    steps: int
    n_customers: int

    @property
    def n(self) -> int:
        return self.steps * (4 + self.n_customers) + 2

    def charge(self, t: int) -> int:
        return t

    def discharge(self, t: int) -> int:
        return self.steps + t

    def energy(self, t: int) -> int:
        """End-of-step stored energy for step t (0-based)."""
        return 2 * self.steps + t

    def grid_ces(self, t: int) -> int:
        return 3 * self.steps + t

    def grid_customer(self, c: int, t: int) -> int:
        return 4 * self.steps + c * self.steps + t

    @property
    def e_cap(self) -> int:
        return self.steps * (4 + self.n_customers)

    @property
    def p_rate(self) -> int:
        return self.e_cap + 1


@dataclass(frozen=True)
class ObjectiveSlices:
    """The three objectives over the decision vector x.

    loss (kW summed over steps): x'Hx + g'x + c; trade (AUD): t'x;
    invest (AUD): v'x + gamma.
    """

    loss_quad: sp.csc_matrix = field(repr=False)
    loss_lin: np.ndarray = field(repr=False)
    loss_const: float
    trade_lin: np.ndarray = field(repr=False)
    invest_lin: np.ndarray = field(repr=False)
    invest_const: float


@dataclass(frozen=True)
class ModelInstance:
    """Assembled constraints and objectives for one candidate location."""

    location: int
    layout: VariableLayout
    A: sp.csc_matrix = field(repr=False)
    l: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)
    families: dict[str, slice] = field(repr=False)
    objectives: ObjectiveSlices = field(repr=False)
    net_positions: np.ndarray = field(repr=False)
    scenario: Scenario = field(repr=False)

    def qp(self, loss_coeff: float, trade_coeff: float, invest_coeff: float) -> QuadraticProgram:
        """QP minimizing the given combination of the raw objectives."""
        obj = self.objectives
        p_mat = (2.0 * loss_coeff) * obj.loss_quad
        q_vec = (
            loss_coeff * obj.loss_lin
            + trade_coeff * obj.trade_lin
            + invest_coeff * obj.invest_lin
        )
        return QuadraticProgram(P=p_mat, q=q_vec, A=self.A, l=self.l, u=self.u)


@dataclass(frozen=True)
class CesDesign:
    """Siting and sizing outcome: one unit at ``location``."""

    location: int
    e_cap_kwh: float
    p_rate_kw: float
    params: CesParameters

    def siting_vector(self, node_count: int) -> np.ndarray:
        vec = np.zeros(node_count)
        vec[self.location - 1] = 1.0
        return vec


@dataclass(frozen=True)
class Schedule:
    """Operating time series of one plan; customer rows follow the
    scenario's customer order."""

    charge_kw: np.ndarray
    discharge_kw: np.ndarray
    energy_kwh: np.ndarray
    energy0_kwh: float
    grid_ces_kw: np.ndarray
    grid_customer_kw: np.ndarray
    ces_customer_kw: np.ndarray


class _RowBuilder:
    def __init__(self):
        self.rows: list[int] = []
        self.cols: list[int] = []
        self.vals: list[float] = []
        self.lower: list[float] = []
        self.upper: list[float] = []
        self.families: dict[str, slice] = {}
        self._count = 0
        self._family_start = 0

    def add(self, entries, lo, hi):
        r = self._count
        for col, val in entries:
            self.rows.append(r)
            self.cols.append(col)
            self.vals.append(val)
        self.lower.append(lo)
        self.upper.append(hi)
        self._count += 1

    def start_family(self, name):
        self._family_start = self._count
        self._family_name = name

    def end_family(self):
        self.families[self._family_name] = slice(self._family_start, self._count)

    def build(self, n):
        a_mat = sp.csc_matrix(
            (self.vals, (self.rows, self.cols)), shape=(self._count, n)
        )
        return a_mat, np.array(self.lower), np.array(self.upper), self.families


def build_model(scenario: Scenario, location: int) -> ModelInstance:
    """Assemble the constraint system and objective slices for one candidate
    location (any non-slack node)."""
    net = scenario.network
    ces = scenario.ces
    horizon = scenario.horizon
    if not (1 <= location <= net.node_count):
        raise SlackLocation(
            f"location must be a non-slack node 1..{net.node_count}, got {location}"
        )

    steps = horizon.steps
    dt = horizon.dt_hours
    customers = scenario.customers
    n_cust = len(customers)
    layout = VariableLayout(steps=steps, n_customers=n_cust)
    net_pos = np.array([c.net_position() for c in customers])
    if net_pos.size == 0:
        net_pos = net_pos.reshape(0, steps)
    p_fixed, q_fixed = scenario.nodal_fixed_absorption()
    s0 = ces.initial_soc_fraction

    b = _RowBuilder()

    # Customer-grid exchange bounds; the sign of load-minus-PV picks the
    # deficit or surplus branch, an exact balance pins the exchange to zero.
    b.start_family("exchange")
    for c in range(n_cust):
        for t in range(steps):
            net_ct = net_pos[c, t]
            if net_ct >= 0.0:
                b.add([(layout.grid_customer(c, t), 1.0)], 0.0, net_ct)
            else:
                b.add([(layout.grid_customer(c, t), 1.0)], net_ct, 0.0)
    b.end_family()

    # Storage-grid exchange identity with the customer split substituted.
    b.start_family("ces_grid_identity")
    for t in range(steps):
        entries = [(layout.grid_ces(t), 1.0), (layout.charge(t), -1.0), (layout.discharge(t), 1.0)]
        entries += [(layout.grid_customer(c, t), 1.0) for c in range(n_cust)]
        rhs = float(net_pos[:, t].sum()) if n_cust else 0.0
        b.add(entries, rhs, rhs)
    b.end_family()

    # Charging/discharging within [0, rating].
    b.start_family("rating")
    for t in range(steps):
        b.add([(layout.charge(t), 1.0)], 0.0, np.inf)
        b.add([(layout.charge(t), 1.0), (layout.p_rate, -1.0)], -np.inf, 0.0)
        b.add([(layout.discharge(t), 1.0)], 0.0, np.inf)
        b.add([(layout.discharge(t), 1.0), (layout.p_rate, -1.0)], -np.inf, 0.0)
    b.end_family()

    # Stored-energy recursion from the initial level s0 * capacity.
    b.start_family("soc_recursion")
    for t in range(steps):
        entries = [
            (layout.energy(t), 1.0),
            (layout.charge(t), -ces.eta_ch * dt),
            (layout.discharge(t), dt / ces.eta_dis),
        ]
        if t == 0:
            entries.append((layout.e_cap, -s0))
        else:
            entries.append((layout.energy(t - 1), -1.0))
        b.add(entries, 0.0, 0.0)
    b.end_family()

    # SoC band relative to the capacity variable.
    b.start_family("soc_bounds")
    for t in range(steps):
        b.add([(layout.energy(t), 1.0), (layout.e_cap, -ces.lambda_min)], 0.0, np.inf)
        b.add([(layout.energy(t), 1.0), (layout.e_cap, -ces.lambda_max)], -np.inf, 0.0)
    b.end_family()

    # Every day must hand over (nearly) the starting energy level.
    b.start_family("day_continuity")
    eps = ces.epsilon_continuity_kwh
    for day in range(1, horizon.day_count + 1):
        b.add(
            [(layout.energy(24 * day - 1), 1.0), (layout.e_cap, -s0)],
            -eps,
            eps,
        )
    b.end_family()

    b.start_family("sizing")
    b.add([(layout.e_cap, 1.0)], ces.e_cap_min_kwh, ces.e_cap_max_kwh)
    b.add([(layout.p_rate, 1.0)], ces.p_rate_min_kw, ces.p_rate_max_kw)
    b.end_family()

    # Voltage band at every node: the fixed absorptions set the operating
    # point, charging/discharging at the storage node shifts it.  Each row is
    # normalized by its sensitivity so violations read in kW at the storage
    # node, keeping the tolerance meaning uniform across constraint rows.
    b.start_family("voltage")
    v_fixed = net.u0 - 2.0 * W_PER_KW * (net.r_path @ p_fixed + net.x_path @ q_fixed)
    sens = 2.0 * W_PER_KW * net.r_path[:, location - 1]
    sens_floor = 2.0 * W_PER_KW * net.r_path[:, location - 1].max()
    for i in range(net.node_count):
        scale = sens[i] if sens[i] > 0 else sens_floor
        coeff = sens[i] / scale
        for t in range(steps):
            lo = (net.u_min - v_fixed[i, t]) / scale
            hi = (net.u_max - v_fixed[i, t]) / scale
            b.add(
                [(layout.charge(t), -coeff), (layout.discharge(t), coeff)],
                lo,
                hi,
            )
    b.end_family()

    a_mat, lower, upper, families = b.build(layout.n)
    objectives = _build_objectives(scenario, location, layout, p_fixed, q_fixed)
    return ModelInstance(
        location=location,
        layout=layout,
        A=a_mat,
        l=lower,
        u=upper,
        families=families,
        objectives=objectives,
        net_positions=net_pos,
        scenario=scenario,
    )


def _build_objectives(scenario, location, layout, p_fixed, q_fixed) -> ObjectiveSlices:
    net = scenario.network
    ces = scenario.ces
    steps = scenario.horizon.steps
    dt = scenario.horizon.dt_hours
    m = location - 1

    # Loss: the network quadratic form composed with the affine absorption
    # map; only the storage node's charge-discharge difference is variable.
    h_mat, c0_reactive = loss_quadratic_form(net, q_fixed)
    h_mm = float(h_mat[m, m])
    h_p_fixed = h_mat @ p_fixed  # (N, T)
    rows, cols, vals = [], [], []
    loss_lin = np.zeros(layout.n)
    for t in range(steps):
        ch, dis = layout.charge(t), layout.discharge(t)
        rows += [ch, dis, ch, dis]
        cols += [ch, dis, dis, ch]
        vals += [h_mm, h_mm, -h_mm, -h_mm]
        coeff = 2.0 * float(h_p_fixed[m, t])
        loss_lin[ch] = coeff
        loss_lin[dis] = -coeff
    loss_quad = sp.csc_matrix((vals, (rows, cols)), shape=(layout.n, layout.n))
    loss_const = float(np.sum(p_fixed * h_p_fixed)) + c0_reactive

    price = scenario.price_series()
    trade_lin = np.zeros(layout.n)
    for t in range(steps):
        trade_lin[layout.grid_ces(t)] = price[t] * dt
        for c in range(layout.n_customers):
            trade_lin[layout.grid_customer(c, t)] = price[t] * dt

    invest_lin = np.zeros(layout.n)
    invest_lin[layout.e_cap] = ces.delta_aud_per_kwh

    return ObjectiveSlices(
        loss_quad=loss_quad,
        loss_lin=loss_lin,
        loss_const=loss_const,
        trade_lin=trade_lin,
        invest_lin=invest_lin,
        invest_const=ces.gamma_fixed_aud,
    )


def objective_vectors(model: ModelInstance) -> ObjectiveSlices:
    """The loss/trade/invest slices of the assembled model."""
    return model.objectives


def evaluate_objectives(model: ModelInstance, x: np.ndarray) -> tuple[float, float, float]:
    """Raw objective values (loss kW-steps, trade AUD, invest AUD) at x."""
    obj = model.objectives
    if x.size != model.layout.n:
        raise DimensionMismatch(f"x has {x.size} entries, layout needs {model.layout.n}")
    loss = float(x @ (obj.loss_quad @ x) + obj.loss_lin @ x + obj.loss_const)
    trade = float(obj.trade_lin @ x)
    invest = float(obj.invest_lin @ x + obj.invest_const)
    return loss, trade, invest


def extract_schedule(model: ModelInstance, x: np.ndarray) -> tuple[CesDesign, Schedule]:
    """Unpack a solution vector, reconstructing the eliminated customer
    storage exchange."""
    layout = model.layout
    x = np.asarray(x, dtype=float).ravel()
    if x.size != layout.n:
        raise DimensionMismatch(f"x has {x.size} entries, layout needs {layout.n}")
    steps, n_cust = layout.steps, layout.n_customers
    charge = x[0:steps].copy()
    discharge = x[steps : 2 * steps].copy()
    energy = x[2 * steps : 3 * steps].copy()
    grid_ces = x[3 * steps : 4 * steps].copy()
    grid_customer = x[4 * steps : 4 * steps + n_cust * steps].reshape(n_cust, steps).copy()
    e_cap = float(x[layout.e_cap])
    p_rate = float(x[layout.p_rate])
    design = CesDesign(
        location=model.location,
        e_cap_kwh=e_cap,
        p_rate_kw=p_rate,
        params=model.scenario.ces,
    )
    schedule = Schedule(
        charge_kw=charge,
        discharge_kw=discharge,
        energy_kwh=energy,
        energy0_kwh=model.scenario.ces.initial_soc_fraction * e_cap,
        grid_ces_kw=grid_ces,
        grid_customer_kw=grid_customer,
        ces_customer_kw=model.net_positions - grid_customer,
    )
    return design, schedule
