"""Radial network model: topology validation, linearized power flow and the
quadratic network-loss form.

Conventions
-----------
Node 0 is the slack node and holds a fixed squared voltage ``u0`` (V^2).
Power absorption is positive; exports show up as negative absorption.
Boundary quantities are in kW / kVAR; voltages are squared magnitudes in V^2
and impedances in ohm, so the flow equations convert kW to W internally.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CycleDetected,
    DimensionMismatch,
    DisconnectedNode,
    NonPositiveImpedance,
)

W_PER_KW = 1000.0


@dataclass(frozen=True)
class Line:
    """One line of the radial network, oriented away from the slack node."""

    parent: int
    child: int
    r_ohm: float
    x_ohm: float


@dataclass(frozen=True)
class Network:
    """Validated radial network.

    ``r_path[i][j]`` is the total resistance of the lines shared by the
    slack-to-(i+1) and slack-to-(j+1) paths, ``x_path`` the same for
    reactance.  ``agg[l][k]`` is 1 when non-slack node k+1 lies downstream
    of line l (lines sorted by child node), so line flows are ``agg @ p``.
    """

    node_count: int
    lines: tuple[Line, ...]
    u0: float
    u_min: float
    u_max: float
    downstream: dict[int, frozenset[int]] = field(repr=False)
    r_path: np.ndarray = field(repr=False)
    x_path: np.ndarray = field(repr=False)
    agg: np.ndarray = field(repr=False)

    def line_index(self, child: int) -> int:
        """Index into ``lines`` of the line feeding ``child``."""
        return child - 1


def build_network(lines, u0: float, u_min: float, u_max: float) -> Network:
    """Validate a line list as a tree rooted at node 0 and precompute the
    downstream sets and path-impedance matrices.

    ``lines`` is an iterable of (from, to, r_ohm, x_ohm); orientation in the
    file does not matter, lines are re-oriented away from the slack node.
    """
    raw = [(int(a), int(b), float(r), float(x)) for a, b, r, x in lines]
    if not raw:
        raise DisconnectedNode("empty line list")
    for a, b, r, x in raw:
        if r <= 0.0 or x < 0.0:
            raise NonPositiveImpedance(f"line ({a},{b}) has r={r}, x={x}")

    ids = {a for a, _, _, _ in raw} | {b for _, b, _, _ in raw}
    n = max(ids)
    if ids != set(range(n + 1)):
        missing = sorted(set(range(n + 1)) - ids)
        raise DisconnectedNode(f"node ids not dense 0..{n}; missing {missing}")

    # Breadth-first search from the slack node orients every line and
    # detects both problems: unreachable nodes and cycles.
    adjacency: dict[int, list[tuple[int, int]]] = {i: [] for i in range(n + 1)}
    for idx, (a, b, _, _) in enumerate(raw):
        adjacency[a].append((b, idx))
        adjacency[b].append((a, idx))

    parent = {0: -1}
    oriented: dict[int, Line] = {}
    queue = [0]
    while queue:
        node = queue.pop(0)
        for other, idx in adjacency[node]:
            if other in parent:
                continue
            parent[other] = node
            _, _, r, x = raw[idx]
            oriented[other] = Line(node, other, r, x)
            queue.append(other)

    if len(parent) < n + 1:
        unreachable = sorted(set(range(n + 1)) - set(parent))
        raise DisconnectedNode(f"nodes {unreachable} unreachable from slack")
    if len(raw) != n:
        raise CycleDetected(f"{len(raw)} lines for {n} non-slack nodes")

    line_tuple = tuple(oriented[child] for child in range(1, n + 1))

    downstream: dict[int, frozenset[int]] = {}
    for child in sorted(range(1, n + 1), key=lambda c: -_depth(c, parent)):
        members = {child}
        for other in range(1, n + 1):
            if parent[other] == child:
                members |= downstream[other]
        downstream[child] = frozenset(members)
    downstream[0] = frozenset(range(n + 1))

    agg = np.zeros((n, n))
    for line in line_tuple:
        for k in downstream[line.child]:
            agg[line.child - 1, k - 1] = 1.0

    r_vec = np.array([ln.r_ohm for ln in line_tuple])
    x_vec = np.array([ln.x_ohm for ln in line_tuple])
    r_path = agg.T @ (r_vec[:, None] * agg)
    x_path = agg.T @ (x_vec[:, None] * agg)
    for arr in (agg, r_path, x_path):
        arr.setflags(write=False)

    return Network(
        node_count=n,
        lines=line_tuple,
        u0=float(u0),
        u_min=float(u_min),
        u_max=float(u_max),
        downstream=downstream,
        r_path=r_path,
        x_path=x_path,
        agg=agg,
    )


def _depth(node: int, parent: dict[int, int]) -> int:
    d = 0
    while node != 0:
        node = parent[node]
        d += 1
    return d


def _check_nodal(net: Network, arr: np.ndarray, name: str) -> np.ndarray:
    arr = np.asarray(arr, dtype=float)
    if arr.ndim not in (1, 2) or arr.shape[0] != net.node_count:
        raise DimensionMismatch(
            f"{name} must have leading dimension {net.node_count}, got {arr.shape}"
        )
    return arr


def line_flows(net: Network, p, q):
    """Real and reactive line flows (kW, kVAR) from nodal absorptions.

    Each line's flow is the sum of the absorptions over the nodes downstream
    of it, the closed form of the leaf-to-root flow recursion.  Rows follow
    ``net.lines`` order (sorted by child node); ``p``/``q`` may be per-node
    vectors or (node, time) matrices.
    """
    p = _check_nodal(net, p, "p")
    q = _check_nodal(net, q, "q")
    if p.shape != q.shape:
        raise DimensionMismatch(f"p {p.shape} and q {q.shape} differ")
    return net.agg @ p, net.agg @ q


def lindistflow_voltages(net: Network, p, q) -> np.ndarray:
    """Squared voltage magnitudes (V^2) of the non-slack nodes.

    Matrix form of the linearized flow model: U = u0 - 2*(Rp + Xq) with
    p, q converted from kW to W.
    """
    p = _check_nodal(net, p, "p")
    q = _check_nodal(net, q, "q")
    if p.shape != q.shape:
        raise DimensionMismatch(f"p {p.shape} and q {q.shape} differ")
    drop = 2.0 * W_PER_KW * (net.r_path @ p + net.x_path @ q)
    return net.u0 - drop


def loss_quadratic_form(net: Network, q_fixed) -> tuple[np.ndarray, float]:
    """Quadratic form of the network real power loss over nodal absorptions.

    With every squared line-entry voltage approximated by the slack value
    ``u0``, the loss r*(P^2+Q^2)/u0 summed over lines becomes
    ``p^T H p + c0`` in kW for ``p`` in kW, where H folds the downstream
    aggregation into the shared-path resistance matrix and ``c0`` collects
    the contribution of the fixed reactive series ``q_fixed`` (kVAR, one
    column per time step).
    """
    q = _check_nodal(net, q_fixed, "q_fixed")
    h = (W_PER_KW / net.u0) * net.r_path
    if q.ndim == 1:
        c0 = float(q @ h @ q)
    else:
        c0 = float(np.sum((h @ q) * q))
    return h, c0
