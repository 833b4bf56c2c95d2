"""Independent brute-force oracles used by the test suite.

These deliberately avoid the solver's code paths: the QP oracle enumerates
active sets and solves dense KKT systems, taking the feasible minimum.
"""

import itertools

import numpy as np
import scipy.sparse as sp

from cesplan.qpcore import QuadraticProgram


def active_set_minimum(prob: QuadraticProgram, tol: float = 1e-8):
    """Global minimum of a strictly convex QP by enumerating every
    lower/upper active-set assignment of up to n constraints.

    Returns (x, objective).  The true minimizer's active set appears in the
    enumeration, and solving the equality-constrained problem on that set
    recovers it exactly; every other feasible candidate can only do worse.
    """
    P = prob.P.toarray()
    q = prob.q
    A = prob.A.toarray()
    n, m = prob.n, prob.m
    best_x, best_val = None, np.inf

    finite_low = np.isfinite(prob.l)
    finite_upp = np.isfinite(prob.u)

    def feasible(x):
        ax = A @ x
        return np.all(ax >= prob.l - tol) and np.all(ax <= prob.u + tol)

    for k in range(0, min(n, m) + 1):
        for subset in itertools.combinations(range(m), k):
            for sides in itertools.product((0, 1), repeat=k):
                b = np.empty(k)
                ok = True
                for pos, (i, side) in enumerate(zip(subset, sides)):
                    if side == 0:
                        if not finite_low[i]:
                            ok = False
                            break
                        b[pos] = prob.l[i]
                    else:
                        if not finite_upp[i]:
                            ok = False
                            break
                        b[pos] = prob.u[i]
                if not ok:
                    continue
                a_sub = A[list(subset)]
                kkt = np.block([[P, a_sub.T], [a_sub, np.zeros((k, k))]])
                rhs = np.concatenate([-q, b])
                try:
                    sol = np.linalg.solve(kkt, rhs)
                except np.linalg.LinAlgError:
                    continue
                x = sol[:n]
                if feasible(x):
                    val = 0.5 * x @ P @ x + q @ x
                    if val < best_val - 1e-14:
                        best_val, best_x = val, x
    return best_x, best_val


def random_feasible_qp(rng, n_max=8, m_max=8):
    """Random strictly convex QP that is feasible by construction."""
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(0, m_max + 1))
    factor = rng.normal(0, 1, (n, n))
    P = factor.T @ factor + 0.1 * np.eye(n)
    q = rng.normal(0, 2, n)
    A = rng.normal(0, 1, (m, n))
    x_feas = rng.normal(0, 1, n)
    slack_low = rng.uniform(0.05, 2.0, m)
    slack_upp = rng.uniform(0.05, 2.0, m)
    l = A @ x_feas - slack_low
    u = A @ x_feas + slack_upp
    # Sprinkle in one-sided rows and an equality.
    for i in range(m):
        r = rng.random()
        if r < 0.15:
            l[i] = -np.inf
        elif r < 0.3:
            u[i] = np.inf
        elif r < 0.4:
            l[i] = u[i] = A[i] @ x_feas
    return QuadraticProgram(
        P=sp.csc_matrix(P), q=q, A=sp.csc_matrix(A), l=l, u=u
    )
