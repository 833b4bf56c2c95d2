"""Sparse convex quadratic program solver.

Solves
    minimize   0.5 x'Px + q'x
    subject to l <= Ax <= u
with an ADMM-type operator splitting method: one sparse factorization of the
reduced KKT system, diagonal Ruiz equilibration for mixed scales, per-row
step parameters, and infeasibility certificates from the iterate
differences.  An optional polish stage (a primal-dual Newton barrier
refinement on the same scaled data) finishes a converged iterate to near
machine precision, which flat optimal faces otherwise prevent.  Equality
rows are encoded as l == u; bounds with magnitude >= INFINITY_THRESHOLD are
treated as infinite.

Everything is deterministic: no randomness, fixed iteration order.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DimensionMismatch

INFINITY = 1e30
INFINITY_THRESHOLD = 1e20

RHO_MIN = 1e-6
RHO_MAX = 1e6
RHO_EQUALITY_SCALE = 1e3


class Status(enum.Enum):
    OPTIMAL = "optimal"
    PRIMAL_INFEASIBLE = "primal_infeasible"
    DUAL_INFEASIBLE = "dual_infeasible"
    MAX_ITER = "max_iter"


@dataclass
class QuadraticProgram:
    """Problem data; P must be symmetric PSD, bounds with l <= u."""

    P: sp.csc_matrix
    q: np.ndarray
    A: sp.csc_matrix
    l: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        self.P = sp.csc_matrix(self.P).astype(float)
        self.A = sp.csc_matrix(self.A).astype(float)
        self.q = np.asarray(self.q, dtype=float).ravel()
        self.l = _to_inf(np.asarray(self.l, dtype=float).ravel())
        self.u = _to_inf(np.asarray(self.u, dtype=float).ravel())
        n = self.q.size
        m = self.l.size
        if self.P.shape != (n, n):
            raise DimensionMismatch(f"P is {self.P.shape}, expected ({n},{n})")
        if self.A.shape != (m, n):
            raise DimensionMismatch(f"A is {self.A.shape}, expected ({m},{n})")
        if self.u.size != m:
            raise DimensionMismatch("l and u lengths differ")
        if (self.P - self.P.T).power(2).sum() > 1e-12 * max(1.0, abs(self.P).sum()):
            raise ValueError("P must be symmetric")
        bounded = np.isfinite(self.l) & np.isfinite(self.u)
        if np.any(self.l[bounded] > self.u[bounded] + 1e-12):
            raise ValueError("l must not exceed u")

    @property
    def n(self) -> int:
        return self.q.size

    @property
    def m(self) -> int:
        return self.l.size

    def objective(self, x: np.ndarray) -> float:
        return float(0.5 * x @ (self.P @ x) + self.q @ x)


@dataclass
class SolverSettings:
    eps_abs: float = 1e-6
    eps_rel: float = 1e-6
    eps_prim_inf: float = 1e-9
    eps_dual_inf: float = 1e-9
    max_iter: int = 200_000
    rho: float = 0.1
    sigma: float = 1e-6
    alpha: float = 1.6
    adaptive_rho: bool = False
    adaptive_rho_interval: int = 50
    adaptive_rho_tolerance: float = 5.0
    check_interval: int = 25
    scaling_iters: int = 10
    polish_enabled: bool = True
    polish_delta: float = 1e-9
    polish_trigger: float = 1e3
    polish_max_iter: int = 60

    def __post_init__(self):
        if min(self.eps_abs, self.eps_rel) <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass
class QpSolution:
    x: np.ndarray
    y: np.ndarray
    status: Status
    iterations: int
    primal_residual: float
    dual_residual: float
    objective: float
    polished: bool = False
    certificate: np.ndarray | None = field(default=None, repr=False)


def _to_inf(v: np.ndarray) -> np.ndarray:
    v = v.copy()
    v[v >= INFINITY_THRESHOLD] = np.inf
    v[v <= -INFINITY_THRESHOLD] = -np.inf
    return v


def _ruiz_scaling(P, q, A, l, u, iters):
    """Symmetric diagonal equilibration of the stacked KKT data plus a
    scalar cost scaling; returns scaled data and the scaling diagonals."""
    n, m = q.size, l.size
    d = np.ones(n)
    e = np.ones(m)
    c = 1.0
    Ps, qs, As = P.copy(), q.copy(), A.copy()
    ls, us = l.copy(), u.copy()
    for _ in range(iters):
        norm_cols_p = _col_inf_norm(Ps, n)
        norm_cols_a = _col_inf_norm(As, n)
        norm_rows_a = _col_inf_norm(As.T.tocsc(), m)
        dn = np.sqrt(np.maximum(norm_cols_p, norm_cols_a))
        en = np.sqrt(norm_rows_a)
        dn[dn < 1e-8] = 1.0
        en[en < 1e-8] = 1.0
        dd = 1.0 / dn
        ee = 1.0 / en
        Ps = _dscale(dd, Ps, dd)
        As = _dscale(ee, As, dd)
        qs = qs * dd
        ls = ls * ee
        us = us * ee
        d *= dd
        e *= ee
        # Cost scaling keeps the quadratic and linear parts comparable.
        p_norm = np.mean(_col_inf_norm(Ps, n)) if Ps.nnz else 0.0
        q_norm = float(np.linalg.norm(qs, np.inf)) if qs.size else 0.0
        gamma = 1.0 / max(1e-8, max(p_norm, q_norm))
        Ps = Ps * gamma
        qs = qs * gamma
        c *= gamma
    return Ps.tocsc(), qs, As.tocsc(), ls, us, d, e, c


def _col_inf_norm(mat, ncols) -> np.ndarray:
    mat = mat.tocsc()
    out = np.zeros(ncols)
    if mat.nnz:
        lens = np.diff(mat.indptr)
        nonempty = lens > 0
        starts = mat.indptr[:-1][nonempty]
        out[nonempty] = np.maximum.reduceat(np.abs(mat.data), starts)
    return out


def _dscale(left: np.ndarray, mat, right: np.ndarray):
    return sp.diags(left) @ mat @ sp.diags(right)


def _rho_vector(l, u, rho) -> np.ndarray:
    eq = np.isfinite(l) & np.isfinite(u) & (u - l < 1e-12)
    loose = ~np.isfinite(l) & ~np.isfinite(u)
    vec = np.full(l.size, rho)
    vec[eq] = min(rho * RHO_EQUALITY_SCALE, RHO_MAX)
    vec[loose] = RHO_MIN
    return vec


class _Workspace:
    """Scaled problem data plus the factorized reduced KKT system."""

    def __init__(self, prob: QuadraticProgram, settings: SolverSettings):
        self.n, self.m = prob.n, prob.m
        self.settings = settings
        if settings.scaling_iters > 0:
            (self.P, self.q, self.A, self.l, self.u,
             self.d, self.e, self.c) = _ruiz_scaling(
                prob.P, prob.q, prob.A, prob.l, prob.u, settings.scaling_iters)
        else:
            self.P, self.q, self.A = prob.P, prob.q, prob.A
            self.l, self.u = prob.l, prob.u
            self.d = np.ones(self.n)
            self.e = np.ones(self.m)
            self.c = 1.0
        self.rho_bar = settings.rho
        self._factorize()

    def _factorize(self):
        self.rho_vec = _rho_vector(self.l, self.u, self.rho_bar)
        sigma = self.settings.sigma
        if self.m:
            kkt = sp.bmat(
                [
                    [self.P + sigma * sp.eye(self.n), self.A.T],
                    [self.A, -sp.diags(1.0 / self.rho_vec)],
                ],
                format="csc",
            )
        else:
            kkt = (self.P + sigma * sp.eye(self.n)).tocsc()
        self.solve_kkt = spla.splu(kkt).solve

    def maybe_update_rho(self, x, z, y):
        """OSQP-style balance of the scaled residuals; refactorizes when the
        step parameter changes by more than the tolerance factor."""
        ax = self.A @ x
        px = self.P @ x
        aty = self.A.T @ y
        rp = _norm_inf(ax - z) / max(_norm_inf(ax), _norm_inf(z), 1e-12)
        rd = _norm_inf(px + self.q + aty) / max(
            _norm_inf(px), _norm_inf(aty), _norm_inf(self.q), 1e-12
        )
        ratio = np.sqrt(rp / max(rd, 1e-16))
        new_rho = float(np.clip(self.rho_bar * ratio, RHO_MIN, RHO_MAX))
        tol = self.settings.adaptive_rho_tolerance
        if new_rho > self.rho_bar * tol or new_rho < self.rho_bar / tol:
            self.rho_bar = new_rho
            self._factorize()
            return True
        return False


def _norm_inf(v) -> float:
    return float(np.linalg.norm(v, np.inf)) if np.size(v) else 0.0


def solve_qp(
    prob: QuadraticProgram,
    settings: SolverSettings | None = None,
    x0: np.ndarray | None = None,
    y0: np.ndarray | None = None,
) -> QpSolution:
    """Solve the QP; returns the best iterate with status and residuals.

    On OPTIMAL the unscaled residuals satisfy the eps_abs/eps_rel criterion
    and, when polishing succeeds, the KKT conditions hold to roughly machine
    precision.  PRIMAL/DUAL_INFEASIBLE carry the detected certificate ray.
    """
    settings = settings or SolverSettings()
    ws = _Workspace(prob, settings)
    n, m = ws.n, ws.m

    x = np.zeros(n) if x0 is None else (np.asarray(x0, dtype=float) / ws.d)
    y = (np.asarray(y0, dtype=float) * ws.c / ws.e) if (y0 is not None and m) else np.zeros(m)
    z = ws.A @ x if m else np.zeros(0)

    alpha = settings.alpha
    sigma = settings.sigma
    status = Status.MAX_ITER
    certificate = None
    polished = False
    last = None
    converged = None  # iterate meeting the requested tolerance, unpolished
    use_polish = settings.polish_enabled and m > 0
    # The finisher is attempted when the residuals reach a loose multiple of
    # the tolerance or at geometric iteration milestones, whichever comes
    # first; each failed attempt demands a tighter stage and a later
    # milestone, with a hard cap on attempts.
    stage_scales = [settings.polish_trigger, 1.0, 1e-2]
    stage = 0
    next_attempt = 500
    attempts = 0
    max_attempts = 6

    for it in range(1, settings.max_iter + 1):
        x_prev, y_prev = x, y

        rhs = np.concatenate([sigma * x - ws.q, z - y / ws.rho_vec]) if m else (sigma * x - ws.q)
        sol = ws.solve_kkt(rhs)
        x_tilde = sol[:n]
        if m:
            z_tilde = z + (sol[n:] - y) / ws.rho_vec
        x = alpha * x_tilde + (1.0 - alpha) * x_prev
        if m:
            z_relaxed = alpha * z_tilde + (1.0 - alpha) * z
            z_new = np.clip(z_relaxed + y / ws.rho_vec, ws.l, ws.u)
            y = y + ws.rho_vec * (z_relaxed - z_new)
            z = z_new

        if it % settings.check_interval == 0 or it == settings.max_iter:
            rp, rd, eps_p, eps_d = _residuals(prob, ws, x, z, y, settings)
            last = (ws.d * x, ws.e * y / ws.c if m else np.zeros(0), rp, rd, it)
            full_ok = rp <= eps_p and rd <= eps_d
            if full_ok:
                converged = last
            if use_polish and attempts < max_attempts:
                stage_hit = (
                    stage < len(stage_scales)
                    and rp <= stage_scales[stage] * eps_p
                    and rd <= stage_scales[stage] * eps_d
                )
                if stage_hit or it >= next_attempt:
                    attempts += 1
                    refined = _newton_refine(prob, ws, last[0], settings)
                    if refined is not None:
                        converged = (*refined, it)
                        polished = True
                        break
                    if stage_hit:
                        stage += 1
                    next_attempt = it * 4
            if full_ok and (
                not use_polish or attempts >= max_attempts or stage >= len(stage_scales)
            ):
                break
            if converged is None:
                cert = _primal_infeasibility(ws, y - y_prev, settings)
                if cert is not None:
                    status = Status.PRIMAL_INFEASIBLE
                    certificate = cert
                    break
                cert = _dual_infeasibility(ws, x - x_prev, settings)
                if cert is not None:
                    status = Status.DUAL_INFEASIBLE
                    certificate = cert
                    break
            if (
                settings.adaptive_rho
                and m
                and it % settings.adaptive_rho_interval == 0
            ):
                ws.maybe_update_rho(x, z, y)

    if converged is not None and status is Status.MAX_ITER:
        status = Status.OPTIMAL
        result = converged
    elif last is not None:
        result = last
    else:
        rp, rd, _, _ = _residuals(prob, ws, x, z, y, settings)
        result = (ws.d * x, ws.e * y / ws.c if m else np.zeros(0), rp, rd, settings.max_iter)

    x_out, y_out, rp, rd, iterations = result

    return QpSolution(
        x=x_out,
        y=y_out,
        status=status,
        iterations=iterations,
        primal_residual=rp,
        dual_residual=rd,
        objective=prob.objective(x_out),
        polished=polished,
        certificate=certificate,
    )


def _residuals(prob, ws, x, z, y, settings):
    """Unscaled residual norms and their stopping thresholds."""
    n, m = ws.n, ws.m
    x_u = ws.d * x
    px = prob.P @ x_u
    if m:
        z_u = z / ws.e
        y_u = ws.e * y / ws.c
        ax = prob.A @ x_u
        aty = prob.A.T @ y_u
        rp = _norm_inf(ax - z_u)
        eps_p = settings.eps_abs + settings.eps_rel * max(_norm_inf(ax), _norm_inf(z_u))
    else:
        aty = np.zeros(n)
        rp = 0.0
        eps_p = settings.eps_abs
    rd = _norm_inf(px + prob.q + aty)
    eps_d = settings.eps_abs + settings.eps_rel * max(
        _norm_inf(px), _norm_inf(aty), _norm_inf(prob.q)
    )
    return rp, rd, eps_p, eps_d


def _primal_infeasibility(ws, dy, settings):
    norm = _norm_inf(dy)
    if norm <= settings.eps_prim_inf or ws.m == 0:
        return None
    v = dy / norm
    pos, neg = np.maximum(v, 0.0), np.minimum(v, 0.0)
    if np.any(pos[~np.isfinite(ws.u)] > settings.eps_prim_inf):
        return None
    if np.any(-neg[~np.isfinite(ws.l)] > settings.eps_prim_inf):
        return None
    gap = float(
        np.sum(ws.u[np.isfinite(ws.u)] * pos[np.isfinite(ws.u)])
        + np.sum(ws.l[np.isfinite(ws.l)] * neg[np.isfinite(ws.l)])
    )
    if gap < -settings.eps_prim_inf and _norm_inf(ws.A.T @ v) <= settings.eps_prim_inf:
        return ws.e * v
    return None


def _dual_infeasibility(ws, dx, settings):
    norm = _norm_inf(dx)
    if norm <= settings.eps_dual_inf:
        return None
    v = dx / norm
    eps = settings.eps_dual_inf
    if ws.q @ v >= -eps or _norm_inf(ws.P @ v) > eps:
        return None
    if ws.m:
        av = ws.A @ v
        if np.any((av > eps) & np.isfinite(ws.u)) or np.any((av < -eps) & np.isfinite(ws.l)):
            return None
    return ws.d * v


def _newton_refine(prob, ws, x_unscaled, settings):
    """High-accuracy finish: a primal-dual Newton (predictor-corrector
    barrier) solve of the scaled problem, sharing the workspace scaling and
    KKT sparsity and starting from the splitting iterate.

    The splitting iteration transports the iterate cheaply but converges
    slowly in the objective along degenerate faces; this finisher closes the
    gap in a few dozen factorizations and lands on the analytic center of
    the optimal face, which keeps results deterministic.  Returns unscaled
    (x, y, primal_res, dual_res) or None, in which case the caller keeps the
    splitting iterate."""
    scaled = _barrier_solve(
        ws.P, ws.q, ws.A, ws.l, ws.u,
        x0=x_unscaled / ws.d,
        reg=settings.polish_delta,
        max_iter=settings.polish_max_iter,
    )
    if scaled is None:
        return None
    x = ws.d * scaled[0]
    y = ws.e * scaled[1] / ws.c
    rp, rd, comp = kkt_residuals(prob, x, y)
    accept_tol = min(max(settings.eps_abs, 1e-9), 1e-6)
    if rp <= accept_tol and rd <= accept_tol and comp <= accept_tol:
        return x, y, rp, rd
    return None


def _barrier_solve(P, q, A, l, u, x0=None, reg=1e-9, max_iter=60, tol=1e-12):
    """Mehrotra-style predictor-corrector for l <= Ax <= u.

    Rows with u - l below 1e-9 are treated as equalities with free
    multipliers; finite sides of the remaining rows carry slack/multiplier
    pairs.  Each iteration refactorizes the quasi-definite KKT matrix with
    the current barrier diagonal.  The best iterate is tracked and returned;
    pushing the barrier parameter to the bitter end only erodes the dual
    residual numerically, so the loop stops once progress reverses."""
    n = q.size
    m = l.size
    finite_l = np.isfinite(l)
    finite_u = np.isfinite(u)
    eq = finite_l & finite_u & (u - l <= 1e-9)
    has_l = finite_l & ~eq
    has_u = finite_u & ~eq
    b_eq = 0.5 * (l + u)
    n_pairs = int(has_l.sum() + has_u.sum())
    if n_pairs == 0 and not eq.any():
        return None

    # Slacks start consistent with the warm point but pushed off the
    # boundary; a boundary start freezes the very first step length.
    x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float)
    ax0 = A @ x
    nu = np.zeros(m)  # equality-row multipliers, zero elsewhere
    sl = np.where(has_l, np.maximum(ax0 - l, 0.1), 1.0)
    su = np.where(has_u, np.maximum(u - ax0, 0.1), 1.0)
    lam_l = np.where(has_l, 1.0, 0.0)
    lam_u = np.where(has_u, 1.0, 0.0)

    def mu_of():
        total = float(np.sum(sl[has_l] * lam_l[has_l]) + np.sum(su[has_u] * lam_u[has_u]))
        return total / max(n_pairs, 1)

    best = None
    best_score = np.inf
    for _ in range(max_iter):
        ax = A @ x
        y_net = np.where(eq, nu, lam_u - lam_l)
        r_d = P @ x + q + A.T @ y_net
        r_eq = np.where(eq, ax - b_eq, 0.0)
        r_l = np.where(has_l, sl - (ax - l), 0.0)
        r_u = np.where(has_u, su - (u - ax), 0.0)
        mu = mu_of()

        score = max(mu, _norm_inf(r_eq), _norm_inf(r_l), _norm_inf(r_u), _norm_inf(r_d))
        if score < best_score:
            best = (x.copy(), y_net.copy())
            best_score = score
        if score <= tol:
            break
        if best_score < 1e-7 and score > 1e3 * best_score:
            break

        sl_safe = np.maximum(sl, 1e-14)
        su_safe = np.maximum(su, 1e-14)
        w = np.where(has_l, np.minimum(lam_l / sl_safe, 1e14), 0.0) + np.where(
            has_u, np.minimum(lam_u / su_safe, 1e14), 0.0
        )
        d_block = np.where(eq, reg, 1.0 / np.maximum(w, 1e-16))
        kkt = sp.bmat(
            [
                [P + reg * sp.eye(n), A.T],
                [A, -sp.diags(d_block)],
            ],
            format="csc",
        )
        try:
            lu_fact = spla.splu(kkt)
        except RuntimeError:
            return None

        def solve_direction(rc_l, rc_u):
            # Condensed second block: a.dx - dy/w = -h/w on inequality rows.
            h = np.where(has_u, (rc_u + lam_u * r_u) / su_safe, 0.0) - np.where(
                has_l, (rc_l + lam_l * r_l) / sl_safe, 0.0
            )
            rhs2 = np.where(eq, -r_eq, np.where(w > 0, -h / np.maximum(w, 1e-16), 0.0))
            rhs = np.concatenate([-r_d, rhs2])
            sol = lu_fact.solve(rhs)
            dx = sol[:n]
            dy = sol[n:]
            adx = A @ dx
            dsl = np.where(has_l, adx - r_l, 0.0)
            dsu = np.where(has_u, -adx - r_u, 0.0)
            dlam_l = np.where(has_l, (rc_l - lam_l * dsl) / sl_safe, 0.0)
            dlam_u = np.where(has_u, (rc_u - lam_u * dsu) / su_safe, 0.0)
            dnu = np.where(eq, dy, 0.0)
            return dx, dnu, dsl, dsu, dlam_l, dlam_u

        def step_len(v, dv, mask):
            neg = mask & (dv < 0)
            if not neg.any():
                return 1.0
            return min(1.0, float(np.min(-v[neg] / dv[neg])))

        # Predictor (affine scaling).
        rc_l_aff = np.where(has_l, -sl * lam_l, 0.0)
        rc_u_aff = np.where(has_u, -su * lam_u, 0.0)
        aff = solve_direction(rc_l_aff, rc_u_aff)
        dx_a, dnu_a, dsl_a, dsu_a, dll_a, dlu_a = aff
        alpha_p = min(step_len(sl, dsl_a, has_l), step_len(su, dsu_a, has_u))
        alpha_d = min(step_len(lam_l, dll_a, has_l), step_len(lam_u, dlu_a, has_u))
        mu_aff = (
            np.sum((sl + alpha_p * dsl_a)[has_l] * (lam_l + alpha_d * dll_a)[has_l])
            + np.sum((su + alpha_p * dsu_a)[has_u] * (lam_u + alpha_d * dlu_a)[has_u])
        ) / max(n_pairs, 1)
        sigma = (mu_aff / mu) ** 3 if mu > 0 else 0.0
        sigma = min(max(sigma, 0.0), 1.0)

        # Corrector with centering.
        rc_l = np.where(has_l, sigma * mu - sl * lam_l - dsl_a * dll_a, 0.0)
        rc_u = np.where(has_u, sigma * mu - su * lam_u - dsu_a * dlu_a, 0.0)
        dx, dnu, dsl, dsu, dlam_l, dlam_u = solve_direction(rc_l, rc_u)
        alpha_p = 0.99 * min(step_len(sl, dsl, has_l), step_len(su, dsu, has_u))
        alpha_d = 0.99 * min(step_len(lam_l, dlam_l, has_l), step_len(lam_u, dlam_u, has_u))
        if min(alpha_p, alpha_d) <= 1e-10:
            break

        x = x + alpha_p * dx
        sl = np.where(has_l, sl + alpha_p * dsl, 1.0)
        su = np.where(has_u, su + alpha_p * dsu, 1.0)
        nu = nu + alpha_d * dnu
        lam_l = np.where(has_l, lam_l + alpha_d * dlam_l, 0.0)
        lam_u = np.where(has_u, lam_u + alpha_d * dlam_u, 0.0)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(lam_l)) and np.all(np.isfinite(lam_u))):
            break

    return best


def kkt_residuals(prob: QuadraticProgram, x, y) -> tuple[float, float, float]:
    """Exact KKT residual norms at (x, y), independent of solver internals.

    Returns (primal bound violation, stationarity residual, complementary
    slackness).  For an infinite bound the slackness term is the offending
    multiplier itself, which must vanish at an optimum.
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size != prob.n or y.size != prob.m:
        raise DimensionMismatch("x or y dimension mismatch")
    if prob.m:
        ax = prob.A @ x
        primal = _norm_inf(np.maximum(prob.l - ax, 0.0) + np.maximum(ax - prob.u, 0.0))
        dual = _norm_inf(prob.P @ x + prob.q + prob.A.T @ y)
        y_pos, y_neg = np.maximum(y, 0.0), np.minimum(y, 0.0)
        up_gap = np.where(np.isfinite(prob.u), prob.u - ax, 1.0)
        low_gap = np.where(np.isfinite(prob.l), ax - prob.l, 1.0)
        comp = _norm_inf(np.abs(y_pos * up_gap) + np.abs(y_neg * low_gap))
    else:
        primal = 0.0
        dual = _norm_inf(prob.P @ x + prob.q)
        comp = 0.0
    return primal, dual, comp


# ---------------------------------------------------------------------------
# Problem dump/load: plain-text sparse triplet format for cross-checking a
# problem against external tools.  Layout:
#
#   qp 1
#   n <n>
#   m <m>
#   P <nnz>          followed by nnz lines "row col value"
#   q                followed by n lines "value"
#   A <nnz>          followed by nnz lines "row col value"
#   l                followed by m lines "value"
#   u                followed by m lines "value"
#
# Indices are 0-based; any bound magnitude >= 1e20 means infinite (the
# writer emits +/-1e30).
# ---------------------------------------------------------------------------


def dump_problem(prob: QuadraticProgram, path) -> None:
    """Write the problem in the documented triplet text format."""
    lines = ["qp 1", f"n {prob.n}", f"m {prob.m}"]
    for name, mat in (("P", prob.P), ("A", prob.A)):
        coo = mat.tocoo()
        lines.append(f"{name} {coo.nnz}")
        order = np.lexsort((coo.col, coo.row))
        for k in order:
            lines.append(f"{coo.row[k]} {coo.col[k]} {float(coo.data[k])!r}")
        if name == "P":
            lines.append("q")
            lines.extend(f"{float(v)!r}" for v in prob.q)
    for name, vec in (("l", prob.l), ("u", prob.u)):
        lines.append(name)
        lines.extend(f"{_from_inf(v)!r}" for v in vec)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _from_inf(v: float) -> float:
    if np.isposinf(v):
        return INFINITY
    if np.isneginf(v):
        return -INFINITY
    return float(v)


def load_problem(path) -> QuadraticProgram:
    """Read a problem written by :func:`dump_problem`."""
    with open(path) as fh:
        tokens = fh.read().split("\n")
    it = iter(t for t in tokens if t.strip())
    magic = next(it)
    if magic.split() != ["qp", "1"]:
        raise ValueError(f"unsupported format header: {magic!r}")
    n = int(next(it).split()[1])
    m = int(next(it).split()[1])

    def read_matrix(tag, rows, cols):
        head = next(it).split()
        if head[0] != tag:
            raise ValueError(f"expected {tag} section, got {head[0]}")
        nnz = int(head[1])
        ri, ci, vals = [], [], []
        for _ in range(nnz):
            a, b, v = next(it).split()
            ri.append(int(a)); ci.append(int(b)); vals.append(float(v))
        return sp.csc_matrix((vals, (ri, ci)), shape=(rows, cols))

    def read_vector(tag, size):
        head = next(it).split()
        if head[0] != tag:
            raise ValueError(f"expected {tag} section, got {head[0]}")
        return np.array([float(next(it)) for _ in range(size)])

    P = read_matrix("P", n, n)
    q = read_vector("q", n)
    A = read_matrix("A", m, n)
    l = read_vector("l", m)
    u = read_vector("u", m)
    return QuadraticProgram(P=P, q=q, A=A, l=l, u=u)
