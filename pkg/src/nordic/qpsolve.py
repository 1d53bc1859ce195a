"""Dense convex quadratic programming over boxes, equalities, and
inequalities.

``solve_qp`` runs a primal-dual interior-point method with Mehrotra's
predictor-corrector; ``solve_lp_via_qp`` handles the degenerate zero-
Hessian case with the two-phase simplex and returns an optimal basic
solution.  Convention: minimize 0.5 theta'Q theta + c'theta.
"""

import io
from dataclasses import dataclass, field

import numpy as np

from . import simplex

__all__ = ["QPProblem", "QPSolution", "solve_qp", "solve_lp_via_qp",
           "OPTIMAL", "INFEASIBLE", "UNBOUNDED", "MAXITER"]

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
MAXITER = "maxiter"


@dataclass
class QPProblem:
    """min 0.5 x'Qx + c'x  s.t.  A_eq x = b_eq,  A_in x <= b_in,  lo <= x <= up."""

    Q: np.ndarray
    c: np.ndarray
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    A_in: np.ndarray | None = None
    b_in: np.ndarray | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        p = self.c.size
        self.Q = np.asarray(self.Q, dtype=float)
        if self.Q.shape != (p, p):
            raise ValueError(f"Q must be {p}x{p}")
        if np.abs(self.Q - self.Q.T).max(initial=0.0) > 1e-10 * (1 + np.abs(self.Q).max(initial=0.0)):
            raise ValueError("Q must be symmetric")
        self.Q = 0.5 * (self.Q + self.Q.T)
        self.A_eq = _as_matrix(self.A_eq, p)
        self.b_eq = _as_rhs(self.b_eq, self.A_eq)
        self.A_in = _as_matrix(self.A_in, p)
        self.b_in = _as_rhs(self.b_in, self.A_in)
        self.lower = np.full(p, -np.inf) if self.lower is None else np.asarray(self.lower, dtype=float).ravel()
        self.upper = np.full(p, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float).ravel()
        if self.lower.size != p or self.upper.size != p:
            raise ValueError("bound vectors must have length p")
        if np.any(self.lower > self.upper):
            raise ValueError("lower bound exceeds upper bound")

    @property
    def p(self) -> int:
        return self.c.size

    def objective(self, x: np.ndarray) -> float:
        return float(0.5 * x @ self.Q @ x + self.c @ x)

    def dump(self, path) -> None:
        """Plain-text canonical dump: dimensions header, then dense blocks."""
        with open(path, "w") as fh:
            fh.write(dumps_problem(self))


def _as_matrix(A, p):
    if A is None:
        return np.zeros((0, p))
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.shape[1] != p:
        raise ValueError(f"constraint matrix has {A.shape[1]} columns, expected {p}")
    return A


def _as_rhs(b, A):
    b = np.zeros(0) if b is None else np.asarray(b, dtype=float).ravel()
    if b.size != A.shape[0]:
        raise ValueError("rhs length does not match constraint rows")
    return b


def dumps_problem(prob: QPProblem, binary_mask: np.ndarray | None = None) -> str:
    out = io.StringIO()
    q, r, p = prob.A_eq.shape[0], prob.A_in.shape[0], prob.p
    out.write(f"qp p={p} q={q} r={r}\n")
    for name, block in (("Q", prob.Q), ("c", prob.c), ("A_eq", prob.A_eq),
                        ("b_eq", prob.b_eq), ("A_in", prob.A_in), ("b_in", prob.b_in),
                        ("lower", prob.lower), ("upper", prob.upper)):
        arr = np.atleast_2d(block)
        out.write(f"{name} {arr.shape[0]} {arr.shape[1]}\n")
        for row in arr:
            out.write(" ".join(repr(float(v)) for v in row) + "\n")
    if binary_mask is not None:
        out.write("binary " + " ".join("1" if v else "0" for v in binary_mask) + "\n")
    return out.getvalue()


@dataclass
class QPSolution:
    theta: np.ndarray
    objective: float
    status: str
    eq_duals: np.ndarray
    in_duals: np.ndarray
    bound_duals: tuple  # (lower multipliers, upper multipliers)
    iterations: int
    residuals: dict = field(default_factory=dict)

    def dual_objective(self, prob: QPProblem) -> float:
        """Wolfe-dual value implied by the returned multipliers."""
        zl, zu = self.bound_duals
        quad = 0.5 * self.theta @ prob.Q @ self.theta
        val = -quad - float(self.eq_duals @ prob.b_eq) - float(self.in_duals @ prob.b_in)
        lo_fin = np.isfinite(prob.lower)
        up_fin = np.isfinite(prob.upper)
        val += float(zl[lo_fin] @ prob.lower[lo_fin]) - float(zu[up_fin] @ prob.upper[up_fin])
        return val


def solve_lp_via_qp(problem: QPProblem, max_iter: int | None = None) -> QPSolution:
    """Simplex path for Q identically zero; returns an optimal basic solution."""
    if np.abs(problem.Q).max(initial=0.0) != 0.0:
        raise ValueError("solve_lp_via_qp requires Q == 0")
    p = problem.p
    q, r = problem.A_eq.shape[0], problem.A_in.shape[0]
    # slacks convert inequality rows to equalities
    A = np.vstack([
        np.hstack([problem.A_eq, np.zeros((q, r))]),
        np.hstack([problem.A_in, np.eye(r)]),
    ]) if q + r else np.zeros((0, p + r))
    b = np.concatenate([problem.b_eq, problem.b_in])
    lo = np.concatenate([problem.lower, np.zeros(r)])
    up = np.concatenate([problem.upper, np.full(r, np.inf)])
    c = np.concatenate([problem.c, np.zeros(r)])
    res = simplex.solve_bounded_lp(c, A, b, lo, up, max_iter=max_iter)
    theta = res.x[:p]
    y = res.row_duals
    eq_duals = -y[:q] if y.size else np.zeros(q)
    in_duals = np.maximum(-y[q:q + r], 0.0) if y.size else np.zeros(r)
    d_full = c - (y @ A if y.size else 0.0)
    d = d_full[:p]
    zl = np.where(np.isfinite(problem.lower), np.maximum(d, 0.0), 0.0)
    zu = np.where(np.isfinite(problem.upper), np.maximum(-d, 0.0), 0.0)
    return QPSolution(theta, float(problem.c @ theta), res.status, eq_duals, in_duals,
                      (zl, zu), res.iterations, {"simplex_pivots": res.iterations})


def solve_qp(problem: QPProblem, tol: float = 1e-8, max_iter: int = 200) -> QPSolution:
    """Mehrotra predictor-corrector interior-point method.

    Inequalities get slack variables internally; all bound constraints
    are handled through the barrier.  Residuals are scaled by
    1 + max|c| for the termination test.
    """
    p = problem.p
    q, r = problem.A_eq.shape[0], problem.A_in.shape[0]
    n = p + r
    Q = np.zeros((n, n))
    Q[:p, :p] = problem.Q
    c = np.concatenate([problem.c, np.zeros(r)])
    A = np.vstack([
        np.hstack([problem.A_eq, np.zeros((q, r))]),
        np.hstack([problem.A_in, np.eye(r)]),
    ]) if q + r else np.zeros((0, n))
    b = np.concatenate([problem.b_eq, problem.b_in])
    lo = np.concatenate([problem.lower, np.zeros(r)])
    up = np.concatenate([problem.upper, np.full(r, np.inf)])
    has_lo = np.isfinite(lo)
    has_up = np.isfinite(up)
    if np.any((up - lo) < 1e-12):
        raise ValueError("solve_qp does not support exactly-fixed variables; use equalities")

    scale = 1.0 + np.abs(problem.c).max(initial=0.0)
    m = A.shape[0]

    # strictly interior start
    x = np.zeros(n)
    both = has_lo & has_up
    x[both] = 0.5 * (lo[both] + up[both])
    only_lo = has_lo & ~has_up
    x[only_lo] = lo[only_lo] + 1.0
    only_up = has_up & ~has_lo
    x[only_up] = up[only_up] - 1.0
    g = np.where(has_lo, x - lo, 1.0)
    t = np.where(has_up, up - x, 1.0)
    z = np.where(has_lo, 1.0, 0.0)
    w = np.where(has_up, 1.0, 0.0)
    y = np.zeros(m)
    n_bounds = int(has_lo.sum() + has_up.sum())

    reg_p = 1e-10
    status = MAXITER
    iters = 0
    eps_mach = np.finfo(float).eps
    absQ = np.abs(Q)
    absA = np.abs(A)
    for it in range(1, max_iter + 1):
        iters = it
        r_p = b - A @ x
        r_d = Q @ x + c - (A.T @ y if m else 0.0) - z + w
        mu = (g[has_lo] @ z[has_lo] + t[has_up] @ w[has_up]) / max(n_bounds, 1)
        comp = 0.0
        if n_bounds:
            comp = max(np.abs(g[has_lo] * z[has_lo]).max(initial=0.0),
                       np.abs(t[has_up] * w[has_up]).max(initial=0.0))
        pri = np.abs(r_p).max(initial=0.0)
        dua = np.abs(r_d).max(initial=0.0)
        # Residuals cannot be driven below the float noise of evaluating
        # them; allow that floor on badly scaled (e.g. inverse-weighted)
        # Hessians.
        floor_d = eps_mach * float((absQ @ np.abs(x) + (np.abs(y) @ absA if m else 0.0)
                                    + z + w + np.abs(c)).max(initial=0.0))
        floor_p = eps_mach * float((absA @ np.abs(x) + np.abs(b)).max(initial=0.0)) if m else 0.0
        if (pri <= tol * scale + 16 * floor_p and dua <= tol * scale + 16 * floor_d
                and comp <= tol * scale):
            status = OPTIMAL
            break

        d_diag = np.zeros(n)
        d_diag[has_lo] += z[has_lo] / g[has_lo]
        d_diag[has_up] += w[has_up] / t[has_up]
        H = Q + np.diag(d_diag + reg_p)
        jit_h = 1e-12 * (1.0 + np.abs(Q).max(initial=0.0))
        for _ in range(10):
            try:
                L = np.linalg.cholesky(H)
                break
            except np.linalg.LinAlgError:
                H = H + jit_h * np.eye(n)
                jit_h *= 100.0
        else:
            raise np.linalg.LinAlgError("barrier system not factorizable")

        if m:
            ha = _cho_solve(L, A.T)
            S = A @ ha
            jit = 1e-12 * (1.0 + np.abs(S).max(initial=0.0))
            for _ in range(8):
                try:
                    S_fact = np.linalg.cholesky(S + jit * np.eye(m))
                    break
                except np.linalg.LinAlgError:
                    jit *= 100.0
            else:
                raise np.linalg.LinAlgError("KKT Schur complement not factorizable")

        def kkt_solve(rd_bar, rp):
            hx = _cho_solve(L, rd_bar)
            if m:
                dy = _cho_solve(S_fact, rp - A @ hx)
                dx = _cho_solve(L, rd_bar + A.T @ dy)
            else:
                dy = np.zeros(0)
                dx = hx
            return dx, dy

        def directions(sig_mu, dg_dz=None, dt_dw=None):
            # complementarity targets: g.z -> sig_mu, t.w -> sig_mu
            rgz = g * z - sig_mu
            rtw = t * w - sig_mu
            if dg_dz is not None:
                rgz = rgz + dg_dz
                rtw = rtw + dt_dw
            rd_bar = -r_d.copy()
            rd_bar[has_lo] += -(rgz[has_lo]) / g[has_lo]
            rd_bar[has_up] += (rtw[has_up]) / t[has_up]
            dx, dy = kkt_solve(rd_bar, r_p)
            dz = np.zeros(n)
            dw = np.zeros(n)
            dz[has_lo] = -(rgz[has_lo] + z[has_lo] * dx[has_lo]) / g[has_lo]
            dw[has_up] = -(rtw[has_up] - w[has_up] * dx[has_up]) / t[has_up]
            return dx, dy, dz, dw

        # predictor
        dx_a, dy_a, dz_a, dw_a = directions(0.0)
        ap_a = _max_step(g, dx_a, t, -dx_a, has_lo, has_up)
        ad_a = _max_step(z, dz_a, w, dw_a, has_lo, has_up)
        g_a = g + ap_a * np.where(has_lo, dx_a, 0.0)
        t_a = t - ap_a * np.where(has_up, dx_a, 0.0)
        z_a = z + ad_a * dz_a
        w_a = w + ad_a * dw_a
        mu_aff = (g_a[has_lo] @ z_a[has_lo] + t_a[has_up] @ w_a[has_up]) / max(n_bounds, 1)
        sigma = (mu_aff / mu) ** 3 if mu > 0 else 0.1
        sigma = min(max(sigma, 0.0), 1.0)

        # corrector
        dg_dz = np.where(has_lo, dx_a, 0.0) * dz_a
        dt_dw = -np.where(has_up, dx_a, 0.0) * dw_a
        dx, dy, dz, dw = directions(sigma * mu, dg_dz, dt_dw)

        tau = 0.9995 if mu < 1e-5 else 0.99
        ap = tau * _max_step(g, dx, t, -dx, has_lo, has_up)
        ad = tau * _max_step(z, dz, w, dw, has_lo, has_up)
        ap = min(ap, 1.0)
        ad = min(ad, 1.0)
        x = x + ap * dx
        y = y + ad * dy
        z = z + ad * dz
        w = w + ad * dw
        g = np.where(has_lo, x - lo, 1.0)
        t = np.where(has_up, up - x, 1.0)
        # keep slacks strictly positive against rounding
        g[has_lo] = np.maximum(g[has_lo], 1e-30)
        t[has_up] = np.maximum(t[has_up], 1e-30)

    if status != OPTIMAL:
        # Distinguish a genuinely infeasible constraint system from slow
        # convergence: phase-1 certificate on the equality/bound system.
        if _system_infeasible(A, b, lo, up):
            status = INFEASIBLE

    theta = x[:p]
    obj = problem.objective(theta)
    # Convert to the Lagrangian convention Qx + c + A_eq'v + A_in'u - zl + zu = 0
    # with u >= 0; the internal system carries A'y with the opposite sign.
    eq_duals = -y[:q]
    in_duals = np.maximum(-y[q:q + r], 0.0)
    zl = np.where(np.isfinite(problem.lower), z[:p], 0.0)
    zu = np.where(np.isfinite(problem.upper), w[:p], 0.0)
    res = {
        "primal": float(np.abs(b - A @ x).max(initial=0.0)),
        "dual": float(np.abs(Q @ x + c - (A.T @ y if m else 0.0) - z + w).max(initial=0.0)),
        "complementarity": float(comp),
    }
    return QPSolution(theta, obj, status, eq_duals, in_duals, (zl, zu), iters, res)


def _cho_solve(L, rhs):
    tmp = np.linalg.solve(L, rhs)
    return np.linalg.solve(L.T, tmp)


def _max_step(g, dg, t, dt, has_lo, has_up) -> float:
    """Largest alpha keeping the masked slacks nonnegative."""
    alpha = 1.0
    neg = has_lo & (dg < 0)
    if neg.any():
        alpha = min(alpha, float(np.min(-g[neg] / dg[neg])))
    neg = has_up & (dt < 0)
    if neg.any():
        alpha = min(alpha, float(np.min(-t[neg] / dt[neg])))
    return alpha


def _system_infeasible(A, b, lo, up) -> bool:
    if A.shape[0] == 0:
        return bool(np.any(lo > up))
    res = simplex.solve_bounded_lp(np.zeros(A.shape[1]), A, b, lo, up)
    return res.status == simplex.INFEASIBLE
