"""Bounded-variable two-phase simplex over equality rows.

Internal engine shared by the LP path of ``qpsolve`` and the node
relaxations in ``milpsolve``.  Problems arrive in the form

    min c'x   s.t.   A x = b,   l <= x <= u,

where bounds may be infinite and variables may be free.  Rows are
equilibrated to unit max magnitude so big-M rows do not wreck the pivot
tolerances.  Entering variables are chosen by most-negative reduced
cost with lowest-index tie-breaking; Bland's rule takes over after a
run of degenerate pivots.
"""

from dataclasses import dataclass

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
MAXITER = "maxiter"

_BLAND_AFTER = 60  # consecutive degenerate pivots before anti-cycling kicks in
_REFACTOR_EVERY = 50
_MIN_PIVOT = 1e-7  # smallest acceptable pivot magnitude


@dataclass
class SimplexResult:
    x: np.ndarray  # structural variable values
    objective: float
    status: str
    row_duals: np.ndarray  # y with c - A'y = reduced costs
    reduced_costs: np.ndarray
    iterations: int
    basis: np.ndarray


def solve_bounded_lp(c, A, b, lower, upper, max_iter: int | None = None) -> SimplexResult:
    """Two-phase primal simplex; returns an optimal basic solution."""
    c = np.asarray(c, dtype=float).ravel()
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    lower = np.asarray(lower, dtype=float).ravel()
    upper = np.asarray(upper, dtype=float).ravel()
    m, n = A.shape
    if np.any(lower > upper + 1e-12):
        return SimplexResult(np.full(n, np.nan), np.nan, INFEASIBLE,
                             np.zeros(m), np.zeros(n), 0, np.zeros(0, dtype=int))
    if m == 0:
        return _solve_unconstrained(c, lower, upper)
    if max_iter is None:
        max_iter = 5000 + 80 * (m + n)

    # Row equilibration keeps pivot tolerances meaningful when rows carry
    # wildly different magnitudes (e.g. big-M constraints).
    row_scale = np.maximum(np.abs(A).max(axis=1), 1e-12)
    A = A / row_scale[:, None]
    b = b / row_scale

    # Crash basis: any singleton column whose implied value fits its
    # bounds covers its row directly; remaining rows get an artificial,
    # priced in phase 1 and pinned to zero afterwards.
    x0 = np.where(np.isfinite(lower), lower, np.where(np.isfinite(upper), upper, 0.0))
    resid = b - A @ x0
    basis = np.full(m, -1, dtype=int)
    vstat_n = np.where(np.isfinite(lower), 0, np.where(np.isfinite(upper), 1, 3))
    nnz_per_col = (A != 0.0).sum(axis=0)
    for j in np.nonzero(nnz_per_col == 1)[0]:
        i = int(np.argmax(A[:, j] != 0.0))
        if basis[i] >= 0 or abs(A[i, j]) < 1e-9:
            continue
        val = x0[j] + resid[i] / A[i, j]
        if lower[j] - 1e-12 <= val <= upper[j] + 1e-12:
            basis[i] = j
            x0 = x0.copy()
            x0[j] = min(max(val, lower[j]), upper[j])
            resid[i] = 0.0
            vstat_n[j] = 2

    signs = np.where(resid >= 0, 1.0, -1.0)
    A_full = np.hstack([A, np.diag(signs)])
    lo = np.concatenate([lower, np.zeros(m)])
    up = np.concatenate([upper, np.full(m, np.inf)])
    x = np.concatenate([x0, np.abs(resid)])
    # vstat: 0 at lower, 1 at upper, 2 basic, 3 free at zero
    vstat = np.concatenate([vstat_n, np.full(m, 0)])
    crash_rows = basis >= 0
    art_rows = ~crash_rows
    basis[art_rows] = n + np.nonzero(art_rows)[0]
    vstat[basis[art_rows]] = 2
    x[n:][crash_rows] = 0.0
    up[n:][crash_rows] = 0.0  # unused artificials can never enter
    # the crash basis is diagonal: each basic column has its only nonzero
    # in its own row
    diag_entries = np.where(art_rows, signs, 1.0)
    for i in np.nonzero(crash_rows)[0]:
        diag_entries[i] = A[i, basis[i]]
    b_inv = np.diag(1.0 / diag_entries)

    c_phase1 = np.concatenate([np.zeros(n), np.ones(m)])
    state = _State(A_full, b, lo, up, x, basis, vstat, b_inv)
    status1, iters1 = _iterate(state, c_phase1, max_iter)
    c_phase2 = np.concatenate([c, np.zeros(m)])
    if status1 == MAXITER:
        return _finish(state, c_phase2, n, MAXITER, iters1, row_scale)
    feas_tol = 1e-8 * (1.0 + np.abs(b).max(initial=0.0))
    art_sum = state.x[n:].sum()
    if art_sum > max(feas_tol, 1e-9 * (1 + art_sum)):
        return _finish(state, c_phase2, n, INFEASIBLE, iters1, row_scale)

    # Phase 2: forbid artificials from re-entering by fixing their range.
    state.lo[n:] = 0.0
    state.up[n:] = 0.0
    state.x[n:] = np.maximum(state.x[n:], 0.0)
    status2, iters2 = _iterate(state, c_phase2, max_iter - iters1)
    return _finish(state, c_phase2, n, status2, iters1 + iters2, row_scale)


class _State:
    __slots__ = ("A", "b", "lo", "up", "x", "basis", "vstat", "b_inv", "pivots")

    def __init__(self, A, b, lo, up, x, basis, vstat, b_inv):
        self.A, self.b, self.lo, self.up = A, b, lo, up
        self.x, self.basis, self.vstat, self.b_inv = x, basis, vstat, b_inv
        self.pivots = 0


def _solve_unconstrained(c, lower, upper) -> SimplexResult:
    x = np.where(c > 0, lower, np.where(c < 0, upper, np.where(np.isfinite(lower), lower, 0.0)))
    if np.any(~np.isfinite(x) & (c != 0)):
        return SimplexResult(x, -np.inf, UNBOUNDED, np.zeros(0), c.copy(), 0,
                             np.zeros(0, dtype=int))
    x = np.where(np.isfinite(x), x, 0.0)
    return SimplexResult(x, float(c @ x), OPTIMAL, np.zeros(0), c.copy(), 0,
                         np.zeros(0, dtype=int))


def _iterate(state: _State, c: np.ndarray, max_iter: int):
    A, b = state.A, state.b
    lo, up = state.lo, state.up
    m = A.shape[0]
    d_tol = 1e-9 * (1.0 + np.abs(c).max(initial=0.0))
    degen_run = 0
    bland = False
    it = 0

    while it < max_iter:
        it += 1
        y = c[state.basis] @ state.b_inv
        d = c - y @ A
        movable = up - lo > 1e-14
        elig = movable & (
            ((state.vstat == 0) & (d < -d_tol))
            | ((state.vstat == 1) & (d > d_tol))
            | ((state.vstat == 3) & (np.abs(d) > d_tol))
        )
        if not elig.any():
            return OPTIMAL, it
        idx = np.nonzero(elig)[0]
        if bland:
            order = idx  # lowest index first
        else:
            score = np.abs(d[idx])
            order = idx[np.argsort(-score, kind="stable")]

        pivoted = False
        for e in order[:8]:  # fall through to the next candidate on tiny pivots
            e = int(e)
            sigma = 1.0 if (state.vstat[e] == 0 or (state.vstat[e] == 3 and d[e] < 0)) else -1.0
            w = state.b_inv @ A[:, e]
            delta = -sigma * w  # per-unit change of basic values
            xb = state.x[state.basis]
            t_basic = np.full(m, np.inf)
            grow = delta > _MIN_PIVOT
            shrink = delta < -_MIN_PIVOT
            ub = up[state.basis]
            lb = lo[state.basis]
            t_basic[grow] = np.maximum(ub[grow] - xb[grow], 0.0) / delta[grow]
            t_basic[shrink] = np.maximum(xb[shrink] - lb[shrink], 0.0) / (-delta[shrink])
            rng_e = up[e] - lo[e]
            t_own = rng_e if np.isfinite(rng_e) else np.inf
            t_block = t_basic.min()
            t_star = min(t_block, t_own)
            if not np.isfinite(t_star):
                # tiny-|delta| rows were ignored; make sure none truly blocks
                loose = (np.abs(delta) > 1e-12) & ~(grow | shrink)
                if loose.any():
                    continue  # unstable column, try the next candidate
                return UNBOUNDED, it

            if t_own <= t_block:
                # bound-to-bound flip, basis unchanged
                state.x[e] += sigma * t_own
                state.x[state.basis] -= sigma * t_own * w
                state.vstat[e] = 1 if sigma > 0 else 0
                state.pivots += 1
                pivoted = True
                degen_run = 0
                break

            window = t_block + 1e-9 * (1.0 + abs(t_block))
            cand = np.nonzero(t_basic <= window)[0]
            if bland:
                r = int(cand[np.argmin(state.basis[cand])])
            else:
                r = int(cand[np.argmax(np.abs(delta[cand]))])
            if np.abs(delta[r]) < _MIN_PIVOT:
                continue
            t_star = max(t_basic[r], 0.0)
            leaving = state.basis[r]
            state.x[e] += sigma * t_star
            state.x[state.basis] -= sigma * t_star * w
            state.x[leaving] = up[leaving] if delta[r] > 0 else lo[leaving]
            state.vstat[leaving] = 1 if delta[r] > 0 else 0
            state.basis[r] = e
            state.vstat[e] = 2

            pivot_row = state.b_inv[r] / w[r]
            state.b_inv -= np.outer(w, pivot_row)
            state.b_inv[r] = pivot_row
            state.pivots += 1
            pivoted = True

            degen_run = degen_run + 1 if t_star <= 1e-12 else 0
            if degen_run > _BLAND_AFTER:
                bland = True
            break

        if not pivoted:
            # No numerically safe pivot among the top candidates: refresh
            # the factorization and retry once; if it persists, accept the
            # current point as optimal within tolerance.
            _refactor(state)
            y = c[state.basis] @ state.b_inv
            d = c - y @ A
            if not (elig & (np.abs(d) > 10 * d_tol)).any():
                return OPTIMAL, it
            bland = True
            continue

        if state.pivots % _REFACTOR_EVERY == 0:
            _refactor(state)
    return MAXITER, it


def _refactor(state: _State) -> None:
    """Recompute the basis inverse and basic values to kill drift."""
    B = state.A[:, state.basis]
    try:
        state.b_inv = np.linalg.inv(B)
    except np.linalg.LinAlgError:
        state.b_inv = np.linalg.pinv(B)
    nonbasic = state.vstat != 2
    rhs = state.b - state.A[:, nonbasic] @ state.x[nonbasic]
    state.x[state.basis] = state.b_inv @ rhs


def _finish(state: _State, c: np.ndarray, n: int, status: str, iters: int,
            row_scale: np.ndarray) -> SimplexResult:
    _refactor(state)
    y = c[state.basis] @ state.b_inv
    d = c - y @ state.A
    obj = float(c[:n] @ state.x[:n])
    return SimplexResult(state.x[:n].copy(), obj, status, y / row_scale, d[:n],
                         iters, state.basis.copy())
