"""Training for the three noncrossing ordinal classifiers and the two
baselines.

nordic0 and nordic1 are trained through a joint Wolfe dual assembled as
one QP; nordic2 through an L1-penalized big-M MILP; bsvm through K-1
independent SVM duals; ck through a shared-coefficient primal QP.  All
kernel methods store the training points and a coefficient matrix with
one row per binary subproblem.
"""

import json
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .data import OrdinalDataset, dummy_labels
from .kernel import (KernelSpec, LINEAR, RBF, bandwidth_candidates, gram,
                     inverse_weighted_blocks, ridge_epsilon)
from .milpsolve import GAP_LIMIT, MILPProblem, solve_milp
from .milpsolve import INFEASIBLE as MILP_INFEASIBLE
from .qpsolve import OPTIMAL, QPProblem, solve_lp_via_qp, solve_qp

__all__ = [
    "NORDIC0", "NORDIC1", "NORDIC2", "BSVM", "CK", "METHODS",
    "TrainingError", "HyperParams", "DualSolution", "OrdinalModel", "Nordic2Config",
    "assemble_dual", "recover_omega", "recover_bias", "support_vector_bias",
    "train_nordic0", "train_nordic1", "train_nordic2", "train_bsvm", "train_ck",
    "train_method", "assemble_milp_nordic2", "default_big_m",
    "tune", "default_grid", "save_model", "load_model",
]

NORDIC0 = "nordic0"
NORDIC1 = "nordic1"
NORDIC2 = "nordic2"
BSVM = "bsvm"
CK = "ck"
METHODS = (NORDIC0, NORDIC1, NORDIC2, BSVM, CK)

# Post-solve cleanup threshold: constraint violations below this are
# rounding noise and get projected away; larger ones abort training.
_REPAIR_TOL = 1e-6


class TrainingError(RuntimeError):
    pass


@dataclass(frozen=True)
class HyperParams:
    """Slack cost C (QP-family methods), L1 weight lam (nordic2), kernel."""

    C: float = 1.0
    lam: float = 1.0
    kernel: KernelSpec = field(default_factory=lambda: KernelSpec(RBF, 1.0))

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError("C must be positive")
        if not self.lam > 0:
            raise ValueError("lam must be positive")


@dataclass
class DualSolution:
    """Stacked multipliers theta = (alpha; phi; gamma) of the joint dual."""

    alpha: np.ndarray  # (K-1, n), in [0, C]
    phi: np.ndarray  # (K-2, n), >= 0
    gamma: np.ndarray  # (K-2,), >= 0
    labels_signed: np.ndarray  # (K-1, n) dummy labels, context for recovery

    def equality_residual(self) -> np.ndarray:
        """Per-k residual of -y_k'a_k - (gamma_k - gamma_{k-1}) = 0."""
        kk = self.alpha.shape[0]
        out = np.empty(kk)
        for k in range(kk):
            v = -float(self.labels_signed[k] @ self.alpha[k])
            if k <= kk - 2:
                v -= self.gamma[k]
            if k >= 1:
                v += self.gamma[k - 1]
            out[k] = v
        return out


@dataclass
class Nordic2Config:
    """Big-M constants and search limits for the MILP trainer."""

    M1: float | None = None  # None: derived from an unconstrained L1 fit
    M2: float | None = None
    reduce_binaries: bool = False
    gap_tol: float = 1e-9
    node_limit: int = 10**6
    # Strictly positive margin on the logical rows so the trained signs
    # survive the sign(0)=+1 reading under float arithmetic.
    sign_margin: float = 1e-9

    def __post_init__(self):
        if self.M1 is not None and self.M1 < 1:
            raise ValueError("M1 must be >= 1")
        if self.M2 is not None and self.M2 < 1:
            raise ValueError("M2 must be >= 1")


@dataclass
class OrdinalModel:
    """Trained classifier: f_k(x) = sum_j omega[k,j] K(x_j, x) + bias[k]
    for kernel expansions, or omega[k] @ x + bias[k] for linear primal."""

    method: str
    kernel: KernelSpec
    num_classes: int
    omega: np.ndarray  # (K-1, n) kernel / (K-1, d) linear primal
    bias: np.ndarray  # (K-1,)
    support_points: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.omega = np.atleast_2d(np.asarray(self.omega, dtype=float))
        self.bias = np.asarray(self.bias, dtype=float).ravel()
        if self.omega.shape[0] != self.num_classes - 1 or self.bias.size != self.num_classes - 1:
            raise ValueError("omega/bias must have K-1 rows")
        if self.support_points is not None:
            self.support_points = np.atleast_2d(np.asarray(self.support_points, dtype=float))
            if self.support_points.shape[0] != self.omega.shape[1]:
                raise ValueError("omega columns must match support points")


def _dummy_matrix(dataset: OrdinalDataset) -> np.ndarray:
    K = dataset.num_classes
    return np.stack([dummy_labels(dataset.labels, k, K) for k in range(1, K)])


def _require_both_signs(Y: np.ndarray, context: str) -> None:
    for k in range(Y.shape[0]):
        if np.all(Y[k] > 0) or np.all(Y[k] < 0):
            raise TrainingError(
                f"{context}: binary subproblem k={k + 1} has a single class; "
                "cannot train an SVM boundary for it")


def assemble_dual(dataset: OrdinalDataset, gram_matrix: np.ndarray,
                  params: HyperParams, variant: str) -> QPProblem:
    """Joint dual QP of the noncrossing problem, in minimization form.

    theta = (alpha; phi; gamma); Q = R'(I (x) K)R built blockwise, where
    R maps theta to the stacked coefficient vectors.  nordic1 uses signed
    identity difference blocks; nordic0 the jittered-inverse-weighted
    analogue.  K = 2 degenerates to the standard binary SVM dual.
    """
    if variant not in (NORDIC0, NORDIC1):
        raise ValueError(f"variant must be {NORDIC0} or {NORDIC1}")
    n, K = dataset.n, dataset.num_classes
    G = np.asarray(gram_matrix, dtype=float)
    if G.shape != (n, n):
        raise ValueError("gram matrix must be n x n over the training points")
    Y = _dummy_matrix(dataset)
    _require_both_signs(Y, variant)

    nb = K - 1  # binary subproblems
    nphi = K - 2
    p = n * nb + n * nphi + nphi

    # Q assembled block by block; see the recovery identity for R.  The
    # nordic0 path works with the ridge-regularized Gram Kt = K + eps*I
    # throughout, so Kt B = I exactly and the phi directions that the
    # recovery would amplify by 1/eps keep full curvature.
    Q = np.zeros((p, p))
    if variant == NORDIC0:
        B = inverse_weighted_blocks(G)[0]
        Gkk = G + ridge_epsilon(G) * np.eye(n)
        KB = None  # coupling blocks are +-diag(y_k)
        BKB = B
    else:
        Gkk = G
        KB = G
        BKB = G
    for k in range(nb):
        a = slice(k * n, (k + 1) * n)
        yk = Y[k]
        Q[a, a] = Gkk * np.outer(yk, yk)
        # coupling of alpha_k with phi_j for j = k and j = k-1
        for j, sgn in ((k, 1.0), (k - 1, -1.0)):
            if 0 <= j <= nphi - 1:
                f = slice(n * nb + j * n, n * nb + (j + 1) * n)
                blk = sgn * np.diag(yk) if KB is None else sgn * (yk[:, None] * KB)
                Q[a, f] += blk
                Q[f, a] += blk.T
    for j in range(nphi):
        f = slice(n * nb + j * n, n * nb + (j + 1) * n)
        Q[f, f] = 2.0 * BKB
        if j + 1 <= nphi - 1:
            f2 = slice(n * nb + (j + 1) * n, n * nb + (j + 2) * n)
            Q[f, f2] = -BKB
            Q[f2, f] = -BKB.T
    Q = 0.5 * (Q + Q.T)

    c = np.zeros(p)
    c[: n * nb] = -1.0

    A_eq = np.zeros((nb, p))
    for k in range(nb):
        A_eq[k, k * n:(k + 1) * n] = -Y[k]
        if k <= nphi - 1:
            A_eq[k, n * nb + n * nphi + k] = -1.0
        if k >= 1:
            A_eq[k, n * nb + n * nphi + (k - 1)] = 1.0
    b_eq = np.zeros(nb)

    lower = np.zeros(p)
    upper = np.full(p, np.inf)
    upper[: n * nb] = params.C
    return QPProblem(Q=Q, c=c, A_eq=A_eq, b_eq=b_eq, lower=lower, upper=upper)


def split_dual(theta: np.ndarray, dataset: OrdinalDataset, params: HyperParams) -> DualSolution:
    """Unpack a solver iterate into (alpha; phi; gamma), clipped to bounds."""
    n, K = dataset.n, dataset.num_classes
    nb, nphi = K - 1, K - 2
    alpha = np.clip(theta[: n * nb].reshape(nb, n), 0.0, params.C)
    phi = np.maximum(theta[n * nb: n * nb + n * nphi].reshape(nphi, n), 0.0) \
        if nphi else np.zeros((0, n))
    gamma = np.maximum(theta[n * nb + n * nphi:], 0.0)
    return DualSolution(alpha, phi, gamma, _dummy_matrix(dataset))


def recover_omega(dual: DualSolution, variant: str, gram_matrix: np.ndarray) -> np.ndarray:
    """Primal coefficients from the stationarity identity.

    omega_k = Y_k alpha_k + (phi_k - phi_{k-1}), with the difference
    pushed through the jittered inverse Gram for nordic0.
    """
    nb, n = dual.alpha.shape
    nphi = dual.phi.shape[0]
    B = inverse_weighted_blocks(gram_matrix)[0] if variant == NORDIC0 else None
    omega = np.empty((nb, n))
    for k in range(nb):
        diff = np.zeros(n)
        if k <= nphi - 1:
            diff += dual.phi[k]
        if k >= 1:
            diff -= dual.phi[k - 1]
        if variant == NORDIC0:
            diff = B @ diff
        omega[k] = dual.labels_signed[k] * dual.alpha[k] + diff
    return omega


def _bias_lp(h: np.ndarray, Y: np.ndarray, C: float, ordered: bool) -> np.ndarray:
    """Optimal biases for fixed coefficients: min C*sum(xi) over (b, xi)
    subject to hinge feasibility, xi >= 0, and optionally b_k >= b_{k+1}."""
    nb, n = h.shape
    p = nb + nb * n
    c = np.zeros(p)
    c[nb:] = C
    rows = []
    rhs = []
    for k in range(nb):
        for i in range(n):
            row = np.zeros(p)
            row[k] = -Y[k, i]
            row[nb + k * n + i] = -1.0
            rows.append(row)
            rhs.append(-1.0 + Y[k, i] * h[k, i])
    if ordered:
        for k in range(nb - 1):
            row = np.zeros(p)
            row[k] = -1.0
            row[k + 1] = 1.0
            rows.append(row)
            rhs.append(0.0)
    lower = np.concatenate([np.full(nb, -np.inf), np.zeros(nb * n)])
    prob = QPProblem(Q=np.zeros((p, p)), c=c, A_in=np.array(rows), b_in=np.array(rhs),
                     lower=lower)
    sol = solve_lp_via_qp(prob)
    if sol.status != OPTIMAL:
        raise TrainingError(f"bias recovery LP ended with status {sol.status}")
    return sol.theta[:nb]


def recover_bias(dataset: OrdinalDataset, gram_matrix: np.ndarray, omega: np.ndarray,
                 params: HyperParams, ordered: bool = True) -> np.ndarray:
    """Canonical bias recovery: LP over (b, xi) with the ordering rows.

    Always feasible because the slacks absorb hinge violations; returns
    b with b_k >= b_{k+1} whenever ``ordered``.
    """
    h = omega @ np.asarray(gram_matrix, dtype=float).T  # (K-1, n) of (K omega_k)_i
    Y = _dummy_matrix(dataset)
    b = _bias_lp(h, Y, params.C, ordered)
    if ordered:
        b = _repair_descending(b, "bias")
    return b


def support_vector_bias(dataset: OrdinalDataset, gram_matrix: np.ndarray,
                        omega: np.ndarray, alpha: np.ndarray, params: HyperParams):
    """Diagnostic bias route: average the margin equation over interior
    support vectors.  Returns (b, ok) where ok flags subproblems that had
    at least one interior support vector."""
    h = omega @ np.asarray(gram_matrix, dtype=float).T
    Y = _dummy_matrix(dataset)
    nb = Y.shape[0]
    delta = 1e-6 * params.C
    b = np.zeros(nb)
    ok = np.zeros(nb, dtype=bool)
    for k in range(nb):
        interior = (alpha[k] > delta) & (alpha[k] < params.C - delta)
        if interior.any():
            b[k] = float(np.mean(1.0 / Y[k, interior] - h[k, interior]))
            ok[k] = True
    return b, ok


def _repair_descending(v: np.ndarray, what: str, tol: float = _REPAIR_TOL) -> np.ndarray:
    """Project onto the nonincreasing cone; only rounding noise may move."""
    v = np.asarray(v, dtype=float).copy()
    worst = 0.0
    for k in range(v.shape[0] - 2, -1, -1):
        gap = v[k + 1] - v[k]
        worst = max(worst, float(np.max(gap)) if np.ndim(gap) else gap)
        v[k] = np.maximum(v[k], v[k + 1])
    if worst > tol:
        raise TrainingError(
            f"{what} ordering violated by {worst:.3e} (> {tol:.0e}); solver output unusable")
    return v


def _primal_objective(G, omega, bias, Y, C) -> float:
    h = omega @ G.T + bias[:, None]
    xi = np.maximum(0.0, 1.0 - Y * h)
    reg = 0.5 * sum(float(omega[k] @ G @ omega[k]) for k in range(omega.shape[0]))
    return reg + C * float(xi.sum())


def _train_qp_variant(dataset: OrdinalDataset, params: HyperParams, variant: str) -> OrdinalModel:
    if variant == NORDIC0 and params.kernel.kind != RBF:
        raise TrainingError(
            "nordic0 needs a nonnegative kernel; the linear kernel can be negative "
            "and is rejected")
    X = dataset.features
    G = gram(X, X, params.kernel)
    prob = assemble_dual(dataset, G, params, variant)
    sol = solve_qp(prob, tol=1e-9, max_iter=200)
    if sol.status != OPTIMAL:
        raise TrainingError(
            f"{variant}: dual QP solve failed (status={sol.status}, "
            f"residuals={sol.residuals}, n={dataset.n}, K={dataset.num_classes})")
    dual = split_dual(sol.theta, dataset, params)
    omega = recover_omega(dual, variant, G)
    if variant == NORDIC0:
        omega = _repair_descending(omega, "nordic0 coefficient")
    bias = recover_bias(dataset, G, omega, params, ordered=True)
    Y = dual.labels_signed
    diag = {
        "solver_status": sol.status,
        "iterations": sol.iterations,
        "dual_objective": -sol.objective,
        "primal_objective": _primal_objective(G, omega, bias, Y, params.C),
    }
    return OrdinalModel(variant, params.kernel, dataset.num_classes, omega, bias,
                        support_points=X, diagnostics=diag)


def train_nordic1(dataset: OrdinalDataset, params: HyperParams) -> OrdinalModel:
    """Joint SVM with Gram-space ordering of the decision vectors."""
    return _train_qp_variant(dataset, params, NORDIC1)


def train_nordic0(dataset: OrdinalDataset, params: HyperParams) -> OrdinalModel:
    """Joint SVM with coefficientwise ordering; needs a nonnegative kernel."""
    return _train_qp_variant(dataset, params, NORDIC0)


def train_bsvm(dataset: OrdinalDataset, params: HyperParams) -> OrdinalModel:
    """K-1 independently trained binary SVMs; boundaries may cross."""
    n, K = dataset.n, dataset.num_classes
    X = dataset.features
    G = gram(X, X, params.kernel)
    Y = _dummy_matrix(dataset)
    _require_both_signs(Y, BSVM)
    omega = np.empty((K - 1, n))
    bias = np.empty(K - 1)
    iters = 0
    dual_obj = 0.0
    for k in range(K - 1):
        sub = OrdinalDataset(X, np.where(Y[k] < 0, 1, 2), 2)
        prob = assemble_dual(sub, G, params, NORDIC1)
        sol = solve_qp(prob, tol=1e-9, max_iter=200)
        if sol.status != OPTIMAL:
            raise TrainingError(f"bsvm: subproblem k={k + 1} failed (status={sol.status})")
        alpha = np.clip(sol.theta, 0.0, params.C)
        omega[k] = Y[k] * alpha
        bias[k] = _bias_lp((omega[k] @ G.T)[None, :], Y[k][None, :], params.C, ordered=False)[0]
        iters += sol.iterations
        dual_obj += -sol.objective
    diag = {"solver_status": "optimal", "iterations": iters, "dual_objective": dual_obj,
            "primal_objective": _primal_objective(G, omega, bias, Y, params.C)}
    return OrdinalModel(BSVM, params.kernel, K, omega, bias, support_points=X,
                        diagnostics=diag)


def train_ck(dataset: OrdinalDataset, params: HyperParams) -> OrdinalModel:
    """Shared-coefficient baseline: one omega, ordered biases, parallel
    boundaries.  Solved directly in the primal."""
    n, K = dataset.n, dataset.num_classes
    X = dataset.features
    G = gram(X, X, params.kernel)
    Y = _dummy_matrix(dataset)
    _require_both_signs(Y, CK)
    nb = K - 1
    # variables: omega (n) | b (nb) | xi (nb*n)
    p = n + nb + nb * n
    Q = np.zeros((p, p))
    Q[:n, :n] = 0.5 * (G + G.T)
    c = np.zeros(p)
    c[n + nb:] = params.C
    rows, rhs = [], []
    for k in range(nb):
        for i in range(n):
            row = np.zeros(p)
            row[:n] = -Y[k, i] * G[i]
            row[n + k] = -Y[k, i]
            row[n + nb + k * n + i] = -1.0
            rows.append(row)
            rhs.append(-1.0)
    for k in range(nb - 1):
        row = np.zeros(p)
        row[n + k] = -1.0
        row[n + k + 1] = 1.0
        rows.append(row)
        rhs.append(0.0)
    lower = np.concatenate([np.full(n + nb, -np.inf), np.zeros(nb * n)])
    prob = QPProblem(Q=Q, c=c, A_in=np.array(rows), b_in=np.array(rhs), lower=lower)
    sol = solve_qp(prob, tol=1e-9, max_iter=200)
    if sol.status != OPTIMAL:
        raise TrainingError(f"ck: primal QP failed (status={sol.status})")
    w = sol.theta[:n]
    b = _repair_descending(sol.theta[n:n + nb], "ck bias")
    omega = np.tile(w, (nb, 1))
    diag = {"solver_status": sol.status, "iterations": sol.iterations,
            "primal_objective": sol.objective}
    return OrdinalModel(CK, params.kernel, K, omega, b, support_points=X, diagnostics=diag)


def _nordic2_design(dataset: OrdinalDataset, params: HyperParams):
    """Design matrix whose rows give f_k(x_i) coefficients: the Gram matrix
    for kernel expansions, the raw features for the linear primal."""
    if params.kernel.kind == LINEAR:
        return dataset.features, True
    return gram(dataset.features, dataset.features, params.kernel), False


def assemble_milp_nordic2(dataset: OrdinalDataset, design: np.ndarray,
                          params: HyperParams, config: Nordic2Config,
                          logical: bool = True) -> MILPProblem:
    """L1-hinge program with big-M sign-monotonicity rows.

    Variables: omega+ | omega- | b | xi | z.  With ``logical=False`` the
    z block and logical rows are dropped (the unconstrained L1 SVM used
    for the big-M derivation).
    """
    n, K = dataset.n, dataset.num_classes
    design = np.asarray(design, dtype=float)
    qdim = design.shape[1]
    Y = _dummy_matrix(dataset)
    nb, nl = K - 1, K - 2
    if config.M1 is None or config.M2 is None:
        raise ValueError("big-M constants must be set before assembly")
    two_z = not config.reduce_binaries
    nz = (2 * n * nl if two_z else n * nl) if logical else 0
    off_wm = nb * qdim
    off_b = 2 * nb * qdim
    off_xi = off_b + nb
    off_z = off_xi + nb * n
    p = off_z + nz

    c = np.zeros(p)
    c[: 2 * nb * qdim] = params.lam
    c[off_xi: off_xi + nb * n] = 1.0

    n_h = nb * n
    n_log = (3 * n * nl if two_z else 2 * n * nl) if logical else 0
    A = np.zeros((n_h + n_log, p))
    b_in = np.zeros(n_h + n_log)

    def f_row(row, k, i, sign):
        """Accumulate sign * f_k(x_i) coefficients into A[row]."""
        A[row, k * qdim:(k + 1) * qdim] += sign * design[i]
        A[row, off_wm + k * qdim: off_wm + (k + 1) * qdim] += -sign * design[i]
        A[row, off_b + k] += sign

    r = 0
    for k in range(nb):
        for i in range(n):
            f_row(r, k, i, -Y[k, i])
            A[r, off_xi + k * n + i] = -1.0
            b_in[r] = -1.0
            r += 1
    if logical:
        m1, m2, eps = config.M1, config.M2, config.sign_margin
        for k in range(nl):
            for i in range(n):
                if two_z:
                    z1 = off_z + (k * n + i)
                    z2 = off_z + n * nl + (k * n + i)
                    f_row(r, k, i, -1.0)
                    A[r, z1] = -m1
                    b_in[r] = -eps
                    r += 1
                    f_row(r, k + 1, i, 1.0)
                    A[r, z2] = -m2
                    b_in[r] = -eps
                    r += 1
                    A[r, z1] = 1.0
                    A[r, z2] = 1.0
                    b_in[r] = 1.0
                    r += 1
                else:
                    z = off_z + (k * n + i)
                    f_row(r, k, i, -1.0)
                    A[r, z] = -m1
                    b_in[r] = -eps
                    r += 1
                    f_row(r, k + 1, i, 1.0)
                    A[r, z] = m2
                    b_in[r] = m2 - eps
                    r += 1

    lower = np.zeros(p)
    lower[off_b: off_b + nb] = -np.inf
    upper = np.full(p, np.inf)
    upper[off_z:] = 1.0
    mask = np.zeros(p, dtype=bool)
    mask[off_z:] = True
    return MILPProblem(c=c, A_in=A, b_in=b_in, lower=lower, upper=upper, binary_mask=mask)


def default_big_m(dataset: OrdinalDataset, design: np.ndarray, params: HyperParams,
                  config: Nordic2Config) -> float:
    """Big-M from an unconstrained L1-SVM fit: 10 * (1 + max row sum of the
    design) * the fitted coefficient bound."""
    probe = replace(config, M1=1.0, M2=1.0)
    prob = assemble_milp_nordic2(dataset, design, params, probe, logical=False)
    qp = QPProblem(Q=np.zeros((prob.p, prob.p)), c=prob.c, A_in=prob.A_in, b_in=prob.b_in,
                   lower=prob.lower, upper=prob.upper)
    sol = solve_lp_via_qp(qp)
    if sol.status != OPTIMAL:
        raise TrainingError(f"nordic2: unconstrained L1 fit failed ({sol.status})")
    n, K = dataset.n, dataset.num_classes
    qdim = np.asarray(design).shape[1]
    nb = K - 1
    wp = sol.theta[: nb * qdim].reshape(nb, qdim)
    wm = sol.theta[nb * qdim: 2 * nb * qdim].reshape(nb, qdim)
    bb = sol.theta[2 * nb * qdim: 2 * nb * qdim + nb]
    coef_bound = max(1.0, float(np.max(np.abs(wp - wm).max(axis=1) + np.abs(bb))))
    row_sum = float(np.abs(np.asarray(design)).sum(axis=1).max())
    return max(1.0, 10.0 * (1.0 + row_sum) * coef_bound)


def train_nordic2(dataset: OrdinalDataset, params: HyperParams,
                  config: Nordic2Config | None = None) -> OrdinalModel:
    """Exact-sign noncrossing trainer via branch and bound."""
    config = config or Nordic2Config()
    design, is_linear = _nordic2_design(dataset, params)
    if config.M1 is None or config.M2 is None:
        m = default_big_m(dataset, design, params, config)
        config = replace(config, M1=config.M1 or m, M2=config.M2 or m)
    prob = assemble_milp_nordic2(dataset, design, params, config)
    sol = solve_milp(prob, gap_tol=config.gap_tol, node_limit=config.node_limit)
    if sol.status == MILP_INFEASIBLE:
        raise TrainingError("nordic2: MILP reported infeasible (should be impossible)")
    if sol.status == GAP_LIMIT:
        if not np.all(np.isfinite(sol.x)):
            raise TrainingError("nordic2: node limit hit before any incumbent")
        warnings.warn(
            f"nordic2: stopped at node limit with relative gap {sol.gap:.2e}; "
            "returning the incumbent", RuntimeWarning)
    n, K = dataset.n, dataset.num_classes
    qdim = design.shape[1]
    nb = K - 1
    wp = sol.x[: nb * qdim].reshape(nb, qdim)
    wm = sol.x[nb * qdim: 2 * nb * qdim].reshape(nb, qdim)
    omega = wp - wm
    bias = sol.x[2 * nb * qdim: 2 * nb * qdim + nb]
    diag = {"solver_status": sol.status, "nodes": sol.nodes_explored, "gap": sol.gap,
            "objective": sol.objective, "M1": config.M1, "M2": config.M2,
            "reduce_binaries": config.reduce_binaries}
    return OrdinalModel(NORDIC2, params.kernel, K, omega, bias,
                        support_points=None if is_linear else dataset.features,
                        diagnostics=diag)


def train_method(dataset: OrdinalDataset, method: str, params: HyperParams,
                 nordic2_config: Nordic2Config | None = None) -> OrdinalModel:
    if method == NORDIC0:
        return train_nordic0(dataset, params)
    if method == NORDIC1:
        return train_nordic1(dataset, params)
    if method == NORDIC2:
        return train_nordic2(dataset, params, nordic2_config)
    if method == BSVM:
        return train_bsvm(dataset, params)
    if method == CK:
        return train_ck(dataset, params)
    raise ValueError(f"unknown method {method!r}; choose from {METHODS}")


def default_grid(train_set: OrdinalDataset, kind: str = RBF,
                 penalties=None, width_levels=(0.10, 0.50, 0.90)) -> list[HyperParams]:
    """Penalty grid 2^-4..2^4 crossed with the distance-quantile widths."""
    if penalties is None:
        penalties = 2.0 ** np.arange(-4, 5)
    if kind == LINEAR:
        return [HyperParams(C=float(v), lam=float(v), kernel=KernelSpec(LINEAR))
                for v in penalties]
    widths = bandwidth_candidates(train_set.features, width_levels)
    out = []
    for v in penalties:
        for w in widths:
            out.append(HyperParams(C=float(v), lam=float(v), kernel=KernelSpec(RBF, float(w))))
    return out


def tune(train_set: OrdinalDataset, tune_set: OrdinalDataset, method: str,
         params_grid, metric, nordic2_config: Nordic2Config | None = None):
    """Grid search: train on ``train_set``, score ``metric(pred, truth)`` on
    ``tune_set``.  Ties break toward smaller penalty, then smaller width.
    Returns (best params, table of per-cell records)."""
    from .predict import aggregate, decision_values

    grid = list(params_grid)
    if not grid:
        raise ValueError("empty tuning grid")
    table = []
    best = None
    best_score = np.inf
    for cell in grid:
        rec = {"C": cell.C, "lam": cell.lam,
               "width": cell.kernel.width, "kernel": cell.kernel.kind}
        try:
            model = train_method(train_set, method, cell, nordic2_config)
            pred = aggregate(decision_values(model, tune_set.features)).labels
            score = float(metric(pred, tune_set.labels))
            rec.update(score=score, status="ok")
        except (TrainingError, np.linalg.LinAlgError) as exc:
            rec.update(score=np.nan, status=f"failed: {exc}")
            table.append(rec)
            continue
        table.append(rec)
        if score < best_score - 1e-12:
            best_score = score
            best = cell
    if best is None:
        raise TrainingError(f"tuning failed for every cell of the grid ({method})")
    return best, table


def save_model(model: OrdinalModel, path) -> None:
    """Versioned JSON with full float precision; round-trip is bit-stable."""
    doc = {
        "format": "nordic-model/1",
        "method": model.method,
        "kernel": {"kind": model.kernel.kind, "width": model.kernel.width},
        "num_classes": model.num_classes,
        "omega": model.omega.tolist(),
        "bias": model.bias.tolist(),
        "support_points": None if model.support_points is None else model.support_points.tolist(),
        "diagnostics": {k: (v if isinstance(v, (int, float, str, bool)) else str(v))
                         for k, v in model.diagnostics.items()},
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_model(path) -> OrdinalModel:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != "nordic-model/1":
        raise ValueError(f"{path}: not a model file (format={doc.get('format')!r})")
    spec = KernelSpec(doc["kernel"]["kind"], doc["kernel"]["width"])
    sp = doc["support_points"]
    return OrdinalModel(doc["method"], spec, doc["num_classes"],
                        np.asarray(doc["omega"], dtype=float),
                        np.asarray(doc["bias"], dtype=float),
                        support_points=None if sp is None else np.asarray(sp, dtype=float),
                        diagnostics=doc.get("diagnostics", {}))
