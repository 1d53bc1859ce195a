"""Mixed-integer linear programming by LP-relaxation branch and bound.

Branching fixes a most-fractional binary to 0 and 1; nodes are explored
best-bound-first with a depth-first dive every eighth selection so
incumbents appear early.  Node relaxations reuse the bounded-variable
simplex engine.
"""

import io
from dataclasses import dataclass, field

import numpy as np

from . import simplex

__all__ = ["MILPProblem", "MILPSolution", "solve_milp",
           "OPTIMAL", "INFEASIBLE", "GAP_LIMIT"]

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
GAP_LIMIT = "gap_limit"

INTEGRALITY_TOL = 1e-6


@dataclass
class MILPProblem:
    """min c'x  s.t.  A_in x <= b_in,  A_eq x = b_eq,  lo <= x <= up,
    x[binary_mask] in {0, 1}."""

    c: np.ndarray
    A_in: np.ndarray | None = None
    b_in: np.ndarray | None = None
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    binary_mask: np.ndarray | None = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        p = self.c.size
        self.A_in = _mat(self.A_in, p)
        self.b_in = _rhs(self.b_in, self.A_in)
        self.A_eq = _mat(self.A_eq, p)
        self.b_eq = _rhs(self.b_eq, self.A_eq)
        self.lower = np.zeros(p) if self.lower is None else np.asarray(self.lower, dtype=float).ravel()
        self.upper = np.full(p, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float).ravel()
        if self.binary_mask is None:
            self.binary_mask = np.zeros(p, dtype=bool)
        self.binary_mask = np.asarray(self.binary_mask, dtype=bool).ravel()
        if self.binary_mask.size != p:
            raise ValueError("binary mask length mismatch")
        if np.any(self.lower[self.binary_mask] < -1e-12) or np.any(self.upper[self.binary_mask] > 1 + 1e-12):
            raise ValueError("binary variables must have bounds within [0, 1]")
        if np.any(self.lower > self.upper):
            raise ValueError("lower bound exceeds upper bound")

    @property
    def p(self) -> int:
        return self.c.size

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(dumps_milp(self))


def _mat(A, p):
    if A is None:
        return np.zeros((0, p))
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.shape[1] != p:
        raise ValueError("constraint matrix width mismatch")
    return A


def _rhs(b, A):
    b = np.zeros(0) if b is None else np.asarray(b, dtype=float).ravel()
    if b.size != A.shape[0]:
        raise ValueError("rhs length mismatch")
    return b


def dumps_milp(prob: MILPProblem) -> str:
    out = io.StringIO()
    out.write(f"milp p={prob.p} q={prob.A_eq.shape[0]} r={prob.A_in.shape[0]}\n")
    for name, block in (("c", prob.c), ("A_eq", prob.A_eq), ("b_eq", prob.b_eq),
                        ("A_in", prob.A_in), ("b_in", prob.b_in),
                        ("lower", prob.lower), ("upper", prob.upper)):
        arr = np.atleast_2d(block)
        out.write(f"{name} {arr.shape[0]} {arr.shape[1]}\n")
        for row in arr:
            out.write(" ".join(repr(float(v)) for v in row) + "\n")
    out.write("binary " + " ".join("1" if v else "0" for v in prob.binary_mask) + "\n")
    return out.getvalue()


@dataclass
class MILPSolution:
    x: np.ndarray
    objective: float
    status: str
    gap: float
    nodes_explored: int
    best_bound: float
    diagnostics: dict = field(default_factory=dict)


@dataclass
class _Node:
    bound: float
    depth: int
    node_id: int
    fix_lo: np.ndarray
    fix_up: np.ndarray


def solve_milp(problem: MILPProblem, gap_tol: float = 1e-9,
               node_limit: int = 10**6) -> MILPSolution:
    p = problem.p
    q, r = problem.A_eq.shape[0], problem.A_in.shape[0]
    A = np.vstack([
        np.hstack([problem.A_eq, np.zeros((q, r))]),
        np.hstack([problem.A_in, np.eye(r)]),
    ]) if q + r else np.zeros((0, p + r))
    b = np.concatenate([problem.b_eq, problem.b_in])
    c = np.concatenate([problem.c, np.zeros(r)])
    base_lo = np.concatenate([problem.lower, np.zeros(r)])
    base_up = np.concatenate([problem.upper, np.full(r, np.inf)])
    bins = np.nonzero(problem.binary_mask)[0]

    def lp(lo, up):
        return simplex.solve_bounded_lp(c, A, b, lo, up)

    def fractional(x):
        """Distance of each binary from its nearest integer."""
        if bins.size == 0:
            return np.zeros(0)
        z = x[bins]
        return np.abs(z - np.round(z))

    root = lp(base_lo, base_up)
    nodes_explored = 1
    if root.status == simplex.INFEASIBLE:
        return MILPSolution(np.full(p, np.nan), np.inf, INFEASIBLE, np.inf, 1, np.inf)
    if root.status == simplex.UNBOUNDED:
        raise ValueError("LP relaxation is unbounded; MILP is ill-posed")
    if root.status != simplex.OPTIMAL:
        raise RuntimeError(f"root LP ended with status {root.status}")

    incumbent = None
    incumbent_obj = np.inf

    def offer(x, obj):
        nonlocal incumbent, incumbent_obj
        if obj < incumbent_obj - 1e-12:
            incumbent = x[:p].copy()
            incumbent_obj = obj

    A_struct = A[:, :p]

    def feasibility_rounding(x_relax, lo_node, up_node):
        """Greedy repair: fix binaries one by one to a value whose rows
        stay satisfiable, judging not-yet-fixed binaries optimistically
        (each contributes min over {0,1} of its term).  With zero-cost
        binaries this often completes a node at no objective loss."""
        nonlocal nodes_explored
        if q:  # equality rows on binaries are not repairable this way
            if np.any(A_struct[:q, bins] != 0.0):
                return
        v = x_relax[:p].copy()
        v[bins] = 0.0
        # optimistic allowance of all unfixed binaries, per row
        opt = np.minimum(A_struct[:, bins], 0.0).sum(axis=1)
        z_fix = np.empty(bins.size)
        for pos, j in enumerate(bins):
            opt -= np.minimum(A_struct[:, j], 0.0)  # j is being fixed now
            if up_node[j] - lo_node[j] < 0.5:  # already fixed by branching
                z_fix[pos] = lo_node[j]
                v[j] = lo_node[j]
                continue
            rows = np.nonzero(A_struct[:, j])[0]
            prefer = 1.0 if x_relax[j] > 0.5 else 0.0
            chosen = None
            for val in (prefer, 1.0 - prefer):
                v[j] = val
                act = A_struct[rows] @ v + opt[rows]
                if np.all(act <= b[rows] + 1e-9):
                    chosen = val
                    break
            if chosen is None:
                return  # genuine conflict; let branching handle it
            v[j] = chosen
            z_fix[pos] = chosen
        lo_h, up_h = lo_node.copy(), up_node.copy()
        lo_h[bins] = z_fix
        up_h[bins] = z_fix
        heur = lp(lo_h, up_h)
        nodes_explored += 1
        if heur.status == simplex.OPTIMAL:
            offer(heur.x, heur.objective)

    frac = fractional(root.x)
    if bins.size == 0 or frac.max(initial=0.0) <= INTEGRALITY_TOL:
        return MILPSolution(root.x[:p], root.objective, OPTIMAL, 0.0, 1, root.objective,
                            {"root_objective": root.objective})

    feasibility_rounding(root.x, base_lo, base_up)

    next_id = 1
    open_nodes: list[_Node] = [
        _Node(root.objective, 0, 0, base_lo.copy(), base_up.copy())
    ]
    selections = 0
    status = OPTIMAL

    while open_nodes:
        best_bound = min(n.bound for n in open_nodes)
        if incumbent is not None:
            gap = (incumbent_obj - best_bound) / max(1.0, abs(incumbent_obj))
            if gap <= gap_tol:
                break
        if nodes_explored >= node_limit:
            status = GAP_LIMIT
            break

        selections += 1
        dive = selections % 8 == 0
        if dive:
            # depth-first dive for incumbents
            pick = max(range(len(open_nodes)),
                       key=lambda i: (open_nodes[i].depth, open_nodes[i].node_id))
        else:
            pick = min(range(len(open_nodes)),
                       key=lambda i: (open_nodes[i].bound, open_nodes[i].node_id))
        node = open_nodes.pop(pick)
        if incumbent is not None and node.bound >= incumbent_obj - _prune_eps(gap_tol, incumbent_obj):
            continue

        res = lp(node.fix_lo, node.fix_up)
        nodes_explored += 1
        if res.status == simplex.INFEASIBLE:
            continue
        if res.status != simplex.OPTIMAL:
            raise RuntimeError(f"node LP ended with status {res.status}")
        if incumbent is not None and res.objective >= incumbent_obj - _prune_eps(gap_tol, incumbent_obj):
            continue
        frac = fractional(res.x)
        if frac.max(initial=0.0) <= INTEGRALITY_TOL:
            offer(res.x, res.objective)
            continue
        if dive:
            feasibility_rounding(res.x, node.fix_lo, node.fix_up)
        # branch on the most fractional binary; argmax takes the first
        # (lowest-index) maximizer on ties
        j = int(bins[np.argmax(frac)])
        for val in (0.0, 1.0):
            lo_c, up_c = node.fix_lo.copy(), node.fix_up.copy()
            lo_c[j] = val
            up_c[j] = val
            open_nodes.append(_Node(res.objective, node.depth + 1, next_id, lo_c, up_c))
            next_id += 1

    if incumbent is None:
        if status == GAP_LIMIT:
            return MILPSolution(np.full(p, np.nan), np.inf, GAP_LIMIT, np.inf,
                                nodes_explored, min((n.bound for n in open_nodes), default=np.inf))
        return MILPSolution(np.full(p, np.nan), np.inf, INFEASIBLE, np.inf,
                            nodes_explored, np.inf)

    best_bound = min((n.bound for n in open_nodes), default=incumbent_obj)
    best_bound = min(best_bound, incumbent_obj)
    gap = max(0.0, (incumbent_obj - best_bound) / max(1.0, abs(incumbent_obj)))
    return MILPSolution(incumbent, incumbent_obj, status, gap, nodes_explored, best_bound,
                        {"root_objective": root.objective})


def _prune_eps(gap_tol: float, incumbent_obj: float) -> float:
    return max(1e-12, gap_tol * max(1.0, abs(incumbent_obj)))
