"""Decision values, prediction-set aggregation, crossing diagnostics,
and the ordinal Bayes oracle.

The k-th classifier votes for the lower meta-class {1..k} when
f_k(x) < 0 and for the upper one otherwise (sign of 0 reads as +1).
A nonincreasing sign profile pins the label down to the single class in
the intersection of the K-1 prediction sets; the label 1 + #positives
is emitted either way and doubles as the fallback when profiles invert.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .kernel import LINEAR, gram
from .train import OrdinalModel

__all__ = [
    "PredictionResult", "BayesOracle", "NoncrossingReport",
    "decision_values", "aggregate", "check_noncrossing",
    "bayes_ordinal", "bayes_risk_estimate", "save_predictions_csv",
]


@dataclass
class PredictionResult:
    decision_values: np.ndarray  # (K-1, m)
    labels: np.ndarray  # (m,) in 1..K
    ambiguous_mask: np.ndarray  # (m,) profiles with an empty intersection
    sign_profile: np.ndarray  # (K-1, m) of +-1

    @property
    def ambiguity_rate(self) -> float:
        return float(self.ambiguous_mask.mean()) if self.ambiguous_mask.size else 0.0


@dataclass
class BayesOracle:
    """Class posteriors eta(x); callable point -> length-K vector."""

    eta: Callable[[np.ndarray], np.ndarray]
    num_classes: int


def decision_values(model: OrdinalModel, X: np.ndarray) -> np.ndarray:
    """Evaluate all K-1 discriminant functions at the query points, (K-1, m)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if model.support_points is not None:
        if X.shape[1] != model.support_points.shape[1]:
            raise ValueError(
                f"query width {X.shape[1]} != model width {model.support_points.shape[1]}")
        Kmat = gram(model.support_points, X, model.kernel)  # (n, m)
        return model.omega @ Kmat + model.bias[:, None]
    if model.kernel.kind != LINEAR:
        raise ValueError("kernel model without support points")
    if X.shape[1] != model.omega.shape[1]:
        raise ValueError(f"query width {X.shape[1]} != model width {model.omega.shape[1]}")
    return model.omega @ X.T + model.bias[:, None]


def aggregate(values: np.ndarray) -> PredictionResult:
    """Pool the K-1 binary votes into ordinal labels.

    The label counts positive signs; for monotone profiles this equals
    the unique class every prediction set contains.  Columns whose sign
    profile increases somewhere are flagged ambiguous.
    """
    values = np.atleast_2d(np.asarray(values, dtype=float))
    signs = np.where(values >= 0, 1, -1)
    labels = 1 + (signs > 0).sum(axis=0)
    if signs.shape[0] > 1:
        ambiguous = (np.diff(signs, axis=0) > 0).any(axis=0)
    else:
        ambiguous = np.zeros(signs.shape[1], dtype=bool)
    return PredictionResult(values, labels.astype(int), ambiguous, signs)


@dataclass
class NoncrossingReport:
    mode: str
    violations: int
    worst_gap: float
    locations: list = field(default_factory=list)  # (point index, k) pairs

    @property
    def ok(self) -> bool:
        return self.violations == 0


def check_noncrossing(model: OrdinalModel, X_probe: np.ndarray,
                      mode: str = "values", tol: float = 1e-6) -> NoncrossingReport:
    """Scan probe points for boundary crossings.

    values mode counts f_k < f_{k+1} - tol; signs mode counts strict
    sign inversions (f_k < -tol while f_{k+1} > tol).
    """
    X_probe = np.atleast_2d(np.asarray(X_probe, dtype=float))
    if X_probe.shape[0] == 0:
        raise ValueError("probe set must be nonempty")
    mode = mode.lower()
    if mode not in ("values", "signs"):
        raise ValueError("mode must be 'values' or 'signs'")
    F = decision_values(model, X_probe)
    if F.shape[0] < 2:
        return NoncrossingReport(mode, 0, 0.0, [])
    upper, lower_next = F[:-1], F[1:]
    if mode == "values":
        gap = lower_next - upper  # positive where f_{k+1} exceeds f_k
        viol = gap > tol
        worst = float(np.max(gap, initial=-np.inf)) if gap.size else 0.0
        worst = max(0.0, worst)
    else:
        viol = (upper < -tol) & (lower_next > tol)
        gap = np.where(viol, lower_next - upper, 0.0)
        worst = float(gap.max(initial=0.0))
    ks, pts = np.nonzero(viol)
    locations = [(int(i), int(k + 1)) for k, i in zip(ks, pts)]
    return NoncrossingReport(mode, int(viol.sum()), worst, locations)


def bayes_ordinal(eta_vector) -> int:
    """Ordinal Bayes label: the class where the cumulative posterior
    crosses one half (the posterior median)."""
    eta = np.asarray(eta_vector, dtype=float).ravel()
    if eta.size < 2 or np.any(eta < -1e-12) or abs(eta.sum() - 1.0) > 1e-9:
        raise ValueError("eta must be a probability vector over >= 2 classes")
    cum = np.cumsum(eta)
    # smallest k with cum_k >= 1/2; exact-half ties resolve to the smaller class
    return int(np.searchsorted(cum, 0.5 - 1e-15) + 1)


def bayes_risk_estimate(oracle: BayesOracle, points: np.ndarray, cost) -> float:
    """Average Bayes-rule risk over the given points under a cost matrix."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    entries = np.asarray(getattr(cost, "entries", cost), dtype=float)
    total = 0.0
    for x in points:
        eta = np.asarray(oracle.eta(x), dtype=float).ravel()
        k = bayes_ordinal(eta)
        total += float(entries[k - 1] @ eta)
    return total / points.shape[0]


def save_predictions_csv(result: PredictionResult, path) -> None:
    """index, label, ambiguous flag, then the raw decision values."""
    nb = result.decision_values.shape[0]
    with open(path, "w") as fh:
        fh.write("index,label,ambiguous," + ",".join(f"f_{k + 1}" for k in range(nb)) + "\n")
        for j in range(result.labels.size):
            vals = ",".join(repr(float(v)) for v in result.decision_values[:, j])
            fh.write(f"{j},{int(result.labels[j])},{int(result.ambiguous_mask[j])},{vals}\n")
