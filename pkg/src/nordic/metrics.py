"""Error metrics: plain and cost-weighted error, confusion matrices,
distance loss, and the named cost presets."""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "CostMatrix", "ConfusionMatrix",
    "error_rate", "weighted_error", "confusion", "distance_loss",
    "zero_one_costs", "donut_costs", "balance_costs", "cost_preset", "COST_PRESETS",
]


@dataclass
class CostMatrix:
    """entries[p-1, t-1] = cost of predicting p when the truth is t."""

    entries: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=float)
        K = self.entries.shape[0]
        if self.entries.shape != (K, K):
            raise ValueError("cost matrix must be square")
        if np.any(self.entries < 0):
            raise ValueError("costs must be nonnegative")
        if np.any(np.diag(self.entries) != 0):
            raise ValueError("cost matrix must have a zero diagonal")

    @property
    def num_classes(self) -> int:
        return self.entries.shape[0]


@dataclass
class ConfusionMatrix:
    """counts[p-1, t-1] = number of truth-t points predicted as p."""

    counts: np.ndarray

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=int)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def column_normalized(self) -> np.ndarray:
        col = self.counts.sum(axis=0, keepdims=True).astype(float)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = self.counts / col
        return np.where(col > 0, out, 0.0)


def _checked(pred, truth, K=None):
    pred = np.asarray(pred, dtype=int).ravel()
    truth = np.asarray(truth, dtype=int).ravel()
    if pred.size != truth.size:
        raise ValueError("prediction and truth lengths differ")
    if pred.size == 0:
        raise ValueError("empty input")
    if K is not None:
        if pred.min() < 1 or pred.max() > K or truth.min() < 1 or truth.max() > K:
            raise ValueError(f"labels out of range 1..{K}")
    return pred, truth


def error_rate(pred, truth) -> float:
    pred, truth = _checked(pred, truth)
    return float(np.mean(pred != truth))


def weighted_error(pred, truth, cost: CostMatrix) -> float:
    pred, truth = _checked(pred, truth, cost.num_classes)
    return float(np.mean(cost.entries[pred - 1, truth - 1]))


def confusion(pred, truth, K: int) -> ConfusionMatrix:
    pred, truth = _checked(pred, truth, K)
    counts = np.zeros((K, K), dtype=int)
    np.add.at(counts, (pred - 1, truth - 1), 1)
    return ConfusionMatrix(counts)


def distance_loss(pred, truth) -> float:
    pred, truth = _checked(pred, truth)
    return float(np.mean(np.abs(pred - truth)))


def zero_one_costs(K: int) -> CostMatrix:
    return CostMatrix(np.ones((K, K)) - np.eye(K), name="zero-one")


def donut_costs() -> CostMatrix:
    # truth 1 misclassified: 1; truth 2 to either side: 2;
    # truth 3 to class 2: 1, across both boundaries to class 1: 3.
    entries = np.array([
        [0.0, 2.0, 3.0],
        [1.0, 0.0, 1.0],
        [1.0, 2.0, 0.0],
    ])
    return CostMatrix(entries, name="donut-costs")


def balance_costs() -> CostMatrix:
    # crossing both boundaries (1 <-> 3) costs 2, anything else 1
    entries = np.array([
        [0.0, 1.0, 2.0],
        [1.0, 0.0, 1.0],
        [2.0, 1.0, 0.0],
    ])
    return CostMatrix(entries, name="balance-costs")


COST_PRESETS = {
    "zero-one": lambda K=3: zero_one_costs(K),
    "donut-costs": lambda K=3: donut_costs(),
    "balance-costs": lambda K=3: balance_costs(),
}


def cost_preset(name: str, K: int = 3) -> CostMatrix:
    try:
        maker = COST_PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown cost preset {name!r}; choose from {sorted(COST_PRESETS)}")
    cm = maker(K)
    if cm.num_classes != K:
        raise ValueError(f"cost preset {name!r} is defined for K={cm.num_classes}, not K={K}")
    return cm
