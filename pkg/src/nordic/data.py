"""Datasets: ordinal data model, dummy-label recoding, simulation
generators, the balance-scale loader, and stratified splitting.

Labels are integers 1..K throughout.  Datasets are immutable after
construction (the backing arrays are marked read-only).
"""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .rng import stream

__all__ = [
    "OrdinalDataset",
    "SplitSpec",
    "GeneratorConfig",
    "dummy_labels",
    "gen_nonlinear3",
    "gen_donut",
    "balance_scale_rows",
    "write_balance_scale",
    "load_balance_scale",
    "stratified_split",
    "save_dataset_csv",
    "load_dataset_csv",
]


@dataclass
class OrdinalDataset:
    """Feature matrix with ordinal labels in {1..K}."""

    features: np.ndarray  # (n, d)
    labels: np.ndarray  # (n,), ints in 1..K
    num_classes: int

    def __post_init__(self):
        self.features = np.ascontiguousarray(np.asarray(self.features, dtype=float))
        self.labels = np.asarray(self.labels, dtype=int).ravel()
        if self.features.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        if self.features.shape[0] != self.labels.shape[0]:
            raise ValueError("features and labels disagree on n")
        if self.features.shape[0] < 1:
            raise ValueError("dataset must contain at least one observation")
        if self.num_classes < 2:
            raise ValueError("need K >= 2 classes")
        if self.labels.min(initial=1) < 1 or self.labels.max(initial=1) > self.num_classes:
            raise ValueError(f"labels must lie in 1..{self.num_classes}")
        self.features.flags.writeable = False
        self.labels.flags.writeable = False

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.num_classes + 1)[1:]

    def subset(self, idx) -> "OrdinalDataset":
        idx = np.asarray(idx, dtype=int)
        return OrdinalDataset(self.features[idx], self.labels[idx], self.num_classes)


@dataclass
class SplitSpec:
    """Sizes and seed for a stratified train/tune/test partition."""

    n_train: int
    n_tune: int
    seed: int

    def __post_init__(self):
        if self.n_train < 0 or self.n_tune < 0:
            raise ValueError("split sizes must be nonnegative")


@dataclass
class GeneratorConfig:
    """Parameters of the simulation generators."""

    family: str  # "nonlinear3" | "donut"
    n: int
    d: int
    sigma: float
    seed: int

    def __post_init__(self):
        if self.family not in ("nonlinear3", "donut"):
            raise ValueError(f"unknown generator family {self.family!r}")
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.d < 2:
            raise ValueError(f"{self.family} requires d >= 2")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")


def dummy_labels(labels, k: int, num_classes: int) -> np.ndarray:
    """Recode ordinal labels for the k-th binary subproblem.

    Returns -1 for labels <= k and +1 for labels > k.
    """
    labels = np.asarray(labels, dtype=int)
    if not 1 <= k <= num_classes - 1:
        raise ValueError(f"subproblem index k={k} outside 1..{num_classes - 1}")
    if labels.min(initial=1) < 1 or labels.max(initial=1) > num_classes:
        raise ValueError("labels out of range")
    return np.where(labels <= k, -1, 1).astype(float)


def _nonlinear3_scores(x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    """Class score functions of the three-class generator, stacked (3, n)."""
    g1 = -2.0 * x1 + 0.2 * x1**2 - 0.1 * x2**2 + 0.2
    g2 = -0.4 * x1**2 + 0.2 * x2**2 - 0.4
    g3 = 2.0 * x1 + 0.2 * x1**2 - 0.1 * x2**2 + 0.2
    return np.stack([g1, g2, g3])


def nonlinear3_eta(x1, x2) -> np.ndarray:
    """Class posteriors of the three-class generator at clean coordinates, (3, n)."""
    scores = _nonlinear3_scores(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))
    scores = scores - scores.max(axis=0, keepdims=True)
    p = np.exp(scores)
    return p / p.sum(axis=0, keepdims=True)


def gen_nonlinear3(config: GeneratorConfig, rng: np.random.Generator | None = None) -> OrdinalDataset:
    """Three ordered classes on two curved score surfaces.

    The label is drawn from the softmax of the score functions evaluated
    at the clean coordinates; only noise-contaminated coordinates are
    observed.  Extra dimensions are standard-normal noise.
    """
    if config.family != "nonlinear3":
        raise ValueError("config.family must be 'nonlinear3'")
    if rng is None:
        rng = stream(config.seed, 0, "dataset")
    n, d, sigma = config.n, config.d, config.sigma
    x1 = rng.uniform(-3.0, 3.0, size=n)
    x2 = rng.uniform(-6.0, 6.0, size=n)
    eta = nonlinear3_eta(x1, x2)  # (3, n)
    u = rng.uniform(size=n)
    labels = 1 + (u >= eta[0]).astype(int) + (u >= eta[0] + eta[1]).astype(int)
    X = np.empty((n, d))
    X[:, 0] = x1 + sigma * rng.standard_normal(n)
    X[:, 1] = x2 + sigma * rng.standard_normal(n)
    if d > 2:
        X[:, 2:] = rng.standard_normal((n, d - 2))
    return OrdinalDataset(X, labels, 3)


# Donut geometry: class 3 disc sits inside the class 2 disc, which sits
# inside the radius-4 plate.
DONUT_PLATE_RADIUS = 4.0
DONUT_C2_CENTER = (1.9, 0.0)
DONUT_C2_RADIUS = 2.0
DONUT_C3_CENTER = (np.sqrt(3.0) + 0.1, 0.0)
DONUT_C3_RADIUS = np.sqrt(3.0)


def donut_label(points: np.ndarray) -> np.ndarray:
    """Noise-free class of 2-D points under the circle-membership rule."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    d3 = (points[:, 0] - DONUT_C3_CENTER[0]) ** 2 + (points[:, 1] - DONUT_C3_CENTER[1]) ** 2
    d2 = (points[:, 0] - DONUT_C2_CENTER[0]) ** 2 + (points[:, 1] - DONUT_C2_CENTER[1]) ** 2
    labels = np.ones(points.shape[0], dtype=int)
    labels[d2 <= DONUT_C2_RADIUS**2] = 2
    labels[d3 <= DONUT_C3_RADIUS**2] = 3
    return labels


def gen_donut(config: GeneratorConfig, rng: np.random.Generator | None = None) -> OrdinalDataset:
    """Nested-disc classes on a uniform plate, then isotropic Gaussian noise.

    Labels are fixed from the clean 2-D coordinates before the
    perturbation; dimensions 3..d are exactly 0 pre-noise.
    """
    if config.family != "donut":
        raise ValueError("config.family must be 'donut'")
    if rng is None:
        rng = stream(config.seed, 0, "dataset")
    n, d, sigma = config.n, config.d, config.sigma
    # Exact uniform draw on the disc: radius 4*sqrt(U), independent angle.
    r = DONUT_PLATE_RADIUS * np.sqrt(rng.uniform(size=n))
    ang = 2.0 * np.pi * rng.uniform(size=n)
    base = np.zeros((n, d))
    base[:, 0] = r * np.cos(ang)
    base[:, 1] = r * np.sin(ang)
    labels = donut_label(base[:, :2])
    X = base
    if sigma > 0:
        X = base + sigma * rng.standard_normal((n, d))
    return OrdinalDataset(X, labels, 3)


_BALANCE_TAGS = {"L": 1, "B": 2, "R": 3}


def balance_scale_rows() -> list[tuple[str, int, int, int, int]]:
    """The canonical 625 balance-scale records.

    The data set enumerates all attribute combinations in 1..5 and the
    class is decided by comparing left and right torque, so the file
    contents are fully determined and can be materialized offline.
    """
    rows = []
    for lw in range(1, 6):
        for ld in range(1, 6):
            for rw in range(1, 6):
                for rd in range(1, 6):
                    left, right = lw * ld, rw * rd
                    tag = "B" if left == right else ("L" if left > right else "R")
                    rows.append((tag, lw, ld, rw, rd))
    return rows


def write_balance_scale(path) -> None:
    """Materialize the canonical balance-scale CSV at ``path``."""
    lines = [",".join(str(v) for v in row) for row in balance_scale_rows()]
    Path(path).write_text("\n".join(lines) + "\n")


def load_balance_scale(path) -> OrdinalDataset:
    """Load a UCI-layout balance-scale file (tag,lw,ld,rw,rd per line)."""
    feats, labels = [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 5:
                raise ValueError(f"{path}:{lineno}: expected 5 fields, got {len(parts)}")
            tag = parts[0].strip()
            if tag not in _BALANCE_TAGS:
                raise ValueError(f"{path}:{lineno}: unknown class tag {tag!r}")
            try:
                attrs = [int(v) for v in parts[1:]]
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: non-integer attribute") from exc
            if any(not 1 <= a <= 5 for a in attrs):
                raise ValueError(f"{path}:{lineno}: attributes must lie in 1..5")
            labels.append(_BALANCE_TAGS[tag])
            feats.append(attrs)
    if not feats:
        raise ValueError(f"{path}: empty file")
    return OrdinalDataset(np.asarray(feats, dtype=float), np.asarray(labels), 3)


def _largest_remainder(counts: np.ndarray, total: int) -> np.ndarray:
    """Apportion ``total`` over classes proportionally to ``counts``."""
    n = counts.sum()
    if total == 0 or n == 0:
        return np.zeros_like(counts)
    quota = total * counts / n
    out = np.floor(quota).astype(int)
    short = total - out.sum()
    # Distribute leftovers by descending fractional part, ties to the
    # smaller class index for determinism.
    order = np.lexsort((np.arange(len(counts)), -(quota - np.floor(quota))))
    for j in order[:short]:
        out[j] += 1
    return out


def stratified_split(dataset: OrdinalDataset, spec: SplitSpec):
    """Split into (train, tune, test) preserving class proportions.

    Per-class counts use largest-remainder rounding; the remainder after
    train and tune becomes the test part.  Deterministic given the seed.
    """
    n = dataset.n
    if spec.n_train + spec.n_tune > n:
        raise ValueError(f"n_train + n_tune = {spec.n_train + spec.n_tune} exceeds n = {n}")
    counts = dataset.class_counts()
    take_train = _largest_remainder(counts, spec.n_train)
    take_tune = _largest_remainder(counts, spec.n_tune)
    # A tiny class may be oversubscribed by the two roundings; shift the
    # deficit to the largest classes with spare points.
    over = take_train + take_tune - counts
    for c in np.nonzero(over > 0)[0]:
        need = over[c]
        take_tune[c] -= need
        spare = counts - take_train - take_tune
        for c2 in np.argsort(-spare):
            if need == 0:
                break
            give = min(need, spare[c2])
            take_tune[c2] += give
            need -= give
    rng = stream(spec.seed, 0, "split")
    tr_idx, tu_idx, te_idx = [], [], []
    for c in range(dataset.num_classes):
        members = np.nonzero(dataset.labels == c + 1)[0]
        perm = rng.permutation(members.size)
        members = members[perm]
        a, b = take_train[c], take_train[c] + take_tune[c]
        tr_idx.append(members[:a])
        tu_idx.append(members[a:b])
        te_idx.append(members[b:])
    tr = np.sort(np.concatenate(tr_idx)).astype(int)
    tu = np.sort(np.concatenate(tu_idx)).astype(int)
    te = np.sort(np.concatenate(te_idx)).astype(int)
    return dataset.subset(tr), dataset.subset(tu), dataset.subset(te)


def save_dataset_csv(dataset: OrdinalDataset, path) -> None:
    """Write ``label,x1,...,xd`` rows with full decimal precision."""
    with open(path, "w") as fh:
        fh.write("label," + ",".join(f"x{j + 1}" for j in range(dataset.d)) + "\n")
        for lab, row in zip(dataset.labels, dataset.features):
            fh.write(str(int(lab)) + "," + ",".join(repr(float(v)) for v in row) + "\n")


def load_dataset_csv(path, num_classes: int | None = None) -> OrdinalDataset:
    """Read a dataset written by :func:`save_dataset_csv` (header optional)."""
    feats, labels = [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if lineno == 1 and line.lower().startswith("label"):
                continue
            parts = line.split(",")
            try:
                labels.append(int(float(parts[0])))
                feats.append([float(v) for v in parts[1:]])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: malformed row") from exc
    if not feats:
        raise ValueError(f"{path}: empty file")
    labels = np.asarray(labels)
    if num_classes is None:
        num_classes = int(labels.max())
    return OrdinalDataset(np.asarray(feats), labels, num_classes)
