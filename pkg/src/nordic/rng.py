"""Reproducible random streams.

Every stochastic routine in the package draws from a stream keyed by
(seed, replication, purpose).  Streams with different keys are
statistically independent, and the same key always reproduces the same
draws, so any experiment cell can be re-run in isolation.
"""

import numpy as np

# Stable purpose codes.  New purposes may be appended; renumbering an
# existing purpose would silently change every downstream experiment.
PURPOSES = {
    "generate-train": 0,
    "generate-tune": 1,
    "generate-test": 2,
    "split": 3,
    "probe": 4,
    "dataset": 5,
}


def stream(seed: int, replication: int = 0, purpose: str = "dataset") -> np.random.Generator:
    """Return the generator for one (seed, replication, purpose) cell."""
    try:
        code = PURPOSES[purpose]
    except KeyError:
        raise ValueError(f"unknown rng purpose {purpose!r}; known: {sorted(PURPOSES)}")
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(replication), code))
    return np.random.default_rng(ss)
