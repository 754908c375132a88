"""Keyed counter-based random streams.

Every random draw in the package flows through a Philox generator keyed by
(seed, purpose, *indices).  Streams for different keys are statistically
independent, so per-subject or per-replicate work can run in any order (or
in parallel) and still reproduce bit-for-bit.
"""

import numpy as np

# stream purpose codes (first spawn-key component)
GRAPH = 0
FILL = 1
SCAN = 2
BOOTSTRAP = 3
FOLDS = 4


def stream(seed, *key):
    """Return an independent Generator for (seed, *key).

    `key` components must be non-negative integers.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))
