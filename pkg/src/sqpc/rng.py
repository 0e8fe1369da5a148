"""Counter-based random substreams.

Every random draw in a simulation comes from a Philox generator keyed by the
64-bit master seed and a stream tag, with the episode (or run) index in the
counter.  Results therefore do not depend on execution order or on how
episodes are split across workers.
"""
import numpy as np

MASK64 = (1 << 64) - 1

# stream tags
EPISODE = 0
RUN_MODES = 1
RUN_QUANTUM = 2
RUN_ALICE = 3
RUN_BOB = 4
RUN_EVE = 5
RUN_TP = 6
PARAMS = 7


def substream(seed, index, tag=EPISODE):
    """Independent generator for ``(seed, tag, index)``."""
    key = np.array([int(seed) & MASK64, int(tag) & MASK64], dtype=np.uint64)
    counter = np.array([0, 0, 0, int(index) & MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))
