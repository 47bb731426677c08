"""Per-trial random streams.

Trial ``t`` of a run seeded with ``seed`` draws from a Philox generator keyed
by ``(seed, t)`` with a zero counter.  Streams are a pure function of that
pair, so results do not depend on how trials are split across workers or
which backend runs them.
"""
import numpy as np

SEED_MASK = (1 << 64) - 1


def trial_bitgen(seed: int, trial: int) -> np.random.Philox:
    return np.random.Philox(key=np.array([seed & SEED_MASK, trial], dtype=np.uint64))


def trial_generator(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(trial_bitgen(seed, trial))


class TrialStreams:
    """One Philox instance rekeyed per trial; far cheaper than constructing a new one."""

    def __init__(self, seed: int):
        self.bitgen = trial_bitgen(seed, 0)
        self.generator = np.random.Generator(self.bitgen)
        self._state = self.bitgen.state

    def reset(self, trial: int) -> np.random.Generator:
        st = self._state
        st["state"]["key"][1] = trial
        st["state"]["counter"][:] = 0
        st["buffer_pos"] = 4  # empty output buffer
        st["has_uint32"] = 0
        st["uinteger"] = 0
        self.bitgen.state = st
        return self.generator
