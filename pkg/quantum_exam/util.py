from typing import Optional, Union

import numpy as np
from ulid import ULID


RandomSource = np.random.Generator
SeedLike = Union[int, np.random.SeedSequence, None]


def make_rng(seed: SeedLike = None) -> RandomSource:
    """Return a PCG64 generator for an integer seed or a spawned SeedSequence."""
    return np.random.default_rng(seed)


def trial_seed(root_seed: int, index: int) -> np.random.SeedSequence:
    """Counter-based split of a root seed.

    The sequence for trial ``index`` depends only on ``(root_seed, index)``, so
    results are the same whichever worker runs the trial and in which order.
    """
    return np.random.SeedSequence(entropy=root_seed, spawn_key=(index,))


def trial_rng(root_seed: int, index: int) -> RandomSource:
    return make_rng(trial_seed(root_seed, index))


def random_bits(rng: RandomSource, length: int) -> list:
    return [int(b) for b in rng.integers(0, 2, size=length)]


def seeded_ulid(rng: RandomSource) -> ULID:
    # ULIDs drawn from the run's generator keep transcripts replayable.
    return ULID.from_bytes(rng.bytes(16))


def coin(rng: RandomSource, probability: float) -> bool:
    return bool(rng.random() < probability)


def bits_to_str(bits) -> str:
    return "".join(str(int(b)) for b in bits)


def str_to_bits(text: Optional[str]) -> list:
    if not text:
        return []
    stripped = text.strip()
    if any(ch not in "01" for ch in stripped):
        raise ValueError(f"not a bit string: {text!r}")
    return [int(ch) for ch in stripped]
