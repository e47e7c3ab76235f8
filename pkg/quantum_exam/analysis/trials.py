import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Sequence, TypeVar

from more_itertools import chunked


log = logging.getLogger(__name__)

T = TypeVar("T")

# Runs trial ``index`` of an experiment seeded with ``root_seed``.
TrialFunction = Callable[[int, int], T]


def _run_chunk(func: TrialFunction, root_seed: int, indices: Sequence[int]) -> List[T]:
    return [func(root_seed, index) for index in indices]


def map_trials(
    func: TrialFunction,
    root_seed: int,
    trials: int,
    workers: int = 1,
    chunk_size: int = 256,
) -> List[T]:
    """Run ``trials`` independent trials, results in trial order.

    Each trial derives its own generator from ``(root_seed, index)``, so the
    result list does not depend on ``workers``. With more than one worker,
    ``func`` must be a picklable top-level function.
    """
    if workers <= 1 or trials <= chunk_size:
        return _run_chunk(func, root_seed, range(trials))
    chunks = [list(chunk) for chunk in chunked(range(trials), chunk_size)]
    log.debug("Running %s trials in %s chunks on %s workers", trials, len(chunks), workers)
    results: List[T] = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for batch in pool.map(_run_chunk, [func] * len(chunks), [root_seed] * len(chunks), chunks):
            results.extend(batch)
    return results
