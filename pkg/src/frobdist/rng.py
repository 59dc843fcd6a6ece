"""Counter-keyed random streams.

Every Monte Carlo routine splits its index range into fixed-size blocks and
draws block ``b`` from a generator keyed by ``(seed, stream, b)``.  Work can be
farmed out per block in any order, so results never depend on worker count.
"""

from __future__ import annotations

import os
import zlib
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import UsageError

WORKERS_ENV = "FROBDIST_WORKERS"


def _stream_id(stream: str) -> int:
    return zlib.crc32(stream.encode("utf-8"))


def block_rng(seed: int, stream: str, block: int) -> np.random.Generator:
    if seed < 0:
        raise UsageError("seeds must be non-negative")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(_stream_id(stream), int(block)))
    return np.random.Generator(np.random.PCG64(ss))


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise UsageError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
        return max(1, n)
    return os.cpu_count() or 1


def map_blocks(fn, n_blocks: int, workers: int | None = None) -> list:
    """[fn(b) for b in range(n_blocks)], optionally on a thread pool; order preserved."""
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or n_blocks <= 1:
        return [fn(b) for b in range(n_blocks)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n_blocks)))


def block_ranges(count: int, block_size: int):
    """(block index, start, stop) triples covering range(count)."""
    return [(b, lo, min(lo + block_size, count)) for b, lo in enumerate(range(0, count, block_size))]


def draw_coprime_block(rng: np.random.Generator, need: int, lows, highs, table_budget: int):
    """``need`` coprime integer vectors with coordinate j uniform on [lows[j], highs[j]].

    Candidates with gcd != 1, or whose smallest entry exceeds ``table_budget``,
    are redrawn.  Returns (vectors, gcd_rejections, capacity_rejections).
    """
    lows = np.asarray(lows, dtype=np.int64)
    highs = np.asarray(highs, dtype=np.int64)
    d = lows.shape[0]
    out = np.empty((need, d), dtype=np.int64)
    filled = gcd_rej = cap_rej = 0
    while filled < need:
        batch = max(16, int(1.4 * (need - filled)) + 8)
        cand = rng.integers(lows, highs + 1, size=(batch, d), dtype=np.int64)
        coprime = np.gcd.reduce(cand, axis=1) == 1
        fits = cand.min(axis=1) <= table_budget
        ok = coprime & fits
        idx = np.flatnonzero(ok)
        take = idx[: need - filled]
        # only candidates up to the last one taken count as drawn
        upto = take[-1] + 1 if take.size == need - filled else batch
        gcd_rej += int(np.count_nonzero(~coprime[:upto]))
        cap_rej += int(np.count_nonzero(coprime[:upto] & ~fits[:upto]))
        out[filled : filled + take.size] = cand[take]
        filled += take.size
    return out, gcd_rej, cap_rej
