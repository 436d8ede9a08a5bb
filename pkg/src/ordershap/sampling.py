"""Seeded Monte Carlo estimators for the exact quantities.

Every estimator draws i.i.d. contexts (or orderings) and averages the exact
per-sample integrand, so it is unbiased by construction.  Randomness comes
from the Philox counter-based generator (``numpy.random.Philox``): the key
is derived from ``(seed, stream, chunk)``, where samples are produced in
fixed chunks of :data:`CHUNK_SAMPLES`.  Chunks are independent substreams,
so they may be evaluated concurrently (``workers > 1``) and the merged
result is identical to the sequential one; repeated runs with the same
``(seed, K)`` are bit-identical.

Draw layout inside a chunk (documented for reproducibility): a size-m
subset chunk consumes m arrays of bounded integers, where array k holds the
k-th partial Fisher-Yates swap index of every sample; an ordering chunk
consumes n-1 such arrays.  The single-draw :func:`sample_fixed_size_subset`
consumes its m bounded-integer draws sequentially instead.

Per-sample integrands that are themselves sums (the pattern component R_T,
the |S|-fold derivative of the cutoff attribution) are reduced with
``math.fsum``, which is exactly rounded; the sampled values therefore match
the exact enumerators' per-context terms bit for bit.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import fsum
from typing import Callable

import numpy as np

from .bits import bit_positions, full_mask
from .games import MAX_PLAYERS, Coalition, Game
from .setwise import SIGNIFICANCE_SIZE_CAP, _delta_set, grabisch_index

#: Samples per Philox substream.
CHUNK_SAMPLES = 2048

#: Each purified-component sample sums 2^m second differences.
SAMPLED_PATTERN_CAP = 20

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class Estimate:
    """A sampled statistic: mean, standard error sd/sqrt(samples), and seed.

    ``stderr`` is exactly 0.0 when every draw was equal (the mean is then
    the common draw itself, not a rounded average).
    """

    mean: float
    stderr: float
    samples: int
    seed: int
    target: str


def _rng(seed: int, stream: int, chunk: int) -> np.random.Generator:
    key = np.array(
        [seed & _MASK64, ((stream & 0xFFFFFFFF) << 32) | (chunk & 0xFFFFFFFF)],
        dtype=np.uint64,
    )
    return np.random.Generator(np.random.Philox(key=key))


def sample_fixed_size_subset(
    universe: Coalition, m: int, rng: np.random.Generator
) -> Coalition:
    """Uniform size-m subset of ``universe``.

    Partial Fisher-Yates over the member list: consumes exactly m bounded
    integer draws from ``rng``.
    """
    members = list(universe.members())
    u = len(members)
    if not 0 <= m <= u:
        raise ValueError(f"subset size {m} outside 0..{u}")
    for k in range(m):
        j = int(rng.integers(k, u))
        members[k], members[j] = members[j], members[k]
    mask = 0
    for p in members[:m]:
        mask |= 1 << p
    return Coalition(mask, universe.n)


# ---------------------------------------------------------------------------
# Chunked collection


def _collect(
    total: int,
    seed: int,
    stream: int,
    chunk_values: Callable[[np.random.Generator, int], np.ndarray],
    workers: int = 1,
) -> np.ndarray:
    out = np.empty(total, dtype=np.float64)
    plan = []
    start = 0
    idx = 0
    while start < total:
        count = min(CHUNK_SAMPLES, total - start)
        plan.append((idx, start, count))
        start += count
        idx += 1

    def run(entry) -> None:
        cidx, cstart, ccount = entry
        out[cstart : cstart + ccount] = chunk_values(_rng(seed, stream, cidx), ccount)

    if workers <= 1:
        for entry in plan:
            run(entry)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, plan))
    return out


def _finalize(values: np.ndarray, seed: int, target: str) -> Estimate:
    k = len(values)
    if float(values.min()) == float(values.max()):
        return Estimate(float(values[0]), 0.0, k, seed, target)
    mean = float(values.mean())
    stderr = float(values.std(ddof=1)) / math.sqrt(k)
    return Estimate(mean, stderr, k, seed, target)


def _check_sampling(game: Game, K: int) -> None:
    if K < 2:
        raise ValueError(f"need at least 2 samples, got {K}")
    if game.n > MAX_PLAYERS:
        raise ValueError(f"samplers support at most {MAX_PLAYERS} players")


# ---------------------------------------------------------------------------
# Batched integrands


def _game_values(game: Game, masks: np.ndarray) -> np.ndarray:
    table = game.dense_if_cheap()
    if table is not None:
        return table[masks]
    val = game.value
    return np.fromiter((val(int(m)) for m in masks), np.float64, len(masks))


def _marginal_values(game: Game, masks: np.ndarray, i: int) -> np.ndarray:
    bit = 1 << i
    return _game_values(game, masks | bit) - _game_values(game, masks)


def _pair_delta_values(game: Game, masks: np.ndarray, i: int, j: int) -> np.ndarray:
    bi, bj = 1 << i, 1 << j
    return (
        _game_values(game, masks | bi | bj)
        - _game_values(game, masks | bi)
        - _game_values(game, masks | bj)
        + _game_values(game, masks)
    )


def _subset_patterns(m: int) -> tuple[np.ndarray, np.ndarray]:
    """0/1 matrix of all bit patterns of m positions, and parity signs."""
    ks = np.arange(1 << m, dtype=np.int64)
    patterns = (ks[:, None] >> np.arange(m, dtype=np.int64)[None, :]) & 1
    pops = patterns.sum(axis=1)
    signs = np.where((m - pops) % 2 == 0, 1.0, -1.0)
    return patterns, signs


def _row_fsums(signed: np.ndarray) -> np.ndarray:
    return np.fromiter((fsum(row) for row in signed), np.float64, len(signed))


def _r_values(game: Game, masks: np.ndarray, i: int, j: int, m: int) -> np.ndarray:
    """R_T for a batch of size-m context masks (2^m differences each)."""
    if m == 0:
        return _pair_delta_values(game, masks, i, j)
    count = len(masks)
    bitvals = np.empty((count, m), dtype=np.int64)
    for idx in range(count):
        bitvals[idx] = [1 << p for p in bit_positions(int(masks[idx]))]
    patterns, signs = _subset_patterns(m)
    subs = bitvals @ patterns.T
    deltas = _pair_delta_values(game, subs.reshape(-1), i, j).reshape(count, -1)
    return _row_fsums(deltas * signs)


def _set_delta_values(game: Game, masks: np.ndarray, smask: int) -> np.ndarray:
    """|S|-fold discrete derivative at a batch of context masks."""
    sbits = np.array([1 << p for p in bit_positions(smask)], dtype=np.int64)
    patterns, signs = _subset_patterns(len(sbits))
    subs = masks[:, None] | (patterns @ sbits)[None, :]
    vals = _game_values(game, subs.reshape(-1)).reshape(len(masks), -1)
    return _row_fsums(vals * signs)


def _context_chunk(
    rng: np.random.Generator, members: list[int], m: int, count: int
) -> np.ndarray:
    """Batch of uniform size-m subset masks (column-wise Fisher-Yates draws)."""
    u = len(members)
    masks = np.zeros(count, dtype=np.int64)
    if m == 0:
        return masks
    draws = [rng.integers(k, u, size=count) for k in range(m)]
    for sidx in range(count):
        arr = members.copy()
        acc = 0
        for k in range(m):
            j = int(draws[k][sidx])
            arr[k], arr[j] = arr[j], arr[k]
            acc |= 1 << arr[k]
        masks[sidx] = acc
    return masks


# ---------------------------------------------------------------------------
# Estimators


def _order_universe(game: Game, exclude: tuple[int, ...], m: int) -> list[int]:
    mask = full_mask(game.n)
    for p in exclude:
        if not 0 <= p < game.n:
            raise ValueError(f"player {p} outside 0..{game.n - 1}")
        mask ^= 1 << p
    members = bit_positions(mask)
    if not 0 <= m <= len(members):
        raise ValueError(f"order {m} outside 0..{len(members)}")
    return members


def estimate_shapley_order(
    game: Game, i: int, m: int, K: int, seed: int, *, workers: int = 1
) -> Estimate:
    """Sampled mean marginal contribution of i over size-m contexts."""
    _check_sampling(game, K)
    members = _order_universe(game, (i,), m)
    values = _collect(
        K,
        seed,
        0,
        lambda rng, count: _marginal_values(
            game, _context_chunk(rng, members, m, count), i
        ),
        workers,
    )
    return _finalize(values, seed, f"shapley_order[i={i},m={m}]")


def estimate_interaction_order(
    game: Game, i: int, j: int, m: int, K: int, seed: int, *, workers: int = 1
) -> Estimate:
    """Sampled mean second difference of (i, j) over size-m contexts."""
    _check_sampling(game, K)
    if i == j:
        raise ValueError("players i and j must be distinct")
    members = _order_universe(game, (i, j), m)
    values = _collect(
        K,
        seed,
        0,
        lambda rng, count: _pair_delta_values(
            game, _context_chunk(rng, members, m, count), i, j
        ),
        workers,
    )
    return _finalize(values, seed, f"interaction_order[i={i},j={j},m={m}]")


def estimate_purified_order(
    game: Game, i: int, j: int, m: int, K: int, seed: int, *, workers: int = 1
) -> Estimate:
    """Sampled mean of the pattern component R_T over size-m contexts."""
    _check_sampling(game, K)
    if i == j:
        raise ValueError("players i and j must be distinct")
    if m > SAMPLED_PATTERN_CAP:
        raise ValueError(
            f"each order-{m} draw sums 2^{m} differences; the cap is "
            f"{SAMPLED_PATTERN_CAP}"
        )
    members = _order_universe(game, (i, j), m)
    values = _collect(
        K,
        seed,
        0,
        lambda rng, count: _r_values(
            game, _context_chunk(rng, members, m, count), i, j, m
        ),
        workers,
    )
    return _finalize(values, seed, f"purified_order[i={i},j={j},m={m}]")


def estimate_taylor(
    game: Game, S: Coalition, k: int, K: int, seed: int, *, workers: int = 1
) -> Estimate:
    """Sampled cutoff-k attribution of S (orderings sampled when |S| = k)."""
    _check_sampling(game, K)
    if S.n != game.n:
        raise ValueError("coalition is over a different player set")
    s = S.size()
    if not 1 <= s <= k <= game.n:
        raise ValueError(f"need 1 <= |S| <= k <= n, got |S|={s}, k={k}, n={game.n}")
    target = f"taylor[{S.to_mask_string()},k={k}]"
    if s < k:
        constant = _delta_set(game, S.mask, 0)
        return Estimate(constant, 0.0, K, seed, target)
    n = game.n
    smask = S.mask

    def chunk(rng: np.random.Generator, count: int) -> np.ndarray:
        draws = [rng.integers(kk, n, size=count) for kk in range(n - 1)]
        tmasks = np.empty(count, dtype=np.int64)
        for sidx in range(count):
            perm = list(range(n))
            for kk in range(n - 1):
                jj = int(draws[kk][sidx])
                perm[kk], perm[jj] = perm[jj], perm[kk]
            prefix = 0
            for p in perm:
                if (smask >> p) & 1:
                    break
                prefix |= 1 << p
            tmasks[sidx] = prefix
        return _set_delta_values(game, tmasks, smask)

    values = _collect(K, seed, 0, chunk, workers)
    return _finalize(values, seed, target)


def _stratified(
    K: int, seed: int, target: str, per_order_chunk, orders: int, workers: int
) -> Estimate:
    per = -(-K // orders)  # equal per-order counts; K is padded up
    parts = [
        _collect(per, seed, m, per_order_chunk(m), workers) for m in range(orders)
    ]
    return _finalize(np.concatenate(parts), seed, target)


def estimate_interaction(
    game: Game,
    i: int,
    j: int,
    K: int,
    seed: int,
    *,
    stratified: bool = True,
    workers: int = 1,
) -> Estimate:
    """Sampled overall interaction I(i, j).

    Stratified (default): equal sample counts for every order m (K is
    rounded up to a multiple of n-1), combined by the plain average, which
    is exactly the (1/(n-1))-weighted combination of the per-order means.
    Mixture: each draw picks an order uniformly, then a context.
    """
    _check_sampling(game, K)
    if i == j:
        raise ValueError("players i and j must be distinct")
    members = _order_universe(game, (i, j), 0)
    orders = len(members) + 1
    target = f"interaction[i={i},j={j}]"

    if stratified:

        def per_order(m: int):
            return lambda rng, count: _pair_delta_values(
                game, _context_chunk(rng, members, m, count), i, j
            )

        return _stratified(K, seed, target, per_order, orders, workers)

    u = len(members)

    def chunk(rng: np.random.Generator, count: int) -> np.ndarray:
        masks = np.empty(count, dtype=np.int64)
        for sidx in range(count):
            m = int(rng.integers(0, u + 1)) if u else 0
            arr = members.copy()
            acc = 0
            for kk in range(m):
                jj = int(rng.integers(kk, u))
                arr[kk], arr[jj] = arr[jj], arr[kk]
                acc |= 1 << arr[kk]
            masks[sidx] = acc
        return _pair_delta_values(game, masks, i, j)

    return _finalize(_collect(K, seed, 0, chunk, workers), seed, target)


def estimate_shapley(
    game: Game, i: int, K: int, seed: int, *, workers: int = 1
) -> Estimate:
    """Sampled classic Shapley value of i, stratified across context sizes.

    Mirrors :func:`estimate_interaction`: equal counts per order m in
    0..n-1 (K padded up to a multiple of n), combined by the plain average.
    """
    _check_sampling(game, K)
    members = _order_universe(game, (i,), 0)
    orders = len(members) + 1

    def per_order(m: int):
        return lambda rng, count: _marginal_values(
            game, _context_chunk(rng, members, m, count), i
        )

    return _stratified(K, seed, f"shapley[i={i}]", per_order, orders, workers)


def estimate_b_prime(game: Game, S: Coalition, K: int, seed: int) -> Estimate:
    """Sampled significance aggregate B'.

    Draws subsets S' of S with |S'| > 1 uniformly (with replacement, by
    rejection on the subset's bit pattern) and averages the scaled draw
    M * |index(S')| where M counts the qualifying subsets, so the mean is
    unbiased for the exact sum.  Each draw still evaluates one exact index.
    """
    _check_sampling(game, K)
    if S.n != game.n:
        raise ValueError("coalition is over a different player set")
    s = S.size()
    if s < 2:
        raise ValueError("significance needs |S| >= 2")
    if s > SIGNIFICANCE_SIZE_CAP:
        raise ValueError(f"significance sampling is capped at |S| = {SIGNIFICANCE_SIZE_CAP}")
    sbits = [1 << p for p in bit_positions(S.mask)]
    scale = float((1 << s) - s - 1)
    n = game.n
    outside = full_mask(n) ^ S.mask

    def chunk(rng: np.random.Generator, count: int) -> np.ndarray:
        out = np.empty(count, dtype=np.float64)
        for sidx in range(count):
            while True:
                bits = int(rng.integers(0, 1 << s))
                if bits.bit_count() > 1:
                    break
            sub = 0
            for pos, bit in enumerate(sbits):
                if (bits >> pos) & 1:
                    sub |= bit
            # same reduced-game terms as the exact aggregate
            out[sidx] = scale * abs(
                grabisch_index(
                    game, Coalition(sub, n), restrict=Coalition(outside | sub, n)
                )
            )
        return out

    return _finalize(
        _collect(K, seed, 0, chunk, 1), seed, f"b_prime[{S.to_mask_string()}]"
    )
