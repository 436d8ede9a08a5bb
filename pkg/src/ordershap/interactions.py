"""Pairwise interactions, their order decomposition, and purified components.

The interaction of a pair (i, j) is the gain from letting them act as one
player instead of individually.  It decomposes across context sizes m into
an order spectrum, and each order further splits into contributions of
individual context patterns T via the alternating sum R_T; the purified
spectrum J isolates patterns of exactly m context players.

Two independent formulas exist for both the overall interaction and each
order (a difference of Shapley quantities on merged/restricted games, and a
direct weighted sum of second differences); ``interaction`` evaluates both
and insists they agree.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, fsum

from .bits import full_mask, iter_submasks, iter_submasks_of_size
from .games import (
    Coalition,
    CrossCheckError,
    Game,
    delta_pair_mask,
    merge_coalition,
    require_exact,
)
from .shapley import IDENTITY_TOL, shapley_order, shapley_value


@dataclass(frozen=True)
class OrderSpectrum:
    """Interaction of one pair split by context size m = 0..n-2.

    ``kind`` is ``"raw"`` for the mixed components I^(m) and ``"purified"``
    for the exact-pattern components J^(m).
    """

    i: int
    j: int
    values: tuple[float, ...]
    kind: str

    def mean(self) -> float:
        return fsum(self.values) / len(self.values)


def _check_pair(game: Game, i: int, j: int) -> int:
    if i == j:
        raise ValueError("players i and j must be distinct")
    for p in (i, j):
        if not 0 <= p < game.n:
            raise ValueError(f"player {p} outside 0..{game.n - 1}")
    if game.n < 2:
        raise ValueError("pairwise interaction needs at least two players")
    return full_mask(game.n) ^ (1 << i) ^ (1 << j)


def merge_pair(game: Game, i: int, j: int) -> Game:
    """Game where (i, j) act as one singleton player (index 0)."""
    _check_pair(game, i, j)
    return merge_coalition(game, Coalition((1 << i) | (1 << j), game.n))


def interaction_forms(game: Game, i: int, j: int) -> tuple[float, float]:
    """Both defining forms of I(i, j): (closed weighted sum, Shapley difference)."""
    rest = _check_pair(game, i, j)
    n = game.n
    require_exact(game)
    weights = [1.0 / ((n - 1) * comb(n - 2, t)) for t in range(n - 1)]
    closed = fsum(
        weights[T.bit_count()] * delta_pair_mask(game, i, j, T)
        for T in iter_submasks(rest)
    )
    merged = merge_pair(game, i, j)
    phi_form = shapley_value(merged, 0) - (
        shapley_value(game, i, Coalition(rest | (1 << i), n))
        + shapley_value(game, j, Coalition(rest | (1 << j), n))
    )
    return closed, phi_form


def interaction(game: Game, i: int, j: int, *, check_tol: float = IDENTITY_TOL) -> float:
    """Pairwise interaction I(i, j), cross-checked between its two forms."""
    closed, phi_form = interaction_forms(game, i, j)
    if abs(closed - phi_form) > check_tol:
        raise CrossCheckError(
            f"interaction({i},{j}) forms disagree: {closed!r} vs {phi_form!r}"
        )
    return closed


def interaction_order(game: Game, i: int, j: int, m: int) -> float:
    """Mean second difference over the C(n-2, m) contexts of size m."""
    rest = _check_pair(game, i, j)
    require_exact(game)
    n = game.n
    if not 0 <= m <= n - 2:
        raise ValueError(f"order {m} outside 0..{n - 2}")
    total = fsum(
        delta_pair_mask(game, i, j, T) for T in iter_submasks_of_size(rest, m)
    )
    return total / comb(n - 2, m)


def interaction_order_phi_form(game: Game, i: int, j: int, m: int) -> float:
    """Order-m interaction via the merged/restricted order-m Shapley values."""
    rest = _check_pair(game, i, j)
    n = game.n
    merged = merge_pair(game, i, j)
    return shapley_order(merged, 0, m) - (
        shapley_order(game, i, m, Coalition(rest | (1 << i), n))
        + shapley_order(game, j, m, Coalition(rest | (1 << j), n))
    )


def r_t(game: Game, i: int, j: int, T: Coalition) -> float:
    """Pattern component R_T(i, j): alternating sum of second differences.

    Cost is 2^|T| second differences; callers wanting whole spectra should
    go through the raw spectrum and the recursion instead.
    """
    _check_pair(game, i, j)
    if T.n != game.n:
        raise ValueError("context is over a different player set")
    if T.contains(i) or T.contains(j):
        raise ValueError(f"context must not contain players {i},{j}")
    return r_value(game, i, j, T.mask)


def r_value(game: Game, i: int, j: int, tmask: int) -> float:
    t = tmask.bit_count()
    return fsum(
        (
            delta_pair_mask(game, i, j, Tp)
            if ((t - Tp.bit_count()) & 1) == 0
            else -delta_pair_mask(game, i, j, Tp)
        )
        for Tp in iter_submasks(tmask)
    )


def purified_order(game: Game, i: int, j: int, m: int) -> float:
    """Exact-pattern component J^(m): mean of R_T over size-m contexts."""
    rest = _check_pair(game, i, j)
    require_exact(game)
    n = game.n
    if not 0 <= m <= n - 2:
        raise ValueError(f"order {m} outside 0..{n - 2}")
    total = fsum(r_value(game, i, j, T) for T in iter_submasks_of_size(rest, m))
    return total / comb(n - 2, m)


def spectrum(
    game: Game, i: int, j: int, kind: str = "raw", *, check_tol: float = IDENTITY_TOL
) -> OrderSpectrum:
    """Full order spectrum of a pair.

    The raw spectrum is checked against the overall interaction (its mean
    over orders must reproduce I(i, j)); the purified spectrum is obtained
    from the raw one through the inversion recursion, which is polynomial
    instead of exponential in the context size.
    """
    if kind not in ("raw", "purified"):
        raise ValueError(f"unknown spectrum kind '{kind}'")
    _check_pair(game, i, j)
    raw = OrderSpectrum(
        i,
        j,
        tuple(interaction_order(game, i, j, m) for m in range(game.n - 1)),
        "raw",
    )
    overall = interaction(game, i, j, check_tol=check_tol)
    if abs(raw.mean() - overall) > check_tol:
        raise CrossCheckError(
            f"mean of I^(m) over orders {raw.mean()!r} does not reproduce "
            f"I({i},{j}) = {overall!r}"
        )
    if kind == "raw":
        return raw
    return purified_from_raw(raw)


def purified_from_raw(raw: OrderSpectrum) -> OrderSpectrum:
    """Invert the raw spectrum into purified components.

    J^(m) = I^(m) - sum_{p<m} C(m, p) J^(p); the coefficient counts the
    size-p sub-patterns inside a size-m context.
    """
    if raw.kind != "raw":
        raise ValueError("purified_from_raw needs a raw spectrum")
    purified: list[float] = []
    for m, im in enumerate(raw.values):
        purified.append(im - fsum(comb(m, p) * purified[p] for p in range(m)))
    return OrderSpectrum(raw.i, raw.j, tuple(purified), "purified")


def raw_from_purified(purified: OrderSpectrum) -> OrderSpectrum:
    """Re-expand purified components: I^(m) = sum_{p<=m} C(m, p) J^(p)."""
    if purified.kind != "purified":
        raise ValueError("raw_from_purified needs a purified spectrum")
    values = tuple(
        fsum(comb(m, p) * purified.values[p] for p in range(m + 1))
        for m in range(len(purified.values))
    )
    return OrderSpectrum(purified.i, purified.j, values, "raw")


def interaction_order_from_patterns(game: Game, i: int, j: int, m: int) -> float:
    """Order-m interaction rebuilt from pattern components.

    Evaluates E over size-m contexts S of sum_{T subset of S} R_T directly;
    exponential, intended as an oracle for the decomposition identity.
    """
    rest = _check_pair(game, i, j)
    n = game.n
    if not 0 <= m <= n - 2:
        raise ValueError(f"order {m} outside 0..{n - 2}")
    cache: dict[int, float] = {}

    def r_cached(tmask: int) -> float:
        v = cache.get(tmask)
        if v is None:
            v = r_value(game, i, j, tmask)
            cache[tmask] = v
        return v

    total = fsum(
        fsum(r_cached(T) for T in iter_submasks(S))
        for S in iter_submasks_of_size(rest, m)
    )
    return total / comb(n - 2, m)
