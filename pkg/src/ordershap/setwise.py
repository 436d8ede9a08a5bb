"""Set-wise indices: the interaction index for arbitrary coalitions,
coalition significance aggregates, and the Taylor-style cutoff attribution.

The interaction index of a coalition S weights each outside context T by
1 / ((n-s+1) * C(n-s, t)) and takes the |S|-fold discrete derivative; for
|S| = 2 it coincides with the pairwise interaction.  ``restrict`` and
``present`` keyword arguments evaluate the index inside reduced games
(players outside ``restrict`` never participate; players in ``present``
always do) without constructing new game objects, so the value cache is
shared.

The cutoff attribution of order k assigns ``delta_S v(empty)`` to sets
smaller than k, and for |S| = k averages ``delta_S v(P)`` over the set P of
players preceding all of S in a uniform random ordering.  The probability
that exactly T precedes all of S is s / (n * C(n-1, t)), which turns the
ordering average into a subset sum; a factorial-time enumeration oracle is
provided for validation at small n.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from math import comb, factorial, fsum
from typing import Optional

from .bits import bit_positions, full_mask, iter_submasks, iter_submasks_of_size
from .games import (
    Coalition,
    CrossCheckError,
    ExactLimitError,
    Game,
    merge_coalition,
    require_exact,
)
from .shapley import IDENTITY_TOL, shapley_value

#: 2^|S| index terms are summed for significance; refuse beyond this size.
SIGNIFICANCE_SIZE_CAP = 15

#: The permutation-enumeration oracle walks n! orderings; only for tiny n.
ENUMERATION_PLAYER_CAP = 6


@dataclass(frozen=True)
class SignificanceReport:
    """Signed and absolute aggregates of the interaction indices inside S."""

    S: Coalition
    b: float
    b_prime: float


@dataclass(frozen=True)
class GrabischRecursionReport:
    """Deviations of both recursive identities for one coalition."""

    S: Coalition
    merge_deviation: float
    condition_deviation: float

    @property
    def max_deviation(self) -> float:
        return max(self.merge_deviation, self.condition_deviation)


@dataclass(frozen=True)
class TaylorIndex:
    """Cutoff-k attribution over all coalitions of size 1..k."""

    k: int
    values: dict[Coalition, float]
    mode: str = "exact"


def grabisch_index(
    game: Game,
    S: Coalition,
    *,
    restrict: Optional[Coalition] = None,
    present: Optional[Coalition] = None,
) -> float:
    """Interaction index of coalition S (optionally inside a reduced game)."""
    if S.n != game.n:
        raise ValueError("coalition is over a different player set")
    smask = S.mask
    if smask == 0:
        raise ValueError("the interaction index needs a nonempty coalition")
    rmask = full_mask(game.n) if restrict is None else restrict.mask
    pmask = 0 if present is None else present.mask
    if smask & ~rmask:
        raise ValueError("S must lie inside the restriction set")
    if pmask & rmask:
        raise ValueError("present players must lie outside the restriction set")
    n_r = rmask.bit_count()
    require_exact(game, n_r)
    s = smask.bit_count()
    rest = rmask ^ smask
    weights = [1.0 / ((n_r - s + 1) * comb(n_r - s, t)) for t in range(n_r - s + 1)]
    val = game.value
    terms = []
    for T in iter_submasks(rest):
        base = T | pmask
        terms.append(
            weights[T.bit_count()]
            * fsum(
                (
                    val(L | base)
                    if ((s - L.bit_count()) & 1) == 0
                    else -val(L | base)
                )
                for L in iter_submasks(smask)
            )
        )
    return fsum(terms)


def grabisch_recursive_check(game: Game, S: Coalition) -> GrabischRecursionReport:
    """Evaluate both recursive identities of the index on S.

    Identity 1 rebuilds the index from the merged-singleton contribution
    minus the indices of all proper nonempty subsets in their reduced
    games.  Identity 2 expresses it, for each member i, as the index of
    S - {i} with i always present minus the same index with i absent.
    """
    if S.n != game.n:
        raise ValueError("coalition is over a different player set")
    if S.size() < 2:
        raise ValueError("the recursive identities need |S| > 1")
    n = game.n
    smask = S.mask
    lhs = grabisch_index(game, S)

    merged = merge_coalition(game, S)
    rhs = shapley_value(merged, 0) - fsum(
        grabisch_index(
            game,
            Coalition(K, n),
            restrict=Coalition((full_mask(n) ^ smask) | K, n),
        )
        for K in iter_submasks(smask)
        if K not in (0, smask)
    )
    merge_dev = abs(lhs - rhs)

    condition_dev = 0.0
    for i in bit_positions(smask):
        bit = 1 << i
        others = Coalition(smask ^ bit, n)
        kept = Coalition(full_mask(n) ^ bit, n)
        with_i = grabisch_index(
            game, others, restrict=kept, present=Coalition(bit, n)
        )
        without_i = grabisch_index(game, others, restrict=kept)
        condition_dev = max(condition_dev, abs(lhs - (with_i - without_i)))
    return GrabischRecursionReport(S, merge_dev, condition_dev)


def b_forms(game: Game, S: Coalition) -> tuple[float, float, float]:
    """Both forms of the significance aggregate: (phi form, index sum, b').

    Each index term is evaluated in the reduced game where the members of
    S outside S' never participate, i.e. over the universe (N - S) + S'.
    That reading makes the index sum coincide with the phi form for every
    S (it follows from the merge-recursion identity); evaluating every
    term in the full game does not.
    """
    if S.n != game.n:
        raise ValueError("coalition is over a different player set")
    s = S.size()
    if s < 2:
        raise ValueError("significance needs |S| >= 2")
    if s > SIGNIFICANCE_SIZE_CAP:
        raise ExactLimitError(
            f"significance over |S| = {s} needs 2^{s} index terms; the cap is "
            f"{SIGNIFICANCE_SIZE_CAP}"
        )
    n = game.n
    smask = S.mask
    outside = full_mask(n) ^ smask

    merged = merge_coalition(game, S)
    phi_form = shapley_value(merged, 0) - fsum(
        shapley_value(game, i, Coalition(outside | (1 << i), n))
        for i in bit_positions(smask)
    )

    indices = [
        grabisch_index(game, Coalition(K, n), restrict=Coalition(outside | K, n))
        for K in iter_submasks(smask)
        if K.bit_count() > 1
    ]
    return phi_form, fsum(indices), fsum(abs(x) for x in indices)


def b_significance(
    game: Game, S: Coalition, *, check_tol: float = IDENTITY_TOL
) -> SignificanceReport:
    """Significance of the interactions inside S, dual-form checked."""
    phi_form, index_sum, b_prime = b_forms(game, S)
    if abs(phi_form - index_sum) > check_tol:
        raise CrossCheckError(
            f"significance forms disagree for S={S.to_mask_string()}: "
            f"{phi_form!r} vs {index_sum!r}"
        )
    return SignificanceReport(S, index_sum, b_prime)


def b_value(game: Game, S: Coalition, *, check_tol: float = IDENTITY_TOL) -> float:
    return b_significance(game, S, check_tol=check_tol).b


# ---------------------------------------------------------------------------
# Cutoff-k (Taylor-style) attribution


def _delta_set(game: Game, smask: int, tmask: int) -> float:
    s = smask.bit_count()
    val = game.value
    return fsum(
        (
            val(L | tmask)
            if ((s - L.bit_count()) & 1) == 0
            else -val(L | tmask)
        )
        for L in iter_submasks(smask)
    )


def _check_taylor_args(game: Game, S: Coalition, k: int) -> int:
    if S.n != game.n:
        raise ValueError("coalition is over a different player set")
    s = S.size()
    if not 1 <= s <= k <= game.n:
        raise ValueError(
            f"need 1 <= |S| <= k <= n, got |S|={s}, k={k}, n={game.n}"
        )
    return s


def shapley_taylor(game: Game, S: Coalition, k: int) -> float:
    """Cutoff-k attribution of coalition S.

    For |S| < k the ordering is irrelevant and the value is the discrete
    derivative at the empty context; for |S| = k the ordering average is
    computed analytically through the prefix-set distribution.
    """
    s = _check_taylor_args(game, S, k)
    require_exact(game)
    if s < k:
        return _delta_set(game, S.mask, 0)
    n = game.n
    rest = full_mask(n) ^ S.mask
    weights = [s / (n * comb(n - 1, t)) for t in range(n - s + 1)]
    return fsum(
        weights[T.bit_count()] * _delta_set(game, S.mask, T)
        for T in iter_submasks(rest)
    )


def taylor_by_enumeration(game: Game, S: Coalition, k: int) -> float:
    """Validation oracle: average over all n! orderings explicitly."""
    s = _check_taylor_args(game, S, k)
    if game.n > ENUMERATION_PLAYER_CAP:
        raise ExactLimitError(
            f"ordering enumeration is capped at n = {ENUMERATION_PLAYER_CAP}"
        )
    if s < k:
        return _delta_set(game, S.mask, 0)
    smask = S.mask
    totals = []
    for pi in permutations(range(game.n)):
        prefix = 0
        for p in pi:
            if (smask >> p) & 1:
                break
            prefix |= 1 << p
        totals.append(_delta_set(game, smask, prefix))
    return fsum(totals) / factorial(game.n)


def taylor_index(
    game: Game, k: int, *, check_tol: float = IDENTITY_TOL
) -> TaylorIndex:
    """Attributions for every coalition of size 1..k; checks efficiency."""
    if not 1 <= k <= game.n:
        raise ValueError(f"cutoff k={k} outside 1..{game.n}")
    require_exact(game)
    n = game.n
    values: dict[Coalition, float] = {}
    for size in range(1, k + 1):
        for smask in iter_submasks_of_size(full_mask(n), size):
            S = Coalition(smask, n)
            values[S] = shapley_taylor(game, S, k)
    total = fsum(values.values())
    span = game.value(full_mask(n)) - game.value(0)
    if abs(total - span) > check_tol:
        raise CrossCheckError(
            f"cutoff-{k} efficiency violated: sum {total!r} vs v(N)-v(0) {span!r}"
        )
    return TaylorIndex(k, values, "exact")
