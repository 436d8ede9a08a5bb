"""Executable verification of every stated property, against any game.

``run_axioms`` evaluates a fixed checklist of 33 properties covering the
classic Shapley value, its order decomposition, pairwise interactions and
their purified components, the set-wise interaction index, the significance
aggregates, and the cutoff attribution.  Each property yields a maximum
absolute deviation, the worst-case instance, and a pass flag against the
configured tolerance.

Properties that quantify over games a given game does not exhibit are
checked on synthesized variants: dummy checks augment the game with one
additive player, symmetry checks symmetrize it over the pair (0, 1),
linearity checks add a seeded random partner game of equal size, and the
interaction-distribution check constructs its own pattern games.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import fsum
from typing import Iterable, Optional

from .bits import full_mask, iter_submasks_of_size, mask_of
from .games import (
    Coalition,
    ExactLimitError,
    Game,
    GameSpec,
    augment_dummy,
    build_game,
    scale_game,
    sum_game,
    symmetrized_pair,
)
from .interactions import (
    OrderSpectrum,
    interaction_forms,
    interaction_order,
    interaction_order_from_patterns,
    interaction_order_phi_form,
    purified_from_raw,
    purified_order,
    raw_from_purified,
)
from .setwise import b_forms, grabisch_index, grabisch_recursive_check, shapley_taylor
from .shapley import shapley_order, shapley_value

#: Fixed report order of the property checklist.
PROPERTY_NAMES = (
    "shapley/linearity",
    "shapley/dummy",
    "shapley/symmetry",
    "shapley/efficiency",
    "orders/linearity",
    "orders/dummy",
    "orders/symmetry",
    "orders/decomposition",
    "pairwise/linearity",
    "pairwise/dummy",
    "pairwise/symmetry",
    "pairwise/marginal-contribution",
    "pairwise/accumulation",
    "pairwise/recursive",
    "pairwise/efficiency",
    "pairwise/mean-identity",
    "forms/interaction-dual",
    "forms/order-dual",
    "purified/reconstruction",
    "purified/roundtrip",
    "grabisch/linearity",
    "grabisch/dummy",
    "grabisch/symmetry",
    "grabisch/recursive-merge",
    "grabisch/recursive-condition",
    "grabisch/pair-equivalence",
    "significance/dual-form",
    "taylor/linearity",
    "taylor/dummy",
    "taylor/symmetry",
    "taylor/efficiency",
    "taylor/interaction-distribution",
    "taylor/shapley-reduction",
)

_SCALES = (-2.0, 0.5)
_DUMMY_KAPPA = 1.0
#: Beyond this size, the exponential pattern-reconstruction oracle runs on
#: a fixed pair sample instead of every pair.
_EXHAUSTIVE_RECONSTRUCTION_N = 7


@dataclass(frozen=True)
class PropertyCheck:
    name: str
    deviation: float
    tolerance: float
    passed: bool
    instance: str


@dataclass(frozen=True)
class AxiomReport:
    game_id: str
    tolerance: float
    checks: tuple[PropertyCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def max_deviation(self) -> float:
        return max((c.deviation for c in self.checks), default=0.0)

    def failures(self) -> tuple[PropertyCheck, ...]:
        return tuple(c for c in self.checks if not c.passed)


class _Worst:
    """Track the largest deviation and the instance producing it."""

    __slots__ = ("dev", "instance")

    def __init__(self) -> None:
        self.dev = -1.0
        self.instance = "none"

    def add(self, dev: float, instance: str) -> None:
        if dev > self.dev:
            self.dev = dev
            self.instance = instance

    def result(self) -> tuple[float, str]:
        return (max(self.dev, 0.0), self.instance)


class _Suite:
    """Shared lazily-computed quantities for one game under test."""

    def __init__(self, game: Game, partner_seed: int) -> None:
        self.g = game
        self.n = game.n
        self.partner_seed = partner_seed
        self._cache: dict[str, object] = {}

    def _get(self, key: str, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    # Companion games -----------------------------------------------------
    @property
    def partner(self) -> Game:
        return self._get(
            "partner",
            lambda: build_game(GameSpec("random", n=self.n, seed=self.partner_seed)),
        )

    @property
    def summed(self) -> Game:
        return self._get("summed", lambda: sum_game(self.g, self.partner))

    @property
    def augmented(self) -> Game:
        return self._get("augmented", lambda: augment_dummy(self.g, _DUMMY_KAPPA))

    @property
    def symmetrized(self) -> Game:
        return self._get("symmetrized", lambda: symmetrized_pair(self.g, 0, 1))

    def scaled(self, c: float) -> Game:
        return self._get(f"scaled{c!r}", lambda: scale_game(self.g, c))

    # Shapley quantities ---------------------------------------------------
    def phis(self, game: Game) -> list[float]:
        return self._get(
            f"phi:{id(game)}", lambda: [shapley_value(game, i) for i in range(game.n)]
        )

    def orders(self, game: Game) -> list[list[float]]:
        return self._get(
            f"orders:{id(game)}",
            lambda: [
                [shapley_order(game, i, m) for m in range(game.n)]
                for i in range(game.n)
            ],
        )

    # Pairwise quantities --------------------------------------------------
    @property
    def pairs(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in range(i + 1, self.n)]

    def imat(self, game: Game) -> dict[tuple[int, int], list[float]]:
        def build():
            return {
                (i, j): [
                    interaction_order(game, i, j, m) for m in range(game.n - 1)
                ]
                for i in range(game.n)
                for j in range(i + 1, game.n)
            }

        return self._get(f"imat:{id(game)}", build)

    @property
    def iforms(self) -> dict[tuple[int, int], tuple[float, float]]:
        return self._get(
            "iforms",
            lambda: {(i, j): interaction_forms(self.g, i, j) for i, j in self.pairs},
        )

    @property
    def reconstruction_pairs(self) -> list[tuple[int, int]]:
        if self.n <= _EXHAUSTIVE_RECONSTRUCTION_N:
            return self.pairs
        n = self.n
        return sorted({(0, 1), (0, n - 1), (n - 2, n - 1)})

    def grabisch_sets(self) -> list[Coalition]:
        n = self.n
        masks = {mask_of((0, 1))}
        if n >= 3:
            masks.add(mask_of((n - 2, n - 1)))
            masks.add(mask_of((0, 1, 2)))
        if n >= 6:
            masks.add(mask_of((0, 1, 2, 3)))
        return [Coalition(m, n) for m in sorted(masks)]


def _pair_tag(i: int, j: int) -> str:
    return f"pair=({i},{j})"


# ---------------------------------------------------------------------------
# Individual property checks.  Each returns (deviation, worst instance).


def _shapley_linearity(s: _Suite) -> tuple[float, str]:
    w = _Worst()
    phi_v, phi_w, phi_u = s.phis(s.g), s.phis(s.partner), s.phis(s.summed)
    for i in range(s.n):
        w.add(abs(phi_u[i] - phi_v[i] - phi_w[i]), f"i={i} (sum)")
    for c in _SCALES:
        phi_c = s.phis(s.scaled(c))
        for i in range(s.n):
            w.add(abs(phi_c[i] - c * phi_v[i]), f"i={i} (scale {c})")
    return w.result()


def _shapley_dummy(s: _Suite) -> tuple[float, str]:
    w = _Worst()
    w.add(abs(shapley_value(s.augmented, s.n) - _DUMMY_KAPPA), f"d={s.n}")
    return w.result()


def _shapley_symmetry(s: _Suite) -> tuple[float, str]:
    w = _Worst()
    sym = s.symmetrized
    w.add(abs(shapley_value(sym, 0) - shapley_value(sym, 1)), "pair=(0,1)")
    return w.result()


def _shapley_efficiency(s: _Suite) -> tuple[float, str]:
    w = _Worst()
    span = s.g.value(full_mask(s.n)) - s.g.value(0)
    w.add(abs(fsum(s.phis(s.g)) - span), "all players")
    return w.result()


def _orders_linearity(s: _Suite) -> tuple[float, str]:
    w = _Worst()
    ov, ow, ou = s.orders(s.g), s.orders(s.partner), s.orders(s.summed)
    for i in range(s.n):
        for m in range(s.n):
            w.add(abs(ou[i][m] - ov[i][m] - ow[i][m]), f"i={i}, m={m} (sum)")
    for c in _SCALES:
        oc = s.orders(s.scaled(c))
        for i in range(s.n):
            for m in range(s.n):
                w.add(abs(oc[i][m] - c * ov[i][m]), f"i={i}, m={m} (scale {c})")
    return w.result()


def _orders_dummy(s: _Suite) -> tuple[float, str]:
    w = _Worst()
    aug = s.augmented
    for m in range(aug.n):
        w.add(abs(shapley_order(aug, s.n, m) - _DUMMY_KAPPA), f"d={s.n}, m={m}")
    return w.result()


def _orders_symmetry(s: _Suite) -> tuple[float, str]:
    w = _Worst()
    sym = s.symmetrized
    for m in range(s.n):
        w.add(
            abs(shapley_order(sym, 0, m) - shapley_order(sym, 1, m)),
            f"pair=(0,1), m={m}",
        )
    return w.result()


def _orders_decomposition(s: _Suite) -> tuple[float, str]:
    w = _Worst()
    phis = s.phis(s.g)
    for i, row in enumerate(s.orders(s.g)):
        w.add(abs(fsum(row) / s.n - phis[i]), f"i={i}")
    return w.result()


def _pairwise_linearity(s: _Suite) -> tuple[float, str]:
    w = _Worst()
    n = s.n
    pairs = sorted({(0, 1), (0, n - 1), (max(n - 2, 0), n - 1)} & set(s.pairs))
    for i, j in pairs:
        for m in range(n - 1):
            v = interaction_order(s.g, i, j, m)
            w.add(
                abs(
                    interaction_order(s.summed, i, j, m)
                    - v
                    - interaction_order(s.partner, i, j, m)
                ),
                f"{_pair_tag(i, j)}, m={m} (sum)",
            )
            for c in _SCALES:
                w.add(
                    abs(interaction_order(s.scaled(c), i, j, m) - c * v),
                    f"{_pair_tag(i, j)}, m={m} (scale {c})",
                )
    return w.result()


def _pairwise_dummy(s: _Suite) -> tuple[float, str]:
    w = _Worst()
    aug = s.augmented
    d = s.n
    for j in range(s.n):
        for m in range(aug.n - 1):
            w.add(abs(interaction_order(aug, d, j, m)), f"pair=({d},{j}), m={m}")
    return w.result()


def _pairwise_symmetry(s: _Suite) -> tuple[float, str]:
    w = _Worst()
    sym = s.symmetrized
    for k in range(2, s.n):
        for m in range(s.n - 1):
            w.add(
                abs(
                    interaction_order(sym, 0, k, m) - interaction_order(sym, 1, k, m)
                ),
                f"k={k}, m={m}",
            )
    return w.result()


def _lookup(imat, i: int, j: int) -> list[float]:
    return imat[(i, j) if i < j else (j, i)]


def _pairwise_marginal(s: _Suite) -> tuple[float, str]:
    w = _Worst()
    orders, imat = s.orders(s.g), s.imat(s.g)
    n = s.n
    for i in range(n):
        for m in range(n - 1):
            mean = fsum(_lookup(imat, i, j)[m] for j in range(n) if j != i) / (n - 1)
            w.add(abs(orders[i][m + 1] - orders[i][m] - mean), f"i={i}, m={m}")
    return w.result()


def _pairwise_accumulation(s: _Suite) -> tuple[float, str]:
    w = _Worst()
    orders, imat = s.orders(s.g), s.imat(s.g)
    n = s.n
    for i in range(n):
        for m in range(1, n):
            mean = fsum(
                fsum(_lookup(imat, i, j)[k] for k in range(m))
                for j in range(n)
                if j != i
            ) / (n - 1)
            w.add(abs(orders[i][m] - mean - orders[i][0]), f"i={i}, m={m}")
    return w.result()


def _pairwise_recursive(s: _Suite) -> tuple[float, str]:
    w = _Worst()
    orders, iforms = s.orders(s.g), s.iforms
    n = s.n
    for i in range(n):
        total = fsum(
            iforms[(i, j) if i < j else (j, i)][0] for j in range(n) if j != i
        )
        w.add(abs(orders[i][n - 1] - orders[i][0] - total), f"i={i}")
    return w.result()


def _pairwise_efficiency(s: _Suite) -> tuple[float, str]:
    w = _Worst()
    orders, imat = s.orders(s.g), s.imat(s.g)
    n = s.n
    span = s.g.value(full_mask(n)) - s.g.value(0)
    base = fsum(orders[i][0] for i in range(n))
    weighted = fsum(
        2.0 * ((n - 1 - k) / (n * (n - 1))) * imat[(i, j)][k]
        for (i, j) in s.pairs
        for k in range(n - 1)
    )
    w.add(abs(base + weighted - span), "all pairs")
    return w.result()


def _pairwise_mean_identity(s: _Suite) -> tuple[float, str]:
    w = _Worst()
    imat, iforms = s.imat(s.g), s.iforms
    for (i, j), row in imat.items():
        w.add(abs(fsum(row) / (s.n - 1) - iforms[(i, j)][0]), _pair_tag(i, j))
    return w.result()


def _forms_interaction_dual(s: _Suite) -> tuple[float, str]:
    w = _Worst()
    for (i, j), (closed, phi_form) in s.iforms.items():
        w.add(abs(closed - phi_form), _pair_tag(i, j))
    return w.result()


def _forms_order_dual(s: _Suite) -> tuple[float, str]:
    w = _Worst()
    imat = s.imat(s.g)
    for (i, j), row in imat.items():
        for m, expectation in enumerate(row):
            w.add(
                abs(interaction_order_phi_form(s.g, i, j, m) - expectation),
                f"{_pair_tag(i, j)}, m={m}",
            )
    return w.result()


def _purified_reconstruction(s: _Suite) -> tuple[float, str]:
    w = _Worst()
    imat = s.imat(s.g)
    for i, j in s.reconstruction_pairs:
        row = imat[(i, j)]
        for m in range(s.n - 1):
            w.add(
                abs(interaction_order_from_patterns(s.g, i, j, m) - row[m]),
                f"{_pair_tag(i, j)}, m={m}",
            )
    return w.result()


def _purified_roundtrip(s: _Suite) -> tuple[float, str]:
    w = _Worst()
    imat = s.imat(s.g)
    for i, j in s.reconstruction_pairs:
        raw = OrderSpectrum(i, j, tuple(imat[(i, j)]), "raw")
        purified = purified_from_raw(raw)
        for m, jm in enumerate(purified.values):
            w.add(
                abs(jm - purified_order(s.g, i, j, m)),
                f"{_pair_tag(i, j)}, m={m} (inversion)",
            )
        back = raw_from_purified(purified)
        for m in range(s.n - 1):
            w.add(
                abs(back.values[m] - raw.values[m]),
                f"{_pair_tag(i, j)}, m={m} (re-expansion)",
            )
    return w.result()


def _grabisch_linearity(s: _Suite) -> tuple[float, str]:
    w = _Worst()
    for S in s.grabisch_sets():
        v = grabisch_index(s.g, S)
        w.add(
            abs(grabisch_index(s.summed, S) - v - grabisch_index(s.partner, S)),
            f"S={S.to_mask_string()} (sum)",
        )
        for c in _SCALES:
            w.add(
                abs(grabisch_index(s.scaled(c), S) - c * v),
                f"S={S.to_mask_string()} (scale {c})",
            )
    return w.result()


def _grabisch_dummy(s: _Suite) -> tuple[float, str]:
    w = _Worst()
    aug = s.augmented
    d = s.n
    for base in ((0,), (0, 1)):
        S = Coalition.of(base + (d,), aug.n)
        w.add(abs(grabisch_index(aug, S)), f"S={S.to_mask_string()}")
    return w.result()


def _grabisch_symmetry(s: _Suite) -> tuple[float, str]:
    w = _Worst()
    sym = s.symmetrized
    rests: list[tuple[int, ...]] = []
    if s.n >= 3:
        rests.append((2,))
    if s.n >= 4:
        rests.append((2, 3))
    for rest in rests:
        a = grabisch_index(sym, Coalition.of((0,) + rest, s.n))
        b = grabisch_index(sym, Coalition.of((1,) + rest, s.n))
        w.add(abs(a - b), f"K={{{','.join(map(str, rest))}}}")
    return w.result()


def _grabisch_recursive_merge(s: _Suite) -> tuple[float, str]:
    w = _Worst()
    for S in s.grabisch_sets():
        report = grabisch_recursive_check(s.g, S)
        w.add(report.merge_deviation, f"S={S.to_mask_string()}")
    return w.result()


def _grabisch_recursive_condition(s: _Suite) -> tuple[float, str]:
    w = _Worst()
    for S in s.grabisch_sets():
        report = grabisch_recursive_check(s.g, S)
        w.add(report.condition_deviation, f"S={S.to_mask_string()}")
    return w.result()


def _grabisch_pair_equivalence(s: _Suite) -> tuple[float, str]:
    w = _Worst()
    for (i, j), (closed, _) in s.iforms.items():
        S = Coalition.of((i, j), s.n)
        w.add(abs(grabisch_index(s.g, S) - closed), _pair_tag(i, j))
    return w.result()


def _significance_dual(s: _Suite) -> tuple[float, str]:
    w = _Worst()
    for size in range(2, min(5, s.n) + 1):
        S = Coalition.of(range(size), s.n)
        phi_form, index_sum, _ = b_forms(s.g, S)
        w.add(abs(phi_form - index_sum), f"S={S.to_mask_string()}")
    return w.result()


def _taylor_sets(s: _Suite) -> list[Coalition]:
    n = s.n
    sets = [Coalition.of((i,), n) for i in range(n)]
    if n >= 2:
        pair_masks = sorted({mask_of((0, 1)), mask_of((0, n - 1))})
        sets.extend(Coalition(m, n) for m in pair_masks)
    return sets


def _taylor_linearity(s: _Suite) -> tuple[float, str]:
    w = _Worst()
    k = min(2, s.n)
    for S in _taylor_sets(s):
        if S.size() > k:
            continue
        v = shapley_taylor(s.g, S, k)
        w.add(
            abs(
                shapley_taylor(s.summed, S, k)
                - v
                - shapley_taylor(s.partner, S, k)
            ),
            f"S={S.to_mask_string()} (sum)",
        )
        for c in _SCALES:
            w.add(
                abs(shapley_taylor(s.scaled(c), S, k) - c * v),
                f"S={S.to_mask_string()} (scale {c})",
            )
    return w.result()


def _taylor_dummy(s: _Suite) -> tuple[float, str]:
    w = _Worst()
    aug = s.augmented
    d = s.n
    k = min(2, aug.n)
    span = aug.value(1 << d) - aug.value(0)
    w.add(abs(shapley_taylor(aug, Coalition.of((d,), aug.n), k) - span), f"S={{{d}}}")
    if k == 2:
        for j in (0, s.n - 1):
            S = Coalition.of((d, j), aug.n)
            w.add(abs(shapley_taylor(aug, S, k)), f"S={S.to_mask_string()}")
    return w.result()


def _taylor_symmetry(s: _Suite) -> tuple[float, str]:
    w = _Worst()
    sym = s.symmetrized
    for k in (1, min(2, s.n)):
        a = shapley_taylor(sym, Coalition.of((0,), s.n), k)
        b = shapley_taylor(sym, Coalition.of((1,), s.n), k)
        w.add(abs(a - b), f"k={k}")
    return w.result()


def _taylor_efficiency(s: _Suite) -> tuple[float, str]:
    w = _Worst()
    n = s.n
    span = s.g.value(full_mask(n)) - s.g.value(0)
    for k in (1, 2, 3):
        if k > n:
            continue
        total = fsum(
            shapley_taylor(s.g, Coalition(smask, n), k)
            for size in range(1, k + 1)
            for smask in iter_submasks_of_size(full_mask(n), size)
        )
        w.add(abs(total - span), f"k={k}")
    return w.result()


def _taylor_distribution(s: _Suite) -> tuple[float, str]:
    w = _Worst()
    n = s.n
    sizes = [t for t in (2, 3) if t <= n]
    for t in sizes:
        tmask = mask_of(range(t))
        for c in (1.0, -2.0):
            pattern = build_game(
                GameSpec("pattern", n=n, pattern_mask=tmask, constant=c)
            )
            for size in range(1, t):
                for smask in iter_submasks_of_size(tmask, size):
                    for k in range(size + 1, t + 1):
                        w.add(
                            abs(shapley_taylor(pattern, Coalition(smask, n), k)),
                            f"T=first {t}, c={c}, S={Coalition(smask, n).to_mask_string()}, k={k}",
                        )
    return w.result()


def _taylor_shapley_reduction(s: _Suite) -> tuple[float, str]:
    w = _Worst()
    phis = s.phis(s.g)
    for i in range(s.n):
        w.add(
            abs(shapley_taylor(s.g, Coalition.of((i,), s.n), 1) - phis[i]), f"i={i}"
        )
    return w.result()


_CHECKS = {
    "shapley/linearity": _shapley_linearity,
    "shapley/dummy": _shapley_dummy,
    "shapley/symmetry": _shapley_symmetry,
    "shapley/efficiency": _shapley_efficiency,
    "orders/linearity": _orders_linearity,
    "orders/dummy": _orders_dummy,
    "orders/symmetry": _orders_symmetry,
    "orders/decomposition": _orders_decomposition,
    "pairwise/linearity": _pairwise_linearity,
    "pairwise/dummy": _pairwise_dummy,
    "pairwise/symmetry": _pairwise_symmetry,
    "pairwise/marginal-contribution": _pairwise_marginal,
    "pairwise/accumulation": _pairwise_accumulation,
    "pairwise/recursive": _pairwise_recursive,
    "pairwise/efficiency": _pairwise_efficiency,
    "pairwise/mean-identity": _pairwise_mean_identity,
    "forms/interaction-dual": _forms_interaction_dual,
    "forms/order-dual": _forms_order_dual,
    "purified/reconstruction": _purified_reconstruction,
    "purified/roundtrip": _purified_roundtrip,
    "grabisch/linearity": _grabisch_linearity,
    "grabisch/dummy": _grabisch_dummy,
    "grabisch/symmetry": _grabisch_symmetry,
    "grabisch/recursive-merge": _grabisch_recursive_merge,
    "grabisch/recursive-condition": _grabisch_recursive_condition,
    "grabisch/pair-equivalence": _grabisch_pair_equivalence,
    "significance/dual-form": _significance_dual,
    "taylor/linearity": _taylor_linearity,
    "taylor/dummy": _taylor_dummy,
    "taylor/symmetry": _taylor_symmetry,
    "taylor/efficiency": _taylor_efficiency,
    "taylor/interaction-distribution": _taylor_distribution,
    "taylor/shapley-reduction": _taylor_shapley_reduction,
}


def run_axioms(
    game: Game,
    tolerance: float = 1e-9,
    scope: Optional[Iterable[str]] = None,
    *,
    partner_seed: int = 101,
) -> AxiomReport:
    """Run the property checklist against ``game``.

    ``scope`` filters by exact name or prefix (e.g. ``["grabisch"]``).  All
    properties need exact enumeration; above the game's player cap this
    refuses rather than subsample.
    """
    if game.n < 2:
        raise ValueError("the axiom suite needs at least two players")
    if game.n + 1 > game.exact_cap:  # +1: dummy augmentation adds a player
        raise ExactLimitError(
            f"all {len(PROPERTY_NAMES)} properties require exact enumeration "
            f"over n+1 = {game.n + 1} players, beyond the cap "
            f"({game.exact_cap})"
        )
    if scope is not None:
        wanted = tuple(scope)
        selected = [
            name
            for name in PROPERTY_NAMES
            if any(name == p or name.startswith(p.rstrip("/") + "/") for p in wanted)
        ]
        if not selected:
            raise ValueError(f"scope {wanted!r} matches no properties")
    else:
        selected = list(PROPERTY_NAMES)

    suite = _Suite(game, partner_seed)
    checks = []
    for name in selected:
        deviation, instance = _CHECKS[name](suite)
        checks.append(
            PropertyCheck(name, deviation, tolerance, deviation <= tolerance, instance)
        )
    return AxiomReport(game.label, tolerance, tuple(checks))
