"""Players, coalitions and value-function oracles.

A game is a black-box map from coalitions (bit masks over ``n`` players) to
real rewards.  This module provides the :class:`Coalition` and :class:`Game`
types, the discrete-derivative primitives every index is built on, and the
builders for the six supported game kinds: ``additive``, ``majority``,
``pattern``, ``random``, ``table`` and ``exec``.

Mask-string convention (fixed for table files and the exec protocol): the
leftmost character of a mask string is player 0, so ``"101"`` with n=3 is
the coalition {0, 2}.
"""

from __future__ import annotations

import csv
import math
import shlex
import subprocess
import threading
from dataclasses import dataclass
from math import fsum
from typing import Callable, Optional

import numpy as np

from .bits import bit_positions, full_mask, iter_submasks, swap_bits

#: Default refusal point for exact enumeration (2**20 oracle calls).
DEFAULT_EXACT_CAP = 20

#: Player-count ceiling for the mask arrays used by the samplers (int64).
MAX_PLAYERS = 62

_MASK64 = (1 << 64) - 1
#: Second Philox key word reserved for per-coalition game values; sampler
#: streams use small tags and can never collide with it.
_GAME_STREAM = 0x67616D65 << 32


class GameConfigError(ValueError):
    """A game spec, table file or CLI configuration is invalid."""


class MaskFormatError(GameConfigError):
    """A coalition mask string is malformed."""


class TableFormatError(GameConfigError):
    """A table CSV file violates the mask,value contract."""


class OracleError(RuntimeError):
    """The external value oracle broke the line protocol."""


class ExactLimitError(RuntimeError):
    """An exact enumeration would exceed the configured player cap."""


class CrossCheckError(RuntimeError):
    """Two independent formulas for the same quantity disagreed."""


@dataclass(frozen=True)
class Coalition:
    """A subset of the player set {0, ..., n-1}, stored as a bit mask."""

    mask: int
    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"player count must be positive, got {self.n}")
        if self.mask < 0 or self.mask >> self.n:
            raise ValueError(
                f"mask {self.mask:#x} has bits outside the {self.n}-player set"
            )

    @classmethod
    def empty(cls, n: int) -> "Coalition":
        return cls(0, n)

    @classmethod
    def full(cls, n: int) -> "Coalition":
        return cls(full_mask(n), n)

    @classmethod
    def of(cls, players, n: int) -> "Coalition":
        m = 0
        for p in players:
            m |= 1 << p
        return cls(m, n)

    def size(self) -> int:
        return self.mask.bit_count()

    def members(self) -> tuple[int, ...]:
        return tuple(bit_positions(self.mask))

    def contains(self, player: int) -> bool:
        return bool((self.mask >> player) & 1)

    def to_mask_string(self) -> str:
        return "".join("1" if self.contains(p) else "0" for p in range(self.n))

    def __iter__(self):
        return iter(bit_positions(self.mask))


def coalition_from_mask_string(s: str, n: int) -> Coalition:
    """Parse a '0'/'1' string into a Coalition (char p governs player p)."""
    if len(s) != n:
        raise MaskFormatError(f"mask '{s}' has length {len(s)}, expected {n}")
    m = 0
    for pos, ch in enumerate(s):
        if ch == "1":
            m |= 1 << pos
        elif ch != "0":
            raise MaskFormatError(
                f"mask '{s}' has illegal character {ch!r} at position {pos}"
            )
    return Coalition(m, n)


def mask_to_string(mask: int, n: int) -> str:
    return Coalition(mask, n).to_mask_string()


class Game:
    """A memoized value oracle ``v: 2^N -> R``.

    ``value`` takes a raw int mask (the hot path used by the enumerators);
    ``evaluate`` takes a typed :class:`Coalition`.  Evaluations are cached,
    and ``eval_count`` meters distinct oracle calls.  Concurrent evaluation
    is safe: the cache is a single grow-only mapping, and concurrent misses
    on one key simply store the same value twice.
    """

    def __init__(
        self,
        n: int,
        evaluator: Callable[[int], float],
        label: str = "game",
        *,
        bulk: Optional[Callable[[], np.ndarray]] = None,
        cheap_bulk: bool = True,
        closer: Optional[Callable[[], None]] = None,
        exact_cap: int = DEFAULT_EXACT_CAP,
    ) -> None:
        if n < 1:
            raise GameConfigError(f"player count must be positive, got {n}")
        self.n = n
        self.label = label
        self.exact_cap = exact_cap
        self.cheap_bulk = cheap_bulk
        self._evaluator = evaluator
        self._bulk = bulk
        self._closer = closer
        self._cache: dict[int, float] = {}
        self._dense: Optional[np.ndarray] = None

    def value(self, mask: int) -> float:
        """Value of the coalition given as a raw bit mask (memoized)."""
        dense = self._dense
        if dense is not None:
            if mask >> self.n or mask < 0:
                raise ValueError(f"mask {mask:#x} outside the {self.n}-player set")
            return float(dense[mask])
        cache = self._cache
        v = cache.get(mask)
        if v is None:
            if mask >> self.n or mask < 0:
                raise ValueError(f"mask {mask:#x} outside the {self.n}-player set")
            v = float(self._evaluator(mask))
            cache[mask] = v
        return v

    def evaluate(self, S: Coalition) -> float:
        if S.n != self.n:
            raise ValueError(f"coalition is over {S.n} players, game has {self.n}")
        return self.value(S.mask)

    @property
    def eval_count(self) -> int:
        """Distinct coalitions evaluated so far."""
        if self._dense is not None:
            return 1 << self.n
        return len(self._cache)

    def dense_table(self) -> np.ndarray:
        """Materialize the full 2^n value table as a float64 array.

        Values are bit-identical to ``value``; after materialization the
        array replaces the dict cache.
        """
        if self._dense is None:
            if self.n > self.exact_cap:
                raise ExactLimitError(
                    f"materializing 2^{self.n} values exceeds the exact cap "
                    f"({self.exact_cap}); raise game.exact_cap to override"
                )
            if self._bulk is not None:
                table = np.asarray(self._bulk(), dtype=np.float64)
            else:
                table = np.array(
                    [self.value(m) for m in range(1 << self.n)], dtype=np.float64
                )
            if table.shape != (1 << self.n,):
                raise GameConfigError(
                    f"bulk evaluator returned shape {table.shape}, "
                    f"expected ({1 << self.n},)"
                )
            self._dense = table
            self._cache.clear()
        return self._dense

    def dense_if_cheap(self) -> Optional[np.ndarray]:
        """Dense table when materialization is local and within the cap."""
        if self._dense is not None:
            return self._dense
        if self.cheap_bulk and self.n <= self.exact_cap:
            return self.dense_table()
        return None

    def close(self) -> None:
        if self._closer is not None:
            self._closer()

    def __enter__(self) -> "Game":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def __repr__(self) -> str:
        return f"Game({self.label!r}, n={self.n})"


def require_exact(game: Game, n_effective: Optional[int] = None) -> None:
    """Refuse exact enumeration beyond the game's player cap."""
    n = game.n if n_effective is None else n_effective
    if n > game.exact_cap:
        raise ExactLimitError(
            f"exact enumeration over {n} players exceeds the cap "
            f"({game.exact_cap}); use the sampling estimators or raise "
            f"game.exact_cap"
        )


# ---------------------------------------------------------------------------
# Discrete derivatives


def delta_i(game: Game, i: int, S: Coalition) -> float:
    """Marginal contribution v(S + i) - v(S); requires i not in S."""
    if S.contains(i):
        raise ValueError(f"player {i} is already in the coalition")
    bit = 1 << i
    return game.value(S.mask | bit) - game.value(S.mask)


def delta_ij(game: Game, i: int, j: int, S: Coalition) -> float:
    """Second difference v(S+ij) - v(S+i) - v(S+j) + v(S)."""
    if i == j:
        raise ValueError("players i and j must be distinct")
    if S.contains(i) or S.contains(j):
        raise ValueError(f"players {i},{j} must be outside the coalition")
    return delta_pair_mask(game, i, j, S.mask)


def delta_pair_mask(game: Game, i: int, j: int, mask: int) -> float:
    bi, bj = 1 << i, 1 << j
    val = game.value
    return val(mask | bi | bj) - val(mask | bi) - val(mask | bj) + val(mask)


def delta_S(game: Game, S: Coalition, T: Coalition) -> float:
    """Alternating-sign sum over all subsets L of S of v(L + T)."""
    if S.mask == 0:
        raise ValueError("the derivative set S must be nonempty")
    if S.mask & T.mask:
        raise ValueError("S and T must be disjoint")
    return delta_set_mask(game, S.mask, T.mask)


def delta_set_mask(game: Game, smask: int, tmask: int) -> float:
    s = smask.bit_count()
    val = game.value
    return fsum(
        (val(L | tmask) if ((s - L.bit_count()) & 1) == 0 else -val(L | tmask))
        for L in iter_submasks(smask)
    )


# ---------------------------------------------------------------------------
# Game specs and builders


@dataclass(frozen=True)
class GameSpec:
    """Declarative description of a game; see :func:`parse_game_spec`."""

    kind: str
    n: int = 0
    weights: tuple[float, ...] = ()
    threshold: int = 0
    pattern_mask: int = 0
    constant: float = 0.0
    seed: int = 0
    path: str = ""
    command: str = ""


def parse_game_spec(text: str) -> GameSpec:
    """Parse ``kind:payload`` CLI syntax into a validated GameSpec.

    Forms: ``additive:w1,w2,...`` | ``majority:n,threshold`` |
    ``pattern:n,maskstring,c`` | ``random:n,seed`` | ``table:PATH`` |
    ``exec:n,COMMAND``.
    """
    kind, sep, payload = text.partition(":")
    if not sep or not payload:
        raise GameConfigError(f"game spec '{text}' is not of the form kind:payload")
    try:
        if kind == "additive":
            weights = tuple(float(w) for w in payload.split(","))
            return GameSpec("additive", n=len(weights), weights=weights)
        if kind == "majority":
            n_s, t_s = payload.split(",")
            return GameSpec("majority", n=int(n_s), threshold=int(t_s))
        if kind == "pattern":
            n_s, mask_s, c_s = payload.split(",")
            n = int(n_s)
            pattern = coalition_from_mask_string(mask_s, n)
            return GameSpec(
                "pattern", n=n, pattern_mask=pattern.mask, constant=float(c_s)
            )
        if kind == "random":
            n_s, seed_s = payload.split(",")
            return GameSpec("random", n=int(n_s), seed=int(seed_s))
        if kind == "table":
            return GameSpec("table", path=payload)
        if kind == "exec":
            n_s, _, command = payload.partition(",")
            if not command:
                raise GameConfigError(f"exec spec '{text}' is missing a command")
            return GameSpec("exec", n=int(n_s), command=command)
    except (ValueError, TypeError) as exc:
        if isinstance(exc, GameConfigError):
            raise
        raise GameConfigError(f"cannot parse game spec '{text}': {exc}") from exc
    raise GameConfigError(
        f"unknown game kind '{kind}' (expected additive, majority, pattern, "
        "random, table or exec)"
    )


def spec_label(spec: GameSpec) -> str:
    if spec.kind == "additive":
        return "additive:" + ",".join(repr(w) for w in spec.weights)
    if spec.kind == "majority":
        return f"majority:{spec.n},{spec.threshold}"
    if spec.kind == "pattern":
        return f"pattern:{spec.n},{mask_to_string(spec.pattern_mask, spec.n)},{spec.constant!r}"
    if spec.kind == "random":
        return f"random:{spec.n},{spec.seed}"
    if spec.kind == "table":
        return f"table:{spec.path}"
    return f"exec:{spec.n},{spec.command}"


def _random_value(seed: int, mask: int) -> float:
    bg = np.random.Philox(key=np.array([seed & _MASK64, _GAME_STREAM], dtype=np.uint64))
    bg.advance(mask)
    return 2.0 * float(np.random.Generator(bg).random()) - 1.0


def _random_bulk(seed: int, n: int) -> np.ndarray:
    bg = np.random.Philox(key=np.array([seed & _MASK64, _GAME_STREAM], dtype=np.uint64))
    # One Philox block (4 doubles) per coalition; value(mask) reads the
    # first double of block `mask`, so the strided batch matches exactly.
    raw = np.random.Generator(bg).random(4 << n)
    return 2.0 * raw[::4] - 1.0


def build_game(spec: GameSpec, *, exact_cap: int = DEFAULT_EXACT_CAP) -> Game:
    """Construct the deterministic Game described by ``spec``."""
    label = spec_label(spec)
    if spec.kind == "additive":
        if not spec.weights:
            raise GameConfigError("additive game needs at least one weight")
        weights = spec.weights

        def ev_additive(mask: int) -> float:
            return float(sum(weights[p] for p in bit_positions(mask)))

        def bulk_additive() -> np.ndarray:
            table = np.zeros(1 << len(weights))
            idx = np.arange(1 << len(weights))
            for p, w in enumerate(weights):
                np.add(table, w, out=table, where=(idx & (1 << p)) != 0)
            return table

        return Game(
            len(weights), ev_additive, label, bulk=bulk_additive, exact_cap=exact_cap
        )

    if spec.kind == "majority":
        if spec.n < 1:
            raise GameConfigError("majority game needs a positive player count")
        if not (1 <= spec.threshold <= spec.n):
            raise GameConfigError(
                f"majority threshold {spec.threshold} must be in 1..{spec.n}"
            )
        threshold = spec.threshold
        return Game(
            spec.n,
            lambda mask: 1.0 if mask.bit_count() >= threshold else 0.0,
            label,
            exact_cap=exact_cap,
        )

    if spec.kind == "pattern":
        if spec.pattern_mask == 0:
            raise GameConfigError("pattern game needs a nonempty pattern set")
        if not math.isfinite(spec.constant):
            raise GameConfigError("pattern constant must be finite")
        t, c = spec.pattern_mask, spec.constant
        return Game(
            spec.n,
            lambda mask: c if (mask & t) == t else 0.0,
            label,
            exact_cap=exact_cap,
        )

    if spec.kind == "random":
        if not (1 <= spec.n <= MAX_PLAYERS):
            raise GameConfigError(f"random game needs 1 <= n <= {MAX_PLAYERS}")
        seed, n = spec.seed, spec.n
        bulk = (lambda: _random_bulk(seed, n)) if n <= exact_cap else None
        return Game(
            n,
            lambda mask: _random_value(seed, mask),
            label,
            bulk=bulk,
            exact_cap=exact_cap,
        )

    if spec.kind == "table":
        n, values = read_table(spec.path)
        return Game(
            n,
            values.__getitem__,
            label,
            bulk=lambda: np.array(values),
            exact_cap=exact_cap,
        )

    if spec.kind == "exec":
        if spec.n < 1:
            raise GameConfigError("exec game needs a positive player count")
        oracle = LineOracle(spec.command, spec.n)
        return Game(
            spec.n,
            lambda mask: oracle.ask([mask])[0],
            label,
            bulk=oracle.ask_all,
            cheap_bulk=False,
            closer=oracle.close,
            exact_cap=exact_cap,
        )

    raise GameConfigError(f"unknown game kind '{spec.kind}'")


# ---------------------------------------------------------------------------
# Table files


def read_table(path: str) -> tuple[int, list[float]]:
    """Load a complete ``mask,value`` CSV table; returns (n, values-by-mask)."""
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise TableFormatError(f"cannot read table file {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["mask", "value"]:
            raise TableFormatError(
                f"{path}: expected header 'mask,value', got {header!r}"
            )
        n = None
        seen: dict[int, float] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise TableFormatError(f"{path}:{lineno}: expected 2 columns")
            mask_s, value_s = row
            if n is None:
                n = len(mask_s)
                if n < 1:
                    raise TableFormatError(f"{path}:{lineno}: empty mask")
            try:
                coalition = coalition_from_mask_string(mask_s, n)
            except MaskFormatError as exc:
                raise TableFormatError(f"{path}:{lineno}: {exc}") from exc
            if coalition.mask in seen:
                raise TableFormatError(f"{path}:{lineno}: duplicate mask '{mask_s}'")
            try:
                seen[coalition.mask] = float(value_s)
            except ValueError as exc:
                raise TableFormatError(
                    f"{path}:{lineno}: value '{value_s}' is not a decimal literal"
                ) from exc
        if n is None:
            raise TableFormatError(f"{path}: table has no rows")
        missing = (1 << n) - len(seen)
        if missing:
            first = next(m for m in range(1 << n) if m not in seen)
            raise TableFormatError(
                f"{path}: incomplete table for n={n}: {missing} masks missing "
                f"(first: '{mask_to_string(first, n)}')"
            )
    return n, [seen[m] for m in range(1 << n)]


def table_lines(game: Game):
    """Yield the full mask,value CSV export of a game (round-trips exactly)."""
    require_exact(game)
    yield "mask,value"
    n = game.n
    for mask in range(1 << n):
        yield f"{mask_to_string(mask, n)},{game.value(mask)!r}"


# ---------------------------------------------------------------------------
# External line-protocol oracle


class LineOracle:
    """Driver for the subprocess value-oracle protocol.

    The command is spawned once, lazily.  Requests are newline-terminated
    mask strings on stdin; responses are one decimal per line on stdout in
    request order, flushed per batch.  All access is serialized internally.
    """

    def __init__(self, command: str, n: int) -> None:
        self._argv = shlex.split(command)
        if not self._argv:
            raise GameConfigError("exec oracle command is empty")
        self._n = n
        self._proc: Optional[subprocess.Popen] = None
        self._lock = threading.Lock()

    def _ensure(self) -> subprocess.Popen:
        if self._proc is None:
            try:
                self._proc = subprocess.Popen(
                    self._argv,
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                    stderr=subprocess.PIPE,
                    text=True,
                )
            except OSError as exc:
                raise GameConfigError(
                    f"cannot spawn oracle {self._argv!r}: {exc}"
                ) from exc
        return self._proc

    def ask(self, masks: list[int]) -> list[float]:
        with self._lock:
            proc = self._ensure()
            payload = "".join(mask_to_string(m, self._n) + "\n" for m in masks)
            try:
                proc.stdin.write(payload)
                proc.stdin.flush()
            except (BrokenPipeError, OSError):
                raise self._protocol_error(0, len(masks))
            out = []
            for k in range(len(masks)):
                line = proc.stdout.readline()
                if line == "":
                    raise self._protocol_error(k, len(masks))
                try:
                    out.append(float(line))
                except ValueError:
                    raise OracleError(
                        f"oracle {self._argv[0]} sent non-numeric response "
                        f"{line.strip()!r}"
                    ) from None
            return out

    def ask_all(self) -> np.ndarray:
        total = 1 << self._n
        values: list[float] = []
        for start in range(0, total, 4096):
            values.extend(self.ask(list(range(start, min(start + 4096, total)))))
        return np.array(values)

    def _protocol_error(self, answered: int, asked: int) -> OracleError:
        proc = self._proc
        proc.kill()
        _, err = proc.communicate()
        self._proc = None
        return OracleError(
            f"oracle {self._argv[0]} exited (code {proc.returncode}) after "
            f"{answered}/{asked} responses; stderr: {err.strip()[-500:] or '<empty>'}"
        )

    def close(self) -> None:
        with self._lock:
            proc, self._proc = self._proc, None
            if proc is not None:
                try:
                    proc.stdin.close()
                except OSError:
                    pass
                try:
                    proc.wait(timeout=5)
                except subprocess.TimeoutExpired:
                    proc.kill()
                    proc.wait()


# ---------------------------------------------------------------------------
# Derived games


def merge_coalition(game: Game, block: Coalition) -> Game:
    """Treat the players of ``block`` as one singleton player.

    The merged game has n - |block| + 1 players: player 0 is the block (its
    members participate together or not at all), players 1.. are the
    remaining base players in ascending order.
    """
    if block.n != game.n:
        raise ValueError("block is over a different player set")
    if block.size() == 0:
        raise ValueError("cannot merge an empty coalition")
    kept_bits = [1 << p for p in bit_positions(full_mask(game.n) ^ block.mask)]
    block_mask = block.mask

    def ev(mask: int) -> float:
        base = block_mask if mask & 1 else 0
        rest = mask >> 1
        k = 0
        while rest:
            if rest & 1:
                base |= kept_bits[k]
            rest >>= 1
            k += 1
        return game.value(base)

    return Game(
        len(kept_bits) + 1,
        ev,
        f"{game.label}|merge({block.to_mask_string()})",
        exact_cap=game.exact_cap,
    )


def augment_dummy(game: Game, kappa: float = 1.0) -> Game:
    """Append one additive player d = n with v'(S + d) = v'(S) + kappa."""
    n, low = game.n, full_mask(game.n)
    dbit = 1 << n
    return Game(
        n + 1,
        lambda mask: game.value(mask & low) + (kappa if mask & dbit else 0.0),
        f"{game.label}|dummy(+{kappa!r})",
        exact_cap=game.exact_cap,
    )


def symmetrized_pair(game: Game, i: int, j: int) -> Game:
    """Average the game with its (i, j) relabeling, making i and j symmetric."""
    return Game(
        game.n,
        lambda mask: 0.5 * (game.value(mask) + game.value(swap_bits(mask, i, j))),
        f"{game.label}|sym({i},{j})",
        exact_cap=game.exact_cap,
    )


def sum_game(a: Game, b: Game) -> Game:
    if a.n != b.n:
        raise ValueError("cannot add games with different player counts")
    return Game(
        a.n,
        lambda mask: a.value(mask) + b.value(mask),
        f"({a.label})+({b.label})",
        exact_cap=a.exact_cap,
    )


def scale_game(a: Game, c: float) -> Game:
    return Game(
        a.n,
        lambda mask: c * a.value(mask),
        f"{c!r}*({a.label})",
        exact_cap=a.exact_cap,
    )
