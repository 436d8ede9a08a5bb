import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ordershap.games import GameSpec, build_game

ORACLE_SCRIPT = Path(__file__).parent / "oracles" / "additive_oracle.py"


def random_game(n: int, seed: int):
    return build_game(GameSpec("random", n=n, seed=seed))


def majority_game(n: int = 3, threshold: int = 2):
    return build_game(GameSpec("majority", n=n, threshold=threshold))


def additive_game(*weights: float):
    return build_game(GameSpec("additive", n=len(weights), weights=weights))


def pattern_game(n: int, pattern_mask: int, c: float):
    return build_game(GameSpec("pattern", n=n, pattern_mask=pattern_mask, constant=c))


@pytest.fixture
def majority3():
    return majority_game()
