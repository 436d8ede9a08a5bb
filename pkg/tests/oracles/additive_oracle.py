#!/usr/bin/env python3
"""Example exec-protocol oracle serving an additive game over the wire.

Usage: additive_oracle.py W1 W2 ... ; reads newline-terminated mask strings
(leftmost character is player 0) on stdin and answers one decimal value per
line, in request order, flushing after every line.
"""

import sys


def main() -> int:
    weights = [float(w) for w in sys.argv[1:]]
    for line in sys.stdin:
        mask = line.strip()
        if not mask:
            continue
        if len(mask) != len(weights) or any(ch not in "01" for ch in mask):
            print(f"bad mask {mask!r}", file=sys.stderr)
            return 1
        value = float(sum(weights[p] for p, ch in enumerate(mask) if ch == "1"))
        sys.stdout.write(f"{value!r}\n")
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
