"""Deterministic arithmetic-operation counting for complexity benchmarks."""

from __future__ import annotations


class OpCounter:
    """Tally of floating-point operations (one per add, multiply or divide).

    Routines that accept a ``counter`` argument add the number of scalar
    operations they perform; vectorised steps add the element count.
    """

    def __init__(self):
        self.count = 0

    def add(self, n) -> None:
        self.count += int(n)

    def reset(self) -> None:
        self.count = 0

    def __repr__(self):
        return f"OpCounter(count={self.count})"


def tally(counter: OpCounter | None, n) -> None:
    if counter is not None:
        counter.add(n)
