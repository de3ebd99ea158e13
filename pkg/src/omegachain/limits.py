"""Wall-clock and branching budgets shared by the search loops."""
from __future__ import annotations

import time
from typing import Optional

__all__ = ["ResourceLimit", "Budget", "tick"]


class ResourceLimit(Exception):
    """A configured time or branch budget was exhausted."""


class Budget:
    """Counts branch-like work items and watches a deadline.

    Cheap enough to call inside inner loops; the time check is only taken
    every few hundred ticks.
    """

    def __init__(self, timeout: Optional[float] = None,
                 max_branches: Optional[int] = None):
        self.max_branches = max_branches
        self.deadline = time.monotonic() + timeout if timeout else None
        self.branches = 0
        self._since_time_check = 0

    def tick(self, n: int = 1) -> None:
        self.branches += n
        if self.max_branches is not None and self.branches > self.max_branches:
            raise ResourceLimit(
                f"branch budget exceeded ({self.branches} > {self.max_branches})")
        self._since_time_check += n
        if self.deadline is not None and self._since_time_check >= 256:
            self._since_time_check = 0
            self.check_time()

    def check_time(self) -> None:
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise ResourceLimit("time budget exceeded")


def tick(budget: Optional[Budget], n: int = 1) -> None:
    if budget is not None:
        budget.tick(n)
