"""Search budgets and cooperative cancellation."""
from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field

from ..errors import BudgetExceeded, InputError


@dataclass(frozen=True)
class Budget:
    depth: int = 25
    iterations: int = 100
    widening_delay: int = 3
    grid: tuple[int, ...] = (-2, -1, 0, 1, 2)
    const_range: int = 16
    template_size: int = 2
    max_templates: int = 50_000
    time: float = 30.0
    deterministic: bool = True

    def __post_init__(self):
        for name in ("depth", "iterations", "widening_delay", "const_range", "template_size",
                     "max_templates"):
            if getattr(self, name) <= 0:
                raise InputError(f"budget field {name} must be positive")
        if self.time <= 0:
            raise InputError("budget time must be positive")
        if not self.grid:
            raise InputError("template grid must not be empty")


@dataclass
class Deadline:
    """Wall-clock cap plus an external cancellation flag, polled by long loops."""
    seconds: float
    cancel: threading.Event = field(default_factory=threading.Event)

    def __post_init__(self):
        self.start = time.monotonic()

    def expired(self) -> bool:
        return self.cancel.is_set() or time.monotonic() - self.start > self.seconds

    def check(self) -> None:
        if self.cancel.is_set():
            raise BudgetExceeded("cancelled")
        if time.monotonic() - self.start > self.seconds:
            raise BudgetExceeded(f"wall-clock budget of {self.seconds:g}s exhausted")

    def elapsed(self) -> float:
        return time.monotonic() - self.start


def unlimited() -> Deadline:
    return Deadline(float("inf"))
