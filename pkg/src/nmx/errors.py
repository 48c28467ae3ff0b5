"""Shared solver error types."""

from __future__ import annotations


class ResourceLimitError(Exception):
    """A configurable enumeration cap was exceeded."""

    def __init__(self, what: str, count, cap):
        self.what = what
        self.count = count
        self.cap = cap
        super().__init__(f"{what}: {count} exceeds cap {cap}")


class InfeasibleObservation(Exception):
    """An information-state update was asked for an observation no member
    predicts; signals caller misuse."""

    def __init__(self, level: int, time: int, z):
        self.level, self.time, self.z = level, time, z
        super().__init__(f"infeasible observation {z!r} for subsystem {level} at t={time}")
