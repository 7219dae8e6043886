"""Work caps guarding the exponential strategies, overridable via TEMPOREACH_CAP."""

from __future__ import annotations

import os
from dataclasses import dataclass


class CapExceeded(RuntimeError):
    """An exact strategy refused because its estimated work exceeds a cap."""


@dataclass(frozen=True)
class WorkCaps:
    xp_ops: int = 100_000_000
    oracle_evals: int = 10_000_000
    tw_states: int = 1_000_000
    tw_width: int = 2

    @staticmethod
    def from_env() -> "WorkCaps":
        raw = os.environ.get("TEMPOREACH_CAP")
        if raw is None:
            return WorkCaps()
        cap = int(raw)
        return WorkCaps(xp_ops=cap, oracle_evals=cap, tw_states=cap)


DEFAULT_CAPS = WorkCaps()
