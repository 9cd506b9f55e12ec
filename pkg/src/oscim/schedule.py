"""Annealing schedules for the coupling gain, SYNC amplitude and noise."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "Schedule",
    "constant",
    "linear_ramp_Kc",
    "hardware_mode",
    "evaluate",
    "default_schedule",
    "parse_schedule",
    "serialize_schedule",
    "load_schedule",
    "DEFAULT_T_END",
    "DEFAULT_KC_START",
    "DEFAULT_KC_END",
    "DEFAULT_KS",
    "DEFAULT_SIGMA_START",
    "DEFAULT_HOLD_FRACTION",
]

DEFAULT_T_END = 20.0
DEFAULT_KC_START = 8.0
DEFAULT_KC_END = 0.25
DEFAULT_KS = 1.0
DEFAULT_SIGMA_START = 1.0
DEFAULT_HOLD_FRACTION = 0.2


@dataclass(frozen=True)
class Schedule:
    """Piecewise-linear controls through ``(t, K_c, K_s, sigma)`` breakpoints.

    Values are held constant after the last breakpoint.
    """

    breakpoints: tuple

    def __post_init__(self):
        rows = tuple(tuple(float(v) for v in bp) for bp in self.breakpoints)
        if not rows:
            raise ValueError("schedule needs at least one breakpoint")
        for k, row in enumerate(rows):
            if len(row) != 4:
                raise ValueError(f"breakpoint {k} must be (t, K_c, K_s, sigma)")
            if not all(math.isfinite(v) for v in row):
                raise ValueError(f"breakpoint {k} has non-finite values")
            if row[3] < 0:
                raise ValueError(f"breakpoint {k} has negative sigma {row[3]}")
        if rows[0][0] != 0.0:
            raise ValueError("first breakpoint must be at t=0")
        times = [r[0] for r in rows]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("breakpoint times must be strictly increasing")
        object.__setattr__(self, "breakpoints", rows)

    @property
    def _table(self) -> np.ndarray:
        return np.array(self.breakpoints)

    def evaluate(self, t: float) -> tuple:
        """Controls ``(K_c, K_s, sigma)`` at time ``t``."""
        if t < 0:
            raise ValueError(f"time must be non-negative, got {t}")
        kc, ks, sigma = self.evaluate_many(np.array([t], dtype=float))
        return float(kc[0]), float(ks[0]), float(sigma[0])

    def evaluate_many(self, times) -> tuple:
        """Vectorized :meth:`evaluate`; returns three arrays."""
        tab = self._table
        times = np.asarray(times, dtype=float)
        # np.interp clamps to the end values outside the breakpoint range
        return tuple(np.interp(times, tab[:, 0], tab[:, c]) for c in (1, 2, 3))

    @property
    def kc_is_constant(self) -> bool:
        return len({bp[1] for bp in self.breakpoints}) == 1


def evaluate(sch: Schedule, t: float) -> tuple:
    return sch.evaluate(t)


def constant(K_c: float, K_s: float, sigma: float = 0.0) -> Schedule:
    return Schedule(((0.0, K_c, K_s, sigma),))


def linear_ramp_Kc(K_c_start: float, K_c_end: float, K_s: float, sigma_start: float,
                   sigma_end: float, t_end: float) -> Schedule:
    """K_c and sigma move linearly from start to end over ``[0, t_end]``; K_s is fixed."""
    if not t_end > 0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    return Schedule(((0.0, K_c_start, K_s, sigma_start), (t_end, K_c_end, K_s, sigma_end)))


def hardware_mode(K_c: float, ks_points: Sequence) -> Schedule:
    """Schedule with a fixed coupling gain, as on the board.

    ``ks_points`` is a sequence of ``(t, K_s, sigma)``; only the SYNC
    amplitude and the noise move.
    """
    return Schedule(tuple((t, K_c, ks, sigma) for t, ks, sigma in ks_points))


def default_schedule(t_end: float = DEFAULT_T_END, *, K_c_start: float = DEFAULT_KC_START,
                     K_c_end: float = DEFAULT_KC_END, K_s: float = DEFAULT_KS,
                     sigma: float = DEFAULT_SIGMA_START, sigma_end: float = 0.0,
                     hold_fraction: float = DEFAULT_HOLD_FRACTION) -> Schedule:
    """Anneal with a fixed SYNC amplitude.

    K_c ramps from ``K_c_start`` to ``K_c_end`` while the noise moves from
    ``sigma`` to ``sigma_end``; the last ``hold_fraction`` of the run holds the final
    controls so the phases can lock. Lowering K_c against a
    fixed K_s raises the relative SYNC strength, which moves the phases from
    the continuous coupling optimum onto 0/pi.
    """
    if not t_end > 0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    if not 0.0 <= hold_fraction < 1.0:
        raise ValueError(f"hold_fraction must lie in [0, 1), got {hold_fraction}")
    t_ramp = (1.0 - hold_fraction) * t_end
    points = [(0.0, K_c_start, K_s, sigma), (t_ramp, K_c_end, K_s, sigma_end)]
    if hold_fraction > 0:
        points.append((t_end, K_c_end, K_s, sigma_end))
    return Schedule(tuple(points))


def parse_schedule(text: str) -> Schedule:
    doc = json.loads(text)
    if not isinstance(doc, dict) or "breakpoints" not in doc:
        raise ValueError("schedule file must be an object with a 'breakpoints' list")
    return Schedule(tuple(tuple(bp) for bp in doc["breakpoints"]))


def serialize_schedule(sch: Schedule) -> str:
    return json.dumps({"breakpoints": [list(bp) for bp in sch.breakpoints]}) + "\n"


def load_schedule(path) -> Schedule:
    with open(path, encoding="utf-8") as fh:
        return parse_schedule(fh.read())
