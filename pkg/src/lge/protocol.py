"""Slot-level simulation of one LGE phase on a beep channel.

Every contender draws a geometric value and truncates it to ``0`` if it does
not fit in ``L + 1`` base-3 digits. The digits, most significant first, are
mapped to two-bit pairs ``0 -> 00, 1 -> 01, 2 -> 10``. The resulting key is then
played one bit per slot. A ``1`` means beep. A ``0`` means listen, and hearing
a beep eliminates the listener, which stays silent from then on.

The channel only reports busy or idle. One beep and a collision of many are
indistinguishable.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .analytics import GeoParam, _param, geometric_variates, rounds_required
from .streams import stream

__all__ = [
    "DIGIT_BITS",
    "ElectionTrace",
    "Elimination",
    "SlotRecord",
    "StationState",
    "TransmissionKey",
    "encode_key",
    "lge_phase",
    "run_election",
    "run_election_batch",
    "survivors_oracle",
    "truncate_draw",
]

DIGIT_BITS = {0: (0, 0), 1: (0, 1), 2: (1, 0)}


@dataclass(frozen=True)
class TransmissionKey:
    digits: tuple[int, ...]  # b_0 .. b_L, least significant first
    bits: tuple[int, ...]  # f(b_L) || ... || f(b_0)

    @property
    def L(self) -> int:
        return len(self.digits) - 1

    @property
    def value(self) -> int:
        return sum(b * 3**k for k, b in enumerate(self.digits))

    def __str__(self) -> str:
        return "".join(map(str, self.bits))


@dataclass
class StationState:
    id: int
    drawn_value: int
    key: TransmissionKey
    candidate: bool = True


@dataclass(frozen=True)
class SlotRecord:
    slot_index: int  # 1-based
    beepers_count: int

    @property
    def channel_busy(self) -> bool:
        return self.beepers_count >= 1


@dataclass(frozen=True)
class Elimination:
    station_id: int
    slot_index: int


@dataclass
class ElectionTrace:
    L: int
    slots: list[SlotRecord] = field(default_factory=list)
    eliminations: list[Elimination] = field(default_factory=list)
    survivors: frozenset[int] = frozenset()
    stations: list[StationState] = field(default_factory=list)

    @property
    def survivor_count(self) -> int:
        return len(self.survivors)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["slotIndex", "beepersCount", "channelBusy"])
        for s in self.slots:
            writer.writerow([s.slot_index, s.beepers_count, str(s.channel_busy).lower()])
        return buf.getvalue()

    def summary(self, n: int, p: float) -> dict:
        return {
            "n": n,
            "p": p,
            "L": self.L,
            "survivorCount": self.survivor_count,
            "slots": len(self.slots),
        }

    def summary_json(self, n: int, p: float) -> str:
        return json.dumps(self.summary(n, p))


def truncate_draw(g: int, L: int) -> int:
    """Values that do not fit in ``L + 1`` base-3 digits collapse to zero."""
    if g < 1:
        raise ValueError("draws are positive integers")
    if L < 0:
        raise ValueError("L must be nonnegative")
    return g if g < 3 ** (L + 1) else 0


def encode_key(g: int, L: int) -> TransmissionKey:
    if L < 0:
        raise ValueError("L must be nonnegative")
    if not 0 <= g < 3 ** (L + 1):
        raise ValueError(f"value {g} does not fit in {L + 1} base-3 digits")
    digits = []
    rest = g
    for _ in range(L + 1):
        rest, d = divmod(rest, 3)
        digits.append(d)
    bits = tuple(bit for d in reversed(digits) for bit in DIGIT_BITS[d])
    return TransmissionKey(digits=tuple(digits), bits=bits)


def run_election(draws: Sequence[int], L: int, keep_trace: bool = True) -> ElectionTrace:
    """Play the beep loop for stations holding ``draws``; deterministic."""
    if len(draws) == 0:
        raise ValueError("need at least one station")
    stations = [
        StationState(id=i, drawn_value=(v := truncate_draw(int(g), L)), key=encode_key(v, L))
        for i, g in enumerate(draws)
    ]
    trace = ElectionTrace(L=L, stations=stations if keep_trace else [])
    for slot in range(2 * (L + 1)):
        active = [s for s in stations if s.candidate]
        beepers = sum(1 for s in active if s.key.bits[slot])
        if keep_trace:
            trace.slots.append(SlotRecord(slot + 1, beepers))
        if beepers:
            for s in active:
                if not s.key.bits[slot]:
                    s.candidate = False
                    if keep_trace:
                        trace.eliminations.append(Elimination(s.id, slot + 1))
    trace.survivors = frozenset(s.id for s in stations if s.candidate)
    return trace


def survivors_oracle(draws: Iterable[int], L: int) -> frozenset[int]:
    """Indices attaining the maximum truncated draw."""
    values = [truncate_draw(int(g), L) for g in draws]
    if not values:
        raise ValueError("need at least one station")
    top = max(values)
    return frozenset(i for i, v in enumerate(values) if v == top)


def run_election_batch(draws: np.ndarray, L: int) -> np.ndarray:
    """Beep loop over a ``(trials, n)`` array of draws; returns the candidate mask.

    Same slot semantics as :func:`run_election`, vectorised across trials.
    """
    draws = np.asarray(draws, dtype=np.int64)
    values = np.where(draws < 3 ** (L + 1), draws, 0)
    candidate = np.ones(values.shape, dtype=bool)
    for digit_index in range(L, -1, -1):
        digit = (values // 3**digit_index) % 3
        # first bit of the pair is 1 only for digit 2, second only for digit 1
        for bit in (digit == 2, digit == 1):
            busy = np.any(candidate & bit, axis=-1, keepdims=True)
            candidate &= bit | ~busy
    return candidate


def lge_phase(
    n: int,
    param: GeoParam | float,
    L: int | None = None,
    seed: int = 0,
    keep_trace: bool = True,
) -> tuple[int, ElectionTrace]:
    """One full phase: draw, truncate, encode, play. Returns ``(survivor_count, trace)``."""
    param = _param(param)
    if n < 1:
        raise ValueError("n must be positive")
    if L is None:
        L = rounds_required(max(n, 2), param)[1]
    draws = geometric_variates(param, stream(seed), n)
    trace = run_election(draws.tolist(), L, keep_trace=keep_trace)
    return trace.survivor_count, trace
