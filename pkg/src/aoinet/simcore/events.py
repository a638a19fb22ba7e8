"""Event calendar: a binary heap ordered by (time, seq)."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Any, NamedTuple

ARRIVAL = 0
COMPLETION = 1


@dataclass(slots=True)
class Packet:
    cls: int  # class index in declaration order
    gen_time: float
    entry_seq: int  # per-class entry counter, used to verify exit order
    gap: float  # entry interarrival time since previous packet of the class (nan for the first)
    hop: int = 0
    node_arrival: float = 0.0


class Event(NamedTuple):
    time: float
    seq: int
    kind: int
    node: int  # node index in declaration order
    packet: Any  # Packet for completions, class index for exogenous arrivals


class EventQueue:
    """Min-heap of events. ``seq`` breaks ties so the pop order is total and reproducible."""

    __slots__ = ("_heap", "_seq")

    def __init__(self):
        self._heap: list[Event] = []
        self._seq = 0

    def push(self, time: float, kind: int, node: int, packet=None) -> Event:
        ev = Event(time, self._seq, kind, node, packet)
        self._seq += 1
        heapq.heappush(self._heap, ev)
        return ev

    def pop(self) -> Event:
        return heapq.heappop(self._heap)

    def peek_time(self) -> float:
        return self._heap[0].time if self._heap else float("inf")

    def __len__(self):
        return len(self._heap)

    def __bool__(self):
        return bool(self._heap)
