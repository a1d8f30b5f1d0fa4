"""Parallel-windowed decoding harness.

M processors each own one window of W = N/M positions and step through
offsets j = 0..W-1 in lock-step. At every step processor t fetches the
extrinsic for position ``j + t*W`` of its sub-block; the value lives in
the producing sub-block's memory bank ``a // W`` at address ``a % W``,
where ``a`` is the interleaved (or deinterleaved) address. Two processors
hitting the same bank at one step is a contention.

Each SISO pass still runs the full-frame forward/backward recursion; only
the extrinsic exchange is windowed, so decisions match the serial decoder
bit for bit. Tail positions carry no a-priori input and stay outside the
windowed exchange.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .interleave import WindowConfig
from .ppcore import Interleaver
from .turbo import DEFAULT_RSC, RscSpec, TurboResult, turbo_decode

DIRECTIONS = ("interleave", "deinterleave")


@dataclass(frozen=True)
class ContentionEvent:
    step: int
    direction: str
    iteration: int | None
    processors: tuple[int, ...]
    bank: int

    def as_dict(self) -> dict:
        return {"j": self.step, "direction": self.direction, "iteration": self.iteration,
                "processors": list(self.processors), "bank": self.bank}


class ContentionError(RuntimeError):
    def __init__(self, event: ContentionEvent):
        super().__init__(
            f"processors {list(event.processors)} hit bank {event.bank} at step {event.step} "
            f"({event.direction}, iteration {event.iteration})"
        )
        self.event = event


@dataclass
class BankAccessTrace:
    """Accesses ``bank[j, t]`` / ``addr[j, t]`` of processor t at step j."""

    M: int
    W: int
    direction: str
    bank: np.ndarray
    addr: np.ndarray

    def addresses(self) -> np.ndarray:
        """Flat interleaver recovered from (bank, address) pairs."""
        full = self.bank * self.W + self.addr  # full[j, t] = pi(j + t*W)
        return full.T.reshape(-1)

    def step_contentions(self, j: int, iteration: int | None = None) -> list[ContentionEvent]:
        banks = self.bank[j]
        events = []
        for b in np.flatnonzero(np.bincount(banks, minlength=self.M) > 1).tolist():
            procs = tuple(int(t) for t in np.flatnonzero(banks == b))
            events.append(ContentionEvent(j, self.direction, iteration, procs, int(b)))
        return events

    def contentions(self, iteration: int | None = None) -> list[ContentionEvent]:
        return [e for j in range(self.W) for e in self.step_contentions(j, iteration)]

    def is_exactly_once(self) -> bool:
        """Every step touches each bank exactly once."""
        return bool(np.all(np.sort(self.bank, axis=1) == np.arange(self.M)))

    def as_dict(self) -> dict:
        steps = [
            {"j": j, "accesses": [
                {"proc": t, "bank": int(self.bank[j, t]), "addr": int(self.addr[j, t])}
                for t in range(self.M)
            ]}
            for j in range(self.W)
        ]
        return {"M": self.M, "W": self.W, "direction": self.direction, "steps": steps,
                "contentions": [e.as_dict() for e in self.contentions()]}


def trace_access(pi: Interleaver, M: int, direction: str = "interleave") -> BankAccessTrace:
    """Bank-access pattern of M lock-stepped processors reading through `pi`
    (or through its inverse for ``direction="deinterleave"``)."""
    cfg = WindowConfig.from_processors(pi.N, M)
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}")
    mapping = pi.mapping if direction == "interleave" else pi.inverse().mapping
    full = mapping.reshape(cfg.M, cfg.W).T  # full[j, t] = mapping[j + t*W]
    return BankAccessTrace(cfg.M, cfg.W, direction, full // cfg.W, full % cfg.W)


class _BankedExchange:
    """Moves an extrinsic array between sub-blocks through M banks, one
    lock-step offset at a time."""

    def __init__(self, trace: BankAccessTrace, enforce: bool, log: list[ContentionEvent]):
        self.trace = trace
        self.enforce = enforce
        self.log = log
        # the access pattern is fixed, so the colliding steps are too
        clash = np.sort(trace.bank, axis=1)
        self._clash_steps = set(np.flatnonzero(np.any(clash[:, 1:] == clash[:, :-1], axis=1)).tolist())

    def __call__(self, values: np.ndarray, iteration: int) -> np.ndarray:
        tr = self.trace
        banks = np.asarray(values).reshape(tr.M, tr.W)  # bank b holds window b
        out = np.empty((tr.M, tr.W), dtype=banks.dtype)
        for j in range(tr.W):
            if j in self._clash_steps:
                events = tr.step_contentions(j, iteration)
                if self.enforce:
                    raise ContentionError(events[0])
                self.log.extend(events)
            out[:, j] = banks[tr.bank[j], tr.addr[j]]
        return out.reshape(-1)


@dataclass
class ParallelResult:
    bits: np.ndarray
    app: np.ndarray
    extrinsic1: list[np.ndarray]
    extrinsic2: list[np.ndarray]
    traces: dict[str, BankAccessTrace]
    contentions: list[ContentionEvent] = field(default_factory=list)

    @classmethod
    def _from(cls, res: TurboResult, traces, events) -> "ParallelResult":
        return cls(res.bits, res.app, res.extrinsic1, res.extrinsic2, traces, events)


def parallel_turbo_decode(llrs, pi: Interleaver, M: int, iterations: int = 8,
                          spec: RscSpec = DEFAULT_RSC, algorithm: str = "logmap",
                          enforce: bool = True) -> ParallelResult:
    """Turbo decoding with the extrinsic exchange split over M banks.

    With ``enforce=True`` the first contention raises
    :class:`ContentionError`; otherwise decoding completes and every
    contention is logged in the result.
    """
    traces = {d: trace_access(pi, M, d) for d in DIRECTIONS}
    events: list[ContentionEvent] = []
    res = turbo_decode(
        llrs, pi, iterations, spec, algorithm,
        interleave=_BankedExchange(traces["interleave"], enforce, events),
        deinterleave=_BankedExchange(traces["deinterleave"], enforce, events),
    )
    return ParallelResult._from(res, traces, events)
