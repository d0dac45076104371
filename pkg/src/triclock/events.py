"""Exact event-driven simulation of N impact-coupled clocks.

Each clock is a unit-rate phase ``psi_i`` on [0, 2*pi).  When a clock
reaches the threshold 2*pi (== 0) it "kicks": every other clock j is
shifted by the full perturbation ``P(psi_j - psi_kicker)`` with no
first-order truncation.  Between kicks all phases advance together, so
the simulation jumps straight from kick to kick.

One cycle of the reference clock (index 0) is the unit of observation:
the reference kicks, then each other clock kicks once, and the cycle
closes when the reference returns to the threshold.  For three clocks
the phase differences taken at those instants follow the first-order
map in :mod:`triclock.core` up to O(eps**2), which is what makes this
simulator an independent oracle for it.

Convention: in a state handed to :func:`run_cycle` (or produced by it),
phase 0 on the reference clock means "at the threshold, about to kick".
Mid-cycle, a clock at phase 0 has just kicked and has a full period to
go.  Exact phase ties are processed within the same instant in
ascending clock index; results can depend on that order only at
O(eps**2).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import IO, Iterable

import numpy as np

from .core import TWO_PI, CouplingParams, normalize_phase

__all__ = [
    "ClockEnsemble",
    "KickEvent",
    "CycleTrace",
    "LockResult",
    "advance_to_next_kick",
    "apply_kick",
    "run_cycle",
    "phase_differences",
    "difference_vector",
    "cyclic_gaps",
    "run_until_locked",
    "write_events_jsonl",
    "read_events_jsonl",
    "write_events_csv",
]


@dataclass(frozen=True)
class ClockEnsemble:
    """N absolute clock phases plus the coupling they interact with."""

    phases: np.ndarray
    params: CouplingParams

    def __post_init__(self) -> None:
        phases = np.atleast_1d(np.asarray(self.phases, dtype=float))
        if phases.ndim != 1 or phases.size < 2:
            raise ValueError("an ensemble needs a flat list of at least 2 phases")
        if np.any((phases < 0.0) | (phases >= TWO_PI)):
            raise ValueError("phases must be normalized to [0, 2*pi)")
        object.__setattr__(self, "phases", phases)

    @property
    def n(self) -> int:
        return int(self.phases.size)


@dataclass(frozen=True)
class KickEvent:
    """One kick: who fired and the (normalized) phases around the instant."""

    cycle_index: int
    kicking_clock: int
    phases_before: np.ndarray
    phases_after: np.ndarray

    def to_dict(self) -> dict:
        return {
            "cycle_index": self.cycle_index,
            "kicking_clock": self.kicking_clock,
            "phases_before": [float(v) for v in self.phases_before],
            "phases_after": [float(v) for v in self.phases_after],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "KickEvent":
        return cls(
            cycle_index=int(d["cycle_index"]),
            kicking_clock=int(d["kicking_clock"]),
            phases_before=np.asarray(d["phases_before"], dtype=float),
            phases_after=np.asarray(d["phases_after"], dtype=float),
        )


@dataclass(frozen=True)
class CycleTrace:
    """All kick events of one reference-clock cycle.

    ``kick_times`` lists (clock, time since cycle start) for every kick and
    ``period`` is the cycle's total duration; with exact kicks the period is
    2*pi only up to O(eps**2), since the reference phase itself gets bumped
    by the others' kicks.
    """

    events: tuple[KickEvent, ...]
    start_state: ClockEnsemble
    end_state: ClockEnsemble
    kick_times: tuple[tuple[int, float], ...]
    period: float

    def firing_gaps(self) -> np.ndarray:
        """Sorted gaps between consecutive kicks, normalized so they sum to 2*pi.

        In a locked splay state the kicks are equally spaced in time, so
        these gaps all equal 2*pi/N exactly, unlike the phase-difference
        snapshot which carries an O(eps) offset from the received kicks.
        """
        times = np.asarray([t for _, t in self.kick_times], dtype=float)
        intervals = np.diff(times, append=self.period + times[0])
        return np.sort(intervals) * (TWO_PI / self.period)


@dataclass(frozen=True)
class LockResult:
    """Outcome of iterating cycles until the difference vector settles.

    ``differences`` and ``gaps`` describe the phase snapshot at the final
    reference kick; ``firing_gaps`` and ``period`` describe the timing of
    the kicks within the final cycle, which is the observable that becomes
    exactly splay in a locked state.
    """

    ensemble: ClockEnsemble
    cycles: int
    locked: bool
    differences: np.ndarray
    gaps: np.ndarray
    firing_gaps: np.ndarray
    period: float


def _gaps_to_threshold(phases: np.ndarray) -> np.ndarray:
    # A clock at phase 0 has just kicked: full period to go, never gap 0.
    return TWO_PI - phases


def advance_to_next_kick(ensemble: ClockEnsemble) -> tuple[ClockEnsemble, int]:
    """Advance all phases by the common shift that puts one clock at the threshold.

    Returns the shifted ensemble and the kicking clock's index.  The kicker
    comes back with phase exactly 0 (the threshold representative); exact
    ties resolve to the lowest index.  A clock sitting at phase 0 has just
    kicked, so its shift-to-threshold is a full period.
    """
    gaps = _gaps_to_threshold(ensemble.phases)
    kicker = int(np.argmin(gaps))
    shift = float(gaps[kicker])
    shifted = normalize_phase(ensemble.phases + shift)
    shifted[kicker] = 0.0
    return ClockEnsemble(shifted, ensemble.params), kicker


def apply_kick(ensemble: ClockEnsemble, kicker: int) -> ClockEnsemble:
    """Kick by ``kicker``: every other clock j gains P(psi_j - psi_kicker), exactly.

    Requires the kicker to sit at the threshold (phase 0 modulo 2*pi).  The
    perturbed phases are wrapped back to [0, 2*pi); for eps < 1/9 a wrap can
    only happen within rounding of the threshold.
    """
    if not 0 <= kicker < ensemble.n:
        raise ValueError(f"kicker index {kicker} out of range for {ensemble.n} clocks")
    psi_k = float(ensemble.phases[kicker])
    if min(psi_k, TWO_PI - psi_k) > 1e-9:
        raise ValueError(
            f"clock {kicker} is at phase {psi_k}, not at the kick threshold"
        )
    eps = ensemble.params.epsilon
    diffs = normalize_phase(ensemble.phases - psi_k)
    out = normalize_phase(ensemble.phases + eps * np.sin(diffs))
    out[kicker] = ensemble.phases[kicker]
    return ClockEnsemble(out, ensemble.params)


def run_cycle(
    ensemble: ClockEnsemble, cycle_index: int = 0, record: bool = True
) -> CycleTrace:
    """Simulate one full cycle of the reference clock (index 0).

    The input must have the reference at phase 0, meaning about to kick;
    any other clock at exactly 0 is taken to kick in the same instant,
    after the reference (ascending index).  Alternates kicks and time
    shifts until the reference returns to the threshold, which closes the
    cycle; the reference's next kick belongs to the following cycle.

    Raises RuntimeError if some clock would kick twice first, which cannot
    happen for identical clocks at small eps and signals bad parameters.
    """
    start_phases = ensemble.phases
    if min(start_phases[0], TWO_PI - start_phases[0]) > 1e-9:
        raise ValueError("the reference clock must start at the kick threshold")

    eps = ensemble.params.epsilon
    n = ensemble.n
    # Internal representation: exactly 2*pi == due to kick now, 0 == just kicked.
    # The reference is snapped onto the threshold; any other clock at exactly
    # 0 kicks in the same opening instant, after it.
    psi = [float(p) for p in start_phases]
    psi[0] = TWO_PI
    for i in range(1, n):
        if psi[i] == 0.0:
            psi[i] = TWO_PI
    kicked = [False] * n
    events: list[KickEvent] = []
    kick_times: list[tuple[int, float]] = []
    now = 0.0

    while True:
        shift = min(TWO_PI - p for p in psi)
        if shift > 0.0:
            k = min(range(n), key=lambda i: TWO_PI - psi[i])
            psi = [p + shift for p in psi]
            psi[k] = TWO_PI
            now += shift
        k = next(i for i in range(n) if psi[i] == TWO_PI)
        if k == 0 and kicked[0]:
            psi[0] = 0.0
            break
        if kicked[k]:
            raise RuntimeError(
                f"clock {k} reached the threshold twice within one reference cycle; "
                "the coupling is too strong for the identical-clock regime"
            )
        psi[k] = 0.0
        if record:
            before = np.array(psi, dtype=float)
        for j in range(n):
            if j != k:
                bumped = psi[j] + eps * math.sin(psi[j])
                # Crossing the threshold is impossible for eps < 1; clamp anyway
                # so that rounding at the top re-enters as an immediate kick.
                psi[j] = min(max(bumped, 0.0), TWO_PI)
        kicked[k] = True
        kick_times.append((k, now))
        if record:
            after = normalize_phase(np.array(psi, dtype=float))
            events.append(KickEvent(cycle_index, k, before, after))

    end = ClockEnsemble(normalize_phase(np.array(psi, dtype=float)), ensemble.params)
    return CycleTrace(tuple(events), ensemble, end, tuple(kick_times), now)


def phase_differences(ensemble: ClockEnsemble) -> np.ndarray:
    """Map state (x, y) = (psi_2 - psi_1, psi_3 - psi_1) mod 2*pi; three clocks only."""
    if ensemble.n != 3:
        raise ValueError(f"phase differences need exactly 3 clocks, got {ensemble.n}")
    return difference_vector(ensemble)


def difference_vector(ensemble: ClockEnsemble) -> np.ndarray:
    """Differences of every clock to the reference, (psi_i - psi_0) mod 2*pi."""
    return normalize_phase(ensemble.phases[1:] - ensemble.phases[0])


def cyclic_gaps(ensemble: ClockEnsemble) -> np.ndarray:
    """Sorted gaps between consecutive clocks around the circle (sums to 2*pi)."""
    ordered = np.sort(normalize_phase(ensemble.phases))
    gaps = np.diff(ordered, append=ordered[0] + TWO_PI)
    return np.sort(gaps)


def run_until_locked(
    ensemble: ClockEnsemble, tol: float, max_cycles: int
) -> LockResult:
    """Iterate cycles until the difference vector moves less than ``tol``.

    Movement is the max-norm change of the reference-relative difference
    vector between consecutive cycles.  Returns locked=False when
    ``max_cycles`` is exhausted first; that is a result, not an error.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if max_cycles < 1:
        raise ValueError("max_cycles must be at least 1")
    state = ensemble
    prev = difference_vector(state)
    locked = False
    cycles = 0
    trace = None
    for cycles in range(1, max_cycles + 1):
        trace = run_cycle(state, record=False)
        state = trace.end_state
        cur = difference_vector(state)
        if float(np.max(np.abs(cur - prev))) < tol:
            locked = True
            break
        prev = cur
    return LockResult(
        ensemble=state,
        cycles=cycles,
        locked=locked,
        differences=difference_vector(state),
        gaps=cyclic_gaps(state),
        firing_gaps=trace.firing_gaps(),
        period=trace.period,
    )


def write_events_jsonl(events: Iterable[KickEvent], stream: IO[str]) -> None:
    """One JSON object per kick event, fields as named on the type."""
    for ev in events:
        stream.write(json.dumps(ev.to_dict()) + "\n")


def read_events_jsonl(stream: IO[str]) -> list[KickEvent]:
    return [KickEvent.from_dict(json.loads(line)) for line in stream if line.strip()]


def write_events_csv(events: Iterable[KickEvent], stream: IO[str], n: int) -> None:
    """Rows of (cycle_index, kicker, post-kick phases psi_1..psi_N)."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["cycle_index", "kicker"] + [f"psi_{i + 1}" for i in range(n)])
    for ev in events:
        writer.writerow(
            [ev.cycle_index, ev.kicking_clock] + [repr(float(v)) for v in ev.phases_after]
        )
