"""Closed-loop relation between a finite system and its regulator.

The regulated process is a finite-state transducer: a transition function
over (state, control input, disturbance) and a real-valued emission per
state. The regulator observes the emission and answers with a control
symbol through its policy. One tick runs in a fixed order:

1. the system emits its output (acquisition, the feedforward leg),
2. the regulator updates its own state and picks a control symbol,
3. in closed-loop mode only, that control symbol enters the system's
   transition together with the system disturbance (the comparator, or
   feedback leg); in open-loop feedforward mode the system transitions on
   its idle input and the control symbol is discarded,
4. the optional internal model records the observed system state.

Disturbances arrive as a pair per tick: one symbol for the system channel
(fed to its transition) and one for the regulator channel. The regulator
channel corrupts the observation before the policy sees it, through an
optional hook on the regulator; with no hook it is carried in the record
but has no effect.

Everything is a frozen value; stepping returns a new relation. A run is
therefore a pure function of (relation, disturbance stream, tick count),
and serialized trajectories are byte-for-byte reproducible.

Regulation quality is scored two ways on the output stream: holding a
scalar constant (plug-in Shannon entropy of the binned outputs, in bits)
and keeping the sequence predictable (a block entropy rate over the same
bins). Both use equal-width bins over the observed output range.
"""

from __future__ import annotations

import io
import math
from collections import Counter
from dataclasses import dataclass, replace
from typing import Callable, Hashable, Optional

from .variety import StateSet

Symbol = Hashable


class DestroyedVarietyError(ValueError):
    """An observation fell outside the regulator policy's declared range,
    so the regulator cannot answer it."""

    def __init__(self, symbol: object, tick: int | None = None) -> None:
        self.symbol = symbol
        self.tick = tick
        at = f" at tick {tick}" if tick is not None else ""
        super().__init__(
            f"observation {symbol!r}{at} is outside the regulator policy's declared range"
        )


@dataclass(frozen=True)
class DiscreteSystem:
    """Finite transducer: ``transition(state, control, disturbance)`` must be
    total over states x input alphabet x disturbance alphabet; ``emission``
    maps each state to a real output. ``idle_input`` is the control symbol
    the system receives when no feedback leg is attached."""

    states: StateSet
    input_alphabet: tuple[Symbol, ...]
    disturbance_alphabet: tuple[Symbol, ...]
    transition: Callable[[Symbol, Symbol, Symbol], Symbol]
    emission: Callable[[Symbol], float]
    idle_input: Symbol

    def __post_init__(self) -> None:
        if self.idle_input not in self.input_alphabet:
            raise ValueError(f"idle input {self.idle_input!r} not in the input alphabet")
        # Totality probe: cheap for the finite toy alphabets this module targets.
        for s in self.states.labels:
            for u in self.input_alphabet:
                for d in self.disturbance_alphabet:
                    nxt = self.transition(s, u, d)
                    if nxt not in self.states:
                        raise ValueError(
                            f"transition({s!r}, {u!r}, {d!r}) left the state set: {nxt!r}"
                        )


@dataclass(frozen=True)
class Regulator:
    """Policy maps (observed output, own state) to (next state, control
    symbol) and must be total over the declared observation range x states.
    ``observe`` optionally corrupts the observation with the regulator-side
    disturbance symbol before the policy sees it."""

    states: StateSet
    observations: frozenset
    policy: Callable[[float, Symbol], tuple[Symbol, Symbol]]
    comparator_enabled: bool = True
    observe: Optional[Callable[[float, Symbol], float]] = None

    def __post_init__(self) -> None:
        for y in self.observations:
            for r in self.states.labels:
                nxt, _ = self.policy(y, r)
                if nxt not in self.states:
                    raise ValueError(
                        f"policy({y!r}, {r!r}) left the regulator state set: {nxt!r}"
                    )


@dataclass(frozen=True)
class InternalModel:
    """Sliding-window visitation frequencies of the observed system states.
    ``estimate`` sums to 1 once at least one state has been seen."""

    horizon: int
    window: tuple[Symbol, ...] = ()

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")

    @property
    def estimate(self) -> dict[Symbol, float]:
        if not self.window:
            return {}
        counts = Counter(self.window)
        total = len(self.window)
        return {s: c / total for s, c in counts.items()}

    def observe_state(self, s_state: Symbol) -> "InternalModel":
        window = (self.window + (s_state,))[-self.horizon:]
        return replace(self, window=window)


class LoopMode:
    CLOSED = "ClosedLoop"
    FEEDFORWARD = "OpenLoopFeedforward"


@dataclass(frozen=True)
class ClosedLoopRelation:
    """System and regulator coupled on a common domain, with an optional
    internal model, a goal predicate over outputs, and a loop mode."""

    system: DiscreteSystem
    regulator: Regulator
    goal: Callable[[float], bool]
    mode: str = LoopMode.CLOSED
    model: Optional[InternalModel] = None
    s_state: Symbol = None
    r_state: Symbol = None

    def __post_init__(self) -> None:
        if self.mode not in (LoopMode.CLOSED, LoopMode.FEEDFORWARD):
            raise ValueError(f"unknown loop mode: {self.mode!r}")
        if self.s_state is None:
            object.__setattr__(self, "s_state", self.system.states.labels[0])
        if self.r_state is None:
            object.__setattr__(self, "r_state", self.regulator.states.labels[0])
        if self.s_state not in self.system.states:
            raise ValueError(f"initial system state {self.s_state!r} unknown")
        if self.r_state not in self.regulator.states:
            raise ValueError(f"initial regulator state {self.r_state!r} unknown")


@dataclass(frozen=True)
class TickRecord:
    tick: int
    s_state: Symbol
    r_state: Symbol
    output: float
    error: float
    phi: Symbol
    rho: Symbol


@dataclass(frozen=True)
class Trajectory:
    records: tuple[TickRecord, ...]

    def __post_init__(self) -> None:
        for i, rec in enumerate(self.records):
            if rec.tick != i:
                raise ValueError(f"record {i} carries tick {rec.tick}")

    def outputs(self) -> list[float]:
        return [r.output for r in self.records]

    def __len__(self) -> int:
        return len(self.records)


def step_relation(
    rel: ClosedLoopRelation, disturbance: tuple[Symbol, Symbol]
) -> tuple[ClosedLoopRelation, TickRecord]:
    """Execute one tick and return the successor relation plus its record.

    The record's tick index is 0; ``run_relation`` renumbers as it stacks
    records into a trajectory.
    """
    phi, rho = disturbance
    output = rel.system.emission(rel.s_state)
    observed = output
    if rel.regulator.observe is not None:
        observed = rel.regulator.observe(output, rho)
    if observed not in rel.regulator.observations:
        raise DestroyedVarietyError(observed)
    next_r, control = rel.regulator.policy(observed, rel.r_state)

    feedback = rel.mode == LoopMode.CLOSED and rel.regulator.comparator_enabled
    applied = control if feedback else rel.system.idle_input
    next_s = rel.system.transition(rel.s_state, applied, phi)

    model = rel.model.observe_state(rel.s_state) if rel.model is not None else None
    error = 0.0 if rel.goal(output) else 1.0
    record = TickRecord(
        tick=0,
        s_state=rel.s_state,
        r_state=rel.r_state,
        output=output,
        error=error,
        phi=phi,
        rho=rho,
    )
    return replace(rel, s_state=next_s, r_state=next_r, model=model), record


def run_relation(
    rel: ClosedLoopRelation,
    disturbance_stream: list[tuple[Symbol, Symbol]],
    T: int,
) -> Trajectory:
    """Iterate ``step_relation`` for T ticks. Deterministic given inputs."""
    traj, _ = run_relation_carry(rel, disturbance_stream, T)
    return traj


def run_relation_carry(
    rel: ClosedLoopRelation,
    disturbance_stream: list[tuple[Symbol, Symbol]],
    T: int,
    start_tick: int = 0,
) -> tuple[Trajectory, ClosedLoopRelation]:
    """Like ``run_relation`` but also returns the final relation, so runs
    compose: two runs of 50 with state carried over equal one run of 100."""
    if T < 1:
        raise ValueError(f"need at least 1 tick, got {T}")
    if len(disturbance_stream) < T:
        raise ValueError(
            f"disturbance stream has {len(disturbance_stream)} entries, need {T}"
        )
    records = []
    for k in range(T):
        try:
            rel, rec = step_relation(rel, disturbance_stream[k])
        except DestroyedVarietyError as exc:
            raise DestroyedVarietyError(exc.symbol, tick=start_tick + k) from None
        records.append(replace(rec, tick=k))
    return Trajectory(tuple(records)), rel


def _bin_outputs(outputs: list[float], bins: int) -> list[int]:
    lo = min(outputs)
    hi = max(outputs)
    if hi == lo:
        return [0] * len(outputs)
    width = (hi - lo) / bins
    return [min(int((y - lo) / width), bins - 1) for y in outputs]


def _entropy_bits(counts: Counter) -> float:
    total = sum(counts.values())
    h = 0.0
    for c in counts.values():
        p = c / total
        h -= p * math.log2(p)
    return h


def point_regulation_score(traj: Trajectory, bins: int) -> float:
    """Plug-in Shannon entropy (bits) of the outputs histogrammed into
    equal-width bins over the observed range. 0 means the output is held
    constant; log2(bins) means it wanders uniformly."""
    if bins < 2:
        raise ValueError(f"need at least 2 bins, got {bins}")
    if len(traj) == 0:
        raise ValueError("cannot score an empty trajectory")
    symbols = _bin_outputs(traj.outputs(), bins)
    return _entropy_bits(Counter(symbols))


def path_regulation_score(traj: Trajectory, order: int, bins: int) -> float:
    """Block entropy rate (bits): H(blocks of order+1) - H(blocks of order)
    over the binned outputs.

    Blocks are taken circularly (each window wraps past the end), which
    makes every marginal of the joint block distribution equal the plain
    output histogram. The estimate is therefore an exact conditional
    entropy: it is never negative and never exceeds the point score.
    """
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    if bins < 2:
        raise ValueError(f"need at least 2 bins, got {bins}")
    if len(traj) <= order:
        raise ValueError(
            f"trajectory of {len(traj)} ticks is too short for order {order}"
        )
    symbols = _bin_outputs(traj.outputs(), bins)
    n = len(symbols)
    wrapped = symbols + symbols[:order]
    blocks_hi = Counter(tuple(wrapped[i : i + order + 1]) for i in range(n))
    blocks_lo = Counter(tuple(wrapped[i : i + order]) for i in range(n))
    return max(0.0, _entropy_bits(blocks_hi) - _entropy_bits(blocks_lo))


def trajectory_to_csv(traj: Trajectory) -> str:
    """Serialize with header ``tick,s_state,r_state,output,error,phi,rho``,
    UTF-8 text with LF line endings and 17-significant-digit floats."""
    buf = io.StringIO()
    buf.write("tick,s_state,r_state,output,error,phi,rho\n")
    for r in traj.records:
        buf.write(
            f"{r.tick},{r.s_state},{r.r_state},{r.output:.17g},{r.error:.17g},{r.phi},{r.rho}\n"
        )
    return buf.getvalue()


def toggle_benchmark(mode: str = LoopMode.CLOSED) -> ClosedLoopRelation:
    """Two-state benchmark: the system flips state every tick unless the
    regulator pins it, and the goal is output 0. Closed loop reaches the
    goal within two ticks; feedforward oscillates forever."""
    states = StateSet(("s0", "s1"))

    def transition(s: Symbol, u: Symbol, phi: Symbol) -> Symbol:
        if u == "correct":
            return "s0"
        return "s1" if s == "s0" else "s0"

    def emission(s: Symbol) -> float:
        return 0.0 if s == "s0" else 1.0

    system = DiscreteSystem(
        states=states,
        input_alphabet=("idle", "correct"),
        disturbance_alphabet=("kick",),
        transition=transition,
        emission=emission,
        idle_input="idle",
    )

    def policy(y: float, r: Symbol) -> tuple[Symbol, Symbol]:
        return ("r0" if y == 0.0 else "r1", "correct")

    regulator = Regulator(
        states=StateSet(("r0", "r1")),
        observations=frozenset({0.0, 1.0}),
        policy=policy,
    )
    return ClosedLoopRelation(
        system=system,
        regulator=regulator,
        goal=lambda y: y == 0.0,
        mode=mode,
        model=InternalModel(horizon=64),
        s_state="s1",
        r_state="r0",
    )
