"""Executable scheduling policies: stay/switch decisions per slot.

Frame-based dynamic control picks the frontier corner maximizing
Q1*r1 + Q2*r2 at each frame start and plays that corner's deterministic
action table for the whole frame.  The k-lookahead myopic policy compares
queue-weighted expected service credit over the next k slots.  Gated and
exhaustive are the classic polling disciplines used for the iid-channel
results.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import channels as ch
from .mdp import STAY, SWITCH, mirror_policy, state_index
from .region import fbdc_corner_map

# Corner action tables (states in the fixed order 1..8).  b2 serves the own
# channel when ON at queue 1 and leaves queue 2 only on (C1,C2)=(1,0); b1
# additionally gives up state (1,1,1) to chase queue 2.  b0 parks at
# queue 2 unconditionally; decisions at the transient queue-1 states are
# pinned to switch.  b3, b4, b5 are the queue-relabeled mirrors.
_B0 = (SWITCH, SWITCH, SWITCH, SWITCH, STAY, STAY, STAY, STAY)
_B1 = (SWITCH, STAY, SWITCH, SWITCH, STAY, SWITCH, STAY, STAY)
_B2 = (STAY, STAY, SWITCH, SWITCH, STAY, SWITCH, STAY, STAY)

CORNER_TABLES: dict[str, tuple[int, ...]] = {
    "b0": _B0,
    "b1": _B1,
    "b2": _B2,
    "b3": mirror_policy(_B2),
    "b4": mirror_policy(_B1),
    "b5": mirror_policy(_B0),
}

POLICY_KINDS = ("fbdc", "myopic", "gated", "exhaustive", "fixed_corner", "fixed_table")


@dataclass(frozen=True)
class PolicyConfig:
    """Which policy drives the server and its parameters.

    ``T`` is the frame length of fbdc and frame-based myopic; ``k`` the
    myopic lookahead depth; ``frame_based=False`` makes myopic use the
    current queue lengths every slot instead of the frame-start ones.
    """

    kind: str
    T: int = 1
    k: int = 1
    frame_based: bool = True
    corner: str | None = None
    table: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if self.T < 1:
            raise ValueError("frame length T must be >= 1")
        if self.k < 1:
            raise ValueError("lookahead k must be >= 1")
        if self.kind == "fixed_corner":
            if self.corner not in CORNER_TABLES:
                raise ValueError(f"unknown corner {self.corner!r}")
        if self.kind == "fixed_table":
            if self.table is None or len(self.table) != 8 or any(a not in (0, 1) for a in self.table):
                raise ValueError("fixed_table requires an 8-entry stay/switch table")

    def label(self) -> str:
        if self.kind == "fbdc":
            return f"fbdc_T{self.T}"
        if self.kind == "myopic":
            frame = f"T{self.T}" if self.frame_based else "slot"
            return f"myopic{self.k}_{frame}"
        if self.kind == "fixed_corner":
            return f"corner_{self.corner}"
        if self.kind == "fixed_table":
            return f"table_{''.join(str(a) for a in self.table)}"
        return self.kind


@dataclass
class Observation:
    """What a policy sees at the start of a slot."""

    m: int
    c1: int
    c2: int
    q1: int
    q2: int
    q1_frame: int = 0
    q2_frame: int = 0
    slot_in_frame: int = 0
    gate: int = 0


def fbdc_frame_start(epsilon: float, q1_frame: int, q2_frame: int) -> tuple[int, ...]:
    """Corner table to play for the coming frame given frame-start queues.

    Both queues empty leaves the weighted objective identically zero; the
    balanced corner b3 is applied in that case.
    """
    if q1_frame == 0 and q2_frame == 0:
        return CORNER_TABLES["b3"]
    return CORNER_TABLES[fbdc_corner_map(epsilon, q1_frame, q2_frame)]


def fbdc_decide(policy_table: tuple[int, ...], obs: Observation) -> int:
    """Action of the frame's fixed table at the observed (m, C1, C2)."""
    return policy_table[state_index(obs.m, obs.c1, obs.c2)]


def myopic_weights(
    config: PolicyConfig, obs: Observation, model: ch.ChannelModel
) -> tuple[float, float]:
    """(W_here, W_there): weighted expected departures over the next k slots.

    The current queue counts its live channel plus k predicted slots; the
    other queue counts predictions only, reflecting the slot lost to
    switching.
    """
    if model.kind != ch.GILBERT_ELLIOTT:
        raise ValueError("myopic policy is defined for the gilbert_elliott model")
    q1, q2 = (obs.q1_frame, obs.q2_frame) if config.frame_based else (obs.q1, obs.q2)
    s1 = ch.lookahead_sum(model, obs.c1, config.k)
    s2 = ch.lookahead_sum(model, obs.c2, config.k)
    if obs.m == 1:
        return q1 * (obs.c1 + s1), q2 * s2
    return q2 * (obs.c2 + s2), q1 * s1


def myopic_decide(config: PolicyConfig, obs: Observation, model: ch.ChannelModel) -> int:
    """Stay iff the current queue's weight is at least the other queue's."""
    w_here, w_there = myopic_weights(config, obs, model)
    return STAY if w_here >= w_there else SWITCH


def myopic_policy_table(model: ch.ChannelModel, k: int, q1: float, q2: float) -> tuple[int, ...]:
    """Myopic decisions at all 8 states for fixed weights (q1, q2)."""
    config = PolicyConfig("myopic", k=k, frame_based=True)
    table = []
    for m in (1, 2):
        for c1 in (1, 0):
            for c2 in (1, 0):
                obs = Observation(m, c1, c2, 0, 0, q1_frame=q1, q2_frame=q2)
                table.append(myopic_decide(config, obs, model))
    return tuple(table)


def gated_decide(obs: Observation) -> int:
    """Serve out the gate set on arrival at the queue, then move on.

    The gate only counts packets present when the server landed; it
    decrements on successful departures (the simulator owns the counter),
    so the server waits through OFF slots until the gate clears.
    """
    return STAY if obs.gate > 0 else SWITCH


def exhaustive_decide(obs: Observation) -> int:
    """Stay until the current queue is empty."""
    q_here = obs.q1 if obs.m == 1 else obs.q2
    return STAY if q_here > 0 else SWITCH
