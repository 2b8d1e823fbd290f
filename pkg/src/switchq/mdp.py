"""Exact analysis of the saturated two-queue system.

The saturated system (both queues always backlogged) is a Markov decision
process on 8 states s = (m, C1, C2) with two actions per state: stay (1) or
switch (0).  States are enumerated in the fixed order

    (1,1,1)=1  (1,1,0)=2  (1,0,1)=3  (1,0,0)=4
    (2,1,1)=5  (2,1,0)=6  (2,0,1)=7  (2,0,0)=8

and a departure reward accrues for queue 1 in states 1, 2 under stay, and
for queue 2 in states 5, 7 under stay.  Every stationary deterministic
policy is a vertex of the state-action frequency polytope, so the rate
region is the convex hull of the 256 policy rate pairs; the weighted LP is
solved exactly by enumerating them.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

STAY = 1
SWITCH = 0

N_STATES = 8

# Fixed state enumeration: index i (0-based) holds state i+1.
STATES: tuple[tuple[int, int, int], ...] = (
    (1, 1, 1), (1, 1, 0), (1, 0, 1), (1, 0, 0),
    (2, 1, 1), (2, 1, 0), (2, 0, 1), (2, 0, 0),
)

# Reward-bearing states (0-based): queue 1 departs in states 0,1; queue 2 in 4,6.
REWARD1_STATES = (0, 1)
REWARD2_STATES = (4, 6)


def state_index(m: int, c1: int, c2: int) -> int:
    """0-based index of state (m, c1, c2) in the fixed enumeration."""
    return 4 * (m - 1) + 2 * (1 - c1) + (1 - c2)


# Queue-relabeling involution: swap server position and channel roles.
MIRROR: tuple[int, ...] = tuple(state_index(3 - m, c2, c1) for (m, c1, c2) in STATES)


def mirror_policy(policy: tuple[int, ...]) -> tuple[int, ...]:
    """The same policy with the two queues relabeled."""
    return tuple(policy[MIRROR[i]] for i in range(N_STATES))


def policy_id(policy: tuple[int, ...]) -> int:
    """Bit pattern of a policy, state 1 most significant, stay = 1."""
    pid = 0
    for a in policy:
        pid = (pid << 1) | a
    return pid


def policy_from_id(pid: int) -> tuple[int, ...]:
    if not 0 <= pid < 256:
        raise ValueError(f"policy id must be in 0..255, got {pid}")
    return tuple((pid >> (7 - i)) & 1 for i in range(N_STATES))


def all_policies() -> list[tuple[int, ...]]:
    """All 256 stationary deterministic policies, ordered by bit pattern."""
    return [policy_from_id(pid) for pid in range(256)]


def build_kernel(epsilon: float) -> np.ndarray:
    """Transition probabilities P(j | s, a) as an (8, 2, 8) array.

    The channels flip independently with probability epsilon; the server
    position follows the action deterministically (stay keeps m, switch
    flips it and consumes the slot).
    """
    if not (0.0 < epsilon <= 0.5):
        raise ValueError(f"epsilon must lie in (0, 0.5], got {epsilon}")
    q = np.array([[1.0 - epsilon, epsilon], [epsilon, 1.0 - epsilon]])  # q[c, c'] with rows ON, OFF
    kernel = np.zeros((N_STATES, 2, N_STATES))
    for i, (m, c1, c2) in enumerate(STATES):
        for a in (SWITCH, STAY):
            m_next = m if a == STAY else 3 - m
            for c1n in (1, 0):
                for c2n in (1, 0):
                    j = state_index(m_next, c1n, c2n)
                    kernel[i, a, j] = q[1 - c1, 1 - c1n] * q[1 - c2, 1 - c2n]
    return kernel


def policy_matrix(kernel: np.ndarray, policy: tuple[int, ...]) -> np.ndarray:
    """Chain transition matrix induced by a deterministic policy."""
    return np.array([kernel[s, policy[s]] for s in range(N_STATES)])


def _communicating_classes(P: np.ndarray) -> list[list[int]]:
    support = P > 0.0
    reach = support | np.eye(N_STATES, dtype=bool)
    for _ in range(3):  # 2^3 >= 8 path-doubling steps
        reach = reach | (reach @ reach)
    comm = reach & reach.T
    classes, seen = [], set()
    for s in range(N_STATES):
        if s in seen:
            continue
        cls = [j for j in range(N_STATES) if comm[s, j]]
        seen.update(cls)
        classes.append(cls)
    return classes


def recurrent_class(P: np.ndarray) -> list[int]:
    """Recurrent class of the chain, lowest-index class if several are closed.

    Every policy except stay-everywhere is unichain here; stay-everywhere
    has two closed classes and resolves to the queue-1 block (the class
    containing state 1), matching a queue-1 server start.
    """
    closed = []
    for cls in _communicating_classes(P):
        outside = [j for j in range(N_STATES) if j not in cls]
        if not outside or not P[np.ix_(cls, outside)].any():
            closed.append(cls)
    return min(closed, key=min)


def stationary_distribution(kernel: np.ndarray, policy: tuple[int, ...]) -> np.ndarray:
    """The stationary law pi of the policy-induced chain, transient states at 0."""
    P = policy_matrix(kernel, policy)
    rec = recurrent_class(P)
    Pr = P[np.ix_(rec, rec)]
    n = len(rec)
    A = Pr.T - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    pr = np.linalg.solve(A, b)
    pi = np.zeros(N_STATES)
    pi[rec] = pr
    residual = np.max(np.abs(pi @ P - pi))
    if residual > 1e-12 or pi.min() < -1e-13:
        raise ArithmeticError(f"stationary solve failed, residual {residual:.3e}")
    return np.maximum(pi, 0.0)


def policy_rates(pi: np.ndarray, policy: tuple[int, ...]) -> tuple[float, float]:
    """Expected departures per slot (r1, r2) under the stationary law."""
    r1 = sum(pi[s] for s in REWARD1_STATES if policy[s] == STAY)
    r2 = sum(pi[s] for s in REWARD2_STATES if policy[s] == STAY)
    return float(r1), float(r2)


def saf_from_policy(pi: np.ndarray, policy: tuple[int, ...]) -> np.ndarray:
    """State-action frequencies x(s; a) as an (8, 2) array, x(s;a) = pi(s) 1{policy(s)=a}."""
    x = np.zeros((N_STATES, 2))
    for s in range(N_STATES):
        x[s, policy[s]] = pi[s]
    return x


def balance_residual(x: np.ndarray, kernel: np.ndarray) -> float:
    """Max violation of the flow-balance equations by a state-action frequency vector."""
    marginal = x.sum(axis=1)
    inflow = np.einsum("sa,saj->j", x, kernel)
    return float(np.max(np.abs(marginal - inflow)))


@dataclass(frozen=True)
class PolicyVertex:
    """One deterministic policy with its stationary rates and frequencies."""

    policy: tuple[int, ...]
    rates: tuple[float, float]
    saf: np.ndarray


@lru_cache(maxsize=32)
def _enumerate_cached(epsilon: float) -> tuple[PolicyVertex, ...]:
    kernel = build_kernel(epsilon)
    out = []
    for policy in all_policies():
        pi = stationary_distribution(kernel, policy)
        out.append(PolicyVertex(policy, policy_rates(pi, policy), saf_from_policy(pi, policy)))
    return tuple(out)


def enumerate_vertices(epsilon: float) -> list[PolicyVertex]:
    """All 256 deterministic policies with exact stationary rates, by policy id."""
    return list(_enumerate_cached(float(epsilon)))


def solve_weighted_lp(epsilon: float, alpha1: float, alpha2: float) -> tuple[tuple[float, float], tuple[int, ...]]:
    """Maximize alpha1*r1 + alpha2*r2 over the rate polytope.

    The optimum is attained at a deterministic policy, so the LP reduces to
    an argmax over the 256 enumerated vertices.  Ties within 1e-12 resolve
    to the numerically largest policy bit pattern (prefers staying).
    """
    if alpha1 < 0 or alpha2 < 0 or (alpha1 == 0 and alpha2 == 0):
        raise ValueError("weights must be nonnegative and not both zero")
    tol = 1e-12 * max(1.0, alpha1 + alpha2)
    vertices = enumerate_vertices(epsilon)
    values = [alpha1 * v.rates[0] + alpha2 * v.rates[1] for v in vertices]
    vmax = max(values)
    best = max(
        (v for v, value in zip(vertices, values) if value >= vmax - tol),
        key=lambda v: policy_id(v.policy),
    )
    return best.rates, best.policy


def rate_asymptotic_std(kernel: np.ndarray, policy: tuple[int, ...], horizon: int) -> tuple[float, float]:
    """Standard error of the horizon-slot empirical rates under the policy.

    The per-slot reward is a function of the chain state, so the asymptotic
    variance follows from the fundamental matrix Z = (I - P + 1 pi)^{-1} of
    the chain restricted to its recurrent class:
    sigma^2 = pi.f~^2 + 2 pi.(f~ * (Z - I) f~) with f~ = f - pi.f.
    """
    P = policy_matrix(kernel, policy)
    rec = recurrent_class(P)
    Pr = P[np.ix_(rec, rec)]
    pi = stationary_distribution(kernel, policy)[rec]
    n = len(rec)
    Z = np.linalg.inv(np.eye(n) - Pr + np.outer(np.ones(n), pi))
    out = []
    for reward_states in (REWARD1_STATES, REWARD2_STATES):
        f = np.array([1.0 if (s in reward_states and policy[s] == STAY) else 0.0 for s in rec])
        ft = f - pi @ f
        var = float(pi @ (ft * ft) + 2.0 * pi @ (ft * ((Z - np.eye(n)) @ ft)))
        out.append(np.sqrt(max(var, 0.0) / horizon))
    return out[0], out[1]
