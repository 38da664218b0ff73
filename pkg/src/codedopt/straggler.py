"""Delay models and per-round node subsets.

A round has two races: the gradient race decides A_t, the line-search race
decides D_t, each waiting for the fastest k of m workers. Stochastic models
derive every delay from (seed, node, round), so a simulator and a remote
worker compute identical values independently. Round indices are global and
odd/even: iteration t uses round 2t-1 for gradients and 2t for line search.

Model specification strings (also used by the worker CLI):

    exp:10            exponential, mean 10 ms
    sexp:2+8          shift 2 ms plus exponential with mean 8 ms
    det:5,1,3,2       fixed per-node delays, constant across rounds
    detrot:5,1,3,2    fixed list rotated by round: node i gets list[(i+t) % m]
    adv:round_robin   adversarial subset sequence (no physical delays)

Adversarial kinds: fixed_prefix, fixed_suffix, round_robin, min_overlap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadK, DelayModelError

ADVERSARIAL_KINDS = ("fixed_prefix", "fixed_suffix", "round_robin", "min_overlap")


@dataclass(frozen=True)
class DelayModel:
    kind: str  # exponential | shifted_exponential | deterministic | deterministic_rotating | adversarial
    mean_ms: float = 0.0
    shift_ms: float = 0.0
    values: tuple = ()
    adversary: str = ""

    def spec(self) -> str:
        if self.kind == "exponential":
            return f"exp:{self.mean_ms:g}"
        if self.kind == "shifted_exponential":
            return f"sexp:{self.shift_ms:g}+{self.mean_ms:g}"
        if self.kind == "deterministic":
            return "det:" + ",".join(f"{v:g}" for v in self.values)
        if self.kind == "deterministic_rotating":
            return "detrot:" + ",".join(f"{v:g}" for v in self.values)
        return f"adv:{self.adversary}"


def parse_delay_model(text: str) -> DelayModel:
    head, _, rest = text.strip().partition(":")
    try:
        if head == "exp":
            mean = float(rest)
            if mean <= 0:
                raise DelayModelError(f"exponential mean must be positive: {text!r}")
            return DelayModel(kind="exponential", mean_ms=mean)
        if head == "sexp":
            shift_s, _, mean_s = rest.partition("+")
            shift, mean = float(shift_s), float(mean_s)
            if mean <= 0 or shift < 0:
                raise DelayModelError(f"bad shifted-exponential parameters: {text!r}")
            return DelayModel(kind="shifted_exponential", shift_ms=shift, mean_ms=mean)
        if head in ("det", "detrot"):
            values = tuple(float(v) for v in rest.split(","))
            if not values or any(v < 0 for v in values):
                raise DelayModelError(f"deterministic delays must be nonnegative: {text!r}")
            kind = "deterministic" if head == "det" else "deterministic_rotating"
            return DelayModel(kind=kind, values=values)
        if head == "adv":
            if rest not in ADVERSARIAL_KINDS:
                raise DelayModelError(f"unknown adversary {rest!r}")
            return DelayModel(kind="adversarial", adversary=rest)
    except ValueError as exc:
        raise DelayModelError(f"unparseable delay model {text!r}") from exc
    raise DelayModelError(f"unknown delay model kind {head!r}")


def node_delay(model: DelayModel, node: int, round_idx: int, seed, m: int) -> float:
    """Delay in ms for one node in one round; any party can recompute it."""
    if model.kind == "deterministic":
        return float(model.values[node % len(model.values)])
    if model.kind == "deterministic_rotating":
        return float(model.values[(node + round_idx) % len(model.values)])
    if model.kind == "adversarial":
        kind = model.adversary
        raise DelayModelError(f"adversarial model {kind!r} defines subsets, not delays")
    rng = np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=(round_idx, node)))
    draw = rng.exponential(model.mean_ms)
    if model.kind == "shifted_exponential":
        return float(model.shift_ms + draw)
    return float(draw)


def sample_delays(model: DelayModel, m: int, round_idx: int, seed) -> np.ndarray:
    """Per-node delays for one round, nonnegative, deterministic in (seed, round)."""
    if m < 1:
        raise BadK(f"need m >= 1, got {m}")
    return np.array([node_delay(model, i, round_idx, seed, m) for i in range(m)])


def fastest_k(delays, k: int) -> tuple:
    """Indices of the k smallest delays, ties broken toward lower index."""
    delays = np.asarray(delays, dtype=np.float64)
    m = delays.shape[0]
    if not 1 <= k <= m:
        raise BadK(f"need 1 <= k <= m, got k={k}, m={m}")
    order = np.lexsort((np.arange(m), delays))
    return tuple(sorted(int(i) for i in order[:k]))


@dataclass(frozen=True)
class RoundSubsets:
    """Both subsets for one iteration plus the simulated race times."""

    a: tuple
    d: tuple
    delays_a: np.ndarray
    delays_d: np.ndarray
    gradient_ms: float
    linesearch_ms: float


def adversarial_subsets(kind: str, m: int, k: int, t: int) -> RoundSubsets:
    """Deterministic worst-case subset sequences; A_t = D_t by construction.

    min_overlap alternates two sets whose intersection has the pigeonhole
    minimum size max(2k - m, 0).
    """
    if kind not in ADVERSARIAL_KINDS:
        raise DelayModelError(f"unknown adversary {kind!r}")
    if not 1 <= k <= m:
        raise BadK(f"need 1 <= k <= m, got k={k}, m={m}")
    if kind == "fixed_prefix":
        subset = tuple(range(k))
    elif kind == "fixed_suffix":
        subset = tuple(range(m - k, m))
    elif kind == "round_robin":
        subset = tuple(sorted((t + j) % m for j in range(k)))
    else:  # min_overlap
        subset = tuple(range(k)) if t % 2 == 0 else tuple(range(m - k, m))
    delays = np.where(np.isin(np.arange(m), subset), 1.0, 10.0)
    return RoundSubsets(
        a=subset, d=subset, delays_a=delays, delays_d=delays, gradient_ms=1.0, linesearch_ms=1.0
    )


def subset_oracle(model: DelayModel, m: int, k: int, seed, compute_ms: float = 0.0):
    """Callable t -> RoundSubsets for 1-based iteration t.

    For stochastic and deterministic models, A_t comes from the round-(2t-1)
    race and D_t from an independent round-(2t) race. The simulated time of a
    race is its k-th order statistic plus a fixed compute cost.
    """
    if not 1 <= k <= m:
        raise BadK(f"need 1 <= k <= m, got k={k}, m={m}")

    if model.kind == "adversarial":
        def oracle(t: int) -> RoundSubsets:
            sub = adversarial_subsets(model.adversary, m, k, t)
            return RoundSubsets(
                a=sub.a,
                d=sub.d,
                delays_a=sub.delays_a,
                delays_d=sub.delays_d,
                gradient_ms=sub.gradient_ms + compute_ms,
                linesearch_ms=sub.linesearch_ms + compute_ms,
            )

        return oracle

    def oracle(t: int) -> RoundSubsets:
        delays_a = sample_delays(model, m, 2 * t - 1, seed)
        delays_d = sample_delays(model, m, 2 * t, seed)
        a = fastest_k(delays_a, k)
        d = fastest_k(delays_d, k)
        return RoundSubsets(
            a=a,
            d=d,
            delays_a=delays_a,
            delays_d=delays_d,
            gradient_ms=float(np.sort(delays_a)[k - 1]) + compute_ms,
            linesearch_ms=float(np.sort(delays_d)[k - 1]) + compute_ms,
        )

    return oracle


def replication_dedupe(replies: dict, arrival: dict, m: int, beta: int):
    """Keep the earliest copy of each uncoded partition; report missing ones.

    ``replies`` maps node id to its reply; ``arrival`` maps node id to its
    arrival key (delay or arrival order). Node i holds partition i mod
    (m/beta). Ties go to the lower node id.
    """
    partitions = m // beta
    chosen: dict = {}
    for node in sorted(replies):
        pid = node % partitions
        key = (arrival.get(node, 0.0), node)
        if pid not in chosen or key < chosen[pid][0]:
            chosen[pid] = (key, node)
    kept = {pid: replies[node] for pid, (_, node) in chosen.items()}
    missing = [pid for pid in range(partitions) if pid not in kept]
    return kept, missing
