"""Fastest-k gradient descent and L-BFGS over encoded partitions.

Protocol per iteration t (1-based):

1. Broadcast w_t; aggregate the k fastest gradient replies
       g_t = (1/(beta*eta)) * sum_{i in A_t} X_i^T (X_i w_t - y_i) + lam w_t,
   where eta = k/m. Under a tight frame with full participation this equals
   the exact gradient of the original problem.
2. L-BFGS only: form the curvature pair from nodes common to this round and
   the previous one (O = A_t with A_{t-1}),
       u = w_t - w_{t-1},   r = (m / (beta |O|)) * sum_{i in O} (g_i(w_t) - g_i(w_{t-1})),
   keep it only when r^T u > 0, and compute d = -B g_t by the two-loop
   recursion seeded with B0 = (r^T r / r^T u) I from the newest pair.
3. L-BFGS only: a second race over D_t supplies ||X_i d||^2 scalars for the
   exact line search
       alpha = -nu * (d^T g) / ((1/(beta*eta)) sum_{i in D} ||X_i d||^2 + lam ||d||^2),
   with back-off nu = (1 - eps)/(1 + eps) by default.
4. Step w_{t+1} = w_t + alpha d.

The replication scheme deviates only in aggregation: the master keeps the
earliest copy of each uncoded partition and rescales by (partition count /
partitions present), which reproduces the exact gradient whenever every
partition arrived.

Convergence envelopes: with kappa = (1+eps)/(1-eps) and a contraction factor
gamma (gamma1 = 1 - 4 mu zeta (1-zeta) / (M (1+eps)) for constant-step
gradient descent, gamma2 = 1 - 4 mu c1 c2 / (M (c1+c2)^2) for L-BFGS with
inverse-Hessian spectrum inside [c1, c2]), every sample path satisfies

    f_t <= (kappa*gamma)^t f_0 + kappa^2 (kappa - gamma) / (1 - kappa*gamma) f_star

whenever kappa*gamma < 1.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .encoding import EncodingMatrix, encode_problem
from .errors import (
    DegenerateDirection,
    EmptyOverlap,
    EmptyReplySet,
    NoGuarantee,
    NonFiniteInput,
    NotPositiveDefinite,
    RankDeficientSubset,
)
from .problem import QuadraticProblem, gradient, objective, solve_reference
from .straggler import replication_dedupe
from .numerics import sym_eig

logger = logging.getLogger(__name__)

CURVATURE_RTOL = 1e-14


# --- per-partition worker computations (shared with the network worker) ---


def partition_gradient(part, w: np.ndarray) -> np.ndarray:
    return part.X.T @ (part.X @ w - part.y)


def partition_ls_scalar(part, d: np.ndarray) -> float:
    z = part.X @ d
    return float(z @ z)


# --- aggregation ---


def aggregate_gradient(replies: dict, beta: float, eta: float, lam: float = 0.0, w=None) -> np.ndarray:
    """(1/(beta*eta)) sum of replies plus the master-side ridge term."""
    if not replies:
        raise EmptyReplySet("no gradient replies to aggregate")
    acc = None
    for node in sorted(replies):
        acc = replies[node].copy() if acc is None else acc + replies[node]
    g = acc / (beta * eta)
    if lam:
        g = g + lam * w
    return g


def aggregate_replication(replies: dict, arrival: dict, m: int, beta: int, lam: float = 0.0, w=None):
    """Deduplicated replication aggregate; returns (gradient, missing partitions)."""
    if not replies:
        raise EmptyReplySet("no gradient replies to aggregate")
    kept, missing = replication_dedupe(replies, arrival, m, beta)
    partitions = m // beta
    acc = None
    for pid in sorted(kept):
        acc = kept[pid].copy() if acc is None else acc + kept[pid]
    g = (partitions / len(kept)) * acc
    if lam:
        g = g + lam * w
    return g, missing


def gd_step(w: np.ndarray, g: np.ndarray, alpha: float) -> np.ndarray:
    if alpha <= 0:
        raise ValueError(f"step size must be positive, got {alpha}")
    return w - alpha * g


def overlap_pair(prev_replies: dict, cur_replies: dict, m: int, beta: float, w_cur, w_prev):
    """Curvature pair (u, r) from nodes present in two consecutive rounds.

    r = (m / (beta |O|)) sum_{i in O} (g_i(w_cur) - g_i(w_prev)) is the
    encoded Hessian acting on u restricted to the overlap Gram; for the
    identity scheme with full overlap it equals X^T X u exactly.
    """
    overlap = sorted(set(prev_replies) & set(cur_replies))
    if not overlap:
        raise EmptyOverlap("consecutive rounds share no nodes")
    if len(overlap) * beta <= m:
        logger.warning(
            "overlap of %d nodes is not above m/beta = %.3g; the overlap Gram may be singular",
            len(overlap),
            m / beta,
        )
    u = w_cur - w_prev
    acc = None
    for node in overlap:
        diff = cur_replies[node] - prev_replies[node]
        acc = diff if acc is None else acc + diff
    r = (m / (beta * len(overlap))) * acc
    return u, r


# --- L-BFGS memory and directions ---


class LbfgsMemory:
    """Ring buffer of curvature pairs; every stored pair has r^T u > 0."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("memory length must be >= 1")
        self.capacity = capacity
        self.pairs: list = []  # (u, r, rho), oldest first

    def __len__(self) -> int:
        return len(self.pairs)

    def push(self, u: np.ndarray, r: np.ndarray) -> bool:
        """Store the pair unless its curvature is nonpositive in float terms."""
        ru = float(r @ u)
        floor = CURVATURE_RTOL * float(np.linalg.norm(r)) * float(np.linalg.norm(u))
        if not np.isfinite(ru) or ru <= floor:
            return False
        self.pairs.append((u.copy(), r.copy(), 1.0 / ru))
        if len(self.pairs) > self.capacity:
            self.pairs.pop(0)
        return True


def lbfgs_direction(memory: LbfgsMemory, g: np.ndarray) -> np.ndarray:
    """d = -B g via the two-loop recursion; empty memory gives -g."""
    if not np.all(np.isfinite(g)):
        raise NonFiniteInput("gradient contains NaN or infinity")
    if len(memory) == 0:
        return -g
    q = g.copy()
    alphas = []
    for u, r, rho in reversed(memory.pairs):
        a = rho * float(u @ q)
        q -= a * r
        alphas.append(a)
    u_new, r_new, _ = memory.pairs[-1]
    scale = float(r_new @ r_new) / float(r_new @ u_new)
    h = scale * q
    for (u, r, rho), a in zip(memory.pairs, reversed(alphas)):
        b = rho * float(r @ h)
        h += (a - b) * u
    return -h


def materialize_hessian_estimate(memory: LbfgsMemory, p: int) -> np.ndarray:
    """Dense inverse-Hessian estimate from the rank-one update recursion.

    B starts at (r^T r / r^T u) I for the newest pair and absorbs each stored
    pair oldest-first through B <- V^T B V + rho u u^T with V = I - rho r u^T.
    Diagnostics only; cost is O(sigma p^2).
    """
    if len(memory) == 0:
        return np.eye(p)
    u_new, r_new, _ = memory.pairs[-1]
    b = (float(r_new @ r_new) / float(r_new @ u_new)) * np.eye(p)
    for u, r, rho in memory.pairs:
        v = np.eye(p) - rho * np.outer(r, u)
        b = v.T @ b @ v + rho * np.outer(u, u)
    return b


def initial_hessian_trace(memory: LbfgsMemory, p: int) -> float:
    if len(memory) == 0:
        return float(p)
    u_new, r_new, _ = memory.pairs[-1]
    return p * float(r_new @ r_new) / float(r_new @ u_new)


# --- exact line search ---


def exact_line_search(d, g, ls_replies: dict, beta: float, eta: float, nu: float, lam: float = 0.0) -> float:
    """alpha = -nu (d^T g) / ((1/(beta*eta)) sum_i ||X_i d||^2 + lam ||d||^2)."""
    if not ls_replies:
        raise EmptyReplySet("no line-search replies")
    d = np.asarray(d, dtype=np.float64)
    quad = sum(float(ls_replies[node]) for node in sorted(ls_replies)) / (beta * eta)
    denom = quad + lam * float(d @ d)
    scale = max(1.0, float(g @ g))
    if denom <= 1e-300 * scale:
        raise DegenerateDirection("line-search curvature vanished along d")
    return -nu * float(d @ g) / denom


# --- convergence envelopes ---


@dataclass(frozen=True)
class BoundParams:
    """Constants of the sample-path envelope (kappa*gamma)^t f0 + offset."""

    kappa: float
    gamma: float
    f0: float
    f_star: float
    c1: float | None = None
    c2: float | None = None

    @property
    def guarantee_active(self) -> bool:
        return math.isfinite(self.kappa) and self.kappa * self.gamma < 1.0

    def value(self, t: int) -> float:
        if not self.guarantee_active:
            raise NoGuarantee(f"kappa*gamma = {self.kappa * self.gamma:.6g} >= 1")
        kg = self.kappa * self.gamma
        offset = self.kappa**2 * (self.kappa - self.gamma) / (1.0 - kg) * self.f_star
        return kg**t * self.f0 + offset


def kappa_from_epsilon(epsilon: float) -> float:
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    if epsilon >= 1:
        return math.inf
    return (1.0 + epsilon) / (1.0 - epsilon)


def gd_envelope(epsilon: float, zeta: float, mu: float, M: float, f0: float, f_star: float) -> BoundParams:
    """Envelope constants for constant-step descent, alpha = 2 zeta / (M (1+eps))."""
    if not 0 < zeta <= 1:
        raise ValueError(f"zeta must lie in (0, 1], got {zeta}")
    gamma = 1.0 - 4.0 * mu * zeta * (1.0 - zeta) / (M * (1.0 + epsilon))
    return BoundParams(kappa=kappa_from_epsilon(epsilon), gamma=gamma, f0=f0, f_star=f_star)


def lbfgs_envelope(epsilon: float, c1: float, c2: float, mu: float, M: float, f0: float, f_star: float) -> BoundParams:
    """Envelope constants for L-BFGS with inverse-Hessian spectrum in [c1, c2]."""
    if c1 <= 0 or c2 < c1:
        raise ValueError(f"need 0 < c1 <= c2, got c1={c1}, c2={c2}")
    gamma = 1.0 - 4.0 * mu * c1 * c2 / (M * (c1 + c2) ** 2)
    return BoundParams(kappa=kappa_from_epsilon(epsilon), gamma=gamma, f0=f0, f_star=f_star, c1=c1, c2=c2)


# --- geometric diagnostics ---


@dataclass(frozen=True)
class SolutionBallCheck:
    f_subset_opt: float
    kappa_sq: float
    ratio: float
    ok: bool


def solution_ball_check(prob: QuadraticProblem, enc: EncodingMatrix, subset, m: int) -> SolutionBallCheck:
    """Objective at the subset optimum against the kappa^2 f_star ball.

    kappa is the condition number of the subset Gram S_A^T S_A; the optimum
    of ||X_A w - y_A||^2 must satisfy f(w_A) <= kappa^2 f(w_star) for the
    unregularized objective.
    """
    s = enc.materialize()
    block = enc.rows // m
    idx = np.concatenate([np.arange(i * block, (i + 1) * block) for i in sorted(set(subset))])
    sa = s[idx]
    eigs = sym_eig(sa.T @ sa)
    if eigs[0] <= 1e-12 * max(1.0, eigs[-1]):
        raise RankDeficientSubset(f"subset Gram is singular (lambda_min = {eigs[0]:.3e})")
    kappa_sq = float((eigs[-1] / eigs[0]) ** 2)
    xa = sa @ prob.X
    ya = sa @ prob.y
    w_sub = np.linalg.solve(xa.T @ xa, xa.T @ ya)
    resid = prob.X @ w_sub - prob.y
    f_sub = 0.5 * float(resid @ resid)
    ref = solve_reference(QuadraticProblem.from_data(prob.X, prob.y, lam=0.0))
    ratio = f_sub / ref.f_star
    return SolutionBallCheck(
        f_subset_opt=f_sub, kappa_sq=kappa_sq, ratio=ratio, ok=ratio <= kappa_sq * (1.0 + 1e-6)
    )


def rotation_ratio(m: np.ndarray, u: np.ndarray) -> float:
    return float(u @ m @ u) / float(np.linalg.norm(m @ u))


def rotation_floor(kappa: float) -> float:
    return 2.0 * math.sqrt(kappa) / (kappa + 1.0)


def rotation_bound_check(m, u) -> bool:
    """Check u^T M u / ||M u|| >= 2 sqrt(kappa) / (kappa + 1) for unit u, M > 0."""
    m = np.asarray(m, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    eigs = sym_eig(m)
    if eigs[0] <= 0:
        raise NotPositiveDefinite(f"lambda_min = {eigs[0]:.3e}")
    norm = np.linalg.norm(u)
    if abs(norm - 1.0) > 1e-9:
        raise ValueError("u must be a unit vector")
    kappa = float(eigs[-1] / eigs[0])
    return rotation_ratio(m, u) >= rotation_floor(kappa) - 1e-12


# --- run configuration, traces, and the shared driver ---


@dataclass
class SolverConfig:
    algorithm: str  # "gd" | "lbfgs"
    k: int
    max_iters: int
    epsilon: float = 0.0  # spectral deviation used for alpha and nu
    zeta: float = 0.5
    nu: float | None = None  # None derives (1 - eps) / (1 + eps)
    memory: int = 10
    track_hessian: bool = True

    def resolved_nu(self) -> float:
        if self.nu is not None:
            return self.nu
        derived = (1.0 - self.epsilon) / (1.0 + self.epsilon)
        if derived <= 0:
            raise ValueError(
                f"epsilon = {self.epsilon:g} gives back-off nu <= 0; pass an explicit nu override"
            )
        return derived

    def gd_alpha(self, M: float) -> float:
        if not 0 < self.zeta <= 1:
            raise ValueError(f"zeta must lie in (0, 1], got {self.zeta}")
        return 2.0 * self.zeta / (M * (1.0 + self.epsilon))


@dataclass
class IterationRecord:
    t: int
    f: float
    f_encoded: float
    grad_norm: float
    alpha: float
    overlap: int
    sim_ms: float
    bound: float | None = None
    subset_a: tuple = ()
    subset_d: tuple = ()


@dataclass
class HessianRecord:
    t: int
    lam_min: float
    lam_max: float
    trace: float
    trace_b0: float
    sigma_tilde: int
    max_r2_over_ru: float


CSV_HEADER = "iter,t_sim_ms,f,f_encoded,grad_norm,alpha,overlap,bound"


@dataclass
class RunTrace:
    records: list
    summary: dict
    events: list = field(default_factory=list)
    hessian: list = field(default_factory=list)

    @property
    def objectives(self) -> np.ndarray:
        return np.array([rec.f for rec in self.records])

    @property
    def bound_violations(self) -> int:
        count = 0
        for rec in self.records:
            if rec.bound is not None and rec.f > rec.bound * (1.0 + 1e-12):
                count += 1
        return count

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(CSV_HEADER + "\n")
            for rec in self.records:
                bound = "" if rec.bound is None else repr(rec.bound)
                fh.write(
                    f"{rec.t},{rec.sim_ms!r},{rec.f!r},{rec.f_encoded!r},"
                    f"{rec.grad_norm!r},{rec.alpha!r},{rec.overlap},{bound}\n"
                )

    @classmethod
    def from_csv(cls, path) -> "RunTrace":
        records = []
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip()
            if header != CSV_HEADER:
                raise ValueError(f"unexpected trace header {header!r}")
            for line in fh:
                t, sim_ms, f, f_enc, gnorm, alpha, overlap, bound = line.rstrip("\n").split(",")
                records.append(
                    IterationRecord(
                        t=int(t),
                        f=float(f),
                        f_encoded=float(f_enc),
                        grad_norm=float(gnorm),
                        alpha=float(alpha),
                        overlap=int(overlap),
                        sim_ms=float(sim_ms),
                        bound=None if bound == "" else float(bound),
                    )
                )
        return cls(records=records, summary={})


@dataclass(frozen=True)
class RoundResult:
    """One completed race: the quorum, its replies, and arrival keys."""

    subset: tuple
    replies: dict
    arrival: dict
    elapsed_ms: float


class SimulatedPool:
    """In-process worker pool driven by a subset oracle."""

    def __init__(self, partitions: list, oracle, k: int):
        self.partitions = partitions
        self.oracle = oracle
        self.k = k
        self.m = len(partitions)
        self._cache: dict = {}

    def _subsets(self, t: int):
        if t not in self._cache:
            self._cache[t] = self.oracle(t)
        return self._cache[t]

    def gradient_round(self, t: int, w: np.ndarray) -> RoundResult:
        sub = self._subsets(t)
        replies = {i: partition_gradient(self.partitions[i], w) for i in sub.a}
        arrival = {i: float(sub.delays_a[i]) for i in sub.a}
        return RoundResult(subset=sub.a, replies=replies, arrival=arrival, elapsed_ms=sub.gradient_ms)

    def line_search_round(self, t: int, d: np.ndarray) -> RoundResult:
        sub = self._subsets(t)
        replies = {i: partition_ls_scalar(self.partitions[i], d) for i in sub.d}
        arrival = {i: float(sub.delays_d[i]) for i in sub.d}
        return RoundResult(subset=sub.d, replies=replies, arrival=arrival, elapsed_ms=sub.linesearch_ms)

    def close(self) -> None:
        pass


def run_solver(prob: QuadraticProblem, enc: EncodingMatrix, pool, cfg: SolverConfig) -> RunTrace:
    """Shared driver; the pool decides whether workers are local or remote."""
    m = pool.m
    if not 1 <= cfg.k <= m:
        raise ValueError(f"need 1 <= k <= m, got k={cfg.k}, m={m}")
    beta = enc.beta
    eta = cfg.k / m
    lam = prob.lam
    lbfgs = cfg.algorithm == "lbfgs"
    if cfg.algorithm not in ("gd", "lbfgs"):
        raise ValueError(f"unknown algorithm {cfg.algorithm!r}")
    replication = enc.scheme == "replication"
    beta_int = int(round(beta)) if replication else 0

    xt = enc.apply(prob.X)
    yt = enc.apply(prob.y)

    def encoded_objective(w):
        r = xt @ w - yt
        return 0.5 / beta * float(r @ r) + 0.5 * lam * float(w @ w)

    nu = cfg.resolved_nu() if lbfgs else None
    alpha_gd = cfg.gd_alpha(prob.M) if not lbfgs else None

    w = np.zeros(prob.p)
    records = [
        IterationRecord(
            t=0,
            f=objective(prob, w),
            f_encoded=encoded_objective(w),
            grad_norm=float(np.linalg.norm(gradient(prob, w))),
            alpha=0.0,
            overlap=0,
            sim_ms=0.0,
        )
    ]
    memory = LbfgsMemory(cfg.memory)
    events: list = []
    hessian_records: list = []
    prev_subset = None
    prev_replies = None
    w_prev = None
    sim_ms = 0.0
    stored_pairs = 0
    skipped_pairs = 0
    missing_total = 0

    for t in range(1, cfg.max_iters + 1):
        res = pool.gradient_round(t, w)
        if replication:
            g, missing = aggregate_replication(res.replies, res.arrival, m, beta_int, lam, w)
            if missing:
                missing_total += len(missing)
                events.append(f"t={t}: partitions {missing} missing from gradient round")
        else:
            g = aggregate_gradient(res.replies, beta, eta, lam, w)

        overlap_size = 0
        if lbfgs:
            if prev_subset is not None:
                overlap = sorted(set(res.subset) & set(prev_subset))
                overlap_size = len(overlap)
                if overlap and float(np.linalg.norm(w - w_prev)) > 0.0:
                    u, r = overlap_pair(prev_replies, res.replies, m, beta, w, w_prev)
                    if memory.push(u, r):
                        stored_pairs += 1
                    else:
                        skipped_pairs += 1
                        events.append(f"t={t}: curvature pair rejected (r^T u <= 0)")
            d = lbfgs_direction(memory, g)
            if cfg.track_hessian:
                hessian_records.append(_hessian_snapshot(memory, prob.p, t))
            ls = pool.line_search_round(t, d)
            if replication:
                kept, ls_missing = replication_dedupe(ls.replies, ls.arrival, m, beta_int)
                partitions = m // beta_int
                quad = sum(float(kept[pid]) for pid in sorted(kept)) * (partitions / len(kept))
                denom = quad + lam * float(d @ d)
                if denom <= 0:
                    raise DegenerateDirection("line-search curvature vanished along d")
                alpha = -nu * float(d @ g) / denom
            else:
                alpha = exact_line_search(d, g, ls.replies, beta, eta, nu, lam)
            subset_d = ls.subset
            sim_ms += res.elapsed_ms + ls.elapsed_ms
        else:
            d = -g
            alpha = alpha_gd
            subset_d = ()
            sim_ms += res.elapsed_ms

        w_new = w + alpha * d
        records.append(
            IterationRecord(
                t=t,
                f=objective(prob, w_new),
                f_encoded=encoded_objective(w_new),
                grad_norm=float(np.linalg.norm(gradient(prob, w_new))),
                alpha=float(alpha),
                overlap=overlap_size,
                sim_ms=sim_ms,
                subset_a=res.subset,
                subset_d=subset_d,
            )
        )
        prev_subset, prev_replies, w_prev = res.subset, res.replies, w
        w = w_new

    trace = RunTrace(records=records, summary={}, events=events, hessian=hessian_records)
    trace.summary["stored_pairs"] = stored_pairs
    trace.summary["skipped_pairs"] = skipped_pairs
    trace.summary["missing_partition_rounds"] = missing_total
    _finalize(trace, prob, enc, cfg)
    return trace


def _hessian_snapshot(memory: LbfgsMemory, p: int, t: int) -> HessianRecord:
    b = materialize_hessian_estimate(memory, p)
    eigs = sym_eig((b + b.T) / 2)
    max_ratio = 0.0
    for u, r, rho in memory.pairs:
        max_ratio = max(max_ratio, float(r @ r) * rho)
    return HessianRecord(
        t=t,
        lam_min=float(eigs[0]),
        lam_max=float(eigs[-1]),
        trace=float(np.trace(b)),
        trace_b0=initial_hessian_trace(memory, p),
        sigma_tilde=len(memory),
        max_r2_over_ru=max_ratio,
    )


def _finalize(trace: RunTrace, prob: QuadraticProblem, enc: EncodingMatrix, cfg: SolverConfig) -> None:
    ref = solve_reference(prob)
    summary = trace.summary
    summary.update(
        algorithm=cfg.algorithm,
        scheme=enc.scheme,
        beta=enc.beta,
        k=cfg.k,
        epsilon=cfg.epsilon,
        lam=prob.lam,
        f_star=ref.f_star,
        f_final=trace.records[-1].f,
    )
    summary["kappa"] = kappa_from_epsilon(cfg.epsilon)
    if cfg.algorithm == "lbfgs":
        summary["nu"] = cfg.resolved_nu()
        if trace.hessian:
            summary["c1"] = min(rec.lam_min for rec in trace.hessian)
            summary["c2"] = max(rec.lam_max for rec in trace.hessian)
    else:
        summary["zeta"] = cfg.zeta
        summary["alpha"] = cfg.gd_alpha(prob.M)

    params = None
    if prob.lam == 0.0:
        if cfg.algorithm == "gd":
            params = gd_envelope(cfg.epsilon, cfg.zeta, prob.mu, prob.M, trace.records[0].f, ref.f_star)
        elif "c1" in summary and summary["c1"] > 0:
            params = lbfgs_envelope(
                cfg.epsilon, summary["c1"], summary["c2"], prob.mu, prob.M, trace.records[0].f, ref.f_star
            )
    if params is not None:
        summary["gamma"] = params.gamma
        summary["kappa_gamma"] = params.kappa * params.gamma
        summary["guarantee_active"] = params.guarantee_active
        if params.guarantee_active:
            for rec in trace.records:
                rec.bound = params.value(rec.t)
            summary["bound_violations"] = trace.bound_violations
    else:
        summary["guarantee_active"] = False
        if prob.lam != 0.0:
            summary["guarantee_note"] = "ridge term active; envelopes are stated for lam = 0"


def run_gd(prob: QuadraticProblem, enc: EncodingMatrix, subset_oracle, cfg: SolverConfig) -> RunTrace:
    """Simulated constant-step descent over encoded partitions."""
    parts = encode_problem(enc, prob.X, prob.y, m=_oracle_m(subset_oracle, cfg))
    pool = SimulatedPool(parts, subset_oracle, cfg.k)
    return run_solver(prob, enc, pool, cfg)


def run_lbfgs(prob: QuadraticProblem, enc: EncodingMatrix, subset_oracle, cfg: SolverConfig) -> RunTrace:
    """Simulated L-BFGS with overlap curvature pairs and exact line search."""
    parts = encode_problem(enc, prob.X, prob.y, m=_oracle_m(subset_oracle, cfg))
    pool = SimulatedPool(parts, subset_oracle, cfg.k)
    return run_solver(prob, enc, pool, cfg)


def _oracle_m(subset_oracle, cfg: SolverConfig) -> int:
    probe = subset_oracle(1)
    return len(probe.delays_a)
