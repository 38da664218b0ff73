"""Redundant row encodings S with (beta*n) rows acting on n data rows.

Schemes
-------
identity          S = I, beta = 1 (the uncoded baseline).
replication       beta stacked copies of I; each worker holds one copy of an
                  uncoded partition and the master keeps the faster copy.
gaussian          i.i.d. N(0, 1/n) entries so that E[S^T S] = beta * I.
fwht_subsampled   rows of a Walsh-Hadamard matrix restricted to n randomly
                  placed columns (zero rows inserted into the data, then a
                  fast transform); an exact tight frame with an O(N log N)
                  apply path.
paley_etf         equiangular tight frame of 2n = p + 1 unit rows in R^n
                  built from a symmetric conference matrix, beta = 2.
steiner_etf       equiangular tight frame of v^2 unit rows in R^{v(v-1)/2}
                  built from the pair-incidence design of {1..v} and Hadamard
                  columns, beta = 2v/(v-1), with a block fast path.

Tight frames satisfy S^T S = beta * I, which keeps the encoded least-squares
objective a scalar multiple of the original, so the encoded optimum coincides
with the true one. The subset diagnostics here quantify how far that geometry
degrades when only a subset A of the m workers contributes: the normalized
subset Gram (1/(beta*eta)) S_A^T S_A should stay close to the identity.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadBeta,
    DimensionMismatch,
    DivisibilityError,
    EmptySubset,
    IndexOutOfRange,
    IndivisibleRows,
    NonPowerOfTwo,
    NotPrime,
    TooSmall,
    WrongResidueClass,
)
from .numerics import (
    fwht,
    is_power_of_two,
    read_cmx,
    read_sidecar,
    sym_eig,
    sylvester_hadamard,
    write_cmx,
    write_sidecar,
)

TIGHT_FRAME_TOL = 1e-9


# --- fast-apply descriptors ---


@dataclass(frozen=True)
class HadamardSubsample:
    """Selection + sign flips feeding a length-N Walsh-Hadamard transform.

    ``row_perm`` optionally scatters the encoded rows so that contiguous
    worker blocks are not aligned with the transform's tensor structure;
    without it every block boundary coincides with a Kronecker factor and
    small block subsets become exactly rank-deficient.
    """

    order: int
    positions: np.ndarray  # n sorted distinct ints in [0, order)
    signs: np.ndarray  # n entries of +-1.0
    scale: float
    row_perm: np.ndarray | None = None

    def apply(self, b: np.ndarray) -> np.ndarray:
        z = np.zeros((self.order,) + b.shape[1:])
        if b.ndim == 1:
            z[self.positions] = b * self.signs
        else:
            z[self.positions] = b * self.signs[:, None]
        out = fwht(z)
        if self.row_perm is not None:
            out = out[self.row_perm]
        return self.scale * out

    def materialize(self) -> np.ndarray:
        h = sylvester_hadamard(self.order)
        s = h[:, self.positions] * self.signs
        if self.row_perm is not None:
            s = s[self.row_perm]
        return self.scale * s


@dataclass(frozen=True)
class SteinerBlocks:
    """Per-block data-row indices; block i applies a size-v fast transform."""

    v: int
    block_cols: tuple  # v arrays of v-1 sorted 0-based column indices
    scale: float

    def apply(self, b: np.ndarray) -> np.ndarray:
        v = self.v
        out = np.empty((v * v,) + b.shape[1:])
        for i, cols in enumerate(self.block_cols):
            z = np.zeros((v,) + b.shape[1:])
            z[1:] = b[cols]
            out[i * v : (i + 1) * v] = fwht(z)
        out *= self.scale
        return out

    def materialize(self) -> np.ndarray:
        n = self.v * (self.v - 1) // 2
        return self.apply(np.eye(n))


@dataclass(frozen=True)
class StackedCopies:
    copies: int

    def apply(self, b: np.ndarray) -> np.ndarray:
        return np.concatenate([b] * self.copies, axis=0)

    def materialize(self) -> np.ndarray:
        raise NotImplementedError  # dense form is set at construction


# --- the encoding matrix ---


@dataclass
class EncodingMatrix:
    """An encoding S of shape (rows x n) with rows = round(beta * n).

    The realized redundancy is the exact rational rows/n; schemes that pad
    (fwht_subsampled) report the realized value, not the requested one.
    """

    scheme: str
    n: int
    rows: int
    seed: int | None = None
    dense: np.ndarray | None = None
    fast: object | None = None
    meta: dict = field(default_factory=dict)

    @property
    def beta(self) -> float:
        return self.rows / self.n

    def materialize(self) -> np.ndarray:
        if self.dense is None:
            self.dense = self.fast.materialize()
        return self.dense

    def apply(self, b) -> np.ndarray:
        """S @ b for an n-row vector or matrix, via the fast path if present."""
        b = np.ascontiguousarray(b, dtype=np.float64)
        if b.shape[0] != self.n:
            raise DimensionMismatch(f"operand has {b.shape[0]} rows, encoding expects {self.n}")
        if self.fast is not None:
            return self.fast.apply(b)
        return self.materialize() @ b

    def save(self, path) -> None:
        write_cmx(path, self.materialize())
        write_sidecar(
            str(path) + ".meta",
            {
                "scheme": self.scheme,
                "n": self.n,
                "beta_num": self.rows,
                "beta_den": self.n,
                "seed": self.seed if self.seed is not None else 0,
            },
        )

    @classmethod
    def load(cls, path) -> "EncodingMatrix":
        dense = read_cmx(path)
        meta = read_sidecar(str(path) + ".meta")
        enc = cls(
            scheme=meta["scheme"],
            n=int(meta["beta_den"]),
            rows=int(meta["beta_num"]),
            seed=int(meta.get("seed", 0)),
            dense=dense,
        )
        if dense.shape != (enc.rows, enc.n):
            raise DimensionMismatch(f"dense shape {dense.shape} disagrees with sidecar")
        return enc


@dataclass(frozen=True)
class EncodedPartition:
    """One worker's slice of the encoded data."""

    node_id: int
    X: np.ndarray
    y: np.ndarray


# --- constructions ---


def build_identity(n: int) -> EncodingMatrix:
    return EncodingMatrix(scheme="identity", n=n, rows=n, dense=np.eye(n))


def build_replication(n: int, beta: int, m: int) -> EncodingMatrix:
    """beta vertically stacked identities, rows unscaled so S^T S = beta I.

    With m workers of equal row count, worker i holds a copy of uncoded
    partition i mod (m/beta), so any reply set covering all partitions can
    reconstruct the exact gradient after deduplication.
    """
    if beta != int(beta) or beta < 1:
        raise BadBeta(f"replication needs a positive integer beta, got {beta}")
    beta = int(beta)
    if m % beta != 0:
        raise DivisibilityError(f"m={m} must be divisible by beta={beta}")
    if n % (m // beta) != 0:
        raise DivisibilityError(f"n={n} must be divisible by m/beta={m // beta}")
    dense = np.vstack([np.eye(n)] * beta)
    return EncodingMatrix(
        scheme="replication", n=n, rows=beta * n, dense=dense, fast=StackedCopies(beta), meta={"m": m}
    )


def build_gaussian(n: int, beta: float, seed) -> EncodingMatrix:
    if beta < 1:
        raise BadBeta(f"beta must be >= 1, got {beta}")
    rows = int(round(beta * n))
    rng = np.random.default_rng(seed)
    dense = rng.standard_normal((rows, n)) / math.sqrt(n)
    return EncodingMatrix(scheme="gaussian", n=n, rows=rows, seed=seed, dense=dense)


def build_fwht_subsampled(
    n: int, beta: float, seed, sign_flip: bool = True, shuffle_rows: bool = True
) -> EncodingMatrix:
    """Randomized Hadamard tight frame: pad to N = next power of two >= beta*n.

    The realized redundancy N/n is stored; rows are exactly unit norm and
    S^T S = (N/n) I holds by column orthogonality of the transform. A seeded
    row permutation (on by default) decouples worker block boundaries from
    the transform's Kronecker structure; with it off, contiguous block
    subsets of moderate size are exactly singular.
    """
    if beta < 1:
        raise BadBeta(f"beta must be >= 1, got {beta}")
    target = int(math.ceil(beta * n - 1e-9))
    order = 1
    while order < target:
        order *= 2
    rng = np.random.default_rng(seed)
    positions = np.sort(rng.choice(order, size=n, replace=False))
    signs = rng.choice(np.array([-1.0, 1.0]), size=n) if sign_flip else np.ones(n)
    row_perm = rng.permutation(order) if shuffle_rows else None
    realized_beta = order / n
    fast = HadamardSubsample(
        order=order,
        positions=positions,
        signs=signs,
        scale=math.sqrt(realized_beta / order),
        row_perm=row_perm,
    )
    return EncodingMatrix(
        scheme="fwht_subsampled",
        n=n,
        rows=order,
        seed=seed,
        fast=fast,
        meta={"sign_flip": sign_flip, "shuffle_rows": shuffle_rows},
    )


def build_hadamard(v: int) -> np.ndarray:
    """Sylvester Hadamard matrix of power-of-two order v; H H^T = v I exactly."""
    if not is_power_of_two(v):
        raise NonPowerOfTwo(f"Hadamard order must be a power of two, got {v}")
    return sylvester_hadamard(v)


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    for d in range(2, int(math.isqrt(p)) + 1):
        if p % d == 0:
            return False
    return True


def build_paley_conference(p: int) -> np.ndarray:
    """Symmetric conference matrix C of order p+1 with C @ C = p I.

    Built from the quadratic-residue character on GF(p) with an all-ones
    border; symmetry needs -1 to be a residue, hence p = 1 (mod 4).
    """
    if not _is_prime(p):
        raise NotPrime(f"{p} is not prime")
    if p % 4 != 1:
        raise WrongResidueClass(f"need p = 1 (mod 4), got {p} = {p % 4} (mod 4)")
    chi = np.zeros(p)
    chi[[(i * i) % p for i in range(1, p)]] = 1.0
    chi[chi == 0] = -1.0
    chi[0] = 0.0
    c = np.zeros((p + 1, p + 1))
    c[0, 1:] = 1.0
    c[1:, 0] = 1.0
    diffs = (np.arange(p)[:, None] - np.arange(p)[None, :]) % p
    c[1:, 1:] = chi[diffs]
    return c


def build_paley_etf(p: int) -> EncodingMatrix:
    """Unit-norm equiangular tight frame of p+1 rows in R^{(p+1)/2}, beta = 2.

    The row Gram is I + C/sqrt(p) for the conference matrix C, so all
    off-diagonal correlations have magnitude 1/sqrt(p) = 1/sqrt(2n - 1),
    meeting the coherence lower bound with equality.
    """
    c = build_paley_conference(p)
    n = (p + 1) // 2
    gram = np.eye(p + 1) + c / math.sqrt(p)
    _, q = sym_eig(gram, vectors=True)
    # Eigenvalues are 0 and 2, each with multiplicity n; keep the top space.
    s = math.sqrt(2.0) * q[:, -n:]
    return EncodingMatrix(scheme="paley_etf", n=n, rows=p + 1, dense=np.ascontiguousarray(s), meta={"p": p})


@dataclass(frozen=True)
class SteinerConstruction:
    """Pair-incidence design behind the Steiner ETF of order v."""

    v: int
    hadamard: np.ndarray
    incidence: np.ndarray  # v x v(v-1)/2 zero-one matrix
    column_pairs: tuple  # lexicographic 2-element subsets of {1..v}


def construct_steiner(v: int) -> SteinerConstruction:
    if not is_power_of_two(v):
        raise NonPowerOfTwo(f"v must be a power of two, got {v}")
    if v < 4:
        raise TooSmall(f"v must be at least 4, got {v}")
    pairs = tuple(itertools.combinations(range(1, v + 1), 2))
    incidence = np.zeros((v, len(pairs)))
    for col, (a, b) in enumerate(pairs):
        incidence[a - 1, col] = 1.0
        incidence[b - 1, col] = 1.0
    return SteinerConstruction(v=v, hadamard=build_hadamard(v), incidence=incidence, column_pairs=pairs)


def steiner_block_columns(i: int, v: int) -> tuple:
    """1-based sorted column indices where incidence row i is nonzero."""
    cons = construct_steiner(v)
    if not 1 <= i <= v:
        raise IndexOutOfRange(f"block index {i} outside 1..{v}")
    return tuple(int(c) + 1 for c in np.flatnonzero(cons.incidence[i - 1]))


def build_steiner_etf(v: int) -> EncodingMatrix:
    """Equiangular tight frame of v^2 unit rows in R^{v(v-1)/2}.

    Block row i replaces the v-1 ones of incidence row i (ascending column
    order) with Hadamard columns h_2..h_v and scales by 1/sqrt(v-1). The
    redundancy is 2v/(v-1) and the coherence is exactly 1/(v-1).
    """
    cons = construct_steiner(v)
    block_cols = tuple(np.flatnonzero(cons.incidence[i]) for i in range(v))
    fast = SteinerBlocks(v=v, block_cols=block_cols, scale=1.0 / math.sqrt(v - 1))
    n = v * (v - 1) // 2
    return EncodingMatrix(scheme="steiner_etf", n=n, rows=v * v, fast=fast, meta={"v": v})


def build_encoding(
    scheme: str,
    n: int,
    beta: float = 2.0,
    seed=0,
    sign_flip: bool = True,
    prime: int | None = None,
    steiner_v: int | None = None,
    m: int | None = None,
) -> EncodingMatrix:
    """Dispatch on the scheme tag; validates that n matches fixed-geometry schemes."""
    if scheme == "identity":
        return build_identity(n)
    if scheme == "replication":
        if m is None:
            raise DivisibilityError("replication needs the worker count m")
        return build_replication(n, int(beta), m)
    if scheme == "gaussian":
        return build_gaussian(n, beta, seed)
    if scheme == "fwht_subsampled":
        return build_fwht_subsampled(n, beta, seed, sign_flip=sign_flip)
    if scheme == "paley_etf":
        if prime is None:
            raise ValueError("paley_etf needs the prime parameter")
        enc = build_paley_etf(prime)
        if enc.n != n:
            raise DimensionMismatch(f"paley_etf with prime {prime} encodes n={enc.n}, config says {n}")
        return enc
    if scheme == "steiner_etf":
        if steiner_v is None:
            raise ValueError("steiner_etf needs the steiner_v parameter")
        enc = build_steiner_etf(steiner_v)
        if enc.n != n:
            raise DimensionMismatch(f"steiner_etf with v={steiner_v} encodes n={enc.n}, config says {n}")
        return enc
    raise ValueError(f"unknown scheme {scheme!r}")


# --- diagnostics ---


@dataclass(frozen=True)
class FrameDiagnostics:
    coherence: float
    welch_bound: float
    is_tight: bool
    tight_residual: float
    redundancy: float


def frame_diagnostics(enc: EncodingMatrix) -> FrameDiagnostics:
    """Coherence of the unit-normalized rows against the frame lower bound.

    The lower bound for N unit vectors in R^n is sqrt((N - n)/(n (N - 1)));
    equality holds exactly for equiangular tight frames.
    """
    s = enc.materialize()
    rows, n = s.shape
    norms = np.linalg.norm(s, axis=1)
    unit = s / norms[:, None]
    gram = unit @ unit.T
    if rows > 1:
        off = np.abs(gram - np.diag(np.diag(gram)))
        coherence = float(off.max())
    else:
        coherence = 0.0
    welch = math.sqrt((rows - n) / (n * (rows - 1))) if rows > 1 else 0.0
    residual = float(np.abs(s.T @ s - enc.beta * np.eye(n)).max())
    return FrameDiagnostics(
        coherence=coherence,
        welch_bound=welch,
        is_tight=residual <= TIGHT_FRAME_TOL,
        tight_residual=residual,
        redundancy=enc.beta,
    )


def _subset_rows(enc: EncodingMatrix, subset, m: int) -> np.ndarray:
    if enc.rows % m != 0:
        raise IndivisibleRows(f"{enc.rows} encoded rows do not split across {m} nodes")
    subset = sorted(set(int(i) for i in subset))
    if not subset:
        raise EmptySubset("node subset is empty")
    if subset[0] < 0 or subset[-1] >= m:
        raise IndexOutOfRange(f"subset {subset} outside 0..{m - 1}")
    block = enc.rows // m
    idx = np.concatenate([np.arange(i * block, (i + 1) * block) for i in subset])
    return enc.materialize()[idx]


def subset_gram_spectrum(enc: EncodingMatrix, subset, m: int, normalization: str = "per_eta") -> np.ndarray:
    """Ascending eigenvalues of S_A^T S_A for node subset A.

    ``per_eta`` divides by beta * |A|/m so that a full tight frame gives all
    ones; ``raw`` returns the unnormalized spectrum.
    """
    if normalization not in ("raw", "per_eta"):
        raise ValueError(f"unknown normalization {normalization!r}")
    sa = _subset_rows(enc, subset, m)
    gram = sa.T @ sa
    eigs = sym_eig(gram)
    if normalization == "per_eta":
        eta = len(set(int(i) for i in subset)) / m
        eigs = eigs / (enc.beta * eta)
    return eigs


def overlap_gram_spectrum(enc: EncodingMatrix, a_prev, a_cur, m: int) -> np.ndarray:
    """per-eta normalized spectrum of the Gram over A_prev intersect A_cur."""
    overlap = sorted(set(a_prev) & set(a_cur))
    return subset_gram_spectrum(enc, overlap, m, normalization="per_eta")


@dataclass(frozen=True)
class SpectralEstimate:
    epsilon_hat: float
    per_trial: tuple  # (label, lambda_min, lambda_max) per sampled subset
    histogram: tuple  # (counts, bin_edges) pooled over all trials
    eta: float
    subset_size: int


def estimate_epsilon(enc: EncodingMatrix, m: int, k: int, trials: int, seed) -> SpectralEstimate:
    """Empirical spectral deviation of normalized k-subset Grams.

    Samples ``trials`` uniform k-subsets plus the two adversarial contiguous
    subsets (first k and last k nodes) and reports
    max over subsets of max(lambda_max - 1, 1 - lambda_min).
    """
    if not 1 <= k <= m:
        raise EmptySubset(f"need 1 <= k <= m, got k={k}, m={m}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    subsets = [(f"trial{t}", tuple(np.sort(rng.choice(m, size=k, replace=False)))) for t in range(trials)]
    subsets.append(("prefix", tuple(range(k))))
    subsets.append(("suffix", tuple(range(m - k, m))))
    per_trial = []
    pooled = []
    eps = 0.0
    for label, subset in subsets:
        eigs = subset_gram_spectrum(enc, subset, m, normalization="per_eta")
        lo, hi = float(eigs[0]), float(eigs[-1])
        per_trial.append((label, lo, hi))
        pooled.append(eigs)
        eps = max(eps, hi - 1.0, 1.0 - lo)
    counts, edges = np.histogram(np.concatenate(pooled), bins=64)
    return SpectralEstimate(
        epsilon_hat=float(eps),
        per_trial=tuple(per_trial),
        histogram=(counts, edges),
        eta=k / m,
        subset_size=k,
    )


def encode_problem(enc: EncodingMatrix, X, y, m: int) -> list:
    """Encode (X, y) and split the encoded rows into m equal partitions."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64).ravel()
    if X.shape[0] != enc.n or y.shape[0] != enc.n:
        raise DimensionMismatch(f"data has {X.shape[0]} rows, encoding expects {enc.n}")
    if enc.rows % m != 0:
        raise IndivisibleRows(f"{enc.rows} encoded rows do not split across {m} nodes")
    stacked = enc.apply(np.hstack([X, y[:, None]]))
    block = enc.rows // m
    parts = []
    for i in range(m):
        rows = stacked[i * block : (i + 1) * block]
        parts.append(
            EncodedPartition(
                node_id=i,
                X=np.ascontiguousarray(rows[:, :-1]),
                y=np.ascontiguousarray(rows[:, -1]),
            )
        )
    return parts
