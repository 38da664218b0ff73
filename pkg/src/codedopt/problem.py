"""Least-squares / ridge problem definition and reference solutions.

Objectives drop the 1/(2n) data-size prefactor: F(w) = 0.5*||Xw - y||^2 +
0.5*lam*||w||^2 and grad F = X^T (Xw - y) + lam*w. All spectral constants
(mu, M) and every convergence envelope downstream use this same convention,
so the algebra stays consistent end to end.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadShape, DimensionMismatch, IndivisibleRows, SingularSystem
from .numerics import read_cmx, read_sidecar, sym_eig, write_cmx, write_sidecar


@dataclass
class QuadraticProblem:
    """Data matrix X (n x p), target y (n,), ridge weight lam >= 0.

    mu and M cache the extreme eigenvalues of X^T X (not including lam).
    """

    X: np.ndarray
    y: np.ndarray
    lam: float = 0.0
    mu: float = field(default=0.0)
    M: float = field(default=0.0)
    seed: int | None = None

    @classmethod
    def from_data(cls, X, y, lam: float = 0.0, seed=None) -> "QuadraticProblem":
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.ascontiguousarray(y, dtype=np.float64).ravel()
        if X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise DimensionMismatch(f"X {X.shape} does not match y {y.shape}")
        if lam < 0:
            raise ValueError("ridge weight must be nonnegative")
        spectrum = sym_eig(X.T @ X)
        return cls(X=X, y=y, lam=float(lam), mu=float(spectrum[0]), M=float(spectrum[-1]), seed=seed)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def save(self, directory, stem: str = "problem") -> None:
        import os

        write_cmx(os.path.join(directory, f"{stem}_X.cmx"), self.X)
        write_cmx(os.path.join(directory, f"{stem}_y.cmx"), self.y)
        write_sidecar(
            os.path.join(directory, f"{stem}.meta"),
            {"lambda": repr(self.lam), "seed": self.seed if self.seed is not None else 0},
        )

    @classmethod
    def load(cls, directory, stem: str = "problem") -> "QuadraticProblem":
        import os

        X = read_cmx(os.path.join(directory, f"{stem}_X.cmx"))
        y = read_cmx(os.path.join(directory, f"{stem}_y.cmx")).ravel()
        meta = read_sidecar(os.path.join(directory, f"{stem}.meta"))
        return cls.from_data(X, y, lam=float(meta.get("lambda", 0.0)), seed=int(meta.get("seed", 0)))


@dataclass(frozen=True)
class ReferenceSolution:
    w_star: np.ndarray
    f_star: float


def gen_synthetic(n: int, p: int, seed, lam: float = 0.0) -> QuadraticProblem:
    """Synthetic instance: X entries N(0, 1), y entries N(0, p).

    Requires n > p so that X^T X is generically positive definite.
    """
    if not n > p >= 1:
        raise BadShape(f"need n > p >= 1, got n={n}, p={p}")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    y = np.sqrt(p) * rng.standard_normal(n)
    return QuadraticProblem.from_data(X, y, lam=lam, seed=seed)


def _check_w(prob: QuadraticProblem, w) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64).ravel()
    if w.shape[0] != prob.p:
        raise DimensionMismatch(f"w has length {w.shape[0]}, expected {prob.p}")
    return w


def objective(prob: QuadraticProblem, w) -> float:
    w = _check_w(prob, w)
    r = prob.X @ w - prob.y
    return 0.5 * float(r @ r) + 0.5 * prob.lam * float(w @ w)


def gradient(prob: QuadraticProblem, w) -> np.ndarray:
    w = _check_w(prob, w)
    return prob.X.T @ (prob.X @ w - prob.y) + prob.lam * w


def solve_reference(prob: QuadraticProblem) -> ReferenceSolution:
    """Exact minimizer via symmetric eigendecomposition of X^T X + lam I."""
    w_eigs, q = sym_eig(prob.X.T @ prob.X, vectors=True)
    shifted = w_eigs + prob.lam
    if shifted[0] <= 1e-12 * max(1.0, shifted[-1]):
        raise SingularSystem("X^T X + lam I is numerically singular")
    rhs = prob.X.T @ prob.y
    w_star = q @ ((q.T @ rhs) / shifted)
    grad_norm = float(np.linalg.norm(gradient(prob, w_star)))
    if grad_norm > 1e-8 * (1.0 + float(np.linalg.norm(rhs))):
        raise SingularSystem(f"reference solve residual too large: {grad_norm:.3e}")
    return ReferenceSolution(w_star=w_star, f_star=objective(prob, w_star))


def partition_rows(count: int, m: int) -> list[range]:
    """m contiguous equal index ranges covering [0, count)."""
    if m < 1:
        raise IndivisibleRows(f"partition count must be >= 1, got {m}")
    if count % m != 0:
        raise IndivisibleRows(f"{count} rows do not split into {m} equal partitions")
    size = count // m
    return [range(i * size, (i + 1) * size) for i in range(m)]
