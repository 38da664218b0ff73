import itertools
import math

import numpy as np
import pytest

from codedopt.encoding import (
    EncodingMatrix,
    build_encoding,
    build_fwht_subsampled,
    build_gaussian,
    build_hadamard,
    build_identity,
    build_paley_conference,
    build_paley_etf,
    build_replication,
    build_steiner_etf,
    construct_steiner,
    encode_problem,
    estimate_epsilon,
    frame_diagnostics,
    steiner_block_columns,
    subset_gram_spectrum,
)
from codedopt.errors import (
    BadBeta,
    DimensionMismatch,
    DivisibilityError,
    EmptySubset,
    IndexOutOfRange,
    NonPowerOfTwo,
    NotPrime,
    TooSmall,
    WrongResidueClass,
)


def max_tight_residual(enc):
    s = enc.materialize()
    return np.abs(s.T @ s - enc.beta * np.eye(enc.n)).max()


# --- Hadamard ---


def test_hadamard_base_case():
    assert np.array_equal(build_hadamard(2), np.array([[1.0, 1.0], [1.0, -1.0]]))


def test_hadamard_orthogonality_identity():
    h = build_hadamard(4)
    assert np.array_equal(h @ h.T, 4 * np.eye(4))


def test_hadamard_rows_pairwise_orthogonal():
    h = build_hadamard(8)
    for i in range(8):
        for j in range(i + 1, 8):
            assert h[i] @ h[j] == 0


def test_hadamard_rejects_non_power_of_two():
    with pytest.raises(NonPowerOfTwo):
        build_hadamard(6)


# --- Paley conference matrices and ETF ---


@pytest.mark.parametrize("p", [5, 13, 17])
def test_conference_defining_identity(p):
    c = build_paley_conference(p)
    assert c.shape == (p + 1, p + 1)
    assert np.array_equal(c, c.T)
    assert np.array_equal(np.diag(c), np.zeros(p + 1))
    assert np.array_equal(c @ c, p * np.eye(p + 1))
    off = c[~np.eye(p + 1, dtype=bool)]
    assert set(np.unique(off)) == {-1.0, 1.0}


def test_conference_rejects_wrong_residue():
    with pytest.raises(WrongResidueClass):
        build_paley_conference(7)


def test_conference_rejects_composite():
    with pytest.raises(NotPrime):
        build_paley_conference(9)


@pytest.mark.parametrize("p", [5, 13, 17])
def test_paley_etf_tight_frame(p):
    enc = build_paley_etf(p)
    n = (p + 1) // 2
    assert enc.materialize().shape == (p + 1, n)
    assert enc.beta == 2.0
    assert max_tight_residual(enc) <= 1e-9


@pytest.mark.parametrize("p", [5, 13])
def test_paley_etf_coherence(p):
    # Row Gram is I + C/sqrt(p): every off-diagonal magnitude is 1/sqrt(p).
    enc = build_paley_etf(p)
    s = enc.materialize()
    gram = s @ s.T
    off = np.abs(gram[~np.eye(p + 1, dtype=bool)])
    assert np.allclose(off, 1.0 / math.sqrt(p), atol=1e-9)
    assert np.allclose(np.linalg.norm(s, axis=1), 1.0, atol=1e-9)


# --- Steiner ETF ---


def test_steiner_incidence_matches_printed_design():
    cons = construct_steiner(4)
    expected = np.array(
        [
            [1, 1, 1, 0, 0, 0],
            [1, 0, 0, 1, 1, 0],
            [0, 1, 0, 1, 0, 1],
            [0, 0, 1, 0, 1, 1],
        ],
        dtype=float,
    )
    assert np.array_equal(cons.incidence, expected)
    assert all(row.sum() == 3 for row in cons.incidence)


def test_steiner_v4_matches_explicit_block_assembly():
    # Independent assembly: each incidence one becomes a Hadamard column,
    # h_2..h_4 in ascending column order within each block row, scaled 1/sqrt(3).
    h = build_hadamard(4)
    blocks = np.zeros((16, 6))
    incidence_rows = [(0, 1, 2), (0, 3, 4), (1, 3, 5), (2, 4, 5)]
    for i, cols in enumerate(incidence_rows):
        for which, col in enumerate(cols):
            blocks[i * 4 : (i + 1) * 4, col] = h[:, which + 1]
    expected = blocks / math.sqrt(3)
    enc = build_steiner_etf(4)
    assert np.allclose(enc.materialize(), expected, atol=1e-12)


def test_steiner_v4_redundancy():
    enc = build_steiner_etf(4)
    assert enc.rows == 16 and enc.n == 6
    assert abs(enc.beta - 8.0 / 3.0) < 1e-15


@pytest.mark.parametrize("v", [4, 8])
def test_steiner_unit_rows_and_coherence(v):
    enc = build_steiner_etf(v)
    s = enc.materialize()
    assert np.allclose(np.linalg.norm(s, axis=1), 1.0, atol=1e-9)
    gram = s @ s.T
    off = np.abs(gram[~np.eye(v * v, dtype=bool)])
    assert abs(off.max() - 1.0 / (v - 1)) <= 1e-9
    assert max_tight_residual(enc) <= 1e-9


def test_steiner_rejects_bad_order():
    with pytest.raises(NonPowerOfTwo):
        build_steiner_etf(6)
    with pytest.raises(TooSmall):
        build_steiner_etf(2)


def test_steiner_block_columns_printed_examples():
    assert steiner_block_columns(1, 4) == (1, 2, 3)
    assert steiner_block_columns(2, 4) == (1, 4, 5)


def test_steiner_block_columns_against_incidence_scan():
    # Oracle: recompute the incidence matrix from scratch with itertools.
    v = 8
    pairs = list(itertools.combinations(range(1, v + 1), 2))
    for i in range(1, v + 1):
        expected = tuple(c + 1 for c, pair in enumerate(pairs) if i in pair)
        assert steiner_block_columns(i, v) == expected
        assert len(expected) == v - 1


def test_steiner_block_columns_range_check():
    with pytest.raises(IndexOutOfRange):
        steiner_block_columns(0, 4)
    with pytest.raises(IndexOutOfRange):
        steiner_block_columns(5, 4)


# --- subsampled Hadamard ---


def test_fwht_subsampled_tight():
    enc = build_fwht_subsampled(4, 2.0, seed=0)
    assert enc.materialize().shape == (8, 4)
    assert max_tight_residual(enc) <= 1e-9


def test_fwht_subsampled_fast_equals_dense():
    enc = build_fwht_subsampled(12, 2.0, seed=3)
    rng = np.random.default_rng(0)
    x = rng.standard_normal(12)
    dense = enc.materialize() @ x
    assert np.allclose(enc.apply(x), dense, atol=1e-10)
    xm = rng.standard_normal((12, 5))
    assert np.allclose(enc.apply(xm), enc.materialize() @ xm, atol=1e-10)


def test_fwht_subsampled_degenerate():
    enc = build_fwht_subsampled(1, 1.0, seed=1)
    s = enc.materialize()
    assert s.shape == (1, 1)
    assert abs(abs(s[0, 0]) - 1.0) < 1e-15


def test_fwht_subsampled_pads_and_reports_realized_beta():
    enc = build_fwht_subsampled(6, 2.0, seed=0)
    assert enc.rows == 16  # next power of two above 12
    assert enc.beta == 16 / 6
    assert max_tight_residual(enc) <= 1e-9


def test_fwht_subsampled_rejects_beta_below_one():
    with pytest.raises(BadBeta):
        build_fwht_subsampled(8, 0.5, seed=0)


# --- Gaussian ---


def test_gaussian_deterministic():
    a = build_gaussian(16, 2.0, seed=5).materialize()
    b = build_gaussian(16, 2.0, seed=5).materialize()
    assert np.array_equal(a, b)


def test_gaussian_operator_norm_near_mp_edge():
    # With variance 1/n entries, eigenvalues of S^T S / beta follow the
    # Marchenko-Pastur law with ratio 1/beta: support (1 +- sqrt(1/beta))^2.
    # The worst deviation from 1 is the upper edge, (1 + sqrt(1/2))^2 - 1
    # which is about 1.914 for beta = 2; finite-n fluctuation is a few percent.
    enc = build_gaussian(200, 2.0, seed=2)
    s = enc.materialize()
    dev = np.abs(np.linalg.eigvalsh(s.T @ s / enc.beta) - 1.0).max()
    edge = (1 + math.sqrt(1 / 2)) ** 2 - 1
    assert dev <= edge + 0.2
    assert dev >= edge - 0.4


def test_gaussian_single_column():
    enc = build_gaussian(1, 3.0, seed=7)
    s = enc.materialize()
    assert s.shape == (3, 1)
    val = float((s.T @ s)[0, 0])
    assert 0.05 <= val <= 15.0  # chi-square with 3 dof, generous quantiles


# --- replication and identity ---


def test_replication_stacked_identities():
    enc = build_replication(4, 2, m=4)
    assert np.array_equal(enc.materialize(), np.vstack([np.eye(4), np.eye(4)]))
    assert np.array_equal(enc.materialize().T @ enc.materialize(), 2 * np.eye(4))


def test_replication_copy_layout():
    # m=4, beta=2: nodes 0 and 2 hold the same uncoded partition.
    enc = build_replication(4, 2, m=4)
    rng = np.random.default_rng(0)
    X = rng.standard_normal((4, 3))
    y = rng.standard_normal(4)
    parts = encode_problem(enc, X, y, m=4)
    assert np.array_equal(parts[0].X, parts[2].X)
    assert np.array_equal(parts[1].y, parts[3].y)
    assert np.array_equal(parts[0].X, X[:2])


def test_replication_covering_subset_recovers_gradient():
    enc = build_replication(4, 2, m=4)
    rng = np.random.default_rng(1)
    X = rng.standard_normal((4, 2))
    y = rng.standard_normal(4)
    w = rng.standard_normal(2)
    parts = encode_problem(enc, X, y, m=4)
    total = sum(parts[i].X.T @ (parts[i].X @ w - parts[i].y) for i in (0, 3))
    assert np.allclose(total, X.T @ (X @ w - y), atol=1e-12)


def test_replication_divisibility_checks():
    with pytest.raises(DivisibilityError):
        build_replication(4, 3, m=4)
    with pytest.raises(DivisibilityError):
        build_replication(5, 2, m=4)


def test_identity_scheme():
    enc = build_identity(5)
    assert np.array_equal(enc.materialize(), np.eye(5))
    diag = frame_diagnostics(enc)
    assert diag.coherence == 0.0
    assert diag.is_tight


# --- frame diagnostics ---


def test_welch_equality_for_paley():
    diag = frame_diagnostics(build_paley_etf(13))
    assert abs(diag.coherence - diag.welch_bound) <= 1e-9
    assert abs(diag.welch_bound - 1.0 / math.sqrt(13)) <= 1e-12


def test_welch_equality_for_steiner_v4():
    diag = frame_diagnostics(build_steiner_etf(4))
    assert abs(diag.welch_bound - math.sqrt((16 - 6) / (6 * 15))) <= 1e-15
    assert abs(diag.welch_bound - 1.0 / 3.0) <= 1e-12
    assert abs(diag.coherence - diag.welch_bound) <= 1e-9


def test_welch_strict_inequality_for_subsampled_hadamard():
    diag = frame_diagnostics(build_fwht_subsampled(32, 2.0, seed=11))
    assert diag.is_tight
    assert diag.coherence > diag.welch_bound + 1e-6


@pytest.mark.parametrize(
    "enc",
    [
        build_identity(6),
        build_paley_etf(13),
        build_steiner_etf(4),
        build_fwht_subsampled(16, 2.0, seed=0),
        build_gaussian(16, 2.0, seed=0),
        build_replication(8, 2, m=4),
    ],
    ids=["identity", "paley", "steiner", "fwht", "gaussian", "replication"],
)
def test_coherence_never_below_welch(enc):
    diag = frame_diagnostics(enc)
    assert diag.coherence >= diag.welch_bound - 1e-12


def test_etf_equiangularity_spread():
    for enc in (build_paley_etf(17), build_steiner_etf(8)):
        s = enc.materialize()
        gram = np.abs(s @ s.T)
        off = gram[~np.eye(enc.rows, dtype=bool)]
        assert off.max() - off.min() <= 1e-9


# --- subset Gram spectra ---


def test_full_subset_of_tight_frame_is_isometry():
    enc = build_fwht_subsampled(16, 2.0, seed=4)
    eigs = subset_gram_spectrum(enc, range(8), m=8, normalization="per_eta")
    assert np.allclose(eigs, 1.0, atol=1e-9)


def test_subset_gram_raw_vs_per_eta():
    enc = build_paley_etf(13)
    raw = subset_gram_spectrum(enc, range(7), m=14, normalization="raw")
    per = subset_gram_spectrum(enc, range(7), m=14, normalization="per_eta")
    assert np.allclose(raw, per * (2.0 * 0.5), atol=1e-12)


def test_subset_gram_rejects_empty():
    enc = build_identity(4)
    with pytest.raises(EmptySubset):
        subset_gram_spectrum(enc, [], m=4)


def test_bulk_eigenvalue_count_for_etf_subsets():
    # Dropping q of the beta*n unit rows of a tight frame leaves at least
    # n - q eigenvalues of (1/beta) S_A^T S_A exactly at 1 (interlacing).
    enc = build_paley_etf(13)
    m = 14
    rng = np.random.default_rng(0)
    for k in (11, 12, 13):
        for _ in range(5):
            subset = tuple(np.sort(rng.choice(m, size=k, replace=False)))
            eigs = subset_gram_spectrum(enc, subset, m, normalization="raw") / enc.beta
            removed = enc.rows - k * (enc.rows // m)
            ones = int(np.sum(np.abs(eigs - 1.0) <= 1e-8))
            assert ones >= enc.n - removed


def test_subset_monotonicity_under_node_addition():
    enc = build_fwht_subsampled(8, 2.0, seed=9)
    m = 8
    rng = np.random.default_rng(2)
    for _ in range(10):
        k = int(rng.integers(1, m))
        subset = sorted(rng.choice(m, size=k, replace=False).tolist())
        extra = int(rng.choice([i for i in range(m) if i not in subset]))
        before = subset_gram_spectrum(enc, subset, m, normalization="raw")
        after = subset_gram_spectrum(enc, subset + [extra], m, normalization="raw")
        assert np.all(after >= before - 1e-10)


def test_gaussian_subset_spectrum_within_mp_edges():
    enc = build_gaussian(200, 3.0, seed=6)
    m, k = 12, 6
    rng = np.random.default_rng(3)
    lo = (1 - math.sqrt(1 / 1.5)) ** 2 - 0.15
    hi = (1 + math.sqrt(1 / 1.5)) ** 2 + 0.15
    for _ in range(5):
        subset = np.sort(rng.choice(m, size=k, replace=False))
        eigs = subset_gram_spectrum(enc, subset, m, normalization="per_eta")
        assert eigs[0] >= lo and eigs[-1] <= hi


# --- epsilon estimation ---


def test_estimate_epsilon_identity_full_participation():
    est = estimate_epsilon(build_identity(8), m=8, k=8, trials=3, seed=0)
    assert est.epsilon_hat <= 1e-12
    assert est.eta == 1.0


def test_estimate_epsilon_fwht_recorded():
    enc = build_fwht_subsampled(64, 2.0, seed=1)
    est = estimate_epsilon(enc, m=16, k=12, trials=10, seed=5)
    assert 0.0 < est.epsilon_hat < 1.0
    assert est.subset_size == 12
    assert len(est.per_trial) == 12
    assert est.histogram[0].sum() == 12 * 64


def test_estimate_epsilon_unshuffled_blocks_are_singular():
    # Without the row shuffle, worker blocks coincide with Kronecker factors
    # of the transform and every 12-of-16 block subset loses a direction
    # entirely: the measured deviation saturates at exactly 1.
    enc = build_fwht_subsampled(64, 2.0, seed=1, shuffle_rows=False)
    est = estimate_epsilon(enc, m=16, k=12, trials=10, seed=5)
    assert est.epsilon_hat == pytest.approx(1.0, abs=1e-9)


def test_estimate_epsilon_replication_missing_partition():
    # k = m/beta can miss a partition entirely, making the subset Gram
    # singular: the normalized spectrum then touches 0, so epsilon_hat = 1.
    enc = build_replication(8, 2, m=8)
    est = estimate_epsilon(enc, m=8, k=4, trials=40, seed=2)
    assert est.epsilon_hat == pytest.approx(1.0, abs=1e-12)


# --- encoding problems ---


def test_encode_problem_identity_splits_in_half():
    rng = np.random.default_rng(4)
    X = rng.standard_normal((6, 2))
    y = rng.standard_normal(6)
    parts = encode_problem(build_identity(6), X, y, m=2)
    assert np.array_equal(parts[0].X, X[:3]) and np.array_equal(parts[1].X, X[3:])
    assert np.array_equal(parts[0].y, y[:3]) and np.array_equal(parts[1].y, y[3:])


def test_encode_problem_steiner_fast_path_matches_dense():
    enc = build_steiner_etf(4)
    rng = np.random.default_rng(5)
    X = rng.standard_normal((6, 3))
    y = rng.standard_normal(6)
    parts = encode_problem(enc, X, y, m=4)
    dense = enc.materialize()
    stacked_x = np.vstack([p.X for p in parts])
    stacked_y = np.concatenate([p.y for p in parts])
    assert np.allclose(stacked_x, dense @ X, atol=1e-10)
    assert np.allclose(stacked_y, dense @ y, atol=1e-10)


def test_encode_problem_tight_frame_identity():
    enc = build_fwht_subsampled(32, 2.0, seed=8)
    rng = np.random.default_rng(6)
    X = rng.standard_normal((32, 4))
    y = rng.standard_normal(32)
    parts = encode_problem(enc, X, y, m=8)
    stacked = np.vstack([p.X for p in parts])
    lhs = stacked.T @ stacked
    rhs = enc.beta * (X.T @ X)
    assert np.abs(lhs - rhs).max() <= 1e-8 * max(1.0, np.abs(rhs).max())


def test_encode_problem_dimension_check():
    with pytest.raises(DimensionMismatch):
        encode_problem(build_identity(4), np.zeros((5, 2)), np.zeros(5), m=1)


# --- persistence ---


def test_encoding_save_load_round_trip(tmp_path):
    enc = build_fwht_subsampled(8, 2.0, seed=3)
    path = tmp_path / "enc.cmx"
    enc.save(path)
    back = EncodingMatrix.load(path)
    assert back.scheme == "fwht_subsampled"
    assert back.rows == enc.rows and back.n == enc.n
    assert np.array_equal(back.materialize(), enc.materialize())


def test_build_encoding_dispatch_validates_n():
    enc = build_encoding("paley_etf", n=7, prime=13)
    assert enc.rows == 14
    with pytest.raises(DimensionMismatch):
        build_encoding("paley_etf", n=8, prime=13)
    with pytest.raises(ValueError):
        build_encoding("nonsense", n=8)
