"""Symmetric eigensolver, rank decisions, and generalized inverses."""

import numpy as np
import pytest

import oracles
from psdorder import (
    DEFAULT_TOL,
    NotPositiveSemidefinite,
    PsdMatrix,
    SymMatrix,
    ToleranceConfig,
    image_basis,
    inner_ginverse,
    is_psd,
    numerical_rank,
    pinv,
    pos_neg_split,
    projector_onto,
    rect_rank,
    subspace_leq,
    sym_eig,
)
from psdorder.errors import DimensionMismatch
from psdorder.numkernel import maxabs


def random_sym(rng, n, scale=1.0):
    g = rng.uniform(-scale, scale, size=(n, n))
    return (g + g.T) / 2


def test_sym_matrix_coercion():
    s = SymMatrix([[1.0, 2.0], [2.0, 3.0]])
    assert s.n == 2
    assert s.asymmetry == 0.0
    # slight asymmetry is averaged away and recorded
    t = SymMatrix([[1.0, 2.0 + 1e-10], [2.0, 3.0]])
    assert t.asymmetry == pytest.approx(1e-10, rel=1e-3)
    assert t.a[0, 1] == t.a[1, 0]
    with pytest.raises(DimensionMismatch):
        SymMatrix(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        SymMatrix([[np.nan, 0.0], [0.0, 1.0]])


def test_sym_matrix_is_read_only():
    s = SymMatrix(np.eye(2))
    with pytest.raises(ValueError):
        s.a[0, 0] = 5.0


def test_psd_matrix_accepts_and_rejects():
    PsdMatrix(np.eye(3))
    PsdMatrix(np.zeros((2, 2)))
    with pytest.raises(NotPositiveSemidefinite) as exc:
        PsdMatrix([[1.0, 2.0], [2.0, 1.0]])
    assert exc.value.min_eig == pytest.approx(-1.0, abs=1e-12)


def test_eig_diagonal_is_signed_permutation():
    eig = sym_eig(np.diag([3.0, 1.0, 2.0]))
    np.testing.assert_allclose(eig.values, [3.0, 2.0, 1.0], atol=1e-14)
    # columns must be +/- standard basis vectors in the order 0, 2, 1
    perm = np.abs(eig.vectors)
    expected = np.eye(3)[:, [0, 2, 1]]
    np.testing.assert_allclose(perm, expected, atol=1e-14)


def test_eig_2x2_closed_form():
    a = np.array([[2.0, 1.0], [1.0, 2.0]])
    eig = sym_eig(a)
    lam1, lam2 = oracles.eig2(2.0, 1.0, 2.0)
    np.testing.assert_allclose(eig.values, [lam1, lam2], atol=1e-14)
    np.testing.assert_allclose(np.abs(eig.vectors[:, 0]), [1, 1] / np.sqrt(2), atol=1e-14)
    np.testing.assert_allclose(np.abs(eig.vectors[:, 1]), [1, 1] / np.sqrt(2), atol=1e-14)


def test_eig_zero_matrix_gives_identity_basis():
    eig = sym_eig(np.zeros((4, 4)))
    np.testing.assert_array_equal(eig.values, np.zeros(4))
    np.testing.assert_array_equal(eig.vectors, np.eye(4))


def test_eig_sign_convention_first_nonzero_positive():
    rng = np.random.default_rng(7)
    for _ in range(50):
        a = random_sym(rng, 5)
        vecs = sym_eig(a).vectors
        for j in range(5):
            col = vecs[:, j]
            nz = col[np.abs(col) > 1e-12]
            assert nz.size > 0 and nz[0] > 0


def test_eig_reconstruction_and_orthogonality():
    rng = np.random.default_rng(11)
    for n in (1, 2, 3, 5, 9, 16):
        a = random_sym(rng, n, scale=3.0)
        eig = sym_eig(a)
        assert np.all(np.diff(eig.values) <= 1e-12)
        np.testing.assert_allclose(eig.reconstruct(), a, atol=1e-12 * max(1.0, maxabs(a)))
        np.testing.assert_allclose(eig.vectors.T @ eig.vectors, np.eye(n), atol=1e-13)


def test_jacobi_backend_matches_lapack():
    rng = np.random.default_rng(23)
    for _ in range(40):
        n = rng.integers(1, 7)
        a = random_sym(rng, n, scale=2.0)
        e1 = sym_eig(a, backend="lapack")
        e2 = sym_eig(a, backend="jacobi")
        np.testing.assert_allclose(e1.values, e2.values, atol=1e-10)
        np.testing.assert_allclose(e2.reconstruct(), a, atol=1e-10)
    with pytest.raises(ValueError):
        sym_eig(np.eye(2), backend="cholesky")


def test_rank_examples():
    assert numerical_rank(np.diag([1.0, 1e-20])) == 1
    assert numerical_rank(np.eye(4)) == 4
    assert numerical_rank(np.zeros((3, 3))) == 0
    x = np.array([[1.0, 2.0], [2.0, 4.0]])
    assert numerical_rank(x) == 1


def test_rank_matches_exact_oracle():
    rng = np.random.default_rng(31)
    for _ in range(300):
        n = int(rng.integers(1, 7))
        a = rng.integers(-4, 5, size=(n, n))
        a = a + a.T
        assert numerical_rank(a.astype(float)) == oracles.exact_rank(a)


def test_rect_rank():
    m = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]])
    assert rect_rank(m) == 1
    assert rect_rank(np.zeros((2, 5))) == 0
    rng = np.random.default_rng(37)
    for _ in range(100):
        r, c = int(rng.integers(1, 6)), int(rng.integers(1, 6))
        m = rng.integers(-3, 4, size=(r, c))
        assert rect_rank(m.astype(float)) == oracles.exact_rank(m)


def test_is_psd_examples():
    chk = is_psd(np.eye(2))
    assert chk.ok and chk.witness is None
    chk = is_psd([[1.0, 2.0], [2.0, 1.0]])
    assert not chk.ok
    assert chk.min_eig == pytest.approx(-1.0, abs=1e-12)
    x = chk.witness
    np.testing.assert_allclose(np.abs(x), [1, 1] / np.sqrt(2), atol=1e-12)
    # the witness really does expose negativity
    a = np.array([[1.0, 2.0], [2.0, 1.0]])
    assert x @ a @ x < 0


def test_is_psd_oracle_agreement():
    rng = np.random.default_rng(41)
    for _ in range(200):
        n = int(rng.integers(1, 6))
        a = rng.integers(-3, 4, size=(n, n))
        a = a + a.T
        chk = is_psd(a.astype(float))
        assert chk.ok == oracles.exact_psd(a)
        if not chk.ok:
            assert float(chk.witness @ a @ chk.witness) < 0


def test_pinv_examples():
    np.testing.assert_allclose(pinv(np.diag([2.0, 4.0])), np.diag([0.5, 0.25]), atol=1e-15)
    np.testing.assert_allclose(pinv(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]), atol=1e-15)
    x = np.array([1.0, 2.0, 2.0])
    a = np.outer(x, x)
    np.testing.assert_allclose(pinv(a), a / (x @ x) ** 2, atol=1e-14)
    np.testing.assert_array_equal(pinv(np.zeros((3, 3))), np.zeros((3, 3)))


def test_pinv_penrose_identities():
    rng = np.random.default_rng(43)
    for _ in range(300):
        n = int(rng.integers(1, 7))
        r = int(rng.integers(0, n + 1))
        g = rng.standard_normal((n, r)) if r else np.zeros((n, 0))
        a = g @ g.T
        ap = pinv(a)
        scale = max(1.0, maxabs(a))
        assert maxabs(a @ ap @ a - a) <= 1e-9 * scale
        assert maxabs(ap @ a @ ap - ap) <= 1e-9 * max(1.0, maxabs(ap))
        assert maxabs((a @ ap) - (a @ ap).T) <= 1e-10 * scale
        assert maxabs((ap @ a) - (ap @ a).T) <= 1e-10 * scale


def test_inner_ginverse_identity_and_seeds():
    rng = np.random.default_rng(47)
    for trial in range(60):
        n = int(rng.integers(1, 6))
        r = int(rng.integers(0, n + 1))
        g = rng.standard_normal((n, r)) if r else np.zeros((n, 0))
        a = g @ g.T
        for seed in (0, 1, trial + 2):
            gi = inner_ginverse(a, seed=seed)
            assert maxabs(a @ gi @ a - a) <= 1e-8 * max(1.0, maxabs(a))
    # seed 0 is the Moore-Penrose choice
    a = np.diag([3.0, 0.0])
    np.testing.assert_allclose(inner_ginverse(a, seed=0), pinv(a), atol=1e-14)


def test_inner_ginverse_invertible_case():
    rng = np.random.default_rng(53)
    a = random_sym(rng, 4) + 5.0 * np.eye(4)
    # for invertible A every inner inverse equals the inverse
    for seed in (0, 1, 99):
        np.testing.assert_allclose(inner_ginverse(a, seed=seed), np.linalg.inv(a), atol=1e-10)


def test_inner_ginverse_differs_from_pinv_when_singular():
    a = np.diag([1.0, 0.0])
    g1 = inner_ginverse(a, seed=12)
    assert maxabs(g1 - pinv(a)) > 1e-8


def test_image_basis():
    u = image_basis(np.diag([1.0, 0.0]))
    assert u.dim == 1 and u.n == 2
    np.testing.assert_allclose(np.abs(u.basis[:, 0]), [1.0, 0.0], atol=1e-14)
    z = image_basis(np.zeros((3, 3)))
    assert z.dim == 0 and z.basis.shape == (3, 0)
    rng = np.random.default_rng(59)
    for _ in range(50):
        n = int(rng.integers(1, 7))
        a = random_sym(rng, n)
        u = image_basis(a)
        assert u.dim == numerical_rank(a)
        np.testing.assert_allclose(u.basis.T @ u.basis, np.eye(u.dim), atol=1e-12)


def test_subspace_leq():
    e1 = image_basis(np.diag([1.0, 0.0, 0.0]))
    full = image_basis(np.eye(3))
    assert subspace_leq(e1, full)
    assert not subspace_leq(full, e1)
    assert subspace_leq(e1, e1)
    # zero-dimensional subspace sits inside everything
    z = image_basis(np.zeros((3, 3)))
    assert subspace_leq(z, e1)


def test_pos_neg_split_swap_matrix():
    a = np.array([[0.0, 1.0], [1.0, 0.0]])
    pos, neg = pos_neg_split(a)
    np.testing.assert_allclose(pos.a, [[0.5, 0.5], [0.5, 0.5]], atol=1e-14)
    np.testing.assert_allclose(neg.a, [[0.5, -0.5], [-0.5, 0.5]], atol=1e-14)


def test_pos_neg_split_properties():
    rng = np.random.default_rng(61)
    for _ in range(80):
        n = int(rng.integers(1, 7))
        a = random_sym(rng, n, scale=2.0)
        pos, neg = pos_neg_split(a)
        assert isinstance(pos, PsdMatrix) and isinstance(neg, PsdMatrix)
        np.testing.assert_allclose(pos.a - neg.a, a, atol=1e-12 * max(1.0, maxabs(a)))
        assert numerical_rank(pos.a) + numerical_rank(neg.a) == numerical_rank(a)


def test_projector_onto():
    rng = np.random.default_rng(67)
    for _ in range(40):
        n = int(rng.integers(1, 7))
        a = random_sym(rng, n)
        u = image_basis(a)
        p = projector_onto(u)
        assert isinstance(p, PsdMatrix)
        np.testing.assert_allclose(p.a @ p.a, p.a, atol=1e-12)
        assert numerical_rank(p.a) == u.dim
        # projector restricted to the subspace is the identity
        np.testing.assert_allclose(p.a @ u.basis, u.basis, atol=1e-12)


def test_tolerance_config_validation():
    with pytest.raises(ValueError):
        ToleranceConfig(psd_tol=-1e-9)
    with pytest.raises(ValueError):
        ToleranceConfig(eig_tol=0.0)
    with pytest.raises(ValueError):
        ToleranceConfig(rank_rel_tol=-1.0)
    cfg = ToleranceConfig(rank_rel_tol=1e-6)
    assert cfg.rank_cutoff(4, 10.0) == pytest.approx(1e-5)
    # default relative cutoff scales with dimension and machine epsilon
    d = DEFAULT_TOL.rank_cutoff(3, 2.0)
    assert d == pytest.approx(3 * np.finfo(float).eps * 2.0)
    assert DEFAULT_TOL.rank_cutoff(3, 0.0) == 0.0


def test_rank_cutoff_flips_decision():
    a = np.diag([1.0, 1e-6])
    assert numerical_rank(a) == 2
    assert numerical_rank(a, ToleranceConfig(rank_rel_tol=1e-5)) == 1
