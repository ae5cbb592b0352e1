"""Tests for the matrix predicates and the equivalence-triad certificates."""

import numpy as np
import pytest

from fracdelay.errors import DimensionError, DomainError
from fracdelay.matrix_analysis import (
    is_hurwitz,
    is_metzler,
    is_nonnegative,
    is_schur,
    metzler_hurwitz_certificate,
    nonneg_schur_certificate,
    row_sum_lt_one,
    solve,
    spectral_summary,
)
from fracdelay.errors import SingularMatrixError

A_EX1 = np.array([[-2.2, 0.2, 0.1], [0.3, -2.4, 0.2], [0.5, 0.2, -2.3]])
B_EX1 = np.array([[0.2, 0.1, 0.3], [0.2, 0.2, 0.1], [0.1, 0.3, 0.5]])
E_EX1 = np.array([[0.2, 0.1], [0.2, 0.3], [0.3, 0.4]])
C_EX1 = np.array([[0.1, 0.2, 0.1], [0.1, 0.3, 0.1]])
D_EX1 = np.array([[0.1, 0.2], [0.2, 0.1]])


def test_is_metzler():
    assert is_metzler(A_EX1)
    assert is_metzler(np.eye(3))
    assert not is_metzler([[0.0, -0.1], [0.0, 0.0]])


def test_is_metzler_requires_square():
    with pytest.raises(DimensionError):
        is_metzler(np.zeros((2, 3)))


def test_is_nonnegative():
    assert is_nonnegative(B_EX1)
    assert is_nonnegative(np.zeros((3, 3)))
    assert not is_nonnegative([[1.0, -1e-12]])


def test_spectral_summary_diagonal():
    s = spectral_summary([[-1.0, 0.0], [0.0, -2.0]])
    assert sorted(z.real for z in s.eigenvalues) == [-2.0, -1.0]
    assert s.spectral_abscissa == -1.0
    assert s.spectral_radius == 2.0


def test_spectral_summary_symmetric_2x2():
    # eigenvalues of [[a, b], [b, a]] are a +/- b
    s = spectral_summary(D_EX1)
    eigs = sorted(z.real for z in s.eigenvalues)
    assert abs(eigs[0] - (-0.1)) < 1e-12
    assert abs(eigs[1] - 0.3) < 1e-12
    assert abs(s.spectral_radius - 0.3) < 1e-12


def test_spectral_summary_rotation():
    s = spectral_summary([[0.0, 1.0], [-1.0, 0.0]])
    assert abs(s.spectral_abscissa) < 1e-12
    assert abs(s.spectral_radius - 1.0) < 1e-12
    assert sorted(z.imag for z in s.eigenvalues) == pytest.approx([-1.0, 1.0])


def test_is_hurwitz():
    assert is_hurwitz([[-1.0]])
    assert not is_hurwitz([[0.0]])
    effective = A_EX1 + B_EX1 + E_EX1 @ np.linalg.solve(np.eye(2) - D_EX1, C_EX1)
    assert is_hurwitz(effective)


def test_is_schur():
    assert is_schur(np.zeros((2, 2)))
    assert not is_schur(np.eye(2))
    assert is_schur(D_EX1)


def test_tolerance_validation():
    with pytest.raises(DomainError):
        is_hurwitz([[-1.0]], tol=0.0)


def test_metzler_hurwitz_certificate_identity():
    cert = metzler_hurwitz_certificate(-np.eye(2))
    assert cert.verdict
    np.testing.assert_allclose(cert.lam, [1.0, 1.0])
    np.testing.assert_allclose(cert.neg_inverse, np.eye(2))


def test_metzler_hurwitz_certificate_unstable():
    cert = metzler_hurwitz_certificate([[0.0, 1.0], [1.0, 0.0]])
    assert not cert.verdict
    assert cert.lam is None and cert.neg_inverse is None


def test_metzler_hurwitz_certificate_rejects_non_metzler():
    with pytest.raises(DomainError):
        metzler_hurwitz_certificate([[-1.0, -0.1], [0.0, -1.0]])


def test_nonneg_schur_certificate_zero():
    cert = nonneg_schur_certificate(np.zeros((2, 2)))
    assert cert.verdict
    np.testing.assert_allclose(cert.eta, [1.0, 1.0])
    np.testing.assert_allclose(cert.inv_resolvent, np.eye(2))


def test_nonneg_schur_certificate_example_d():
    cert = nonneg_schur_certificate(D_EX1)
    assert cert.verdict
    # (I-D)^{-1} = (1/0.77) [[0.9, 0.2], [0.2, 0.9]]
    expected = np.array([[0.9, 0.2], [0.2, 0.9]]) / 0.77
    np.testing.assert_allclose(cert.inv_resolvent, expected, atol=1e-12)
    np.testing.assert_allclose(
        (D_EX1 - np.eye(2)) @ cert.eta, [-1.0, -1.0], atol=1e-12
    )


def test_nonneg_schur_certificate_rejects_negative_entry():
    with pytest.raises(DomainError):
        nonneg_schur_certificate([[0.5, -0.1], [0.0, 0.5]])


def test_row_sum_lt_one():
    assert row_sum_lt_one(C_EX1)
    assert not row_sum_lt_one(np.eye(2))
    d_ex3 = [[0.2, 0.5], [0.3, 0.1]]
    assert row_sum_lt_one(d_ex3)
    # signed vs absolute row sums
    assert row_sum_lt_one([[0.8, -0.4]], absolute=False)
    assert not row_sum_lt_one([[0.8, -0.4]], absolute=True)


def test_solve_flags_singular():
    with pytest.raises(SingularMatrixError):
        solve(np.array([[1.0, 2.0], [2.0, 4.0]]), np.array([1.0, 1.0]))


# --- equivalence triads (cross-implementation property tests) -----------------


def _random_metzler(rng, dim):
    a = rng.uniform(-5.0, 5.0, size=(dim, dim))
    off = ~np.eye(dim, dtype=bool)
    a[off] = np.abs(a[off])
    return a


def _random_nonnegative(rng, dim, push_radius=False):
    m = np.abs(rng.uniform(0.0, 1.0, size=(dim, dim)))
    if push_radius:
        radius = spectral_summary(m).spectral_radius
        if radius > 0:
            m *= rng.uniform(0.9, 1.1) / radius
    else:
        m *= rng.uniform(0.0, 1.5)
    return m


def _triad_metzler_agrees(a, tol=1e-10):
    eig_verdict = is_hurwitz(a)
    try:
        neg_inv = solve(a, -np.eye(a.shape[0]), name="A")
        inv_ok = bool(np.all(neg_inv >= -tol))
    except SingularMatrixError:
        inv_ok = False
    try:
        lam = solve(a, -np.ones(a.shape[0]), name="A")
        lam_ok = bool(np.all(lam > tol))
    except SingularMatrixError:
        lam_ok = False
    return eig_verdict == inv_ok == lam_ok


def _triad_schur_agrees(m, tol=1e-10):
    eig_verdict = is_schur(m)
    eye = np.eye(m.shape[0])
    try:
        resolvent = solve(eye - m, eye, name="I-M")
        res_ok = bool(np.all(resolvent >= -tol))
        # a Schur M has (I-M)^{-1} = sum M^k >= 0; a non-Schur nonnegative M
        # cannot have a nonnegative inverse resolvent with (M-I) eta = -1 < 0
        eta = solve(eye - m, np.ones(m.shape[0]), name="I-M")
        eta_ok = bool(np.all(eta > tol))
    except SingularMatrixError:
        res_ok = False
        eta_ok = False
    return eig_verdict == (res_ok and eta_ok)


def test_metzler_hurwitz_triad_random():
    rng = np.random.RandomState(20240811)
    for _ in range(200):
        dim = rng.randint(2, 9)
        assert _triad_metzler_agrees(_random_metzler(rng, dim))


def test_nonneg_schur_triad_random():
    rng = np.random.RandomState(20240812)
    for k in range(200):
        dim = rng.randint(2, 9)
        m = _random_nonnegative(rng, dim, push_radius=(k % 3 == 0))
        assert _triad_schur_agrees(m)


def test_gram_matrix_eigenvalues_real_nonnegative():
    rng = np.random.RandomState(7)
    for _ in range(20):
        a = rng.standard_normal((6, 6))
        s = spectral_summary(a.T @ a)
        for z in s.eigenvalues:
            assert abs(z.imag) <= 1e-9
            assert z.real >= -1e-9


def test_row_sum_implies_schur_for_nonnegative():
    rng = np.random.RandomState(99)
    for _ in range(100):
        dim = rng.randint(2, 7)
        m = np.abs(rng.uniform(0.0, 1.0, size=(dim, dim)))
        rows = m.sum(axis=1)
        m = m / (rows.max() + rng.uniform(0.05, 1.0))  # force row sums < 1
        assert row_sum_lt_one(m)
        assert is_schur(m)
