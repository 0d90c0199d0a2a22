"""Tests for operator assembly in the Fourier and phi bases."""

import math

import numpy as np
import pytest

from conftest import seeded_weight
from steklovzeta.circle_fourier import (
    GridSampling,
    WeightFunction,
    normalize,
    to_samples,
)
from steklovzeta.conformal import gallery
from steklovzeta.dtn_operators import (
    KERNEL_TOL,
    OperatorMatrix,
    assemble_fourier,
    assemble_phi,
    kernel_projection,
    matrix_power,
    phi_basis_samples,
    phi_derivative_matrix,
)
from steklovzeta.errors import NegativeEigenvalue, NonPositiveWeight, NotNormalized

TWO_PI = 2.0 * math.pi


def cosine_weight():
    return gallery("cosine(0.5,2)")


# ---------------------------------------------------------------------------
# Fourier assembly


def test_disk_weight_gives_diagonal_operators():
    one = WeightFunction.constant(1.0)
    M = 8
    lam = assemble_fourier(one, M, "Lambda_a").entries
    der = assemble_fourier(one, M, "D_a").entries
    n = np.arange(-M, M + 1)
    np.testing.assert_allclose(lam, np.diag(np.abs(n)).astype(complex), atol=1e-14)
    np.testing.assert_allclose(der, np.diag(n).astype(complex), atol=1e-14)


def test_constant_weight_scales_linearly():
    four = WeightFunction.constant(4.0)
    M = 6
    lam = assemble_fourier(four, M, "Lambda_a").entries
    n = np.arange(-M, M + 1)
    np.testing.assert_allclose(lam, 4.0 * np.diag(np.abs(n)).astype(complex), atol=1e-12)


def test_mult_operator_is_toeplitz_of_coefficients():
    a = cosine_weight()
    M = 5
    T = assemble_fourier(a, M, "mult_a").entries
    for m in range(-M, M + 1):
        for n in range(-M, M + 1):
            assert abs(T[m + M, n + M] - a.coeff(m - n)) < 1e-15


def test_assembly_rejects_nonpositive_weight():
    bad = WeightFunction.from_modes({0: 1.0, 1: 0.8, -1: 0.8})
    with pytest.raises(NonPositiveWeight):
        assemble_fourier(bad, 8, "Lambda_a")


def test_assemblies_are_hermitian_and_dtn_is_psd():
    a = seeded_weight(21)
    for which in ("Lambda_a", "D_a", "Dsq_a", "mult_a"):
        A = assemble_fourier(a, 24, which).entries
        assert np.max(np.abs(A - A.conj().T)) < 1e-11
    lam = assemble_fourier(a, 24, "Lambda_a").entries
    assert np.linalg.eigvalsh(lam)[0] > -1e-12


def test_squared_derivative_matches_independent_assembly():
    # interior block of (D_a)^2 against the expansion-based assembly; the two
    # paths share no code beyond the Toeplitz helper
    a = cosine_weight()
    M = 32
    D = assemble_fourier(a, M, "D_a").entries
    direct = D @ D
    expanded = assemble_fourier(a, M, "Dsq_a").entries
    inner = slice(M - 16, M + 17)
    np.testing.assert_allclose(direct[inner, inner], expanded[inner, inner], atol=1e-10)


def test_sqrt_toeplitz_squares_to_weight_toeplitz_inside():
    a = cosine_weight()
    M = 24
    from steklovzeta.dtn_operators import _toeplitz, sqrt_representation

    root = sqrt_representation(a, 2 * M)
    S = _toeplitz(root.coeffs, root.M, 2 * M + 1)
    T = assemble_fourier(a, M, "mult_a").entries
    inner = slice(M - 8, M + 9)
    np.testing.assert_allclose((S @ S)[inner, inner], T[inner, inner], atol=1e-11)


@pytest.mark.parametrize("name", ["perturbed_disk(0.1,2)", "cosine(0.2,2)"])
def test_derivative_galerkin_spectrum_hits_integers(name):
    # the weighted derivative of a normalized weight has spectrum exactly Z;
    # the Galerkin truncation reproduces the full trusted window of integers
    a = normalize(gallery(name))
    M = 64
    vals = np.linalg.eigvalsh(assemble_fourier(a, M, "D_a").entries)
    K = M // 2
    middle = np.sort(vals)[M - K : M + K + 1]
    np.testing.assert_allclose(middle, np.arange(-K, K + 1), atol=1e-8)


def test_derivative_spectrum_interior_for_heavy_tail():
    # with tail ratio 0.25 the window edge is conditioning-limited; a few
    # modes in, the integers reappear at full accuracy
    a = normalize(cosine_weight())
    M = 128
    vals = np.linalg.eigvalsh(assemble_fourier(a, M, "D_a").entries)
    K = M // 2
    middle = np.sort(vals)[M - K : M + K + 1]
    err = np.abs(middle - np.arange(-K, K + 1))
    assert err[8:-8].max() < 1e-7
    assert err.max() < 1e-3


# ---------------------------------------------------------------------------
# phi basis


def test_phi_samples_for_disk_weight():
    one = WeightFunction.constant(1.0)
    N = 64
    for n in (-2, 0, 3):
        g = phi_basis_samples(one, n, N)
        t = TWO_PI * np.arange(N) / N
        np.testing.assert_allclose(
            g.values, np.exp(1j * n * t) / math.sqrt(TWO_PI), atol=1e-12)


def test_phi_zero_mode_is_real_positive():
    a = normalize(cosine_weight())
    g = phi_basis_samples(a, 0, 128)
    assert np.max(np.abs(g.values.imag)) < 1e-14
    assert np.min(g.values.real) > 0


def test_phi_requires_normalized_weight():
    with pytest.raises(NotNormalized):
        phi_basis_samples(WeightFunction.constant(2.0), 1, 64)


def test_phi_family_is_orthonormal():
    # quadrature Gram matrix of the first modes must be the identity
    a = normalize(cosine_weight())
    N = 1 << 12
    rows = [phi_basis_samples(a, n, N).values for n in range(-8, 9)]
    P = np.array(rows)
    G = (P @ P.conj().T) * (TWO_PI / N)
    np.testing.assert_allclose(G, np.eye(17), atol=1e-10)


def test_phi_norm_is_one_by_quadrature():
    a = normalize(seeded_weight(3))
    N = 1 << 12
    for n in (0, 1, 5):
        g = phi_basis_samples(a, n, N)
        norm = np.sum(np.abs(g.values) ** 2) * (TWO_PI / N)
        assert abs(norm - 1.0) < 1e-10


def test_phi_assembly_disk_is_diagonal():
    one = WeightFunction.constant(1.0)
    A = assemble_phi(one, 8)
    np.testing.assert_allclose(
        A.entries, np.diag(np.abs(np.arange(-8, 9))).astype(complex), atol=1e-12)


def test_phi_assembly_kernel_and_first_modes():
    a = normalize(cosine_weight())
    A = assemble_phi(a, 16)
    M = 16
    assert abs(A.entries[M, M]) < 1e-10           # kernel mode annihilated
    d1, dm1 = A.entries[M + 1, M + 1].real, A.entries[M - 1, M - 1].real
    assert abs(d1 - dm1) < 1e-10                  # +-1 modes enter symmetrically
    assert d1 >= 1.0 - 1e-12                      # Rayleigh floor at |n| = 1


def test_phi_derivative_matrix_is_diagonal_integers():
    a = normalize(cosine_weight())
    M = 12
    D = phi_derivative_matrix(a, M).entries
    n = np.arange(-M, M + 1)
    np.testing.assert_allclose(D, np.diag(n).astype(complex), atol=1e-10)


def test_phi_and_fourier_spectra_agree_on_trusted_window():
    a = normalize(seeded_weight(9))
    M = 64
    phi_vals = np.linalg.eigvalsh(assemble_phi(a, M).entries)
    fourier_vals = np.linalg.eigvalsh(assemble_fourier(a, M, "Lambda_a").entries)
    K = M // 2
    np.testing.assert_allclose(phi_vals[:K], fourier_vals[:K], atol=1e-7)


def test_smoothing_remainder_decays_off_center():
    # the squared DtN minus squared derivative is concentrated near the
    # center of the phi basis.  Genuine content includes slowly decaying
    # coupling between the positive and negative mode sectors (the kink of
    # the first-order symbol), so "outside the central block" is read as
    # both indices large; near-diagonal entries decay much faster
    a = normalize(cosine_weight())
    M = 128
    A = assemble_phi(a, M).entries
    n = np.arange(-M, M + 1)
    R = np.abs(A @ A - np.diag(n.astype(complex)) ** 2)
    K = M // 2
    block = R[M - K : M + K + 1, M - K : M + K + 1]
    idx = np.arange(-K, K + 1)
    II, JJ = np.meshgrid(idx, idx, indexing="ij")
    outside = np.minimum(np.abs(II), np.abs(JJ)) >= 40
    assert block[outside].max() < 1e-8
    # near-diagonal entries far from the center sit at quadrature noise
    band = np.abs(II - JJ) <= 4
    far = np.maximum(np.abs(II), np.abs(JJ)) >= 24
    assert block[band & far].max() < 1e-10
    # the kernel mode row and column vanish identically
    assert R[M, :].max() < 1e-12 and R[:, M].max() < 1e-12


# ---------------------------------------------------------------------------
# matrix powers and kernel projection


def om(diag):
    d = np.asarray(diag, dtype=complex)
    M = d.size // 2
    return OperatorMatrix(np.diag(d), "phi", "test", M)


def test_matrix_power_squares_diagonal():
    P = matrix_power(om([0.0, 1.0, 2.0]), 2.0)
    np.testing.assert_allclose(P.entries, np.diag([0.0, 1.0, 4.0]).astype(complex),
                               atol=1e-14)


def test_matrix_power_zero_gives_complement_of_kernel():
    a = normalize(cosine_weight())
    A = assemble_phi(a, 8)
    P = matrix_power(A, 0.0)
    v = kernel_projection(a, 8, "phi").matrix
    np.testing.assert_allclose(P.entries, np.eye(17) - v, atol=1e-9)


def test_matrix_power_half_squares_back():
    a = normalize(seeded_weight(4))
    A = assemble_phi(a, 12)
    R = matrix_power(A, 0.5)
    back = R.entries @ R.entries
    np.testing.assert_allclose(back, A.entries, atol=1e-10)


def test_matrix_power_rejects_negative_eigenvalues():
    bad = OperatorMatrix(np.diag([-1e-6, 1.0, 2.0]).astype(complex), "phi", "bad", 1)
    with pytest.raises(NegativeEigenvalue):
        matrix_power(bad, 0.5)


def test_kernel_tolerance_separates_zero_mode():
    a = normalize(seeded_weight(8))
    vals = np.linalg.eigvalsh(assemble_phi(a, 32).entries)
    assert vals[0] < KERNEL_TOL
    assert vals[1] > 0.5  # first nonzero eigenvalue is near 1 after normalization


def test_kernel_projection_idempotent_and_annihilated():
    a = normalize(cosine_weight())
    M = 32
    for basis in ("phi", "fourier"):
        proj = kernel_projection(a, M, basis)
        assert proj.idempotency_defect < 1e-12
    # Fourier-basis kernel vector is killed by the assembled DtN matrix up to
    # the truncation tail of the zero-mode coefficients
    proj = kernel_projection(a, M, "fourier")
    lam = assemble_fourier(a, M, "Lambda_a").entries
    assert np.linalg.norm(lam @ proj.vector) < 1e-8


def test_operator_matrix_validates_hermitian():
    with pytest.raises(ValueError):
        OperatorMatrix(np.array([[0.0, 1.0], [0.0, 0.0]]), "fourier", "bad", 0)


def test_matrix_dump_shape():
    A = assemble_fourier(WeightFunction.constant(1.0), 2, "Lambda_a")
    d = A.to_dict()
    assert d["basis"] == "fourier" and d["M"] == 2 and len(d["rows"]) == 5
