from __future__ import annotations

import numpy as np
import pytest
import scipy.linalg as la
import scipy.sparse as sp

from signet.eigensolver import (
    Pencil,
    dense_generalized,
    eigenpair_transport,
    lobpcg,
    smallest_generalized,
    standard_eigenvectors,
)
from signet.errors import IndefiniteMassMatrix, NotConverged, ValidationError
from signet.graph import build_from_edges, laplacian
from signet.metrics import sin_theta_distance


def spd_pencil(rng, n, gap=True):
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    if gap:
        ev = np.concatenate([np.sort(rng.uniform(0.1, 1.0, 5)), rng.uniform(2.0, 10.0, n - 5)])
    else:
        ev = rng.uniform(0.1, 10.0, n)
    b = (q * ev) @ q.T
    m = rng.standard_normal((n, n))
    a = m @ m.T / n + np.eye(n)
    return 0.5 * (b + b.T), a


def a_subspace(a, x):
    # orthonormal basis of A^{1/2} span(x), where generalized eigenvectors are orthonormal
    w, u = la.eigh(a)
    return np.linalg.qr((u * np.sqrt(w)) @ u.T @ x)[0]


def test_diagonal_problem():
    r = smallest_generalized(Pencil(np.diag([3.0, 1.0, 2.0])), 2)
    assert np.allclose(r.eigenvalues, [1, 2])


def test_balanced_signed_laplacian_has_zero_eigenvalue():
    g = build_from_edges(4, [(0, 1, 1), (2, 3, 1), (0, 2, -1), (0, 3, -1), (1, 2, -1), (1, 3, -1)])
    r = smallest_generalized(Pencil(laplacian(g, "SignedLbar")), 1)
    assert abs(r.eigenvalues[0]) < 1e-12


@pytest.mark.parametrize("seed", range(5))
def test_iterative_matches_oracle_on_50x50(seed):
    rng = np.random.default_rng(seed)
    b, a = spd_pencil(rng, 50)
    r = smallest_generalized(Pencil(b, a), 5, dense_threshold=0)
    assert r.method == "lobpcg" and r.all_converged
    ref = la.eigh(b, a, eigvals_only=True, subset_by_index=[0, 4])
    assert np.max(np.abs(r.eigenvalues - ref) / np.abs(ref)) <= 1e-8


def test_dense_route_matches_cholesky_route(rng):
    b, a = spd_pencil(rng, 60, gap=False)
    r = dense_generalized(Pencil(b, a), 60)
    ref = la.eigh(b, a, eigvals_only=True)
    assert np.allclose(r.eigenvalues, ref, rtol=1e-10, atol=1e-12)


def test_a_orthonormal_and_small_residuals(rng):
    b, a = spd_pencil(rng, 120)
    for dt in (0, 512):
        r = smallest_generalized(Pencil(sp.csr_matrix(b), sp.csr_matrix(a)), 4, dense_threshold=dt)
        x = r.eigenvectors
        assert np.abs(x.T @ a @ x - np.eye(4)).max() <= 1e-8
        assert np.all(r.residuals <= 1e-8 * (np.abs(b).sum(1).max() + np.abs(r.eigenvalues) * np.abs(a).sum(1).max()))


def test_ritz_values_are_monotone(rng):
    b, a = spd_pencil(rng, 150, gap=False)
    r = lobpcg(Pencil(b, a), 4, max_iter=300)
    h = r.history
    assert h.shape[0] > 2
    scale = np.abs(h).max()
    assert np.all(np.diff(h, axis=0) <= 1e-12 * scale)


def test_largest_side(rng):
    b, _ = spd_pencil(rng, 80)
    r = smallest_generalized(Pencil(b), 3, largest=True, dense_threshold=0)
    ref = np.linalg.eigvalsh(b)[::-1][:3]
    assert np.allclose(r.eigenvalues, ref, rtol=1e-8)


def test_deterministic_given_seed(rng):
    b, a = spd_pencil(rng, 100)
    r1 = smallest_generalized(Pencil(b, a), 3, dense_threshold=0, seed=4)
    r2 = smallest_generalized(Pencil(b, a), 3, dense_threshold=0, seed=4)
    assert np.array_equal(r1.eigenvectors, r2.eigenvectors)


def test_not_converged_is_flagged_or_raised(rng):
    b, a = spd_pencil(rng, 200, gap=False)
    r = smallest_generalized(Pencil(b, a), 5, dense_threshold=0, max_iter=2)
    assert not r.all_converged
    with pytest.raises(NotConverged) as info:
        smallest_generalized(Pencil(b, a), 5, dense_threshold=0, max_iter=2, raise_on_failure=True)
    assert info.value.result is not None


def test_indefinite_mass_matrix():
    b = np.eye(3)
    a = np.diag([1.0, -1.0, 2.0])
    with pytest.raises(IndefiniteMassMatrix):
        smallest_generalized(Pencil(b, a), 1)


def test_shape_validation():
    with pytest.raises(ValidationError):
        Pencil(np.eye(3), np.eye(2))
    with pytest.raises(ValidationError):
        smallest_generalized(Pencil(np.eye(3)), 4)


def test_transport_identity_mass():
    v = np.array([0.6, 0.8])
    lam, w, _ = eigenpair_transport(Pencil(np.diag([1.0, 1.0])), 1.0, v)
    assert np.array_equal(w, v)


def test_transport_two_by_two():
    pencil = Pencil(np.diag([8.0, 3.0]), np.diag([4.0, 1.0]))
    lam, w, res = eigenpair_transport(pencil, 2.0, np.array([1.0, 0.0]))
    assert np.allclose(w, [0.5, 0.0])
    assert res <= 1e-14


def test_transport_all_pairs_random(rng):
    b, a = spd_pencil(rng, 20, gap=False)
    w, u = la.eigh(a)
    s = (u / np.sqrt(w)) @ u.T
    lam, v = la.eigh(s @ b @ s)
    pencil = Pencil(b, a)
    worst = max(eigenpair_transport(pencil, lam[i], v[:, i])[2] for i in range(20))
    assert worst <= 1e-9


def test_standard_eigenvectors_map_back(rng):
    b, a = spd_pencil(rng, 30)
    r = dense_generalized(Pencil(b, a), 3)
    w, u = la.eigh(a)
    s = (u / np.sqrt(w)) @ u.T
    _, v = la.eigh(s @ b @ s)
    assert sin_theta_distance(standard_eigenvectors(Pencil(b, a), r.eigenvectors), v[:, :3]) <= 1e-8
