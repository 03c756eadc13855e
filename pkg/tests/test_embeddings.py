from __future__ import annotations

import numpy as np
import pytest
import scipy.linalg as la

from conftest import random_signed_graph
from signet.clustering import KmeansConfig, kmeanspp
from signet.eigensolver import Pencil, smallest_generalized
from signet.embeddings import Method, MethodSpec, dims_for, embed, method_pencil, sponge_matrices
from signet.errors import InvalidParams, SingularPencil, ZeroDegreeVertex
from signet.experiments import cluster_graph
from signet.graph import build_from_edges
from signet.metrics import adjusted_rand_index, sin_theta_distance
from signet.ssbm import SsbmParams, generate
from signet.theory import expected_matrices, informative_vector, tbar_spectrum


def noiseless(n, k=2):
    return generate(SsbmParams(n=n, k=k, p=1.0, eta=0.0))


def test_spec_validation():
    with pytest.raises(InvalidParams):
        MethodSpec(Method.SPONGE, dims=0)
    with pytest.raises(InvalidParams):
        MethodSpec(Method.SPONGE, dims=1, tau_plus=0.0)
    assert MethodSpec("Adjacency", dims=1).side == "largest"
    assert dims_for(5) == 4 and dims_for(5, "k") == 5
    with pytest.raises(InvalidParams):
        dims_for(3, "k+1")


def test_sponge_noiseless_four_vertices():
    inst = noiseless(4)
    # at n = 4 the constant vector is among the bottom two only for tau- < tau+ / 2
    e = embed(inst.graph, MethodSpec(Method.SPONGE, dims=2, tau_minus=0.25))
    for c in (0, 1):
        rows = e.coords[inst.labels == c]
        assert np.abs(rows - rows[0]).max() <= 1e-8
    # default taus: frozen dense-oracle spectrum (0.4, 4/3, 4/3, 2); the second pair is a tie
    full = embed(inst.graph, MethodSpec(Method.SPONGE, dims=4))
    assert np.allclose(full.eigenvalues, [0.4, 4 / 3, 4 / 3, 2.0], atol=1e-12)
    e1 = embed(inst.graph, MethodSpec(Method.SPONGE, dims=2))
    assert e1.tie_at_cutoff
    col = e1.coords[:, 0]
    assert np.ptp(col[inst.labels == 0]) <= 1e-8 and np.ptp(col[inst.labels == 1]) <= 1e-8


def test_sponge_on_expected_matrices():
    m = expected_matrices(10, 0.3, 0.1)
    b, a = sponge_matrices(m["A_plus"], m["A_minus"], 1.0, 0.5)
    r = smallest_generalized(Pencil(b, a), 2)
    t = tbar_spectrum(10, 0.1, 1.0, 0.5)
    assert sorted(r.eigenvalues) == pytest.approx(sorted([t.lambda1, t.lambda2]), abs=1e-9)
    assert sorted(r.eigenvalues) == pytest.approx([0.263359, 0.597561], abs=1e-6)
    basis = np.linalg.qr(r.eigenvectors)[0]
    assert sin_theta_distance(basis, informative_vector(10)[:, None]) <= 1e-8


@pytest.mark.parametrize("method", list(Method))
def test_full_dimension_matches_dense_pencil(method, rng):
    g = random_signed_graph(rng, 12, 0.6)
    if g.deg_abs.min() == 0 or g.deg_plus.min() == 0:
        pytest.skip("random draw has a vertex without positive edges")
    spec = MethodSpec(method, dims=12)
    e = embed(g, spec)
    pencil = method_pencil(g, spec)
    b, a = pencil.dense()
    ref = la.eigh(b, a, eigvals_only=True)
    got = np.sort(e.eigenvalues)
    assert np.allclose(got, ref, atol=1e-9)


def test_columns_orthonormal_in_mass_metric(rng):
    g = generate(SsbmParams(n=80, k=3, p=0.3, eta=0.1, seed=2)).graph
    for method in Method:
        e = embed(g, MethodSpec(method, dims=2))
        x = e.coords
        if method is Method.SIGNED_LBAR_RW:
            gram = x.T @ (g.deg_abs[:, None] * x)
        else:
            _, a = e.pencil.dense()
            gram = x.T @ a @ x
        assert np.abs(gram - np.eye(2)).max() <= 1e-8, method


def test_random_walk_vectors_are_eigenvectors(rng):
    g = generate(SsbmParams(n=60, k=2, p=0.3, eta=0.1, seed=1)).graph
    e = embed(g, MethodSpec(Method.SIGNED_LBAR_RW, dims=3))
    a = g.adjacency.toarray()
    lrw = np.eye(60) - a / g.deg_abs[:, None]
    assert np.abs(lrw @ e.coords - e.coords * e.eigenvalues).max() <= 1e-10


def test_sponge_sym_noiseless_recovery():
    inst = noiseless(4)
    labels, _ = cluster_graph(inst.graph, MethodSpec(Method.SPONGE_SYM, dims=1), 2)
    assert adjusted_rand_index(inst.labels, labels) == 1.0


def test_isolated_vertex_regularized():
    g = build_from_edges(7, [(0, 1, 1), (1, 2, 1), (0, 2, 1), (3, 4, 1), (4, 5, 1), (3, 5, 1),
                             (0, 3, -1), (1, 4, -1), (2, 5, -1)])
    e = embed(g, MethodSpec(Method.SPONGE_SYM, dims=1))
    assert np.all(e.eigenvalues < 1.0)
    assert np.all(np.abs(e.coords[6]) <= 1e-12)
    e = embed(g, MethodSpec(Method.SPONGE, dims=1))
    assert np.all(np.abs(e.coords[6]) <= 1e-12)
    with pytest.raises(ZeroDegreeVertex):
        embed(g, MethodSpec(Method.SPONGE_SYM, dims=1, zero_degree="reject"))


def test_singular_sponge_pencil():
    # vertices 0-1 only have a negative edge between them: L- + tau+ D+ is singular there
    g = build_from_edges(4, [(0, 1, -1), (2, 3, 1)])
    with pytest.raises(SingularPencil):
        embed(g, MethodSpec(Method.SPONGE, dims=1))


def test_signed_lbar_two_cliques():
    inst = noiseless(6)
    e = embed(inst.graph, MethodSpec(Method.SIGNED_LBAR, dims=1))
    assert abs(e.eigenvalues[0]) <= 1e-12
    w = informative_vector(6)
    assert abs(abs(e.coords[:, 0] @ w) - 1) <= 1e-12


def test_bnc_and_adjacency_on_noiseless_graph():
    inst = noiseless(6)
    e = embed(inst.graph, MethodSpec(Method.BNC, dims=1))
    split = (e.coords[:, 0] > 0).astype(int)
    assert adjusted_rand_index(inst.labels, split) == 1.0
    e = embed(inst.graph, MethodSpec(Method.ADJACENCY, dims=1))
    assert abs(abs(e.coords[:, 0] @ informative_vector(6)) - 1) <= 1e-12


def test_brc_is_standard_problem(rng):
    g = generate(SsbmParams(n=30, k=2, p=0.5, eta=0.1, seed=3)).graph
    e = embed(g, MethodSpec(Method.BRC, dims=2))
    ref = np.linalg.eigvalsh((g.d_plus - g.adjacency).toarray())[:2]
    assert np.allclose(e.eigenvalues, ref, atol=1e-12)


def test_pencil_equals_similarity_transform(rng):
    for _ in range(5):
        g = generate(SsbmParams(n=int(rng.integers(20, 100)), k=3, p=0.4, eta=0.2,
                                seed=int(rng.integers(1000)))).graph
        spec = MethodSpec(Method.SPONGE, dims=4, tau_plus=0.7, tau_minus=1.3)
        e = embed(g, spec)
        b, a = method_pencil(g, spec).dense()
        w, u = np.linalg.eigh(a)
        s = (u / np.sqrt(w)) @ u.T
        ref = np.linalg.eigvalsh(s @ b @ s)[:4]
        assert np.allclose(e.eigenvalues, ref, atol=1e-8)


def test_weight_scaling_leaves_sponge_unchanged():
    inst = generate(SsbmParams(n=150, k=3, p=0.2, eta=0.05, seed=4))
    spec = MethodSpec(Method.SPONGE, dims=2)
    e1 = embed(inst.graph, spec)
    e2 = embed(inst.graph.scaled(3.7), spec)
    assert np.allclose(e1.eigenvalues, e2.eigenvalues, rtol=1e-10)
    u1 = np.linalg.qr(e1.coords)[0]
    u2 = np.linalg.qr(e2.coords)[0]
    assert sin_theta_distance(u1, u2) <= 1e-8
    cfg = KmeansConfig(k=3, seed=0)
    assert adjusted_rand_index(kmeanspp(e1.coords, cfg)[0], kmeanspp(e2.coords, cfg)[0]) == 1.0


def test_rotation_does_not_change_clustering():
    for seed in range(20):
        inst = generate(SsbmParams(n=120, k=3, p=0.2, eta=0.1, seed=seed))
        x = embed(inst.graph, MethodSpec(Method.SPONGE_SYM, dims=2)).coords
        o = np.linalg.qr(np.random.default_rng(seed).standard_normal((2, 2)))[0]
        cfg = KmeansConfig(k=3, seed=seed)
        a = adjusted_rand_index(inst.labels, kmeanspp(x, cfg)[0])
        b = adjusted_rand_index(inst.labels, kmeanspp(x @ o, cfg)[0])
        assert a == pytest.approx(b, abs=1e-12)


def test_sponge_sym_gap_exceeds_signed_laplacian_gap():
    gaps_s, gaps_l = [], []
    for seed in range(10):
        g = generate(SsbmParams(n=1000, k=10, p=0.05, eta=0.1, seed=seed)).graph
        a = embed(g, MethodSpec(Method.SPONGE_SYM, dims=10)).eigenvalues
        b = embed(g, MethodSpec(Method.SIGNED_LBAR_SYM, dims=10)).eigenvalues
        gaps_s.append(a[9] - a[8])
        gaps_l.append(b[9] - b[8])
    assert np.median(gaps_s) > np.median(gaps_l)
