"""Invariants of observational entropy over random states and coarse-grainings."""

import numpy as np
from hypothesis import given, strategies as st

from qobsent.coarsegrain import DiagonalPartition, VectorGrouping, refines, tensor_product
from qobsent.entropy import kl_identity_check, observational_entropy, sequence_volumes, von_neumann_entropy

from _oracles import (
    dense_density,
    dense_observational_entropy,
    projectors_from,
    random_coarse_graining,
    random_state,
    random_unitary,
)

seeds = st.integers(0, 2**32 - 1)


def S(state, cgs):
    return float(observational_entropy(state, cgs)[0])


def draw(seed, d_max=16, n_max=3):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, d_max + 1))
    n = int(rng.integers(1, n_max + 1))
    pairs = [random_coarse_graining(d, rng) for _ in range(n)]
    return rng, d, random_state(d, rng), [c for c, _ in pairs], [p for _, p in pairs]


@given(seeds)
def test_bounds_and_monotonicity(seed):
    _, d, state, cgs, _ = draw(seed, d_max=40)
    s = S(state, cgs)
    assert float(von_neumann_entropy(state)) - 1e-9 <= s <= np.log(d) + 1e-9
    if len(cgs) > 1:
        assert s <= S(state, cgs[:-1]) + 1e-9


@given(seeds)
def test_matches_dense_oracle(seed):
    _, _, state, cgs, projs = draw(seed)
    assert abs(S(state, cgs) - dense_observational_entropy(state, projs)) <= 1e-10


@given(seeds)
def test_kl_identity(seed):
    _, _, state, cgs, _ = draw(seed)
    assert kl_identity_check(state, cgs) <= 1e-9


@given(seeds)
def test_sequential_volumes_sum_to_dimension(seed):
    _, d, _, cgs, _ = draw(seed)
    _, vols = sequence_volumes(cgs, 0.0)
    assert abs(vols.sum() - d) <= 1e-9


@given(seeds, st.integers(1, 10))
def test_subspace_state_has_log_volume(seed, d):
    rng = np.random.default_rng(seed)
    cg, projs = random_coarse_graining(d, rng, kind=rng.choice(["diagonal", "vector"]))
    i = int(rng.integers(cg.n_macrostates))
    block = cg.range_block(i)
    coeffs = rng.standard_normal(block.data.shape[1]) + 1j * rng.standard_normal(block.data.shape[1])
    psi = np.zeros(d, dtype=complex)
    rows = slice(None) if block.support is None else block.support
    psi[rows] = block.data @ coeffs
    psi /= np.linalg.norm(psi)
    assert abs(S(psi, (cg,)) - np.log(cg.volumes[i])) <= 1e-12


@given(seeds)
def test_extensive_on_product_spaces(seed):
    rng = np.random.default_rng(seed)
    da, db = int(rng.integers(1, 7)), int(rng.integers(1, 7))
    a, _ = random_coarse_graining(da, rng)
    b, _ = random_coarse_graining(db, rng)
    ra, rb = random_state(da, rng), random_state(db, rng)
    joint = np.kron(dense_density(ra), dense_density(rb))
    assert abs(S(joint, (tensor_product(a, b),)) - S(ra, (a,)) - S(rb, (b,))) <= 1e-9


@given(seeds)
def test_refinement_lowers_entropy(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, 20))
    fine_assign = rng.integers(0, 6, d)
    _, fine_assign = np.unique(fine_assign, return_inverse=True)
    merge = rng.integers(0, 3, fine_assign.max() + 1)
    _, merge = np.unique(merge, return_inverse=True)
    U = random_unitary(d, rng) if rng.random() < 0.5 else np.eye(d)
    fine = VectorGrouping(U, fine_assign)
    coarse = VectorGrouping(U, merge[fine_assign])
    assert refines(fine, coarse)
    state = random_state(d, rng)
    assert S(state, (fine,)) <= S(state, (coarse,)) + 1e-12


@given(seeds)
def test_projector_sums_from_raw_vectors(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 12))
    a = rng.integers(0, 4, d)
    _, a = np.unique(a, return_inverse=True)
    cg = DiagonalPartition(a)
    for i, P in enumerate(projectors_from(np.eye(d), a)):
        assert np.allclose(cg.projector(i), P)
