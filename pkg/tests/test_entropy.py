import numpy as np
import pytest

from qobsent.coarsegrain import DiagonalPartition, IdentityCoarseGraining, VectorGrouping, energy_coarse_graining
from qobsent.entropy import (
    EntropyValue,
    canonical_entropy,
    canonical_mean_energy,
    dos_entropy,
    dos_window,
    entanglement_entropy,
    kl_identity_check,
    macrostate_distribution,
    match_beta,
    observational_entropy,
    s_diag,
    sequence_volumes,
    volume_cache,
    von_neumann_entropy,
)
from qobsent.errors import DimensionMismatchError, OutOfSupportError, ValidationError
from qobsent.fockspace import LatticeSpec, enumerate_basis
from qobsent.spectral import diagonalize
from qobsent.states import Ensemble

from _oracles import (
    dense_observational_entropy,
    dense_von_neumann,
    full_vector,
    projectors_from,
    qubit_reduced_density,
    random_mixed,
    random_pure,
)

HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2)

# order-sensitivity witness on d=3: split {0}|{1,2} against a rotated split
WITNESS_ROTATION = np.array([
    [0.764842187284488, -0.292214644284772, 0.574131544347986],
    [0.644217687237691, 0.346929449654899, -0.681632986593423],
    [0.0, 0.891207360061435, 0.453596121425577],
])
WITNESS_AB = 0.8949438475911137
WITNESS_BA = 0.8040688876426906


def S(state, cgs, **kw):
    return float(observational_entropy(state, cgs, **kw)[0])


def test_two_level_examples():
    Z = DiagonalPartition([0, 1])
    X = VectorGrouping(HADAMARD, [0, 1])
    up = np.array([1.0, 0.0])
    assert S(up, (Z,)) == 0.0
    assert S(up, (X,)) == pytest.approx(np.log(2), abs=1e-14)
    assert S(up, (Z, X)) == pytest.approx(0.0, abs=1e-14)
    assert S(up, (X, Z)) == pytest.approx(np.log(2), abs=1e-14)
    assert S(np.eye(2) / 2, (Z,)) == pytest.approx(np.log(2))


def test_order_sensitivity_witness():
    A = DiagonalPartition([0, 1, 1])
    B = VectorGrouping(WITNESS_ROTATION, [0, 0, 1])
    psi = np.ones(3) / np.sqrt(3)
    assert S(psi, (A, B)) == pytest.approx(WITNESS_AB, abs=1e-12)
    assert S(psi, (B, A)) == pytest.approx(WITNESS_BA, abs=1e-12)
    pa = projectors_from(np.eye(3), np.array([0, 1, 1]))
    pb = projectors_from(WITNESS_ROTATION, np.array([0, 0, 1]))
    assert dense_observational_entropy(psi, [pa, pb]) == pytest.approx(WITNESS_AB, abs=1e-12)
    assert dense_observational_entropy(psi, [pb, pa]) == pytest.approx(WITNESS_BA, abs=1e-12)


def test_distribution_contents():
    cg = DiagonalPartition([0, 0, 1, 2], labels=("a", "b", "c"))
    psi = np.array([0.6, 0.0, 0.8, 0.0])
    dist = macrostate_distribution(psi, (cg,))
    assert dist.labels == [("a",), ("b",)]
    assert np.allclose(dist.p, [0.36, 0.64]) and dist.V.tolist() == [2, 1]
    assert dist.pruned_mass == 0.0
    value, _ = observational_entropy(psi, (cg,))
    assert isinstance(value, EntropyValue) and value.kind == "S_O"
    assert value.value == pytest.approx(-0.36 * np.log(0.18) - 0.64 * np.log(0.64))


def test_pure_and_mixed_agree():
    rng = np.random.default_rng(4)
    cg1 = DiagonalPartition([0, 1, 1, 2, 2, 2])
    cg2 = VectorGrouping(np.linalg.qr(rng.standard_normal((6, 6)))[0], [0, 1, 0, 1, 0, 1])
    psi = random_pure(6, rng)
    rho = np.outer(psi, psi.conj())
    for cgs in ((cg1,), (cg1, cg2), (cg2, cg1)):
        assert S(psi, cgs) == pytest.approx(S(rho, cgs), abs=1e-12)
    w = np.array([0.7, 0.3])
    vecs = np.stack([psi, random_pure(6, rng)], axis=1)
    ens = Ensemble(w, vecs)
    assert S(ens, (cg1, cg2)) == pytest.approx(S(ens.density_matrix(), (cg1, cg2)), abs=1e-12)


def test_cutoff_bounds_and_dimension_check():
    cg = DiagonalPartition([0, 1])
    with pytest.raises(ValueError):
        observational_entropy(np.array([1.0, 0]), (cg,), cutoff=1e-6)
    with pytest.raises(DimensionMismatchError):
        observational_entropy(np.ones(3) / np.sqrt(3), (cg,))
    with pytest.raises(DimensionMismatchError):
        observational_entropy(np.array([1.0, 0]), (cg, IdentityCoarseGraining(3)))
    with pytest.raises(ValueError):
        observational_entropy(np.array([1.0, 0]), ())


def test_rejects_unnormalized_and_non_psd():
    cg = DiagonalPartition([0, 1])
    with pytest.raises(ValidationError):
        observational_entropy(np.array([1.0, 1.0]), (cg,))
    with pytest.raises(ValidationError):
        observational_entropy(np.diag([1.5, -0.5]), (cg,))


def test_sequence_volumes_are_cached_and_complete():
    rng = np.random.default_rng(2)
    a = DiagonalPartition(rng.integers(0, 3, 10) % 3)
    b = VectorGrouping(np.linalg.qr(rng.standard_normal((10, 10)))[0], np.arange(10) % 4)
    codes, vols = sequence_volumes((a, b))
    assert vols.sum() == pytest.approx(10, abs=1e-12)
    again = sequence_volumes((a, b))
    assert again[1] is vols
    volume_cache.clear()
    assert sequence_volumes((a, b))[1] is not vols


def test_kl_identity():
    rng = np.random.default_rng(8)
    a = DiagonalPartition([0, 1, 1, 2, 2])
    b = VectorGrouping(np.linalg.qr(rng.standard_normal((5, 5)))[0], [0, 1, 1, 0, 1])
    for state in (random_pure(5, rng), random_mixed(5, rng)):
        assert kl_identity_check(state, (a, b)) < 1e-12


def test_von_neumann():
    assert float(von_neumann_entropy(np.diag([0.9, 0.1]))) == pytest.approx(0.325082973391448, abs=1e-12)
    assert float(von_neumann_entropy(np.array([1.0, 0.0]))) == 0.0
    rng = np.random.default_rng(0)
    rho = random_mixed(7, rng)
    assert float(von_neumann_entropy(rho)) == pytest.approx(dense_von_neumann(rho), abs=1e-12)
    ens = Ensemble(np.array([0.5, 0.5]), np.stack([random_pure(7, rng), random_pure(7, rng)], axis=1))
    assert float(von_neumann_entropy(ens)) == pytest.approx(dense_von_neumann(ens.density_matrix()), abs=1e-12)


def test_entanglement_entropy_matches_qubit_picture():
    rng = np.random.default_rng(5)
    basis = enumerate_basis(LatticeSpec(8, 3))
    psi = random_pure(basis.dim, rng)
    ref = qubit_reduced_density(full_vector(psi, basis.states, 8), 8, 4)
    assert float(entanglement_entropy(psi, basis, range(4))) == pytest.approx(dense_von_neumann(ref), abs=1e-12)
    with pytest.raises(ValidationError):
        entanglement_entropy(np.eye(basis.dim) / basis.dim, basis, range(4))


def test_dos_entropy():
    evals = np.array([0.0, 1.0, 1.1, 1.2, 3.0])
    assert dos_window(evals, 4) == pytest.approx(np.std(evals) / 2)
    assert float(dos_entropy(evals, 1.1, 4, window=0.5)) == pytest.approx(np.log(3))
    with pytest.raises(OutOfSupportError):
        dos_entropy(evals, 2.0, 4, window=0.5)


def test_two_level_canonical():
    sd = diagonalize(np.diag([0.0, 1.0]))
    assert float(canonical_entropy(sd, 1.0)) == pytest.approx(np.log(1 + np.exp(-1)) + np.exp(-1) / (1 + np.exp(-1)), abs=1e-12)
    assert canonical_mean_energy(sd, 1.0) == pytest.approx(np.exp(-1) / (1 + np.exp(-1)))
    target = np.exp(-1) / (1 + np.exp(-1))
    assert match_beta(sd, target) == pytest.approx(1.0, abs=1e-6)
    assert match_beta(sd, 0.5) == 0.0
    assert match_beta(sd, 0.9) < 0
    with pytest.raises(OutOfSupportError):
        match_beta(sd, 1.0)
    assert float(canonical_entropy(sd, 0.0)) == pytest.approx(np.log(2))


def test_canonical_stable_at_large_beta():
    evals = np.linspace(-500, 500, 50)
    assert np.isfinite(float(canonical_entropy(evals, 50.0)))
    assert float(canonical_entropy(evals, 50.0)) == pytest.approx(0.0, abs=1e-12)


def test_diagonal_entropy_is_energy_shannon():
    rng = np.random.default_rng(9)
    A = rng.standard_normal((9, 9))
    sd = diagonalize(A + A.T)
    psi = random_pure(9, rng)
    c = np.abs(sd.amplitudes(psi)) ** 2
    assert float(s_diag(psi, energy_coarse_graining(sd))) == pytest.approx(-np.sum(c * np.log(c)), abs=1e-12)
