import numpy as np
import pytest
from hypothesis import given, strategies as st

from qobsent.errors import InvalidPartitionError, InvalidSpecError
from qobsent.fockspace import LatticeSpec, enumerate_basis
from qobsent.model import ModelParams, build_hamiltonian, chain_bonds, decompose_blocks

from _oracles import jw_hamiltonian, sector

# ascending spectrum of the default chain at L=4, N=2 from the Jordan-Wigner oracle
SPECTRUM_4_2 = [
    -2.969862119216625, -2.082453395927993, -1.250199980003999,
    0.750199980003999, 0.986470691423716, 2.105844823720902,
]
GROUND_8_4 = -6.474290689304073
GROUND_8_4_INTEGRABLE = -5.68649805


def test_defaults():
    p = ModelParams(LatticeSpec(16, 4))
    assert (p.t, p.tp, p.V, p.Vp, p.density_shift) == (1.0, 0.96, 1.0, 0.96, True)
    assert p.integrable().tp == 0 and p.integrable().Vp == 0


def test_rejects_bad_couplings():
    with pytest.raises(InvalidSpecError):
        ModelParams(LatticeSpec(4, 2), t=float("nan"))
    with pytest.raises(InvalidSpecError):
        ModelParams(LatticeSpec(4, 2), V=float("inf"))


def test_two_site_matrix():
    H = build_hamiltonian(ModelParams(LatticeSpec(2, 1)))
    assert np.allclose(H, [[-0.25, -1.0], [-1.0, -0.25]])
    assert np.allclose(np.linalg.eigvalsh(H), [-1.25, 0.75])


def test_three_site_nnn_hop():
    basis = enumerate_basis(LatticeSpec(3, 1))
    H = build_hamiltonian(ModelParams(basis.spec), basis)
    a, c = basis.index(np.array([0b001, 0b100], dtype=np.uint64))
    assert H[a, c] == pytest.approx(-0.96)


def test_nnn_hop_sign_over_occupied_site():
    basis = enumerate_basis(LatticeSpec(3, 2))
    H = build_hamiltonian(ModelParams(basis.spec, t=0.0), basis)
    a, c = basis.index(np.array([0b011, 0b110], dtype=np.uint64))
    assert H[a, c] == pytest.approx(+0.96)


def test_frozen_spectra():
    assert np.allclose(np.linalg.eigvalsh(build_hamiltonian(ModelParams(LatticeSpec(4, 2)))), SPECTRUM_4_2, atol=1e-12)
    e = np.linalg.eigvalsh(build_hamiltonian(ModelParams(LatticeSpec(8, 4))))
    assert e[0] == pytest.approx(GROUND_8_4, abs=1e-12)
    e = np.linalg.eigvalsh(build_hamiltonian(ModelParams(LatticeSpec(8, 4)).integrable()))
    assert e[0] == pytest.approx(GROUND_8_4_INTEGRABLE, abs=1e-8)


@given(
    st.sampled_from([(5, 2), (6, 3), (7, 3), (6, 1)]),
    st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2), st.booleans(),
)
def test_matches_jordan_wigner(LN, t, tp, V, Vp, shift):
    L, N = LN
    params = ModelParams(LatticeSpec(L, N), t=t, tp=tp, V=V, Vp=Vp, density_shift=shift)
    basis = enumerate_basis(params.lattice)
    ref = sector(jw_hamiltonian(L, t, tp, V, Vp, 0.5 if shift else 0.0), basis.states)
    assert np.allclose(build_hamiltonian(params, basis), ref, atol=1e-12)


def test_bonds():
    bonds = chain_bonds(ModelParams(LatticeSpec(4, 2)))
    assert [(b.i, b.j) for b in bonds] == [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)]
    assert [(b.i, b.j) for b in chain_bonds(ModelParams(LatticeSpec(8, 2)), 4, 6)] == [(4, 5)]


@pytest.mark.parametrize("L,N,m", [(8, 3, 2), (8, 4, 4), (12, 3, 3), (6, 2, 1)])
def test_block_decomposition_sums_to_h(L, N, m):
    params = ModelParams(LatticeSpec(L, N))
    basis = enumerate_basis(params.lattice)
    bd = decompose_blocks(params, m, basis)
    assert np.allclose(bd.total(), build_hamiltonian(params, basis), atol=1e-13)
    assert np.allclose(bd.with_epsilon(0).total(), bd.local_sum)
    w = L // m
    assert bd.blocks == tuple((k * w, (k + 1) * w) for k in range(m))
    for local in bd.local_hamiltonians:
        assert sorted(local) == list(range(0, w + 1))
    if m == 1:
        assert np.allclose(bd.interaction, 0)


def test_block_count_must_divide():
    with pytest.raises(InvalidPartitionError):
        decompose_blocks(ModelParams(LatticeSpec(16, 4)), 3)
