"""Spinless-fermion chain with NN/NNN hopping and interactions, hard walls.

    H = sum_i [ -t  (c†_i c_{i+1} + h.c.) + V  (n_i - s)(n_{i+1} - s) ]
      + sum_i [ -tp (c†_i c_{i+2} + h.c.) + Vp (n_i - s)(n_{i+2} - s) ]

with ``s = 1/2`` when ``density_shift`` is on and ``s = 0`` otherwise. Only
bonds with both ends inside the chain appear.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .errors import InvalidPartitionError, InvalidSpecError
from .fockspace import FockBasis, LatticeSpec, enumerate_basis, popcount, site_mask


@dataclass(frozen=True)
class ModelParams:
    lattice: LatticeSpec
    t: float = 1.0
    tp: float = 0.96
    V: float = 1.0
    Vp: float = 0.96
    density_shift: bool = True

    def __post_init__(self):
        for name in ("t", "tp", "V", "Vp"):
            val = getattr(self, name)
            if not np.isfinite(val) or np.iscomplexobj(val):
                raise InvalidSpecError(f"coupling {name}={val!r} must be a finite real number")
            object.__setattr__(self, name, float(val))

    @property
    def L(self) -> int:
        return self.lattice.L

    @property
    def N(self) -> int:
        return self.lattice.N

    def on_lattice(self, L: int, N: int) -> "ModelParams":
        return replace(self, lattice=LatticeSpec(L, N))

    def integrable(self) -> "ModelParams":
        """Same chain with the NNN couplings switched off."""
        return replace(self, tp=0.0, Vp=0.0)


class Bond(NamedTuple):
    i: int
    j: int
    hop: float
    inter: float


def chain_bonds(params: ModelParams, start: int = 0, stop: int | None = None) -> list[Bond]:
    """NN and NNN bonds with both sites in ``[start, stop)``."""
    stop = params.L if stop is None else stop
    bonds = []
    for i in range(start, stop):
        if i + 1 < stop:
            bonds.append(Bond(i, i + 1, params.t, params.V))
        if i + 2 < stop:
            bonds.append(Bond(i, i + 2, params.tp, params.Vp))
    return bonds


def assemble(basis: FockBasis, bonds, density_shift: bool = True) -> np.ndarray:
    """Dense matrix of a bond list inside a fixed-``N`` basis."""
    d = basis.dim
    H = np.zeros((d, d))
    occ = basis.occupations().astype(float)
    shift = 0.5 if density_shift else 0.0
    diag = np.zeros(d)
    states = basis.states
    cols = np.arange(d)
    for b in bonds:
        if b.inter:
            diag += b.inter * (occ[:, b.i] - shift) * (occ[:, b.j] - shift)
        if not b.hop:
            continue
        pair = np.uint64((1 << b.i) | (1 << b.j))
        movable = popcount(states & pair) == 1
        src = states[movable]
        dst = basis.index(src ^ pair)
        # c†_j c_i picks up a minus sign per particle strictly between i and j
        between = popcount(src & np.uint64(site_mask(b.i + 1, b.j)))
        sign = np.where(between % 2, -1.0, 1.0)
        H[dst, cols[movable]] += -b.hop * sign
    H[cols, cols] += diag
    return H


def build_hamiltonian(params: ModelParams, basis: FockBasis | None = None) -> np.ndarray:
    """Full chain Hamiltonian in the ``(L, N)`` occupation basis."""
    basis = enumerate_basis(params.lattice) if basis is None else basis
    return assemble(basis, chain_bonds(params), params.density_shift)


@dataclass(frozen=True, eq=False)
class BlockDecomposition:
    """Split ``H = sum_k H^(k) + epsilon_scale * H_int`` over contiguous blocks.

    ``local_hamiltonians[k][n]`` is block ``k``'s Hamiltonian with ``n`` local
    particles, in that block's own occupation basis. ``local_sum`` is the sum
    of all block terms acting on the full space and ``interaction`` holds every
    bond that crosses a block boundary.
    """

    params: ModelParams
    blocks: tuple[tuple[int, int], ...]
    local_hamiltonians: tuple[dict, ...] = field(repr=False)
    local_sum: np.ndarray = field(repr=False)
    interaction: np.ndarray = field(repr=False)
    epsilon_scale: float = 1.0

    @property
    def m(self) -> int:
        return len(self.blocks)

    def total(self) -> np.ndarray:
        return self.local_sum + self.epsilon_scale * self.interaction

    def with_epsilon(self, epsilon_scale: float) -> "BlockDecomposition":
        return replace(self, epsilon_scale=float(epsilon_scale))


def decompose_blocks(params: ModelParams, m: int, basis: FockBasis | None = None) -> BlockDecomposition:
    L = params.L
    if m <= 0 or L % m:
        raise InvalidPartitionError(f"{m} blocks do not divide L={L}")
    basis = enumerate_basis(params.lattice) if basis is None else basis
    w = L // m
    blocks = tuple((k * w, (k + 1) * w) for k in range(m))
    inner = [b for (a, z) in blocks for b in chain_bonds(params, a, z)]
    inner_set = set(inner)
    crossing = [b for b in chain_bonds(params) if b not in inner_set]

    locals_ = []
    for a, z in blocks:
        # identical couplings on every block; offset does not enter the local matrix
        per_n = {}
        for n in range(z - a + 1):
            local = params.on_lattice(z - a, n)
            per_n[n] = build_hamiltonian(local)
        locals_.append(per_n)

    return BlockDecomposition(
        params=params,
        blocks=blocks,
        local_hamiltonians=tuple(locals_),
        local_sum=assemble(basis, inner, params.density_shift),
        interaction=assemble(basis, crossing, params.density_shift),
    )
