"""Fixed-particle-number occupation bases for spinless fermions on a chain.

A basis state is an integer whose bit ``s`` is set when site ``s`` is
occupied. It stands for the creation operators of the occupied sites applied
in ascending site order to the vacuum,

    |b> = c†_{s1} c†_{s2} ... c†_{sN} |0>,   s1 < s2 < ... < sN,

and every fermionic sign in the package (hopping, embedding, partial trace)
is derived from that ordering.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidPartitionError,
    InvalidSpecError,
    UnsupportedPartitionError,
)
from .states import as_kets

MAX_SITES = 64


def popcount(x):
    """Number of set bits, elementwise for arrays."""
    if isinstance(x, (int, np.integer)):
        return int(x).bit_count()
    return np.bitwise_count(np.asarray(x, dtype=np.uint64)).astype(np.int64)


def site_mask(start: int, stop: int) -> int:
    """Bit mask selecting sites ``start <= s < stop``."""
    return ((1 << stop) - 1) ^ ((1 << start) - 1)


@dataclass(frozen=True)
class LatticeSpec:
    """A chain of ``L`` sites holding ``N`` spinless fermions."""

    L: int
    N: int

    def __post_init__(self):
        if not isinstance(self.L, (int, np.integer)) or not isinstance(self.N, (int, np.integer)):
            raise InvalidSpecError(f"L and N must be integers, got L={self.L!r}, N={self.N!r}")
        if not 0 < self.L <= MAX_SITES:
            raise InvalidSpecError(f"L must be in 1..{MAX_SITES}, got {self.L}")
        if not 0 <= self.N <= self.L:
            raise InvalidSpecError(f"need 0 <= N <= L, got N={self.N}, L={self.L}")

    @property
    def dim(self) -> int:
        return comb(self.L, self.N)


@dataclass(frozen=True, eq=False)
class FockBasis:
    """Sorted occupation basis of a :class:`LatticeSpec`.

    ``states[k]`` is the bit pattern of the ``k``-th basis vector; patterns are
    strictly ascending so the reverse lookup is a binary search.
    """

    spec: LatticeSpec
    states: np.ndarray = field(repr=False)

    @property
    def L(self) -> int:
        return self.spec.L

    @property
    def N(self) -> int:
        return self.spec.N

    @property
    def dim(self) -> int:
        return len(self.states)

    def __len__(self) -> int:
        return len(self.states)

    def index(self, patterns):
        """Ordinal(s) of bit pattern(s). Raises ``KeyError`` for foreign patterns."""
        scalar = np.ndim(patterns) == 0
        pats = np.atleast_1d(np.asarray(patterns, dtype=np.uint64))
        pos = np.searchsorted(self.states, pats)
        pos_c = np.minimum(pos, len(self.states) - 1)
        if np.any(self.states[pos_c] != pats):
            bad = pats[self.states[pos_c] != pats][0]
            raise KeyError(f"pattern {int(bad):#b} is not in the basis of {self.spec}")
        return int(pos_c[0]) if scalar else pos_c

    def __contains__(self, pattern) -> bool:
        try:
            self.index(pattern)
        except KeyError:
            return False
        return True

    def occupations(self) -> np.ndarray:
        """``(dim, L)`` 0/1 array of site occupations."""
        sites = np.arange(self.L, dtype=np.uint64)
        return ((self.states[:, None] >> sites[None, :]) & np.uint64(1)).astype(np.int8)

    def label(self, k: int) -> str:
        """Occupation string of basis state ``k``, highest site first (``'1100'``)."""
        return format(int(self.states[k]), f"0{self.L}b")


def enumerate_basis(spec: LatticeSpec) -> FockBasis:
    """All ``binomial(L, N)`` occupation patterns in ascending order."""
    if not isinstance(spec, LatticeSpec):
        spec = LatticeSpec(*spec)
    patterns = [sum(1 << s for s in occ) for occ in combinations(range(spec.L), spec.N)]
    states = np.array(sorted(patterns), dtype=np.uint64)
    states.setflags(write=False)
    return FockBasis(spec, states)


@dataclass(frozen=True)
class BinPartition:
    """Contiguous, disjoint half-open site ranges ``(start, stop)`` covering the chain."""

    bins: tuple[tuple[int, int], ...]

    def __post_init__(self):
        bins = tuple((int(a), int(b)) for a, b in self.bins)
        object.__setattr__(self, "bins", bins)
        if not bins:
            raise InvalidPartitionError("partition needs at least one bin")
        if bins[0][0] != 0:
            raise InvalidPartitionError("first bin must start at site 0")
        for (a, b), (c, _) in zip(bins, bins[1:]):
            if b != c:
                raise InvalidPartitionError(f"bins {bins} are not contiguous")
        for a, b in bins:
            if b <= a:
                raise InvalidPartitionError(f"empty bin ({a}, {b})")

    @classmethod
    def uniform(cls, L: int, p: int) -> "BinPartition":
        """``p`` equal bins of width ``L // p``; ``p`` must divide ``L``."""
        if p <= 0 or L % p:
            raise InvalidPartitionError(f"{p} bins do not divide L={L}")
        w = L // p
        return cls(tuple((k * w, (k + 1) * w) for k in range(p)))

    @property
    def p(self) -> int:
        return len(self.bins)

    @property
    def L(self) -> int:
        return self.bins[-1][1]

    @property
    def lengths(self) -> tuple[int, ...]:
        return tuple(b - a for a, b in self.bins)

    def masks(self) -> list[int]:
        return [site_mask(a, b) for a, b in self.bins]

    def check_lattice(self, L: int):
        if self.L != L:
            raise InvalidPartitionError(f"partition covers {self.L} sites, lattice has {L}")


def occupation_signature(state: int, bins: BinPartition) -> tuple[int, ...]:
    """Particle count in each bin of a single bit pattern."""
    return tuple(popcount(int(state) & m) for m in bins.masks())


def occupation_signatures(basis: FockBasis, bins: BinPartition) -> np.ndarray:
    """``(dim, p)`` array of per-bin counts for every basis state."""
    bins.check_lattice(basis.L)
    return np.stack([popcount(basis.states & np.uint64(m)) for m in bins.masks()], axis=1)


def embedding_indices(source: FockBasis, target: FockBasis, offset: int = 0) -> np.ndarray:
    """Target ordinals of the source states shifted up by ``offset`` sites.

    Shifting keeps the relative order of the occupied sites, so the embedded
    creation string needs no reordering and every amplitude keeps its sign.
    """
    if source.N != target.N:
        raise DimensionMismatchError(f"particle numbers differ: {source.N} vs {target.N}")
    if offset < 0 or source.L + offset > target.L:
        raise DimensionMismatchError(
            f"window of {source.L} sites at offset {offset} overflows lattice of {target.L}"
        )
    return target.index(source.states << np.uint64(offset))


def embed_state(state: np.ndarray, source: FockBasis, target: FockBasis, offset: int = 0) -> np.ndarray:
    """Copy a ket or density matrix onto a larger lattice, other sites empty."""
    state = np.asarray(state)
    idx = embedding_indices(source, target, offset)
    if state.shape[0] != source.dim:
        raise DimensionMismatchError(f"state has dimension {state.shape[0]}, basis {source.dim}")
    if state.ndim == 1:
        out = np.zeros(target.dim, dtype=state.dtype)
        out[idx] = state
    elif state.ndim == 2:
        out = np.zeros((target.dim, target.dim), dtype=state.dtype)
        out[np.ix_(idx, idx)] = state
    else:
        raise DimensionMismatchError("state must be a vector or a square matrix")
    return out


def _contiguous_range(keep, L: int) -> tuple[int, int]:
    if isinstance(keep, range) and keep.step != 1:
        raise UnsupportedPartitionError(f"{keep} is not contiguous")
    sites = sorted(int(s) for s in keep)
    if not sites:
        raise UnsupportedPartitionError("empty subsystem")
    start, stop = sites[0], sites[-1] + 1
    if sites != list(range(start, stop)):
        raise UnsupportedPartitionError(f"sites {sites} are not contiguous")
    if start < 0 or stop > L:
        raise UnsupportedPartitionError(f"sites {start}..{stop - 1} outside lattice of {L}")
    return start, stop


def reduced_density_matrix(state, basis: FockBasis, keep: Iterable[int] | range) -> np.ndarray:
    """Density matrix of a contiguous block of sites.

    The result acts on the block's full local Fock space, indexed by the local
    bit pattern (site ``start`` is bit 0). Writing ``|b> = s(b) |a>_A |r>_rest``
    needs ``s(b) = (-1)^(n_A * n_left)`` with ``n_left`` the particles left of
    the block. In a fixed-``N`` space the sign cancels between bra and ket, but
    it is applied anyway to keep the convention explicit.
    """
    start, stop = _contiguous_range(keep, basis.L)
    ell = stop - start
    kets = as_kets(state, basis.dim)
    states = basis.states
    local = ((states >> np.uint64(start)) & np.uint64((1 << ell) - 1)).astype(np.int64)
    rest = states & ~np.uint64(site_mask(start, stop))
    n_a = popcount(local.astype(np.uint64))
    n_left = popcount(states & np.uint64(site_mask(0, start)))
    sign = np.where((n_a * n_left) % 2, -1.0, 1.0)
    rest_vals, rest_idx = np.unique(rest, return_inverse=True)
    r = kets.shape[1]
    m = np.zeros((1 << ell, len(rest_vals), r), dtype=np.result_type(kets.dtype, np.float64))
    m[local, rest_idx, :] = sign[:, None] * kets
    m = m.reshape(1 << ell, -1)
    rho = m @ m.conj().T
    return 0.5 * (rho + rho.conj().T)


def compositions_count(N: int, caps: Sequence[int]) -> int:
    """Number of ways to write ``N`` as ordered parts bounded by ``caps``."""
    ways = np.zeros(N + 1, dtype=object)
    ways[0] = 1
    for cap in caps:
        new = np.zeros(N + 1, dtype=object)
        for n in range(N + 1):
            new[n] = sum(ways[n - k] for k in range(0, min(cap, n) + 1))
        ways = new
    return int(ways[N])
