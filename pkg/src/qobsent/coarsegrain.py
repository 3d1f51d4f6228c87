"""Complete orthogonal projector families ("coarse-grainings").

Projectors are never stored as ``dim x dim`` matrices. Three representations
cover everything the experiments need:

* :class:`DiagonalPartition` assigns every basis index to one macrostate
  (positional coarse-graining);
* :class:`VectorGrouping` groups the columns of an orthonormal basis
  (energy, local-energy product and state-induced coarse-grainings);
* :class:`IdentityCoarseGraining` is the trivial family ``{1}``.

Each representation knows how to split a :class:`KetBlock` by macrostate,
which is the only primitive observational entropy needs.
"""

from __future__ import annotations

import itertools
from functools import reduce
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidPartitionError,
    UnsupportedComparisonError,
    ValidationError,
)
from .fockspace import BinPartition, FockBasis, enumerate_basis, occupation_signatures
from .model import BlockDecomposition
from .spectral import (
    DEFAULT_DEGENERACY_TOL,
    DegeneracyGrouping,
    SpectralDecomposition,
    diagonalize,
    group_degenerate,
    group_values,
)
from ._linalg import adjoint_matmul, matmul
from .states import PSD_TOL

PROJECTOR_TOL = 1e-10
# refinement residuals between these two bounds are reported as undecidable
AMBIGUOUS_TOL = 1e-6

_uids = itertools.count()


class KetBlock(NamedTuple):
    """Columns ``data`` living on basis rows ``support`` (``None``: all rows)."""

    support: np.ndarray | None
    data: np.ndarray

    def weight(self) -> float:
        return float(np.vdot(self.data, self.data).real)


def _members(assignment: np.ndarray, n: int) -> list[np.ndarray]:
    order = np.argsort(assignment, kind="stable")
    cuts = np.searchsorted(assignment[order], np.arange(1, n))
    return np.split(order, cuts)


class CoarseGraining:
    """Base class; subclasses fix the representation."""

    kind = "abstract"

    def __init__(self, dim: int, labels: Sequence):
        self.dim = int(dim)
        self.labels = tuple(labels)
        self.uid = next(_uids)

    @property
    def n_macrostates(self) -> int:
        return len(self.labels)

    @property
    def volumes(self) -> np.ndarray:
        raise NotImplementedError

    def range_block(self, i: int) -> KetBlock:
        """Orthonormal basis of the range of projector ``i``."""
        raise NotImplementedError

    def split(self, block: KetBlock):
        """Per-macrostate weights ``||P_i K||^2`` plus a context for :meth:`project`."""
        raise NotImplementedError

    def project(self, block: KetBlock, i: int, ctx) -> KetBlock:
        raise NotImplementedError

    def basis_matrix(self) -> tuple[np.ndarray, np.ndarray]:
        """Orthonormal columns spanning the space and the macrostate of each column."""
        raise NotImplementedError

    def projector(self, i: int) -> np.ndarray:
        b = self.range_block(i)
        out = np.zeros((self.dim, self.dim), dtype=b.data.dtype)
        rows = slice(None) if b.support is None else b.support
        sub = b.data @ b.data.conj().T
        if b.support is None:
            out[:] = sub
        else:
            out[np.ix_(rows, rows)] = sub
        return out

    def completeness_residual(self) -> float:
        """``max |sum_i P_i - 1|`` computed from the basis matrix."""
        U, _ = self.basis_matrix()
        return float(np.max(np.abs(U @ U.conj().T - np.eye(self.dim))))

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim}, macrostates={self.n_macrostates})"


class DiagonalPartition(CoarseGraining):
    kind = "diagonal"

    def __init__(self, assignment, labels=None):
        assignment = np.asarray(assignment, dtype=np.int64)
        n = int(assignment.max()) + 1 if len(assignment) else 0
        labels = tuple(range(n)) if labels is None else tuple(labels)
        if len(assignment) == 0 or assignment.min() < 0 or n > len(labels):
            raise ValidationError("assignment must map every index to a known macrostate")
        super().__init__(len(assignment), labels)
        self.assignment = assignment
        self.assignment.setflags(write=False)
        self._volumes = np.bincount(assignment, minlength=len(labels))
        if np.any(self._volumes == 0):
            raise ValidationError("every macrostate needs at least one basis index")
        self.members = _members(assignment, len(labels))

    @property
    def volumes(self):
        return self._volumes

    def range_block(self, i):
        idx = self.members[i]
        return KetBlock(idx, np.eye(len(idx)))

    def split(self, block):
        labs = self.assignment if block.support is None else self.assignment[block.support]
        rows = np.sum(np.abs(block.data) ** 2, axis=1)
        return np.bincount(labs, rows, minlength=self.n_macrostates), labs

    def project(self, block, i, labs):
        sel = np.flatnonzero(labs == i)
        support = sel if block.support is None else block.support[sel]
        return KetBlock(support, block.data[sel])

    def basis_matrix(self):
        return np.eye(self.dim), self.assignment

    def completeness_residual(self):
        return 0.0


class VectorGrouping(CoarseGraining):
    kind = "vectors"

    def __init__(self, vectors, assignment, labels=None, validate: bool = True):
        vectors = np.asarray(vectors)
        assignment = np.asarray(assignment, dtype=np.int64)
        if vectors.ndim != 2 or vectors.shape[0] != vectors.shape[1]:
            raise ValidationError("vector family must be a square matrix of columns")
        if assignment.shape != (vectors.shape[1],):
            raise ValidationError("need one macrostate index per vector")
        n = int(assignment.max()) + 1
        labels = tuple(range(n)) if labels is None else tuple(labels)
        if assignment.min() < 0 or n > len(labels):
            raise ValidationError("assignment refers to unknown macrostates")
        super().__init__(vectors.shape[0], labels)
        if validate:
            gram = vectors.conj().T @ vectors
            err = float(np.max(np.abs(gram - np.eye(self.dim))))
            if err > PROJECTOR_TOL:
                raise ValidationError(f"vectors are not orthonormal (residual {err:.2e})")
        self.vectors = vectors
        self.assignment = assignment
        self._volumes = np.bincount(assignment, minlength=len(labels))
        if np.any(self._volumes == 0):
            raise ValidationError("every macrostate needs at least one vector")
        self.members = _members(assignment, len(labels))

    @property
    def volumes(self):
        return self._volumes

    def range_block(self, i):
        return KetBlock(None, self.vectors[:, self.members[i]])

    def split(self, block):
        U = self.vectors if block.support is None else self.vectors[block.support]
        coeffs = adjoint_matmul(U, block.data)
        cols = np.sum(np.abs(coeffs) ** 2, axis=1)
        return np.bincount(self.assignment, cols, minlength=self.n_macrostates), coeffs

    def project(self, block, i, coeffs):
        idx = self.members[i]
        return KetBlock(None, matmul(self.vectors[:, idx], coeffs[idx]))

    def basis_matrix(self):
        return self.vectors, self.assignment


class IdentityCoarseGraining(CoarseGraining):
    kind = "identity"

    def __init__(self, dim: int):
        super().__init__(dim, ("all",))

    @property
    def volumes(self):
        return np.array([self.dim])

    def range_block(self, i):
        return KetBlock(None, np.eye(self.dim))

    def split(self, block):
        return np.array([block.weight()]), None

    def project(self, block, i, ctx):
        return block

    def basis_matrix(self):
        return np.eye(self.dim), np.zeros(self.dim, dtype=np.int64)

    def completeness_residual(self):
        return 0.0


def identity_coarse_graining(dim: int) -> IdentityCoarseGraining:
    return IdentityCoarseGraining(dim)


def positional_coarse_graining(basis: FockBasis, bins: BinPartition) -> DiagonalPartition:
    """Macrostates are the per-bin particle counts; labels are the count tuples."""
    sigs = occupation_signatures(basis, bins)
    uniq, inverse = np.unique(sigs, axis=0, return_inverse=True)
    labels = [tuple(int(c) for c in row) for row in uniq]
    return DiagonalPartition(inverse.ravel(), labels)


def energy_coarse_graining(
    sd: SpectralDecomposition,
    grouping: DegeneracyGrouping | None = None,
    bin_width: float | None = None,
) -> VectorGrouping:
    """Eigenprojectors of ``H``, merged by degeneracy group or energy window.

    With ``bin_width`` the spectrum is cut into consecutive windows of that
    width starting at the ground energy; a degenerate group is never split.
    Labels are group (or window) ordinals.
    """
    grouping = group_degenerate(sd) if grouping is None else grouping
    assignment = grouping.assignment
    if len(assignment) != sd.dim:
        raise ValidationError("grouping does not match the spectrum")
    if bin_width is not None:
        if not bin_width > 0:
            raise ValueError(f"bin width must be positive, got {bin_width}")
        e = sd.eigenvalues
        centers = np.array([e[g].mean() for g in grouping.groups])
        span = e[-1] - e[0]
        n_windows = max(1, int(np.ceil(span / bin_width - 1e-12)))
        window = np.minimum(np.floor((centers - e[0]) / bin_width).astype(np.int64), n_windows - 1)
        _, window = np.unique(window, return_inverse=True)
        assignment = window[assignment]
    return VectorGrouping(sd.eigenvectors, assignment)


def local_energy_product_coarse_graining(
    bd: BlockDecomposition, basis: FockBasis, tol: float = DEFAULT_DEGENERACY_TOL
) -> VectorGrouping:
    """Products of local block eigenvectors, grouped by block-energy tuples.

    Local levels of a block are pooled over all its fillings and grouped with
    ``tol``; a product vector's label is the tuple of its blocks' group
    ordinals. Concatenating block creation strings in block order reproduces
    the ascending-site string, so the products enter with sign ``+1``.
    """
    if bd.params.L != basis.L or bd.params.N != basis.N:
        raise InvalidPartitionError("block decomposition and basis describe different lattices")
    for (a, z), (c, _) in zip(bd.blocks, bd.blocks[1:]):
        if z != c:
            raise InvalidPartitionError("blocks are not contiguous")
    if bd.blocks[0][0] != 0 or bd.blocks[-1][1] != basis.L:
        raise InvalidPartitionError("blocks do not cover the lattice")

    N = basis.N
    per_block = []
    for k, (a, z) in enumerate(bd.blocks):
        spectra = {n: diagonalize(h) for n, h in bd.local_hamiltonians[k].items()}
        fills = sorted(spectra)
        pooled = np.concatenate([spectra[n].eigenvalues for n in fills])
        order = np.argsort(pooled, kind="stable")
        runs = np.empty(len(pooled), dtype=np.int64)
        runs[order] = group_values(pooled[order], tol)
        offsets = np.cumsum([0] + [spectra[n].dim for n in fills])
        level_group = {n: runs[offsets[i]:offsets[i + 1]] for i, n in enumerate(fills)}
        patterns = {n: enumerate_basis((z - a, n)).states for n in fills}
        per_block.append((a, spectra, level_group, patterns))

    d = basis.dim
    vectors = np.zeros((d, d))
    labels_per_col = np.zeros((d, len(bd.blocks)), dtype=np.int64)
    col = 0
    sizes = [z - a for a, z in bd.blocks]
    for filling in itertools.product(*(range(s + 1) for s in sizes)):
        if sum(filling) != N:
            continue
        mats, pats, groups = [], [], []
        for (a, spectra, level_group, patterns), n in zip(per_block, filling):
            mats.append(spectra[n].eigenvectors)
            pats.append(patterns[n] << np.uint64(a))
            groups.append(level_group[n])
        block_vecs = reduce(np.kron, mats)
        full = reduce(lambda x, y: (x[:, None] | y[None, :]).ravel(), pats)
        rows = basis.index(full)
        n_cols = block_vecs.shape[1]
        vectors[rows, col:col + n_cols] = block_vecs
        grid = np.meshgrid(*groups, indexing="ij")
        labels_per_col[col:col + n_cols] = np.stack([g.ravel() for g in grid], axis=1)
        col += n_cols
    if col != d:
        raise InvalidPartitionError(f"product family has {col} vectors for dimension {d}")
    uniq, assignment = np.unique(labels_per_col, axis=0, return_inverse=True)
    labels = [tuple(int(x) for x in row) for row in uniq]
    return VectorGrouping(vectors, assignment.ravel(), labels)


def state_induced_coarse_graining(rho, tol: float = DEFAULT_DEGENERACY_TOL) -> VectorGrouping:
    """Spectral projectors of a density matrix, eigenvalues merged within ``tol``."""
    rho = np.asarray(rho)
    if rho.ndim == 1:
        rho = np.outer(rho, rho.conj())
    if not np.allclose(rho, rho.conj().T, atol=PROJECTOR_TOL, rtol=0):
        raise ValidationError("density matrix is not Hermitian")
    lam, vec = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    if lam[0] < -PSD_TOL:
        raise ValidationError(f"density matrix has eigenvalue {lam[0]:.3e} < 0")
    runs = group_values(lam, tol)
    return VectorGrouping(vec, runs)


def tensor_product(a: CoarseGraining, b: CoarseGraining) -> CoarseGraining:
    """Coarse-graining ``{P_i (x) Q_j}`` on the (plain, non-fermionic) product space."""
    labels = [(la, lb) for la in a.labels for lb in b.labels]
    if isinstance(a, IdentityCoarseGraining) and isinstance(b, IdentityCoarseGraining):
        return IdentityCoarseGraining(a.dim * b.dim)
    Ua, ga = a.basis_matrix()
    Ub, gb = b.basis_matrix()
    assignment = (ga[:, None] * b.n_macrostates + gb[None, :]).ravel()
    if isinstance(a, DiagonalPartition | IdentityCoarseGraining) and isinstance(b, DiagonalPartition | IdentityCoarseGraining):
        return DiagonalPartition(assignment, labels)
    return VectorGrouping(np.kron(Ua, Ub), assignment, labels)


def _is_diagonal(cg) -> bool:
    return isinstance(cg, (DiagonalPartition, IdentityCoarseGraining))


def refines(fine: CoarseGraining, coarse: CoarseGraining) -> bool:
    """True when every projector of ``coarse`` is a sum of projectors of ``fine``.

    Partitions of basis indices are compared exactly. Anything involving an
    orthonormal vector family is decided from overlaps ``||Q_c P_f||_F^2``:
    each fine projector must lie inside one coarse projector, missing at most
    ``1e-10`` of its squared norm. Deficits between ``1e-10`` and ``1e-6``
    cannot be told apart from roundoff and raise
    :class:`UnsupportedComparisonError`.
    """
    if fine.dim != coarse.dim:
        raise DimensionMismatchError(f"dimensions differ: {fine.dim} vs {coarse.dim}")
    if isinstance(coarse, IdentityCoarseGraining):
        return True
    if isinstance(fine, IdentityCoarseGraining):
        return coarse.n_macrostates == 1
    if isinstance(fine, DiagonalPartition) and isinstance(coarse, DiagonalPartition):
        for idx in fine.members:
            if len(np.unique(coarse.assignment[idx])) != 1:
                return False
        return True

    Uf, gf = fine.basis_matrix()
    Uc, gc = coarse.basis_matrix()
    overlap = np.abs(Uc.conj().T @ Uf) ** 2
    # mass[c, f] = ||Q_c P_f||_F^2, bounded by rank(P_f)
    rows, cols = np.argsort(gc, kind="stable"), np.argsort(gf, kind="stable")
    overlap = overlap[np.ix_(rows, cols)]
    mass = np.add.reduceat(overlap, np.searchsorted(gc[rows], np.arange(coarse.n_macrostates)), axis=0)
    mass = np.add.reduceat(mass, np.searchsorted(gf[cols], np.arange(fine.n_macrostates)), axis=1)
    ranks = fine.volumes.astype(float)
    best = mass.max(axis=0)
    # squared Frobenius norm of the part of P_f outside its best coarse projector
    residual = float(np.max(np.clip(ranks - best, 0.0, None)))
    if residual <= PROJECTOR_TOL:
        return True
    if residual >= AMBIGUOUS_TOL:
        return False
    raise UnsupportedComparisonError(
        f"refinement residual {residual:.2e} is between {PROJECTOR_TOL} and {AMBIGUOUS_TOL}"
    )
