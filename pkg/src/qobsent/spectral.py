"""Dense Hermitian eigendecomposition, degeneracy grouping and exact evolution."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._linalg import adjoint_matmul, matmul
from .errors import DimensionMismatchError, ValidationError

DEFAULT_DEGENERACY_TOL = 1e-8
HERMITIAN_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Ascending eigenvalues with eigenvectors as orthonormal columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        U = self.eigenvectors
        return (U * self.eigenvalues[None, :]) @ U.conj().T

    def amplitudes(self, psi: np.ndarray) -> np.ndarray:
        """Coefficients of ``psi`` in the eigenbasis."""
        return adjoint_matmul(self.eigenvectors, psi)

    def energy(self, state) -> float:
        """``<H>`` of a ket or density matrix."""
        state = np.asarray(state)
        if state.ndim == 1:
            c = self.amplitudes(state)
            return float(np.sum(self.eigenvalues * np.abs(c) ** 2))
        U = self.eigenvectors
        pops = np.sum(U.conj() * matmul(state, U), axis=0).real
        return float(np.sum(self.eigenvalues * pops))


def fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude entry of each column real and positive."""
    rows = np.argmax(np.abs(vectors), axis=0)
    pivot = vectors[rows, np.arange(vectors.shape[1])]
    phase = pivot / np.abs(pivot)
    return vectors * phase.conj()[None, :]


def diagonalize(H: np.ndarray, check: bool = True) -> SpectralDecomposition:
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {H.shape}")
    if check:
        scale = max(1.0, float(np.max(np.abs(H), initial=0.0)))
        if np.max(np.abs(H - H.conj().T), initial=0.0) > HERMITIAN_TOL * scale:
            raise ValidationError("matrix is not Hermitian")
    evals, evecs = np.linalg.eigh(H)
    evecs = fix_phases(evecs)
    evals.setflags(write=False)
    evecs.setflags(write=False)
    return SpectralDecomposition(evals, evecs)


@dataclass(frozen=True)
class DegeneracyGrouping:
    """Maximal runs of eigenindices whose consecutive gaps are ``<= tol``."""

    groups: tuple[np.ndarray, ...]
    tol: float

    def __len__(self) -> int:
        return len(self.groups)

    @property
    def assignment(self) -> np.ndarray:
        """Group ordinal of every eigenindex."""
        sizes = [len(g) for g in self.groups]
        return np.repeat(np.arange(len(sizes)), sizes)

    @property
    def sizes(self) -> np.ndarray:
        return np.array([len(g) for g in self.groups], dtype=np.int64)


def group_values(values: np.ndarray, tol: float) -> np.ndarray:
    """Run labels for sorted ``values``: a new run starts at each gap ``> tol``."""
    values = np.asarray(values, dtype=float)
    if len(values) == 0:
        return np.zeros(0, dtype=np.int64)
    breaks = np.diff(values) > tol
    return np.concatenate([[0], np.cumsum(breaks)]).astype(np.int64)


def group_degenerate(sd: SpectralDecomposition | np.ndarray, tol: float = DEFAULT_DEGENERACY_TOL) -> DegeneracyGrouping:
    if tol < 0:
        raise ValueError("tolerance must be non-negative")
    evals = sd.eigenvalues if isinstance(sd, SpectralDecomposition) else np.asarray(sd)
    runs = group_values(evals, tol)
    cuts = np.flatnonzero(np.diff(runs)) + 1
    groups = tuple(np.split(np.arange(len(evals)), cuts)) if len(evals) else ()
    return DegeneracyGrouping(groups, float(tol))


def evolve_state(sd: SpectralDecomposition, psi0: np.ndarray, t):
    """``exp(-iHt) psi0`` for a scalar time, or one column per time for an array."""
    psi0 = np.asarray(psi0)
    if psi0.shape != (sd.dim,):
        raise DimensionMismatchError(f"state of shape {psi0.shape} vs dimension {sd.dim}")
    c0 = sd.amplitudes(psi0)
    times = np.asarray(t, dtype=float)
    if times.ndim == 0:
        if times == 0:
            return psi0.astype(complex)
        return matmul(sd.eigenvectors, np.exp(-1j * sd.eigenvalues * times) * c0)
    phases = np.exp(-1j * np.outer(sd.eigenvalues, times))
    return matmul(sd.eigenvectors, phases * c0[:, None])
