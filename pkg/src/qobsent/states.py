"""State containers and conversions shared by the entropy routines.

States are plain arrays: a 1-d array is a ket, a square 2-d array is a
density matrix. :class:`Ensemble` carries a mixed state that is already
known as a weighted set of kets, which avoids diagonalizing a large density
matrix just to recover that decomposition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, ValidationError

NORM_TOL = 1e-8
PSD_TOL = 1e-12


@dataclass(frozen=True)
class Ensemble:
    """Mixed state ``sum_k weights[k] |v_k><v_k|`` (columns of ``vectors``)."""

    weights: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        v = np.asarray(self.vectors)
        if v.ndim != 2 or w.shape != (v.shape[1],):
            raise DimensionMismatchError("need one weight per column of vectors")
        if np.any(w < 0):
            raise ValidationError("ensemble weights must be non-negative")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "vectors", v)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    def kets(self) -> np.ndarray:
        return self.vectors * np.sqrt(self.weights)[None, :]

    def density_matrix(self) -> np.ndarray:
        k = self.kets()
        return k @ k.conj().T


def is_pure(state) -> bool:
    return isinstance(state, np.ndarray) and state.ndim == 1


def state_dim(state) -> int:
    if isinstance(state, Ensemble):
        return state.dim
    return np.asarray(state).shape[0]


def as_kets(state, dim: int | None = None, check: bool = True) -> np.ndarray:
    """Factor a state as ``K`` with ``rho = K K†``; kets come back as one column.

    Density matrices are diagonalized; eigenvalues in ``[-1e-12, 0)`` are
    treated as zero and anything more negative is rejected.
    """
    if isinstance(state, Ensemble):
        kets = state.kets()
    else:
        arr = np.asarray(state)
        if arr.ndim == 1:
            kets = arr[:, None]
        elif arr.ndim == 2 and arr.shape[0] == arr.shape[1]:
            if check and not np.allclose(arr, arr.conj().T, atol=1e-10, rtol=0):
                raise ValidationError("density matrix is not Hermitian")
            lam, vec = np.linalg.eigh(0.5 * (arr + arr.conj().T))
            if lam.min(initial=0.0) < -PSD_TOL:
                raise ValidationError(f"density matrix has eigenvalue {lam.min():.3e} < 0")
            keep = lam > 0
            kets = vec[:, keep] * np.sqrt(lam[keep])[None, :]
        else:
            raise DimensionMismatchError(f"cannot interpret array of shape {arr.shape} as a state")
    if dim is not None and kets.shape[0] != dim:
        raise DimensionMismatchError(f"state dimension {kets.shape[0]} != space dimension {dim}")
    if check:
        tr = float(np.vdot(kets, kets).real)
        if abs(tr - 1.0) > NORM_TOL:
            raise ValidationError(f"state is not normalized (trace {tr:.12g})")
    return kets


def density_matrix(state) -> np.ndarray:
    if isinstance(state, Ensemble):
        return state.density_matrix()
    arr = np.asarray(state)
    if arr.ndim == 1:
        return np.outer(arr, arr.conj())
    return arr
