"""Observational entropy and the reference entropies it is compared with.

For an ordered sequence of coarse-grainings ``(C_1, ..., C_n)``

    p_i = tr[P_in ... P_i1 rho P_i1 ... P_in]
    V_i = tr[P_in ... P_i1 ... P_in]
    S_O = -sum_{p_i > 0} p_i ln(p_i / V_i)

Writing ``rho = K K†`` turns ``p_i`` into ``||P_in ... P_i1 K||_F^2``, so
pure states, mixtures and the identity all run through one depth-first walk
over macrostate chains. ``V_i`` is the same walk started from an orthonormal
basis of each ``P_i1``.
"""

from __future__ import annotations

import threading
from collections import OrderedDict
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .coarsegrain import CoarseGraining, KetBlock
from .errors import DimensionMismatchError, NumericalConsistencyError, OutOfSupportError, ValidationError
from .fockspace import FockBasis, reduced_density_matrix
from .spectral import SpectralDecomposition
from .states import Ensemble, as_kets, is_pure

DEFAULT_CUTOFF = 1e-14
MAX_CUTOFF = 1e-10
NEGATIVE_P_TOL = 1e-12
VN_EIGEN_CUTOFF = 1e-14


class EntropyValue(float):
    """A float in nats tagged with the kind of entropy it is."""

    def __new__(cls, value, kind: str = "S_O"):
        obj = super().__new__(cls, value)
        obj.kind = kind
        return obj

    @property
    def value(self) -> float:
        return float(self)

    def __repr__(self):
        return f"EntropyValue({float(self)!r}, kind={self.kind!r})"


@dataclass(frozen=True, eq=False)
class MacrostateDistribution:
    """Visited macrostate tuples with their probabilities and volumes.

    ``index`` holds one row of macrostate ordinals per tuple, sorted
    lexicographically; ``labels`` maps them back to coarse-graining labels.
    """

    cgs: tuple[CoarseGraining, ...]
    index: np.ndarray
    p: np.ndarray
    V: np.ndarray
    pruned_mass: float

    def __len__(self) -> int:
        return len(self.p)

    @property
    def labels(self) -> list[tuple]:
        return [tuple(cg.labels[i] for cg, i in zip(self.cgs, row)) for row in self.index]

    def entries(self):
        return list(zip(self.labels, self.p.tolist(), self.V.tolist()))


def _strides(cgs) -> np.ndarray:
    sizes = [cg.n_macrostates for cg in cgs]
    strides = np.ones(len(sizes), dtype=object)
    for k in range(len(sizes) - 2, -1, -1):
        strides[k] = strides[k + 1] * sizes[k + 1]
    total = int(np.prod([int(s) for s in sizes], dtype=object))
    if total >= 2**63:
        raise OverflowError("too many macrostate tuples to encode")
    return strides.astype(np.int64)


def _walk(block: KetBlock, cgs, level: int, code: int, strides, cutoff: float, codes, weights, pruned):
    cg = cgs[level]
    w, ctx = cg.split(block)
    keep = w > cutoff
    pruned.append(float(np.sum(w[~keep])))
    idx = np.flatnonzero(keep)
    if level == len(cgs) - 1:
        codes.append(code + idx * strides[level])
        weights.append(w[idx])
        return
    for i in idx:
        _walk(cg.project(block, int(i), ctx), cgs, level + 1, code + int(i) * int(strides[level]),
              strides, cutoff, codes, weights, pruned)


def _collect(codes, weights):
    if codes:
        c = np.concatenate(codes).astype(np.int64)
        w = np.concatenate(weights)
    else:
        c, w = np.zeros(0, dtype=np.int64), np.zeros(0)
    order = np.argsort(c, kind="stable")
    return c[order], w[order]


def _check_sequence(cgs, dim: int | None = None):
    cgs = tuple(cgs)
    if not cgs:
        raise ValueError("need at least one coarse-graining")
    d = cgs[0].dim if dim is None else dim
    for cg in cgs:
        if not isinstance(cg, CoarseGraining):
            raise TypeError(f"{cg!r} is not a coarse-graining")
        if cg.dim != d:
            raise DimensionMismatchError(f"coarse-graining of dimension {cg.dim} on a space of dimension {d}")
    return cgs


class _VolumeCache:
    """Thread-safe LRU of sequential volumes keyed by coarse-graining ids."""

    def __init__(self, maxsize: int = 32):
        self._data: OrderedDict = OrderedDict()
        self._lock = threading.Lock()
        self.maxsize = maxsize

    def get(self, key):
        with self._lock:
            if key in self._data:
                self._data.move_to_end(key)
                return self._data[key]
        return None

    def put(self, key, value):
        with self._lock:
            self._data[key] = value
            self._data.move_to_end(key)
            while len(self._data) > self.maxsize:
                self._data.popitem(last=False)

    def clear(self):
        with self._lock:
            self._data.clear()


volume_cache = _VolumeCache()


def sequence_volumes(cgs: Sequence[CoarseGraining], cutoff: float = DEFAULT_CUTOFF):
    """Codes and volumes of every chain whose volume exceeds ``cutoff``.

    Any chain with ``p > cutoff`` for a normalized state has ``V >= p``, so
    pruning volumes at half the entropy cutoff never drops a visited tuple.
    """
    cgs = _check_sequence(cgs)
    key = (tuple(cg.uid for cg in cgs), float(cutoff))
    hit = volume_cache.get(key)
    if hit is not None:
        return hit
    strides = _strides(cgs)
    first = cgs[0]
    if len(cgs) == 1:
        codes = np.arange(first.n_macrostates, dtype=np.int64)
        vols = first.volumes.astype(float)
    else:
        cs, ws, pruned = [], [], []
        for i in range(first.n_macrostates):
            _walk(first.range_block(i), cgs, 1, i * int(strides[0]), strides, cutoff / 2, cs, ws, pruned)
        codes, vols = _collect(cs, ws)
    codes.setflags(write=False)
    vols.setflags(write=False)
    value = (codes, vols)
    volume_cache.put(key, value)
    return value


def macrostate_distribution(state, cgs: Sequence[CoarseGraining], cutoff: float = DEFAULT_CUTOFF) -> MacrostateDistribution:
    """Probabilities and volumes of all macrostate chains visited by ``state``."""
    if not 0 <= cutoff <= MAX_CUTOFF:
        raise ValueError(f"cutoff must lie in [0, {MAX_CUTOFF}], got {cutoff}")
    cgs = _check_sequence(cgs)
    kets = as_kets(state, cgs[0].dim)
    strides = _strides(cgs)
    cs, ws, pruned = [], [], []
    _walk(KetBlock(None, kets), cgs, 0, 0, strides, cutoff, cs, ws, pruned)
    codes, p = _collect(cs, ws)

    vcodes, vols = sequence_volumes(cgs, cutoff)
    pos = np.searchsorted(vcodes, codes)
    pos_c = np.minimum(pos, max(len(vcodes) - 1, 0))
    if len(codes) and (len(vcodes) == 0 or np.any(vcodes[pos_c] != codes)):
        raise NumericalConsistencyError("a visited macrostate chain has no recorded volume")
    V = vols[pos_c] if len(codes) else np.zeros(0)
    if np.any(p > V * (1 + 1e-9) + 1e-12):
        raise NumericalConsistencyError("macrostate probability exceeds its volume")

    index = np.zeros((len(codes), len(cgs)), dtype=np.int64)
    rem = codes.copy()
    for k, s in enumerate(strides):
        index[:, k], rem = np.divmod(rem, s)
    return MacrostateDistribution(cgs, index, p, V, float(sum(sorted(pruned))))


def _entropy_from(p: np.ndarray, V: np.ndarray) -> float:
    return float(-np.sum(p * np.log(p / V))) + 0.0


def observational_entropy(state, cgs: Sequence[CoarseGraining], cutoff: float = DEFAULT_CUTOFF, kind: str = "S_O"):
    """``S_O(C_1, ..., C_n)(state)`` in nats, together with its distribution."""
    dist = macrostate_distribution(state, cgs, cutoff)
    return EntropyValue(_entropy_from(dist.p, dist.V), kind), dist


def s_xe(state, positional: CoarseGraining, energy: CoarseGraining, cutoff: float = DEFAULT_CUTOFF) -> EntropyValue:
    """Position-then-energy observational entropy."""
    return observational_entropy(state, (positional, energy), cutoff, "S_xE")[0]


def s_foe(state, local_energy: CoarseGraining, cutoff: float = DEFAULT_CUTOFF) -> EntropyValue:
    """Factorized observational entropy from the local-energy product coarse-graining."""
    return observational_entropy(state, (local_energy,), cutoff, "S_FOE")[0]


def s_diag(state, energy: CoarseGraining, cutoff: float = DEFAULT_CUTOFF) -> EntropyValue:
    """Diagonal entropy: observational entropy in the Hamiltonian eigenbasis."""
    return observational_entropy(state, (energy,), cutoff, "S_diag")[0]


def kl_identity_check(state, cgs: Sequence[CoarseGraining], cutoff: float = 0.0) -> float:
    """``|S_O - (ln dim - KL(P(rho) || P(1/dim)))|``.

    The reference distribution is obtained by walking the maximally mixed
    state, not from the cached volumes, so the residual compares two routes.
    """
    cgs = _check_sequence(cgs)
    d = cgs[0].dim
    S, dist = observational_entropy(state, cgs, cutoff)
    ref = macrostate_distribution(Ensemble(np.full(d, 1.0 / d), np.eye(d)), cgs, cutoff)
    codes = dist.index @ _strides(cgs)
    ref_codes = ref.index @ _strides(cgs)
    q = ref.p[np.searchsorted(ref_codes, codes)]
    kl = float(np.sum(dist.p * np.log(dist.p / q)))
    return abs(float(S) - (np.log(d) - kl))


def _shannon(lam: np.ndarray) -> float:
    lam = lam[lam > VN_EIGEN_CUTOFF]
    return float(-np.sum(lam * np.log(lam)))


def von_neumann_entropy(state) -> EntropyValue:
    if is_pure(state):
        as_kets(state)
        return EntropyValue(0.0, "S_VN")
    if isinstance(state, Ensemble):
        k = as_kets(state)
        lam = np.linalg.eigvalsh(k.conj().T @ k)
    else:
        rho = np.asarray(state)
        if not np.allclose(rho, rho.conj().T, atol=1e-10, rtol=0):
            raise ValidationError("density matrix is not Hermitian")
        lam = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
        if lam[0] < -NEGATIVE_P_TOL:
            raise ValidationError(f"density matrix has eigenvalue {lam[0]:.3e} < 0")
    return EntropyValue(_shannon(lam), "S_VN")


def entanglement_entropy(psi: np.ndarray, basis: FockBasis, keep) -> EntropyValue:
    """Von Neumann entropy of the reduced state of a contiguous block of sites."""
    if not is_pure(psi):
        raise ValidationError("entanglement entropy is defined here for pure states only")
    rho = reduced_density_matrix(psi, basis, keep)
    return EntropyValue(_shannon(np.linalg.eigvalsh(rho)), "S_ent")


def dos_window(sd, N: int) -> float:
    """Energy window ``sigma(E) / sqrt(N)`` over the full spectrum."""
    evals = sd.eigenvalues if isinstance(sd, SpectralDecomposition) else np.asarray(sd)
    return float(np.std(evals) / np.sqrt(N))


def dos_entropy(sd, E: float, N: int, window: float | None = None) -> EntropyValue:
    """``ln(rho(E) dE)``: log of the level count in ``[E - dE/2, E + dE/2]``."""
    evals = sd.eigenvalues if isinstance(sd, SpectralDecomposition) else np.sort(np.asarray(sd, dtype=float))
    dE = dos_window(evals, N) if window is None else window
    lo = np.searchsorted(evals, E - dE / 2, side="left")
    hi = np.searchsorted(evals, E + dE / 2, side="right")
    count = int(hi - lo)
    if count == 0:
        raise OutOfSupportError(f"no levels within {dE:.4g} of E={E}")
    return EntropyValue(np.log(count), "S_DOS")


def _gibbs(evals: np.ndarray, beta: float):
    ref = evals[0] if beta >= 0 else evals[-1]
    w = np.exp(-beta * (evals - ref))
    Z = w.sum()
    return w / Z, ref, Z


def canonical_mean_energy(sd, beta: float) -> float:
    evals = sd.eigenvalues if isinstance(sd, SpectralDecomposition) else np.asarray(sd, dtype=float)
    probs, _, _ = _gibbs(evals, beta)
    return float(np.sum(probs * evals))


def canonical_entropy(sd, beta: float) -> EntropyValue:
    """``beta <E> + ln Z`` of the Gibbs state, evaluated with a shifted exponent."""
    if not np.isfinite(beta):
        raise ValueError("beta must be finite")
    evals = sd.eigenvalues if isinstance(sd, SpectralDecomposition) else np.sort(np.asarray(sd, dtype=float))
    probs, ref, Z = _gibbs(evals, beta)
    mean = float(np.sum(probs * evals))
    return EntropyValue(beta * (mean - ref) + np.log(Z), "S_can")


def match_beta(sd, target: float, max_iter: int = 400) -> float:
    """Inverse temperature whose Gibbs mean energy equals ``target`` (bisection)."""
    evals = sd.eigenvalues if isinstance(sd, SpectralDecomposition) else np.sort(np.asarray(sd, dtype=float))
    lo_e, hi_e = float(evals[0]), float(evals[-1])
    span = hi_e - lo_e
    if not lo_e < target < hi_e:
        raise OutOfSupportError(f"target energy {target} outside ({lo_e}, {hi_e})")
    tol = 1e-9 * span
    mean0 = float(np.mean(evals))
    if abs(mean0 - target) <= tol:
        return 0.0
    # <E>_beta decreases in beta: positive beta below the mean, negative above
    sign = 1.0 if target < mean0 else -1.0
    b_in, b_out = 0.0, sign / span
    for _ in range(200):
        if (canonical_mean_energy(evals, b_out) - target) * sign < 0:
            break
        b_in, b_out = b_out, 2 * b_out
    else:
        raise OutOfSupportError(f"target energy {target} is not reachable at finite beta")
    for _ in range(max_iter):
        mid = 0.5 * (b_in + b_out)
        diff = canonical_mean_energy(evals, mid) - target
        if abs(diff) <= tol:
            return mid
        if diff * sign > 0:
            b_in = mid
        else:
            b_out = mid
    return 0.5 * (b_in + b_out)
