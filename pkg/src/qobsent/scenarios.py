"""State factories and the two numerical experiments.

``run_quench`` starts from a thermal pure state in a short box, lets it
evolve, doubles the box at ``quench_time`` and keeps evolving. ``run_sweep``
evaluates equilibrium-like states (eigenstates, random superpositions of
neighbouring eigenstates, microcanonical mixtures) across the spectrum.
Both return row dictionaries with a fixed key order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .coarsegrain import (
    energy_coarse_graining,
    local_energy_product_coarse_graining,
    positional_coarse_graining,
)
from .entropy import (
    canonical_entropy,
    dos_entropy,
    entanglement_entropy,
    match_beta,
    s_diag,
    s_foe,
    s_xe,
    von_neumann_entropy,
)
from .errors import DimensionMismatchError, InvalidSpecError, OutOfSupportError
from .fockspace import BinPartition, FockBasis, LatticeSpec, embedding_indices, enumerate_basis
from .model import ModelParams, build_hamiltonian, decompose_blocks
from .spectral import DEFAULT_DEGENERACY_TOL, SpectralDecomposition, diagonalize, evolve_state, group_degenerate
from ._linalg import matmul
from .states import Ensemble

QUENCH_KINDS = ("S_xE", "S_FOE", "S_diag", "S_VN_half")
SWEEP_KINDS = ("eigenstate", "superposition", "microcanonical")
COMPUTE_KINDS = ("S_xE", "S_FOE", "S_diag", "S_VN", "S_VN_half", "S_DOS", "S_can")


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def thermal_pure_state(sd: SpectralDecomposition, beta: float, seed=None) -> np.ndarray:
    """Random superposition of all levels with Gibbs-weighted amplitude variance.

    ``c_n = z_n exp(-beta E_n / 2)`` with ``z_n`` standard complex Gaussian,
    then normalized. The exponent is shifted by the ground energy, which the
    normalization absorbs.
    """
    if not np.isfinite(beta):
        raise ValueError("beta must be finite")
    rng = _rng(seed)
    d = sd.dim
    z = (rng.standard_normal(d) + 1j * rng.standard_normal(d)) / np.sqrt(2)
    e = sd.eigenvalues
    ref = e[0] if beta >= 0 else e[-1]
    c = z * np.exp(-0.5 * beta * (e - ref))
    c /= np.linalg.norm(c)
    return matmul(sd.eigenvectors, c)


def energy_window(dim: int, center: int, k: int) -> slice:
    start = center - k // 2
    if k < 1 or start < 0 or start + k > dim:
        raise OutOfSupportError(f"window of {k} levels around {center} does not fit in {dim} levels")
    return slice(start, start + k)


def random_superposition(sd: SpectralDecomposition, center: int, k: int, seed=None) -> np.ndarray:
    """``k`` neighbouring eigenstates with i.i.d. amplitudes uniform on the unit disk."""
    window = energy_window(sd.dim, center, k)
    rng = _rng(seed)
    r = np.sqrt(rng.uniform(size=k))
    a = r * np.exp(2j * np.pi * rng.uniform(size=k))
    a /= np.linalg.norm(a)
    return matmul(sd.eigenvectors[:, window], a)


def microcanonical_ensemble(sd: SpectralDecomposition, center: int, k: int) -> Ensemble:
    window = energy_window(sd.dim, center, k)
    return Ensemble(np.full(k, 1.0 / k), sd.eigenvectors[:, window])


def microcanonical_mixture(sd: SpectralDecomposition, center: int, k: int) -> np.ndarray:
    """Equal-weight density matrix of ``k`` neighbouring eigenstates."""
    return microcanonical_ensemble(sd, center, k).density_matrix()


def schedule(t_max: float = 90.0, dt: float = 0.25) -> tuple[float, ...]:
    n = int(round(t_max / dt))
    return tuple(float(x) for x in np.round(np.arange(n + 1) * dt, 12))


Diagonalizer = Callable[[ModelParams, np.ndarray], SpectralDecomposition]


def default_diagonalizer(params: ModelParams, H: np.ndarray) -> SpectralDecomposition:
    return diagonalize(H)


@dataclass(eq=False)
class ChainSystem:
    """One chain with its spectrum and lazily built coarse-grainings."""

    params: ModelParams
    p: int
    m: int
    tol: float = DEFAULT_DEGENERACY_TOL
    diagonalizer: Diagonalizer = field(default=default_diagonalizer, repr=False)

    def __post_init__(self):
        self.bins = BinPartition.uniform(self.params.L, self.p)
        if self.params.L % self.m:
            raise InvalidSpecError(f"{self.m} blocks do not divide L={self.params.L}")

    @cached_property
    def basis(self) -> FockBasis:
        return enumerate_basis(self.params.lattice)

    @cached_property
    def hamiltonian(self) -> np.ndarray:
        return build_hamiltonian(self.params, self.basis)

    @cached_property
    def sd(self) -> SpectralDecomposition:
        return self.diagonalizer(self.params, self.hamiltonian)

    @cached_property
    def c_x(self):
        return positional_coarse_graining(self.basis, self.bins)

    @cached_property
    def c_e(self):
        return energy_coarse_graining(self.sd, group_degenerate(self.sd, self.tol))

    @cached_property
    def c_foe(self):
        return local_energy_product_coarse_graining(decompose_blocks(self.params, self.m, self.basis), self.basis, self.tol)

    @property
    def half(self) -> range:
        return range(0, self.params.L // 2)

    def entropies(self, state, kinds: Sequence[str]) -> dict[str, float]:
        out = {}
        for kind in kinds:
            if kind == "S_xE":
                out[kind] = float(s_xe(state, self.c_x, self.c_e))
            elif kind == "S_FOE":
                out[kind] = float(s_foe(state, self.c_foe))
            elif kind == "S_diag":
                out[kind] = float(s_diag(state, self.c_e))
            elif kind == "S_VN":
                out[kind] = float(von_neumann_entropy(state))
            elif kind == "S_VN_half":
                out[kind] = float(entanglement_entropy(state, self.basis, self.half))
            else:
                raise ValueError(f"unknown entropy kind {kind!r}")
        return out


@dataclass(frozen=True)
class QuenchSpec:
    pre_lattice: LatticeSpec
    post_lattice: LatticeSpec
    quench_time: float = 30.0
    schedule: tuple[float, ...] = field(default_factory=schedule)
    beta: float = 1.0
    seed: int = 0
    canonical_beta: str = "matched"
    offset: int = 0

    def __post_init__(self):
        if self.pre_lattice.N != self.post_lattice.N:
            raise InvalidSpecError("particle number must be equal before and after the quench")
        if self.pre_lattice.L + self.offset > self.post_lattice.L:
            raise DimensionMismatchError("initial box does not fit in the enlarged box")
        if self.canonical_beta not in ("matched", "initial"):
            raise InvalidSpecError(f"canonical_beta must be 'matched' or 'initial', got {self.canonical_beta!r}")
        ts = np.asarray(self.schedule, dtype=float)
        if len(ts) == 0 or np.any(np.diff(ts) < 0):
            raise InvalidSpecError("schedule must be a non-empty ascending list of times")
        if ts[0] < 0 or self.quench_time < ts[0]:
            raise InvalidSpecError("quench time must not precede the schedule")


def quench_columns(kinds: Sequence[str]) -> list[str]:
    return ["t", *[k for k in QUENCH_KINDS if k in kinds], "E_mean", "S_can"]


def run_quench(
    spec: QuenchSpec,
    params: ModelParams,
    p: int,
    m: int,
    kinds: Sequence[str] = QUENCH_KINDS,
    tol: float = DEFAULT_DEGENERACY_TOL,
    diagonalizer: Diagonalizer = default_diagonalizer,
    post: ChainSystem | None = None,
    pre_sd: SpectralDecomposition | None = None,
) -> list[dict]:
    """Entropy time series across a box-doubling quench.

    Before ``quench_time`` the state evolves under the short-box Hamiltonian
    and is embedded into the long box (extra sites empty) for every
    measurement; all coarse-grainings belong to the long box throughout.
    ``E_mean`` is the energy under whichever Hamiltonian is acting, and
    ``S_can`` the canonical entropy of that Hamiltonian at the matched (or
    initial) inverse temperature.
    """
    unknown = set(kinds) - set(QUENCH_KINDS)
    if unknown:
        raise ValueError(f"unknown entropy kinds {sorted(unknown)}")
    pre_params = params.on_lattice(spec.pre_lattice.L, spec.pre_lattice.N)
    post_params = params.on_lattice(spec.post_lattice.L, spec.post_lattice.N)
    if post is None:
        post = ChainSystem(post_params, p, m, tol, diagonalizer)
    pre_basis = enumerate_basis(pre_params.lattice)
    if pre_sd is None:
        pre_sd = diagonalizer(pre_params, build_hamiltonian(pre_params, pre_basis))
    idx = embedding_indices(pre_basis, post.basis, spec.offset)

    def embed(psi):
        out = np.zeros(post.basis.dim, dtype=complex)
        out[idx] = psi
        return out

    psi0 = thermal_pure_state(pre_sd, spec.beta, spec.seed)
    times = np.asarray(spec.schedule, dtype=float)
    before = times[times < spec.quench_time]
    after = times[times >= spec.quench_time]

    def beta_for(sd, energy):
        return spec.beta if spec.canonical_beta == "initial" else match_beta(sd, energy)

    columns = quench_columns(kinds)
    ordered = [k for k in QUENCH_KINDS if k in kinds]
    rows = []
    if len(before):
        pre_states = evolve_state(pre_sd, psi0, before)
        s_can_pre = float(canonical_entropy(pre_sd, beta_for(pre_sd, pre_sd.energy(psi0))))
        for j, t in enumerate(before):
            psi = pre_states[:, j]
            row = {"t": float(t), **post.entropies(embed(psi), ordered)}
            row["E_mean"] = pre_sd.energy(psi)
            row["S_can"] = s_can_pre
            rows.append({c: row[c] for c in columns})
    if len(after):
        psi_q = embed(evolve_state(pre_sd, psi0, spec.quench_time))
        post_states = evolve_state(post.sd, psi_q, after - spec.quench_time)
        s_can_post = float(canonical_entropy(post.sd, beta_for(post.sd, post.sd.energy(psi_q))))
        for j, t in enumerate(after):
            psi = post_states[:, j]
            row = {"t": float(t), **post.entropies(psi, ordered)}
            row["E_mean"] = post.sd.energy(psi)
            row["S_can"] = s_can_post
            rows.append({c: row[c] for c in columns})
    return rows


@dataclass(frozen=True)
class SweepSpec:
    lattice: LatticeSpec
    k: int = 30
    state_kinds: tuple[str, ...] = SWEEP_KINDS
    centers: tuple[int, ...] | None = None
    seed: int = 0

    def __post_init__(self):
        bad = set(self.state_kinds) - set(SWEEP_KINDS)
        if bad:
            raise InvalidSpecError(f"unknown state kinds {sorted(bad)}")
        if self.k < 1:
            raise InvalidSpecError("window size k must be positive")

    def resolved_centers(self) -> tuple[int, ...]:
        d = self.lattice.dim
        centers = default_centers(d, self.k) if self.centers is None else tuple(int(c) for c in self.centers)
        for c in centers:
            energy_window(d, c, self.k)
        return centers


def default_centers(dim: int, k: int) -> tuple[int, ...]:
    """Every ``dim // 60``-th level, skipping the outer 5% of the spectrum."""
    step = max(1, dim // 60)
    edge = int(np.ceil(0.05 * dim))
    lo = max(edge, k // 2)
    hi = min(dim - edge, dim - (k - k // 2) + 1)
    return tuple(c for c in range(0, dim, step) if lo <= c < hi)


SWEEP_COLUMNS = ["kind", "center", "E_mean", "S_xE", "S_FOE", "S_DOS"]


def run_sweep(
    spec: SweepSpec,
    params: ModelParams,
    p: int,
    m: int,
    tol: float = DEFAULT_DEGENERACY_TOL,
    diagonalizer: Diagonalizer = default_diagonalizer,
    system: ChainSystem | None = None,
) -> list[dict]:
    """One row per (state kind, center); ``S_DOS`` is taken at the row's mean energy."""
    params = params.on_lattice(spec.lattice.L, spec.lattice.N)
    system = ChainSystem(params, p, m, tol, diagonalizer) if system is None else system
    sd = system.sd
    rows = []
    for center in spec.resolved_centers():
        rng = np.random.default_rng([spec.seed, center])
        for kind in SWEEP_KINDS:
            if kind not in spec.state_kinds:
                continue
            if kind == "eigenstate":
                state = sd.eigenvectors[:, center]
                energy = float(sd.eigenvalues[center])
            elif kind == "superposition":
                state = random_superposition(sd, center, spec.k, rng)
                energy = sd.energy(state)
            else:
                state = microcanonical_ensemble(sd, center, spec.k)
                energy = float(np.mean(sd.eigenvalues[energy_window(sd.dim, center, spec.k)]))
            ent = system.entropies(state, ("S_xE", "S_FOE"))
            rows.append({
                "kind": kind,
                "center": int(center),
                "E_mean": energy,
                "S_xE": ent["S_xE"],
                "S_FOE": ent["S_FOE"],
                "S_DOS": float(dos_entropy(sd, energy, params.N)),
            })
    return rows


def make_state(system: ChainSystem, kind: str, *, beta: float = 1.0, center: int = 0, k: int = 30, seed=0):
    """Build a named state on ``system`` (used by the ``compute`` command)."""
    sd = system.sd
    if kind == "thermal":
        return thermal_pure_state(sd, beta, seed)
    if kind == "eigenstate":
        return sd.eigenvectors[:, center].astype(complex)
    if kind == "superposition":
        return random_superposition(sd, center, k, seed)
    if kind == "microcanonical":
        return microcanonical_ensemble(sd, center, k)
    raise ValueError(f"unknown state kind {kind!r}")


def compute_row(system: ChainSystem, state, kinds: Sequence[str]) -> dict:
    sd = system.sd
    if isinstance(state, Ensemble):
        energy = float(sum(w * sd.energy(v) for w, v in zip(state.weights, state.vectors.T)))
    else:
        energy = sd.energy(state)
    row = {"E_mean": energy}
    direct = [k for k in kinds if k not in ("S_DOS", "S_can")]
    row.update(system.entropies(state, direct))
    if "S_DOS" in kinds:
        row["S_DOS"] = float(dos_entropy(sd, energy, system.params.N))
    if "S_can" in kinds:
        row["S_can"] = float(canonical_entropy(sd, match_beta(sd, energy)))
    return {c: row[c] for c in ["E_mean", *[k for k in COMPUTE_KINDS if k in kinds]]}
