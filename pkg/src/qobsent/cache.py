"""On-disk cache of spectral decompositions.

File layout (all integers little-endian)::

    magic         8 bytes   b"QOBSPEC1"
    key          64 bytes   ascii sha256 hex digest
    n_levels      uint64
    n_rows        uint64
    complex flag  uint8     0: real eigenvectors, 1: complex
    padding       7 bytes
    eigenvalues   n_levels float64
    eigenvectors  n_rows * n_levels float64 (or complex128), row-major

The key hashes the model couplings, the lattice and a code-version tag, so a
change of convention never serves a stale spectrum.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .model import ModelParams
from .spectral import SpectralDecomposition, diagonalize

log = logging.getLogger(__name__)

MAGIC = b"QOBSPEC1"
CODE_VERSION = f"qobsent-{__version__}/fermion-ascending/hamiltonian-v1"
ENV_VAR = "QOBSENT_CACHE_DIR"
SUFFIX = ".spec"
_HEADER = struct.Struct("<8s64sQQB7x")


def cache_key(params: ModelParams, version: str = CODE_VERSION) -> str:
    payload = {
        "lattice": {"L": params.L, "N": params.N},
        "model": {"t": params.t, "tp": params.tp, "V": params.V, "Vp": params.Vp,
                  "density_shift": params.density_shift},
        "version": version,
    }
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def encode(key: str, sd: SpectralDecomposition) -> bytes:
    U = sd.eigenvectors
    is_complex = np.iscomplexobj(U)
    header = _HEADER.pack(MAGIC, key.encode("ascii"), U.shape[1], U.shape[0], int(is_complex))
    evals = np.ascontiguousarray(sd.eigenvalues, dtype="<f8").tobytes()
    vecs = np.ascontiguousarray(U, dtype="<c16" if is_complex else "<f8").tobytes()
    return header + evals + vecs


def decode(blob: bytes, key: str | None = None) -> SpectralDecomposition | None:
    """Inverse of :func:`encode`; ``None`` when the blob is malformed or keyed differently."""
    if len(blob) < _HEADER.size:
        return None
    magic, stored, n, rows, flag = _HEADER.unpack_from(blob)
    if magic != MAGIC or (key is not None and stored.decode("ascii", "replace") != key):
        return None
    width = 16 if flag else 8
    if len(blob) != _HEADER.size + 8 * n + width * n * rows:
        return None
    off = _HEADER.size
    evals = np.frombuffer(blob, dtype="<f8", count=n, offset=off).astype(np.float64)
    vecs = np.frombuffer(blob, dtype="<c16" if flag else "<f8", count=n * rows, offset=off + 8 * n)
    vecs = vecs.astype(np.complex128 if flag else np.float64).reshape(rows, n)
    evals.setflags(write=False)
    vecs.setflags(write=False)
    return SpectralDecomposition(evals, vecs)


@dataclass(frozen=True)
class CacheEntry:
    key: str
    path: Path
    n_levels: int
    n_rows: int
    complex: bool
    size: int


class SpectralCache:
    """Directory of encoded spectra, one file per key."""

    def __init__(self, directory: str | os.PathLike):
        self.directory = Path(directory)
        self.hits = 0
        self.misses = 0

    def path(self, key: str) -> Path:
        return self.directory / f"{key}{SUFFIX}"

    def load(self, key: str) -> SpectralDecomposition | None:
        try:
            blob = self.path(key).read_bytes()
        except FileNotFoundError:
            return None
        sd = decode(blob, key)
        if sd is None:
            log.warning("ignoring unreadable cache file %s", self.path(key))
        return sd

    def store(self, key: str, sd: SpectralDecomposition) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        target = self.path(key)
        fd, tmp = tempfile.mkstemp(prefix=f".{key[:16]}.", suffix=".tmp", dir=self.directory)
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(encode(key, sd))
            os.replace(tmp, target)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        return target

    def diagonalizer(self, params: ModelParams, H: np.ndarray) -> SpectralDecomposition:
        """Drop-in replacement for :func:`diagonalize` that reads and fills the cache."""
        key = cache_key(params)
        sd = self.load(key)
        if sd is not None and sd.dim == H.shape[0]:
            self.hits += 1
            log.info("spectral cache hit %s (L=%d, N=%d)", key[:12], params.L, params.N)
            return sd
        self.misses += 1
        sd = diagonalize(H)
        self.store(key, sd)
        log.info("spectral cache miss %s (L=%d, N=%d), stored", key[:12], params.L, params.N)
        return sd

    def entries(self) -> list[CacheEntry]:
        if not self.directory.is_dir():
            return []
        out = []
        for path in sorted(self.directory.glob(f"*{SUFFIX}")):
            with open(path, "rb") as fh:
                head = fh.read(_HEADER.size)
            if len(head) < _HEADER.size:
                continue
            magic, key, n, rows, flag = _HEADER.unpack(head)
            if magic != MAGIC:
                continue
            out.append(CacheEntry(key.decode("ascii"), path, n, rows, bool(flag), path.stat().st_size))
        return out


def resolve_cache_dir(flag: str | None, configured: str | None) -> str | None:
    """Command-line flag, then the environment variable, then the config file."""
    if flag:
        return flag
    env = os.environ.get(ENV_VAR)
    if env:
        return env
    return configured
