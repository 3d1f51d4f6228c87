"""Command-line harness: ``qobsent {quench,sweep,compute,cache-info}``."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import os
import sys
import tempfile
from pathlib import Path
from typing import Sequence

from .cache import CODE_VERSION, SpectralCache, cache_key, resolve_cache_dir
from .config import RunConfig, parse_config
from .errors import ConfigError, QobsentError
from .fockspace import LatticeSpec
from .model import ModelParams
from .scenarios import (
    SWEEP_COLUMNS,
    ChainSystem,
    QuenchSpec,
    SweepSpec,
    default_diagonalizer,
    compute_row,
    make_state,
    quench_columns,
    run_quench,
    run_sweep,
    schedule,
)

log = logging.getLogger("qobsent")


def model_params(cfg: RunConfig) -> ModelParams:
    m = cfg.model
    return ModelParams(LatticeSpec(m.L, m.N), t=m.t, tp=m.tp, V=m.V, Vp=m.Vp, density_shift=m.density_shift)


def format_value(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def render_csv(columns: Sequence[str], rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row[c]) for c in columns])
    return buf.getvalue()


def execute(cfg: RunConfig, diagonalizer=default_diagonalizer) -> tuple[list[str], list[dict]]:
    """Run the configured experiment and return (columns, rows)."""
    params = model_params(cfg)
    system = ChainSystem(params, cfg.bins, cfg.blocks, cfg.degeneracy_tol, diagonalizer)
    if cfg.experiment == "quench":
        q = cfg.quench
        pre_L = params.L // 2 if q.pre_L is None else q.pre_L
        times = q.schedule if q.schedule is not None else schedule(q.t_max, q.dt)
        spec = QuenchSpec(
            LatticeSpec(pre_L, params.N), params.lattice, quench_time=q.quench_time, schedule=tuple(times),
            beta=q.beta, seed=cfg.seed, canonical_beta=q.canonical_beta, offset=q.offset,
        )
        kinds = cfg.entropy_kinds
        rows = run_quench(spec, params, cfg.bins, cfg.blocks, kinds, cfg.degeneracy_tol, diagonalizer, post=system)
        return quench_columns(kinds), rows
    if cfg.experiment == "sweep":
        s = cfg.sweep
        spec = SweepSpec(params.lattice, k=s.k, state_kinds=s.kinds, centers=s.centers, seed=cfg.seed)
        return list(SWEEP_COLUMNS), run_sweep(spec, params, cfg.bins, cfg.blocks, cfg.degeneracy_tol, diagonalizer, system)
    c = cfg.compute
    state = make_state(system, c.state, beta=c.beta, center=c.center, k=c.k, seed=cfg.seed)
    row = {"state": c.state, **compute_row(system, state, cfg.entropy_kinds)}
    return list(row), [row]


def metadata(cfg: RunConfig, columns, rows, cache: SpectralCache | None) -> dict:
    return {
        "code_version": CODE_VERSION,
        "seed": cfg.seed,
        "config": cfg.to_dict(),
        "columns": list(columns),
        "n_rows": len(rows),
        "spectrum_key": cache_key(model_params(cfg)),
        "cache_dir": None if cache is None else str(cache.directory),
    }


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sidecar_path(out: Path) -> Path:
    return out.with_name(out.name + ".meta.json")


def _load_config(path: str, experiment: str) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        return parse_config(text, experiment)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _run_experiment(args) -> int:
    cfg = _load_config(args.config, args.command)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    cache_dir = resolve_cache_dir(args.cache_dir, cfg.cache_dir)
    cache = SpectralCache(cache_dir) if cache_dir else None
    diagonalizer = cache.diagonalizer if cache else default_diagonalizer

    columns, rows = execute(cfg, diagonalizer)
    text = render_csv(columns, rows)
    out = args.out or cfg.output
    if out is None:
        sys.stdout.write(text)
        return 0
    out = Path(out)
    _atomic_write(out, text)
    meta = json.dumps(metadata(cfg, columns, rows, cache), indent=2, sort_keys=True) + "\n"
    _atomic_write(sidecar_path(out), meta)
    log.info("wrote %d rows to %s", len(rows), out)
    return 0


def _cache_info(args) -> int:
    directory = resolve_cache_dir(args.cache_dir, None)
    if not directory:
        print("no cache directory (set --cache-dir or QOBSENT_CACHE_DIR)", file=sys.stderr)
        return 1
    entries = SpectralCache(directory).entries()
    print(f"cache {directory}: {len(entries)} entries")
    for e in entries:
        kind = "complex" if e.complex else "real"
        print(f"{e.key}  levels={e.n_levels} rows={e.n_rows} {kind} bytes={e.size}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qobsent", description="Observational entropy experiments")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("quench", "entropy time series across a box-doubling quench"),
        ("sweep", "equilibrium states across the spectrum"),
        ("compute", "entropies of a single state"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", default=None, help="CSV output path (default: config 'output', else stdout)")
        p.add_argument("--cache-dir", default=None, help="spectral cache directory")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
    info = sub.add_parser("cache-info", help="list cached spectra")
    info.add_argument("--cache-dir", default=None)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "cache-info":
            return _cache_info(args)
        return _run_experiment(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (QobsentError, ValueError, ArithmeticError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1


run_command = main

if __name__ == "__main__":
    raise SystemExit(main())
