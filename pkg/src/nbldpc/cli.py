"""Command-line surface: construction, simulation, analysis, key-rate sweeps.

Every command resolves its parameters from built-in defaults, then an
optional plain-text config file (``key = value`` lines, ``#`` comments,
unknown keys rejected), then command-line overrides, and echoes the
fully resolved configuration to ``<out>.manifest``.  Re-running a
command from its manifest reproduces the output byte for byte; the
worker count and output path are execution details excluded from the
config hash stamped into the CSV header.

CSV outputs are RFC-4180 with LF endings, ``#``-prefixed header
comments (version, command, seed, config hash) and a trailing
``# complete`` marker that is only written when the run finished.
"""

from __future__ import annotations

import argparse
import hashlib
import logging
import os
import sys

import numpy as np

from . import __version__, analysis, gf, skr
from .backend import active_backend
from .channel import snr_db as to_db
from .channel import snr_linear, symbol_priors, transmit
from .code import (
    RepCode,
    build_mother,
    encode_word,
    extend,
    load_code,
    repeat_code,
    save_code,
    syndrome,
)
from .decoder import DecoderConfig, decode
from .sim import SimCache, SimRecord, SimSpec, efficiency_curve, find_snr_at_fer, run_fer

log = logging.getLogger("nbldpc")


# --- configuration plumbing -------------------------------------------------

_COMMON = {
    "seed": (int, 0),
    "workers": (int, 1),
    "out": (str, ""),
}

SCHEMAS: dict[str, dict[str, tuple]] = {
    "construct": {
        "p": (int, 10),
        "poly": (int, 0),  # 0 = default polynomial for the degree
        "n_sym": (int, 1000),
        "check_degree": (int, 3),
        "girth_target": (int, 0),  # 0 = best effort, no warning threshold
        "stages": (int, 1),
        "rep_symbols": (int, -1),  # total repetition symbols; -1 = from stages
        **_COMMON,
    },
    "extend": {
        "code": (str, ""),
        "stages": (int, 0),
        "rep_symbols": (int, -1),
        **_COMMON,
    },
    "simulate": {
        "code": (str, ""),
        "snr_db": (str, ""),  # comma-separated dB values
        "max_frames": (int, 20000),
        "target_errors": (int, 50),
        "min_frames": (int, 100),
        "max_iters": (int, 200),
        "batch": (int, 50),
        **_COMMON,
    },
    "find-snr": {
        "code": (str, ""),
        "max_iters": (int, 200),
        "target_fer": (float, 0.1),
        "tol_db": (float, 0.1),
        "beta_guess": (float, 0.88),
        "probe_errors": (int, 20),
        "confirm_errors": (int, 50),
        "cache": (str, ""),
        **_COMMON,
    },
    "efficiency": {
        "code": (str, ""),
        "stages": (str, ""),  # comma-separated repetition parameters
        "max_iters": (int, 200),
        "target_fer": (float, 0.1),
        "beta_guess": (float, 0.88),
        "exact_capacity": (int, 1),
        "cache": (str, ""),
        **_COMMON,
    },
    "bound": {
        "n_bits": (int, 300000),
        "epsilon": (float, 0.1),
        "snr_db": (str, ""),
        **_COMMON,
    },
    "skr": {
        "beta": (float, 0.9),
        "fer": (float, 0.1),
        "l_start_km": (float, 5.0),
        "l_stop_km": (float, 200.0),
        "l_step_km": (float, 5.0),
        "alpha_db": (float, 0.2),
        "excess_noise": (float, 0.005),
        "det_efficiency": (float, 0.606),
        "electronic_noise": (float, 0.041),
        "raw_key_len": (float, 1e12),
        "smoothing": (float, 1e-10),
        "pe_confidence": (float, 0.0),  # 0 = measured-parameter Holevo bound
        **_COMMON,
    },
    "decode": {
        "code": (str, ""),
        "snr_db": (float, -10.0),
        "max_iters": (int, 200),
        "validate_each_iter": (int, 1),
        "trace": (int, 0),
        **_COMMON,
    },
}


class ConfigError(Exception):
    pass


def read_config(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path) as fh:
        for ln, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{ln}: expected 'key = value'")
            key, val = (t.strip() for t in line.split("=", 1))
            out[key] = val
    return out


def resolve(command: str, config_path: str | None, overrides: dict[str, str]) -> dict:
    schema = SCHEMAS[command]
    resolved = {k: d for k, (_, d) in schema.items()}
    layers = []
    if config_path:
        layers.append((config_path, read_config(config_path)))
    layers.append(("command line", overrides))
    for origin, layer in layers:
        for key, val in layer.items():
            if key == "command":
                if val != command:
                    raise ConfigError(f"{origin}: config is for command {val!r}, not {command!r}")
                continue
            if key not in schema:
                raise ConfigError(f"{origin}: unknown key {key!r} for command {command!r}")
            typ = schema[key][0]
            try:
                resolved[key] = typ(val)
            except ValueError as exc:
                raise ConfigError(f"{origin}: bad value for {key!r}: {exc}") from exc
    return resolved


def config_hash(command: str, resolved: dict) -> str:
    """Hash of the semantic configuration (execution details excluded)."""
    items = [f"command={command}"] + [
        f"{k}={resolved[k]}" for k in sorted(resolved) if k not in ("workers", "out")
    ]
    return hashlib.sha256("\n".join(items).encode()).hexdigest()[:16]


def write_manifest(out_path: str, command: str, resolved: dict) -> str:
    path = out_path + ".manifest"
    lines = [f"command = {command}"]
    lines += [f"{k} = {resolved[k]}" for k in sorted(resolved)]
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def write_csv(path: str, command: str, resolved: dict, header: list[str], rows: list) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# nbldpc {__version__}\n")
        fh.write(f"# command: {command}\n")
        fh.write(f"# seed: {resolved.get('seed', 0)}\n")
        fh.write(f"# config: {config_hash(command, resolved)}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
        fh.write("# complete\n")


def _float_list(text: str, key: str) -> list[float]:
    if not text.strip():
        raise ConfigError(f"{key} must be a comma-separated list")
    return [float(t) for t in text.split(",") if t.strip()]


def _int_list(text: str, key: str) -> list[int]:
    if not text.strip():
        raise ConfigError(f"{key} must be a comma-separated list")
    return [int(t) for t in text.split(",") if t.strip()]


def _need_out(cfg: dict) -> str:
    if not cfg["out"]:
        raise ConfigError("an output path is required (--out or 'out' in the config)")
    return cfg["out"]


def _load(cfg: dict) -> RepCode:
    if not cfg["code"]:
        raise ConfigError("a code file is required (--code or 'code' in the config)")
    return load_code(cfg["code"])


# --- commands ---------------------------------------------------------------


def cmd_construct(cfg: dict) -> None:
    out = _need_out(cfg)
    fld = gf.make_field(cfg["p"], cfg["poly"] or None)
    mother = build_mother(
        fld,
        cfg["n_sym"],
        cfg["check_degree"],
        seed=cfg["seed"],
        girth_target=cfg["girth_target"] or None,
    )
    total = cfg["rep_symbols"]
    if total < 0:
        total = (cfg["stages"] - 1) * mother.n_sym
    code = extend(mother, total, seed=cfg["seed"])
    save_code(code, out)
    deg_hist = np.bincount(mother.check_degrees())
    print(f"wrote {out}")
    print(f"field GF({fld.q}) poly {fld.poly:#x}, N={mother.n_sym} M={mother.n_chk}")
    print(f"rate {code.rate:.8g} ({mother.n_sym - mother.n_chk}/{code.total_symbols}), girth {mother.girth}")
    print("check degree histogram: " + ", ".join(f"{d}:{c}" for d, c in enumerate(deg_hist) if c))


def cmd_extend(cfg: dict) -> None:
    out = _need_out(cfg)
    code = _load(cfg)
    total = cfg["rep_symbols"]
    if total < 0:
        if cfg["stages"] < 1:
            raise ConfigError("give either stages or rep_symbols")
        total = (cfg["stages"] - 1) * code.n_sym
    code = extend(code, total, seed=cfg["seed"])
    save_code(code, out)
    print(f"wrote {out}: rate {code.rate:.8g}, {code.n_rep} repetition symbols")


def cmd_simulate(cfg: dict) -> None:
    out = _need_out(cfg)
    code = _load(cfg)
    grid = _float_list(cfg["snr_db"], "snr_db")
    spec = SimSpec(
        snr_grid_db=tuple(grid),
        max_frames=cfg["max_frames"],
        target_errors=cfg["target_errors"],
        min_frames=cfg["min_frames"],
        max_iters=cfg["max_iters"],
        seed=cfg["seed"],
        batch=cfg["batch"],
    )
    records = run_fer(code, spec, workers=cfg["workers"])
    rows = [
        (r.snr_db, r.frames, r.errors, r.fer, r.ci95, r.mean_iters, r.detected, r.undetected)
        for r in records
    ]
    write_csv(
        out,
        "simulate",
        cfg,
        ["snr_db", "frames", "errors", "fer", "ci95", "mean_iters", "detected", "undetected"],
        rows,
    )
    print(f"wrote {out} ({len(rows)} points)")


def cmd_find_snr(cfg: dict) -> None:
    out = _need_out(cfg)
    code = _load(cfg)
    cache = SimCache(cfg["cache"]) if cfg["cache"] else None
    res = find_snr_at_fer(
        code,
        max_iters=cfg["max_iters"],
        seed=cfg["seed"],
        target_fer=cfg["target_fer"],
        tol_db=cfg["tol_db"],
        workers=cfg["workers"],
        cache=cache,
        beta_guess=cfg["beta_guess"],
        probe_errors=cfg["probe_errors"],
        confirm_errors=cfg["confirm_errors"],
    )
    snr = snr_linear(res.snr_db)
    beta = analysis.efficiency(code.rate, snr)
    rows = [(res.snr_db, snr, res.record.fer, res.record.ci95, res.record.frames, beta, res.probes)]
    write_csv(
        out,
        "find-snr",
        cfg,
        ["snr_db", "snr", "fer", "ci95", "frames", "beta", "probes"],
        rows,
    )
    print(f"snr* = {res.snr_db:.4f} dB, beta = {beta:.4f} (fer {res.record.fer:.4f})")


def cmd_efficiency(cfg: dict) -> None:
    out = _need_out(cfg)
    code = _load(cfg)
    stages = _int_list(cfg["stages"], "stages")
    cache = SimCache(cfg["cache"]) if cfg["cache"] else None
    rows_out = efficiency_curve(
        code.mother,
        stages,
        max_iters=cfg["max_iters"],
        seed=cfg["seed"],
        target_fer=cfg["target_fer"],
        workers=cfg["workers"],
        cache=cache,
        exact_capacity=bool(cfg["exact_capacity"]),
        beta_guess=cfg["beta_guess"],
    )
    rows = [
        (
            r.n_stages,
            r.point.rate,
            to_db(r.point.snr),
            r.point.fer,
            r.point.beta,
            r.bound,
            r.point.n_bits,
        )
        for r in rows_out
    ]
    write_csv(
        out,
        "efficiency",
        cfg,
        ["T", "rate", "snr_db", "fer", "beta", "bound", "n_bits"],
        rows,
    )
    print(f"wrote {out} ({len(rows)} repetition parameters)")


def cmd_bound(cfg: dict) -> None:
    out = _need_out(cfg)
    grid = _float_list(cfg["snr_db"], "snr_db")
    rows = []
    for db in grid:
        s = snr_linear(db)
        rows.append((cfg["n_bits"], cfg["epsilon"], db, analysis.finite_length_beta(cfg["n_bits"], cfg["epsilon"], s)))
    write_csv(out, "bound", cfg, ["n_bits", "epsilon", "snr_db", "beta_bound"], rows)
    print(f"wrote {out} ({len(rows)} points)")


def cmd_skr(cfg: dict) -> None:
    out = _need_out(cfg)
    fs = skr.FiniteSizeParams(
        fer=cfg["fer"],
        beta=cfg["beta"],
        raw_key_len=cfg["raw_key_len"],
        smoothing=cfg["smoothing"],
        pe_confidence=cfg["pe_confidence"] or None,
    )
    dists = []
    d = cfg["l_start_km"]
    while d <= cfg["l_stop_km"] + 1e-9:
        dists.append(round(d, 9))
        d += cfg["l_step_km"]
    rows_out = skr.sweep_distance(
        dists,
        fs,
        loss_db_per_km=cfg["alpha_db"],
        excess_noise=cfg["excess_noise"],
        det_efficiency=cfg["det_efficiency"],
        electronic_noise=cfg["electronic_noise"],
    )
    header = ["L_km", "alpha_db", "beta", "fer", "va_opt", "snr", "K_bits_per_symbol", "K_raw"]
    rows = [tuple(r[k] for k in header) for r in rows_out]
    write_csv(out, "skr", cfg, header, rows)
    print(f"wrote {out} ({len(rows)} distances)")


def cmd_decode(cfg: dict) -> None:
    code = _load(cfg)
    fld = code.field
    rng = np.random.default_rng(np.random.SeedSequence([cfg["seed"], 0]))
    x = rng.integers(0, fld.q, size=code.n_sym, dtype=np.int64).astype(np.int32)
    z = syndrome(code, x)
    sigma = 1.0 / np.sqrt(snr_linear(cfg["snr_db"]))
    y = transmit(encode_word(code, x), fld.p, sigma, rng)
    priors = symbol_priors(code, y, sigma)
    dcfg = DecoderConfig(
        max_iters=cfg["max_iters"],
        validate_each_iter=bool(cfg["validate_each_iter"]),
        collect_trace=bool(cfg["trace"]),
    )
    res = decode(code, priors, z, dcfg)
    errors = int(np.count_nonzero(res.mother_estimate != x))
    print(
        f"success={res.success} iterations={res.iterations} "
        f"symbol_errors={errors}/{code.n_sym} backend={active_backend()}"
    )
    if cfg["trace"] and cfg["out"]:
        write_csv(
            cfg["out"],
            "decode",
            cfg,
            ["iteration", "unsatisfied_checks", "changed_symbols"],
            res.trace or [],
        )
        print(f"wrote trace {cfg['out']}")
    if not res.success:
        return 3
    return 0


_HANDLERS = {
    "construct": cmd_construct,
    "extend": cmd_extend,
    "simulate": cmd_simulate,
    "find-snr": cmd_find_snr,
    "efficiency": cmd_efficiency,
    "bound": cmd_bound,
    "skr": cmd_skr,
    "decode": cmd_decode,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nbldpc",
        description="Multiplicatively repeated non-binary LDPC codes over the BIAWGN channel",
    )
    parser.add_argument("--version", action="version", version=f"nbldpc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for command, schema in SCHEMAS.items():
        sp = sub.add_parser(command)
        sp.add_argument("--config", default=None, help="key = value config file")
        for key in schema:
            sp.add_argument(f"--{key.replace('_', '-')}", dest=f"opt_{key}", default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("NBLDPC_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    command = args.command
    overrides = {
        key: val
        for key, val in ((k[4:], v) for k, v in vars(args).items() if k.startswith("opt_"))
        if val is not None
    }
    try:
        cfg = resolve(command, args.config, overrides)
        if cfg.get("out"):
            write_manifest(cfg["out"], command, cfg)
        rc = _HANDLERS[command](cfg)
    except (ConfigError, ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return rc or 0


if __name__ == "__main__":
    sys.exit(main())
