"""Command-line surface: generate, estimate, align, experiment, crossover.

Exit codes are a stable contract: 0 success, 2 usage or configuration
error, 3 I/O failure, 4 degenerate statistics. File-producing commands
write a manifest.txt echoing the fully resolved configuration; the
stdout-only commands do so when --manifest is given.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys

import numpy as np

from . import __version__
from .alignment import admissible_k, evaluate_alignment
from .estimators import DegenerateSampleError, hill, pickands, pwm, variance_crossover
from .graphs import (MODEL_CL, MODEL_NR, generate_cl_fast, generate_nr_fast,
                     read_degrees_csv, write_degrees_csv, write_edges_csv)
from .harness import (MASK64, config_from_mapping, read_config_sections,
                      run_alignment_experiment, run_normality_experiment,
                      validate_normality_config, write_alignment_outputs,
                      write_normality_outputs)
from .weights import parse_distribution, sample_weights

_MODEL_ALIASES = {"nr": MODEL_NR, "norros-reittu": MODEL_NR,
                  "cl": MODEL_CL, "chung-lu": MODEL_CL}
_ESTIMATOR_FN = {"hill": hill, "pickands": pickands, "pwm": pwm}


def _resolve_model(text: str) -> str:
    key = text.strip().lower()
    if key not in _MODEL_ALIASES:
        raise ValueError(f"unknown model {text!r}; use nr or cl")
    return _MODEL_ALIASES[key]


def _seeded_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed & MASK64))


def _config_echo(command: str, pairs) -> list[str]:
    lines = [f"irgtail {__version__}", f"command={command}"]
    lines.extend(f"{key}={value}" for key, value in pairs)
    return lines


def _write_stdout_manifest(path: str | None, lines: list[str]) -> None:
    if path is None:
        return
    with open(path, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(f"# {line}\n")


def _hash_rows(out_dir: str, names: list[str]) -> list[str]:
    rows = []
    for name in sorted(names):
        with open(os.path.join(out_dir, name), "rb") as fh:
            blob = fh.read()
        rows.append(f"{name},{len(blob)},{hashlib.sha256(blob).hexdigest()}")
    return rows


# ------------------------------------------------------------------ commands


def _cmd_generate(args) -> int:
    model = _resolve_model(args.model)
    dist = parse_distribution(args.dist)
    if args.n < 1:
        raise ValueError("--n must be at least 1")
    if model == MODEL_CL and not dist.params.alpha > 2:
        print(f"warning: Chung-Lu theory assumes alpha > 2, got "
              f"alpha={dist.params.alpha}", file=sys.stderr)
    rng = _seeded_rng(args.seed)
    wv = sample_weights(dist, args.n, rng)
    edges = args.mode == "edges"
    if model == MODEL_NR:
        g = generate_nr_fast(wv, rng, materialize_edges=edges)
    else:
        g = generate_cl_fast(wv, rng, materialize_edges=edges)
    os.makedirs(args.out, exist_ok=True)
    names = ["degrees.csv"]
    write_degrees_csv(g, os.path.join(args.out, "degrees.csv"))
    if edges:
        write_edges_csv(g, os.path.join(args.out, "edges.csv"))
        names.append("edges.csv")
    echo = _config_echo("generate", [
        ("model", model), ("dist", dist.spec_string()),
        ("gamma", format(dist.params.gamma, ".17g")),
        ("alpha", format(dist.params.alpha, ".17g")),
        ("n", args.n), ("seed", args.seed & MASK64), ("mode", args.mode),
        ("out", args.out),
    ])
    with open(os.path.join(args.out, "manifest.txt"), "w", encoding="utf-8") as fh:
        for line in echo:
            fh.write(f"# {line}\n")
        for row in _hash_rows(args.out, names):
            fh.write(row + "\n")
    return 0


def _cmd_estimate(args) -> int:
    degrees = read_degrees_csv(args.degrees)
    sorted_desc = np.sort(degrees.astype(float))[::-1]
    fn = _ESTIMATOR_FN[args.estimator]
    out = fn(sorted_desc, args.k, gamma_true=args.gamma_true)
    print("estimator,k,gamma_hat,tau,z")
    print(out.csv_row())
    _write_stdout_manifest(args.manifest, _config_echo("estimate", [
        ("degrees", args.degrees), ("estimator", args.estimator),
        ("k", args.k),
        ("gamma_true", "" if args.gamma_true is None else
         format(args.gamma_true, ".17g")),
    ]))
    return 0


def _cmd_align(args) -> int:
    model = _resolve_model(args.model)
    dist = parse_distribution(args.dist)
    if args.n < 3:
        raise ValueError("--n must be at least 3")
    k_used = args.k if args.k is not None else admissible_k(
        args.n, dist.params.alpha, args.admissible_c)
    rng = _seeded_rng(args.seed)
    wv = sample_weights(dist, args.n, rng)
    if model == MODEL_NR:
        g = generate_nr_fast(wv, rng)
    else:
        g = generate_cl_fast(wv, rng)
    rec = evaluate_alignment(wv, g.degrees, k_used, seed=args.seed & MASK64)
    print("n,seed,K,aligned_k,eventS,eventC,eventM")
    print(f"{rec.n},{rec.seed},{rec.K},{int(rec.aligned_at_k)},"
          f"{int(rec.event_s)},{int(rec.event_c)},{int(rec.event_m)}")
    _write_stdout_manifest(args.manifest, _config_echo("align", [
        ("model", model), ("dist", dist.spec_string()), ("n", args.n),
        ("k", k_used), ("seed", args.seed & MASK64),
        ("admissible_c", format(args.admissible_c, ".17g")),
    ]))
    return 0


_OVERRIDE_KEYS = (
    ("model", "model"), ("dist", "dist"), ("n", "n"),
    ("replicates", "replicates"), ("master_seed", "master_seed"),
    ("estimators", "estimators"), ("k_hill", "k_hill"),
    ("k_pickands", "k_pickands"), ("k_pwm", "k_pwm"),
    ("gamma_true", "gamma_true"), ("admissible_c", "admissible_c"),
    ("workers", "workers"), ("hist_bins", "hist_bins"),
    ("hist_range", "hist_range"),
)


def _cfg_echo_pairs(name: str, kind: str, cfg) -> list[tuple[str, str]]:
    join = lambda xs: ",".join(str(x) for x in xs)
    return [
        ("section", name), ("experiment", kind), ("model", cfg.model),
        ("dist", cfg.dist.spec_string()),
        ("gamma", format(cfg.dist.params.gamma, ".17g")),
        ("alpha", format(cfg.dist.params.alpha, ".17g")),
        ("n", join(cfg.n_list)), ("replicates", str(cfg.replicates)),
        ("master_seed", str(cfg.master_seed)),
        ("estimators", join(cfg.estimators)),
        ("k_hill", join(cfg.k_hill)), ("k_pickands", join(cfg.k_pickands)),
        ("k_pwm", join(cfg.k_pwm)),
        ("gamma_true", "" if cfg.gamma_true is None else
         format(cfg.gamma_true, ".17g")),
        ("admissible_c", format(cfg.admissible_c, ".17g")),
        ("workers", str(cfg.workers)), ("hist_bins", str(cfg.hist_bins)),
        ("hist_range", f"{format(cfg.hist_range[0], '.17g')},"
                       f"{format(cfg.hist_range[1], '.17g')}"),
    ]


def _cmd_experiment(args) -> int:
    sections = read_config_sections(args.config)
    if args.section:
        wanted = set(args.section)
        missing = wanted - {name for name, _ in sections}
        if missing:
            raise ValueError(f"config has no section(s) {sorted(missing)}")
        sections = [(n, m) for n, m in sections if n in wanted]
    # apply CLI overrides, then validate every section before running any
    plans = []
    for name, mapping in sections:
        for flag, key in _OVERRIDE_KEYS:
            value = getattr(args, flag)
            if value is not None:
                mapping[key] = value
        try:
            kind, cfg = config_from_mapping(mapping)
            if kind == "normality":
                validate_normality_config(cfg)
        except ValueError as exc:
            raise ValueError(f"config section [{name}]: {exc}") from exc
        out_dir = args.out and os.path.join(args.out, name) or cfg.output_dir
        if out_dir is None:
            raise ValueError(f"section [{name}] has no output directory; "
                             "set output= in the config or pass --out")
        plans.append((name, kind, cfg, out_dir))
    for name, kind, cfg, out_dir in plans:
        header = tuple(f"{k}={v}" for k, v in
                       [("irgtail", __version__)] + _cfg_echo_pairs(name, kind, cfg)
                       + [("output", out_dir)])
        if kind == "alignment":
            result = run_alignment_experiment(cfg)
            write_alignment_outputs(result, out_dir, header)
        else:
            result = run_normality_experiment(cfg)
            write_normality_outputs(result, cfg, out_dir, header)
        print(f"{name}: wrote {out_dir}")
    return 0


def _cmd_crossover(args) -> int:
    print(f"{variance_crossover():.6f}")
    _write_stdout_manifest(args.manifest, _config_echo("crossover", []))
    return 0


# ------------------------------------------------------------------- parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="irgtail",
        description="Scale-free random graph generation and tail-index "
                    "estimation toolkit")
    parser.add_argument("--version", action="version",
                        version=f"irgtail {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="sample one graph and write CSVs")
    g.add_argument("--model", required=True, help="nr|cl")
    g.add_argument("--dist", required=True,
                   help="weight distribution, e.g. pareto:scale=2,alpha=1")
    g.add_argument("--n", type=int, required=True, help="number of nodes")
    g.add_argument("--seed", type=int, required=True, help="64-bit RNG seed")
    g.add_argument("--out", required=True, help="output directory")
    g.add_argument("--mode", choices=("degrees", "edges"), default="degrees",
                   help="degrees only (default) or degrees plus edge list")
    g.set_defaults(fn=_cmd_generate)

    e = sub.add_parser("estimate", help="run one estimator on a degree CSV")
    e.add_argument("--degrees", required=True, help="degree CSV path")
    e.add_argument("--estimator", required=True, choices=sorted(_ESTIMATOR_FN))
    e.add_argument("--k", type=int, required=True)
    e.add_argument("--gamma-true", dest="gamma_true", type=float, default=None,
                   help="true gamma for the centered-scaled z column")
    e.add_argument("--manifest", default=None,
                   help="also write the resolved config to this file")
    e.set_defaults(fn=_cmd_estimate)

    a = sub.add_parser("align", help="generate one graph and print its "
                                     "alignment record")
    a.add_argument("--model", required=True, help="nr|cl")
    a.add_argument("--dist", required=True)
    a.add_argument("--n", type=int, required=True)
    a.add_argument("--k", type=int, default=None,
                   help="event-check depth; default admissible_k(n, alpha, c)")
    a.add_argument("--admissible-c", dest="admissible_c", type=float,
                   default=1.0)
    a.add_argument("--seed", type=int, required=True)
    a.add_argument("--manifest", default=None)
    a.set_defaults(fn=_cmd_align)

    x = sub.add_parser("experiment", help="run experiments from a config file")
    x.add_argument("--config", required=True, help="INI-style experiment file")
    x.add_argument("--section", action="append", default=None,
                   help="run only this section (repeatable)")
    x.add_argument("--out", default=None,
                   help="base output directory (overrides per-section output)")
    for flag, _ in _OVERRIDE_KEYS:
        x.add_argument(f"--{flag.replace('_', '-')}", dest=flag, default=None,
                       help=f"override {flag} in every section")
    x.set_defaults(fn=_cmd_experiment)

    c = sub.add_parser("crossover", help="print the PWM/Pickands variance "
                                         "crossover point")
    c.add_argument("--manifest", default=None)
    c.set_defaults(fn=_cmd_crossover)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except DegenerateSampleError as exc:
        print(f"degenerate statistics: {exc}", file=sys.stderr)
        return 4
    except ArithmeticError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 4
    except (OSError, UnicodeDecodeError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def console_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_entry()
