"""Command-line interface.

Subcommands: kazhdan, build-family, defect, round, oracle, run.  Group specs
are strings like "cyclic:12", "sl2:7", or products joined by '*', e.g.
"cyclic:3*cyclic:4".
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import List, Optional

import numpy as np

from .errors import ConfigError, PermstabError
from .experiment import ExperimentConfig, run_experiment
from .families import DEFAULT_WINDOW, flagship_family
from .groups import FinGroup, MarkedGroup, MarkedMap, cyclic, direct_product, sl2_mod
from .oracle import nearest_homomorphism_bruteforce
from .perms import Perm
from .rounding import rigidity_pipeline
from .spectral import kazhdan_abelian_exact, kazhdan_bracket


def parse_group_spec(spec: str) -> FinGroup:
    factors = []
    for part in spec.split("*"):
        kind, _, arg = part.partition(":")
        if not arg:
            raise ConfigError(f"group spec {part!r} needs an argument, e.g. cyclic:12")
        n = int(arg)
        if kind == "cyclic":
            factors.append(cyclic(n))
        elif kind == "sl2":
            factors.append(sl2_mod(n))
        else:
            raise ConfigError(f"unknown group kind {kind!r}")
    g = factors[0]
    for f in factors[1:]:
        g = direct_product(g, f)
    return g


def _parse_window(s: str):
    a, _, b = s.partition(":")
    if not b:
        raise ConfigError("window must look like 1/7:1/6")
    return (Fraction(a), Fraction(b))


def _emit(data: dict, out: Optional[str]):
    text = json.dumps(data, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def cmd_kazhdan(args) -> int:
    G = parse_group_spec(args.group)
    S = (
        [int(v) for v in args.gens.split(",")]
        if args.gens
        else list(G.generators)
    )
    if G.is_abelian:
        br = kazhdan_abelian_exact(G, S)
    else:
        br = kazhdan_bracket(G, S, tol=args.tol)
    _emit(
        {
            "group": args.group,
            "generators": S,
            "method": br.method,
            "lower": br.lower,
            "upper": br.upper,
            "lambda1": br.lambda1,
        },
        args.out,
    )
    return 0


def cmd_build_family(args) -> int:
    cfg = ExperimentConfig(
        primes=[int(p) for p in args.prime_list.split(",")],
        window=_parse_window(args.window) if args.window else DEFAULT_WINDOW,
        out_dir=args.out,
    )
    run_experiment(cfg)
    return 0


def cmd_defect(args) -> int:
    inst = flagship_family(
        args.prime,
        window=_parse_window(args.window) if args.window else DEFAULT_WINDOW,
    )
    _emit(
        {
            "p": args.prime,
            "family": inst.family.to_json(),
            "report": inst.report.to_json(),
            "floor": str(inst.floor),
        },
        args.out,
    )
    return 0


def cmd_round(args) -> int:
    with open(args.input) as f:
        raw = json.load(f)
    G = parse_group_spec(raw["group"])
    S = [int(v) for v in raw.get("gens", G.generators)]
    y_size = int(raw["y_size"])
    k_gens = [Perm(np.asarray(p, dtype=np.int64)) for p in raw["k_gens"]]
    result = rigidity_pipeline(G, S, y_size, k_gens)
    _emit(result.to_json(), args.out)
    return 0


def cmd_oracle(args) -> int:
    with open(args.input) as f:
        raw = json.load(f)
    marked = MarkedGroup(
        int(raw["generator_count"]),
        tuple(tuple(r) for r in raw.get("relators", [])),
        raw.get("name", "input"),
    )
    images = [Perm(np.asarray(p, dtype=np.int64)) for p in raw["images"]]
    m = MarkedMap(marked, images)
    res = nearest_homomorphism_bruteforce(
        marked,
        m,
        exhaustive_cap=int(raw.get("exhaustive_cap", 10_000_000)),
        seed=args.seed,
    )
    _emit(res.to_json(), args.out)
    return 0


def cmd_run(args) -> int:
    cfg = ExperimentConfig.from_json(args.config)
    if args.out:
        cfg.out_dir = args.out
    if args.seed is not None:
        cfg.seed = args.seed
    out = run_experiment(cfg)
    sys.stdout.write(f"artifacts written to {out}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="permstab")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kazhdan", help="Kazhdan constant (exact or bracket)")
    p.add_argument("--group", required=True, help="e.g. cyclic:12 or sl2:7")
    p.add_argument("--gens", help="comma-separated element indices (default: canonical)")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--out")
    p.set_defaults(func=cmd_kazhdan)

    p = sub.add_parser("build-family", help="swap families over a prime grid")
    p.add_argument("--prime-list", required=True, help="e.g. 7,13,19,43")
    p.add_argument("--window", help="density window, e.g. 1/7:1/6")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_family)

    p = sub.add_parser("defect", help="defect report for one flagship prime")
    p.add_argument("--prime", type=int, required=True)
    p.add_argument("--window")
    p.add_argument("--out")
    p.set_defaults(func=cmd_defect)

    p = sub.add_parser("round", help="run the rigidity pipeline on a JSON instance")
    p.add_argument("--input", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_round)

    p = sub.add_parser("oracle", help="nearest exact homomorphism (brute force)")
    p.add_argument("--input", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("run", help="execute a configured experiment grid")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_run)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return 1
    except PermstabError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
