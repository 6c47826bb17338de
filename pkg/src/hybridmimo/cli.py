"""Command-line driver.

    hybridmimo svd-report|equivalence|patterns|sinr-map|all [--config PATH] [--out DIR] [--seed N] [--rank T]

Exit status is 0 only when every check of the executed commands passes.
"""

from __future__ import annotations

import argparse
import logging
import sys

from hybridmimo import experiment
from hybridmimo.config import ExperimentConfig, load_config, serialize_config
from hybridmimo.errors import HybridMimoError

COMMANDS = {
    "svd-report": experiment.run_svd_report,
    "equivalence": experiment.run_equivalence,
    "patterns": experiment.run_patterns,
    "sinr-map": experiment.run_sinr_map,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hybridmimo", description="Eigenbeam hybrid massive MIMO experiments")
    p.add_argument("command", choices=[*COMMANDS, "all", "show-config"])
    p.add_argument("--config", help="INI-style config file; missing keys take defaults")
    p.add_argument("--out", help="output directory (overrides out_dir)")
    p.add_argument("--seed", type=int, help="experiment seed (overrides seed)")
    p.add_argument("--rank", type=int, help="rank budget t (overrides rank_budget)")
    p.add_argument("--perturb-beams", action="store_true",
                   help="negative control: perturb the analog weights so equivalence must fail")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def resolve_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    changes = {}
    if args.out is not None:
        changes["out_dir"] = args.out
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.rank is not None:
        changes["rank_budget"] = args.rank
    if args.perturb_beams:
        changes["perturb_beams"] = True
    return cfg.replace(**changes) if changes else cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        if args.command == "show-config":
            sys.stdout.write(serialize_config(cfg))
            return 0
        if args.command == "all":
            results = experiment.run_all(cfg)
        else:
            results = [COMMANDS[args.command](cfg)]
    except (HybridMimoError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    ok = True
    for r in results:
        ok &= r.ok
        detail = ", ".join(f"{k}={v}" for k, v in r.summary.items() if k != "status")
        print(f"{r.name}: {'PASS' if r.ok else 'FAIL'} ({detail})")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
