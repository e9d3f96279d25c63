"""Connectivity of a two-block model under each inter-block rate listed in the config.

    python3 scripts/block_connectivity.py --config configs/blocks.yaml --out runs/blocks
"""
import argparse
from pathlib import Path

from irgraph.harness import ExperimentConfig, run_block_experiment
from irgraph.model import inter_schedules_from_dict, load_config, spec_from_dict, validate_blocks


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", type=Path, default=Path("configs/blocks.yaml"))
    ap.add_argument("--n", type=int, nargs="+", default=[10_000, 50_000])
    ap.add_argument("--replicas", type=int, default=50)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("runs/blocks"))
    args = ap.parse_args()

    raw = load_config(args.config)
    model = validate_blocks(spec_from_dict(raw))
    cfg = ExperimentConfig(model, tuple(args.n), args.replicas, master_seed=args.seed,
                           threads=args.threads, inter_schedules=tuple(inter_schedules_from_dict(raw)))
    res = run_block_experiment(cfg)
    res.write(args.out)
    for line in res.summary_lines():
        print(line)


if __name__ == "__main__":
    main()
