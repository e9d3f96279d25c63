"""Pooled increments of the exploration martingale X_t; the t-statistic should be O(1).

    python3 scripts/martingale_check.py --config configs/two_type.yaml
"""
import argparse
from pathlib import Path

from irgraph.exploration import martingale_diagnostic
from irgraph.model import load_spec, validate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", type=Path, default=Path("configs/two_type.yaml"))
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--replicas", type=int, default=10_000)
    ap.add_argument("--steps", type=int, default=50)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    rep = martingale_diagnostic(validate(load_spec(args.config)), args.n, args.replicas, args.steps, args.seed)
    print(f"mu={rep.mu:.6f} drift={rep.drift:.6f} samples={rep.samples}")
    print(f"mean dX={rep.mean:.3e}  se={rep.std_error:.3e}  t={rep.t_stat:.2f}")


if __name__ == "__main__":
    main()
