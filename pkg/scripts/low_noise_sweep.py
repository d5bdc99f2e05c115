"""pe / sigma over a small-sigma grid against the predicted slope.

    python3 scripts/low_noise_sweep.py --source uniform:0,1 --n 3 --trials 1000000
"""

import argparse

import numpy as np

from permrec import ExperimentConfig, NoiseModel, low_noise_slope, parse_source, sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--source", default="uniform:0,1")
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--trials", type=int, default=10**6)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--method", default="direct", choices=["direct", "isotropic"])
    args = ap.parse_args()

    src = parse_source(args.source)
    slope = low_noise_slope(src, args.n).slope
    cfg = ExperimentConfig(src, NoiseModel.isotropic(1.0, args.n), args.n, args.trials, args.seed)
    print(f"# predicted lim pe/sigma = {slope:.6f}")
    print(f"{'sigma':>10} {'pe/sigma':>10} {'+-':>8} {'rel.err':>8}")
    for row in sweep(cfg, np.logspace(-3, -1, 7), method=args.method):
        se = row.estimate.std_error / row.sigma
        print(f"{row.sigma:10.4g} {row.pe_over_sigma:10.5f} {se:8.4f} {row.pe_over_sigma / slope - 1:+8.4f}")


if __name__ == "__main__":
    main()
