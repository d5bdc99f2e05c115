"""(P_e(inf) - pe) * sigma over a large-sigma grid against the predicted rate.

    python3 scripts/high_noise_rate.py --source uniform:0,1 --n 3 --trials 10000000
"""

import argparse

from permrec import ExperimentConfig, NoiseModel, Stream, high_noise_rate, parse_source, sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--source", default="uniform:0,1")
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--trials", type=int, default=10**7)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    src = parse_source(args.source)
    rate = high_noise_rate(src, args.n, rng=Stream(args.seed))
    print(f"# predicted rate = {rate.rate:.5f} +- {rate.rate_se:.5f}")
    print(f"# bracket = ({rate.lower_bound:.5f}, {rate.upper_bound:.5f})")
    print("# alpha_i = " + ", ".join(f"{a:.5f}" for a in rate.alpha))
    cfg = ExperimentConfig(src, NoiseModel.isotropic(1.0, args.n), args.n, args.trials, args.seed)
    print(f"{'sigma':>8} {'gap*sigma':>10} {'+-':>8}")
    for row in sweep(cfg, [5.0, 10.0, 20.0, 40.0], method="direct"):
        print(f"{row.sigma:8g} {row.gap_times_sigma:10.5f} {row.estimate.std_error * row.sigma:8.5f}")


if __name__ == "__main__":
    main()
