"""Direct simulation against the orthant-average estimator on random configurations.

    python3 scripts/theorem1_crosscheck.py --configs 20 --direct 1000000 --nested 100000
"""

import argparse

import numpy as np

from permrec import DecoderSpec, ExperimentConfig, NoiseModel, pe_direct, pe_theorem1
from permrec.estimate import combined_se
from permrec.verify import crosscheck_configs


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--configs", type=int, default=20)
    ap.add_argument("--direct", type=int, default=10**6)
    ap.add_argument("--nested", type=int, default=10**5)
    ap.add_argument("--inner", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--threads", type=int)
    args = ap.parse_args()

    print(f"{'#':>3} {'source':>14} {'n':>2} {'cond K':>8} {'cond A':>7} {'direct':>9} {'orthant':>9} {'z':>6}")
    for c, (src, n, K, A, b) in enumerate(crosscheck_configs(args.seed, args.configs)):
        base = dict(source=src, noise=NoiseModel.general(K), n=n, decoder=DecoderSpec(A, b), threads=args.threads)
        d = pe_direct(ExperimentConfig(trials=args.direct, seed=args.seed + 2 * c, **base))
        t = pe_theorem1(ExperimentConfig(trials=args.nested, seed=args.seed + 2 * c + 1,
                                         inner_orthant_samples=args.inner, **base))
        z = (d.value - t.value) / combined_se(d, t)
        print(f"{c:3d} {src.label():>14} {n:2d} {np.linalg.cond(K):8.3g} {np.linalg.cond(A):7.3g} "
              f"{d.value:9.5f} {t.value:9.5f} {z:+6.2f}")


if __name__ == "__main__":
    main()
