"""
How the block ratio C_j / S_j^2 behaves as sigma moves toward 1, for
a_n = n^2 and uniformly sampled alpha. Prints one line per (sigma, block).
"""

import argparse

import numpy as np

from twisted_targets.fourier import Lebesgue, sample_alphas
from twisted_targets.model import PolynomialSequence, PowerPsi
from twisted_targets.moments import BlockScheme, gp_ensemble
from twisted_targets.targets import TargetFamily

ap = argparse.ArgumentParser()
ap.add_argument("--samples", type=int, default=20)
ap.add_argument("--seed", type=int, default=1)
ap.add_argument("--last-block", type=int, default=12)
ap.add_argument("--threads", type=int, default=4)
args = ap.parse_args()

alphas = sample_alphas(Lebesgue(), args.samples, args.seed)
scheme = BlockScheme.dyadic(args.last_block)
blocks = list(range(5, args.last_block + 1))
print("sigma,j,median_ratio,max_ratio")
for sigma in (0.5, 0.7, 0.9, 0.95):
    fams = [TargetFamily(a, PolynomialSequence(d=2), PowerPsi(sigma)) for a in alphas]
    s = gp_ensemble(fams, scheme, blocks, threads=args.threads)
    for col, j in enumerate(blocks):
        v = s.ratios[:, col]
        print(f"{sigma},{j},{np.nanmedian(v):.4f},{np.nanmax(v):.4f}")
