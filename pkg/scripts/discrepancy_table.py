"""Star discrepancy of x_n = a_n alpha mod 1 for a few named alphas and sequences."""

from twisted_targets.model import GeometricSequence, PolynomialSequence
from twisted_targets.orbit import auto_precision, orbit_points, parse_alpha, star_discrepancy

N = 10_000
seqs = {"n": PolynomialSequence(), "n^2": PolynomialSequence(d=2), "n^3": PolynomialSequence(d=3),
        "2^n": GeometricSequence(1, 2)}
print("alpha,sequence,N,D_star")
for name in ("sqrt2-1", "golden", "e-2", "pi-3", "1/3"):
    for label, a in seqs.items():
        n = N if label != "2^n" else 2000  # 2^n needs bits ~ n; keep it modest
        alpha = auto_precision(parse_alpha(name), a, n)
        d = star_discrepancy(orbit_points(alpha, a, 1, n).points)
        print(f"{name},{label},{n},{d:.6f}")
