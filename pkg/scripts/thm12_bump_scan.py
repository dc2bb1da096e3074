"""Scan the bump amplitude and report the integral-curvature estimate.

For each amplitude the script prints the Lp norm of the curvature excess,
the composed constant, both sides of the estimate and the ratio rhs/lhs.
At amplitude 0 the two sides coincide.
"""
import argparse
import csv
import sys

from ricci_willmore import DecayProfile, GeodesicBallDomain, RotSymManifold, verify_thm12


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=2)
    parser.add_argument("--p", type=float, default=2.0)
    parser.add_argument("--r0", type=float, default=0.5)
    parser.add_argument("--support", type=float, nargs=2, default=[1.0, 2.0])
    parser.add_argument("--amplitudes", type=float, nargs="+",
                        default=[0.0, 1e-4, 1e-3, 1e-2, 0.05, 0.1, 0.2])
    args = parser.parse_args()

    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["amplitude", "rho_norm", "C_total", "lhs", "rhs", "rhs_over_lhs", "pass"])
    for a in args.amplitudes:
        profile = DecayProfile.smooth_bump(a, *args.support)
        domain = GeodesicBallDomain(RotSymManifold(args.n, profile), args.r0)
        report = verify_thm12(domain, args.p)
        writer.writerow([a, repr(report.constants["rho_norm"]), repr(report.constants["C_total"]),
                         repr(report.lhs), repr(report.rhs), repr(report.rhs / report.lhs),
                         str(report.passed).lower()])


if __name__ == "__main__":
    main()
