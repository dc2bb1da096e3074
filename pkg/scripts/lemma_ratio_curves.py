"""Tabulate psi1/sinh and psi2/psi1 against their bounds for a set of profiles.

Writes one whitespace-separated table per profile into the output directory,
ready for gnuplot or numpy.loadtxt.
"""
import argparse
from pathlib import Path

import numpy as np
from scipy.integrate import cumulative_simpson

from ricci_willmore import DecayProfile, solve_psi_pair
from ricci_willmore.ode import ratio

PROFILES = {
    "zero": DecayProfile.zero(),
    "exp_1_1": DecayProfile.exponential(1.0, 1.0),
    "exp_0.5_2": DecayProfile.exponential(0.5, 2.0),
    "power_1_2": DecayProfile.power(1.0, 2.0),
}


def curves(profile, t_max, stride):
    sol1, sol2 = solve_psi_pair(profile, t_max)
    t = sol1.grid
    lam = sol1.lambda_samples
    # t = 0 is singular for every column and is dropped by the stride below
    with np.errstate(divide="ignore", invalid="ignore"):
        growth = sol1.psi / np.sinh(t)
        decay_cap = 1.0 / np.tanh(t) + cumulative_simpson(lam / np.cosh(t) ** 2, x=t, initial=0.0)
    growth_cap = np.exp(cumulative_simpson(lam, x=t, initial=0.0))
    decay = ratio(sol2, sol1)[0]
    keep = slice(stride, None, stride)
    return np.column_stack([t, growth, growth_cap, decay, decay_cap])[keep]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--t-max", type=float, default=20.0)
    parser.add_argument("--stride", type=int, default=50, help="keep every k-th grid point")
    parser.add_argument("--out", type=Path, default=Path("lemma_curves"))
    args = parser.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    for name, profile in PROFILES.items():
        table = curves(profile, args.t_max, args.stride)
        path = args.out / f"{name}.dat"
        np.savetxt(path, table, fmt="%.17g",
                   header="t psi1/sinh exp(int_0^t Lambda) psi2/psi1 coth+int_0^t Lambda/cosh^2")
        print(path)


if __name__ == "__main__":
    main()
