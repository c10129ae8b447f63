"""Write a synthetic three-wave T-matrix (compressional, shear, thermal) to JSON.

The coefficients decay geometrically with order and carry random phases, so
the file exercises mode coupling without a constitutive scattering model.

    python scripts/make_three_wave_tmatrix.py scripts/three_wave_tmatrix.json
"""

import argparse

import numpy as np

from coherentk.tmatrix import random_tmatrix, save_tmatrix


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out")
    ap.add_argument("--seed", type=int, default=11)
    ap.add_argument("--n-max", type=int, default=10)
    ap.add_argument("--amplitude", type=float, default=0.02)
    ap.add_argument("--decay", type=float, default=0.1)
    ap.add_argument("--radius", type=float, default=1e-6, help="sphere radius a (m)")
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    t = random_tmatrix(3, args.n_max, rng, amplitude=args.amplitude, decay=args.decay,
                       radius_a=args.radius)
    save_tmatrix(t, args.out)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
