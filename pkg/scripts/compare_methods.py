"""Print the four wavenumber routes side by side for the fluid-sphere demo.

    python scripts/compare_methods.py --phi 0.01 --ka 0.05 0.1 0.3
"""

import argparse

from coherentk import METHODS, MixtureSpec, ModalSystem, dispersion, fluid_sphere_demo


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--phi", type=float, default=0.01, help="volume fraction")
    ap.add_argument("--ka", type=float, nargs="+", default=[0.05, 0.1, 0.3, 0.6])
    args = ap.parse_args()
    print(f"{'ka':>6} {'method':<14} {'Re xi/k':>14} {'Im xi/k':>14}")
    for ka in args.ka:
        host, t = fluid_sphere_demo(ka=ka)
        a = t.radius_a
        k = host.wavenumbers(t.omega)[0]
        system = ModalSystem.build(host, t, MixtureSpec.from_volume_fraction(args.phi, a, 2.0001 * a), t.omega)
        res = dispersion(system, METHODS)
        for m in METHODS:
            xi = res[m][0].xi / k
            print(f"{ka:6.3f} {m:<14} {xi.real:14.10f} {xi.imag:14.4e}")


if __name__ == "__main__":
    main()
