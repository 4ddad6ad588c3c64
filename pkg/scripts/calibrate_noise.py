"""Print the depolarizing strength that gives a target mean eps, per kappa."""

import argparse

from pbr_ions.protocol import CrosstalkConfig, calibrate_noise, forbidden_probabilities, probability_matrix


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--target", type=float, default=0.011)
    parser.add_argument("--kappas", default="0,0.005,0.01,0.02")
    args = parser.parse_args()

    print(f"{'kappa':>8} {'noise_p':>10} {'eps_1..4':>40}")
    for kappa in (float(k) for k in args.kappas.split(",")):
        p = calibrate_noise(args.target, kappa)
        eps = forbidden_probabilities(probability_matrix(CrosstalkConfig(kappa), p))
        print(f"{kappa:8.4f} {p:10.6f} " + " ".join(f"{e:9.5f}" for e in eps))


if __name__ == "__main__":
    main()
