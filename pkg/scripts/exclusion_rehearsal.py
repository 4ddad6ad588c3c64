"""Repeat the simulated run over many seeds and summarize the sigma distances."""

import argparse
import json

import numpy as np

from pbr_ions.experiment import analyze_records, simulate_run
from pbr_ions.protocol import CrosstalkConfig, calibrate_noise, probability_matrix


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--kappa", type=float, default=0.01)
    parser.add_argument("--target", type=float, default=0.011)
    parser.add_argument("--shots", type=int, default=10_000)
    parser.add_argument("--runs", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    noise = calibrate_noise(args.target, args.kappa)
    matrix = probability_matrix(CrosstalkConfig(args.kappa), noise)
    seeds = np.random.SeedSequence(args.seed).generate_state(args.runs, dtype=np.uint64)
    sigmas, means = [], []
    for seed in seeds:
        report, _ = analyze_records(simulate_run(matrix, args.shots, int(seed)), matrix.outcome_assignment, args.kappa)
        sigmas.append(report.sigma_distance)
        means.append(report.mean)
    sigmas = np.array(sigmas)
    print(json.dumps({
        "kappa": args.kappa,
        "noise_p": noise,
        "shots": args.shots,
        "runs": args.runs,
        "mean_eps": float(np.mean(means)),
        "sigma_distance": {"min": sigmas.min(), "median": float(np.median(sigmas)), "max": sigmas.max()},
        "fraction_above_3_sigma": float((sigmas > 3).mean()),
        "fraction_above_4.5_sigma": float((sigmas > 4.5).mean()),
    }, indent=2, default=float))


if __name__ == "__main__":
    main()
