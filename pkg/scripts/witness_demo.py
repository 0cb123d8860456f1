"""Swap witness on a family of two-oscillator states.

Mixes the antisymmetric single-photon state with the product |0>|1> and
prints <V_2> (exact and sampled) against the mixing weight. The witness
flags entanglement once the value drops below zero.

    python3 scripts/witness_demo.py --shots 10000 --seed 1
"""

import argparse

import numpy as np

from oscswap.estimator import estimate_pipeline
from oscswap.fock import CutoffConfig, density_state, fock_state, superpose
from oscswap.swap import classify_witness

C1 = CutoffConfig(1, 2)


def mixture(p: float):
    anti = superpose([(1, fock_state(C1, (0, 1))), (-1, fock_state(C1, (1, 0)))]).density_matrix()
    prod = fock_state(C1, (0, 1)).density_matrix()
    return density_state(p * anti + (1 - p) * prod, C1)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--shots", type=int, default=10_000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--points", type=int, default=6)
    args = parser.parse_args()

    print(f"{'p':>5} {'exact':>9} {'sampled':>9} {'stderr':>8}  verdict")
    for i, p in enumerate(np.linspace(0, 1, args.points)):
        rho = mixture(p)
        exact = estimate_pipeline(rho, 2).value.real
        est = estimate_pipeline(rho, 2, shots=args.shots, seed=args.seed + i)
        verdict = classify_witness(est.value.real, 3 * est.stderr_real).verdict.value
        print(f"{p:5.2f} {exact:9.4f} {est.value.real:9.4f} {est.stderr_real:8.4f}  {verdict}")


if __name__ == "__main__":
    main()
