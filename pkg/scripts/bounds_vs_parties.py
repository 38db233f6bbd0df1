#!/usr/bin/env python3
"""Tabulate the classical/quantum success gap as the party count grows.

The classical optimum decays exponentially toward coin flipping while the
single-qubit protocol stays flat, which is the whole point of the scheme.

Usage: python scripts/bounds_vs_parties.py [--max-parties 12]
"""

import argparse

from qccp import Task, classical_bound, quantum_fidelity


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--max-parties", type=int, default=12)
    args = parser.parse_args()

    print("N\tP_classical_A\tP_quantum_A\tP_classical_B\tP_quantum_B")
    for n in range(1, args.max_parties + 1):
        pa = classical_bound(Task.A, n).success
        pb = classical_bound(Task.B, n).success
        qa = (1 + quantum_fidelity(Task.A, n)) / 2
        qb = (1 + quantum_fidelity(Task.B, n)) / 2
        print(f"{n}\t{pa:.6f}\t{qa:.6f}\t{pb:.6f}\t{qb:.6f}")


if __name__ == "__main__":
    main()
