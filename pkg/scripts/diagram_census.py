"""Couple counts, molecule validation and degenerate-atom removal statistics by order."""

import argparse
import collections

from fputkin.diagrams.couples import iter_couples
from fputkin.diagrams.decorations import couple_decorations
from fputkin.diagrams.molecules import decorate, molecule_from_couple
from fputkin.diagrams.preprocess import operation_del


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--max-order", type=int, default=3)
    parser.add_argument("--N", type=int, default=6, help="grid size for decorations")
    parser.add_argument("--decorations", type=int, default=3, help="decorations per couple for removal runs")
    args = parser.parse_args()

    print("order,plain_couples,enhanced_couples")
    for n in range(args.max_order + 1):
        plain = sum(1 for _ in iter_couples(n, with_degeneracies=False))
        enhanced = sum(1 for _ in iter_couples(n))
        print(f"{n},{plain},{enhanced}")

    steps = collections.Counter()
    for n in range(1, args.max_order + 1):
        for couple in iter_couples(n):
            if not couple.degenerate_nodes:
                continue
            mol = molecule_from_couple(couple)
            for labels in couple_decorations(couple, 1, args.N)[: args.decorations]:
                _, ledger = operation_del(decorate(mol, labels))
                for step in ledger:
                    steps[(step.kind, step.dE, step.dV, step.dF, step.dchi, step.counting)] += 1
    print("kind,dE,dV,dF,dchi,counting,occurrences")
    for key, count in sorted(steps.items()):
        print(",".join(str(v) for v in key) + f",{count}")


if __name__ == "__main__":
    main()
