#!/usr/bin/env python3
"""Write a seeded synthetic corpus (graph, dataset, translator table, config).

    python3 scripts/make_synthetic_corpus.py out/synthetic --questions 200 --garble 0.1
    kgqa run out/synthetic/config.json -o out/synthetic/report.json
"""

import argparse

from kgqa.synthetic import make_corpus, write_corpus


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("directory")
    ap.add_argument("--questions", type=int, default=50)
    ap.add_argument("--people", type=int, default=80)
    ap.add_argument("--garble", type=float, default=0.1, help="fraction of unusable translator outputs")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--mode", choices=["oracle", "heuristic"], default="oracle")
    args = ap.parse_args()
    corpus = make_corpus(args.questions, args.seed, args.people, args.garble)
    path = write_corpus(corpus, args.directory, args.mode)
    print(f"{len(corpus.cases)} questions over {corpus.graph}; config at {path}")


if __name__ == "__main__":
    main()
