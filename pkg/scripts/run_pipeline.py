#!/usr/bin/env python3
"""End-to-end pipeline run on the bundled fixture corpus.

Cleans the raw corpus into stanzas, trains the n-gram model, then
generates poems from random unseen keyword quadruples. Every artifact
lands under --workdir so repeated runs are easy to diff.
"""

import argparse
import sys
from pathlib import Path

from rimegen import cli

ROOT = Path(__file__).resolve().parents[1]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", type=Path, default=ROOT / "out")
    parser.add_argument("--corpus-dir", type=Path, default=ROOT / "data" / "corpus")
    parser.add_argument("--lexicon", type=Path, default=ROOT / "data" / "lexicon_fr.tsv")
    parser.add_argument("--order", type=int, default=3)
    parser.add_argument("--count", type=int, default=20)
    parser.add_argument("--verses", type=int, default=4)
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()

    args.workdir.mkdir(parents=True, exist_ok=True)
    stanzas = args.workdir / "stanzas.jsonl"
    model = args.workdir / "model.rimegen"
    manifest = args.workdir / "manifest.json"
    trace = args.workdir / "trace.jsonl"

    steps = [
        ["clean", "--in", str(args.corpus_dir), "--out", str(stanzas)],
        [
            "train",
            "--corpus", str(stanzas),
            "--out", str(model),
            "--order", str(args.order),
            "--seed", str(args.seed),
        ],
        [
            "generate",
            "--model", str(model),
            "--lexicon", str(args.lexicon),
            "--corpus", str(stanzas),
            "--random-keywords", "4",
            "--count", str(args.count),
            "--verses", str(args.verses),
            "--seed", str(args.seed),
            "--out", str(manifest),
            "--trace", str(trace),
        ],
    ]
    for argv in steps:
        print(f"$ rimegen {' '.join(argv)}", file=sys.stderr)
        rc = cli.main(argv)
        if rc != 0:
            print(f"step failed with exit code {rc}", file=sys.stderr)
            return rc
        print(file=sys.stderr)
    print(f"artifacts in {args.workdir}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
