#!/usr/bin/env python3
"""Build a tiny randomly initialized causal model for offline tests.

Trains a byte-level BPE tokenizer on the bundled fixture corpus and
pairs it with a one-layer randomly initialized model. The result speaks
the generator's special tokens (<sep>, <eos>), loads in well under a
second, and needs no network, which is all the protocol tests require.
"""

import argparse
import sys
from pathlib import Path

import torch
from tokenizers import Tokenizer, decoders, models, pre_tokenizers, trainers
from transformers import GPT2Config, GPT2LMHeadModel, PreTrainedTokenizerFast

ROOT = Path(__file__).resolve().parents[2]
DEFAULT_CORPUS = ROOT / "data" / "corpus"


def build(corpus_dir: Path, out_dir: Path, vocab_size: int, seed: int) -> dict:
    lines: list[str] = []
    for path in sorted(corpus_dir.glob("*.txt")):
        lines.extend(
            line
            for line in path.read_text(encoding="utf-8").splitlines()
            if line.strip()
        )
    if not lines:
        raise SystemExit(f"error: no corpus lines under {corpus_dir}")

    tokenizer = Tokenizer(models.BPE())
    tokenizer.pre_tokenizer = pre_tokenizers.ByteLevel(add_prefix_space=False)
    tokenizer.decoder = decoders.ByteLevel()
    trainer = trainers.BpeTrainer(
        vocab_size=vocab_size,
        special_tokens=["<pad>", "<sep>", "<eos>"],
        # full byte alphabet so any input encodes without an unknown token
        initial_alphabet=pre_tokenizers.ByteLevel.alphabet(),
        show_progress=False,
    )
    tokenizer.train_from_iterator(lines, trainer)
    wrapped = PreTrainedTokenizerFast(
        tokenizer_object=tokenizer,
        eos_token="<eos>",
        pad_token="<pad>",
        additional_special_tokens=["<sep>"],
    )

    torch.manual_seed(seed)
    config = GPT2Config(
        vocab_size=len(wrapped),
        n_positions=256,
        n_embd=32,
        n_layer=1,
        n_head=2,
        bos_token_id=wrapped.eos_token_id,
        eos_token_id=wrapped.eos_token_id,
        pad_token_id=wrapped.pad_token_id,
    )
    model = GPT2LMHeadModel(config)
    out_dir.mkdir(parents=True, exist_ok=True)
    wrapped.save_pretrained(out_dir)
    model.save_pretrained(out_dir)
    return {
        "lines": len(lines),
        "vocab": len(wrapped),
        "parameters": sum(p.numel() for p in model.parameters()),
    }


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, required=True)
    parser.add_argument("--corpus-dir", type=Path, default=DEFAULT_CORPUS)
    parser.add_argument("--vocab-size", type=int, default=512)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    info = build(args.corpus_dir, args.out, args.vocab_size, args.seed)
    print(f"corpus lines: {info['lines']}")
    print(f"vocabulary: {info['vocab']}")
    print(f"parameters: {info['parameters']}")
    print(f"model written to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
