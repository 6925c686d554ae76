#!/usr/bin/env python3
"""Fine-tune a causal model on chained verse pairs.

Reads the pairs JSONL produced by the generation toolkit, encodes each
record as "input <sep> output <eos>", and runs plain causal-LM training:
cross-entropy loss, AdamW (decoupled weight decay). Defaults: 10 epochs,
learning rate 5e-05.
"""

import argparse
import json
import sys
from pathlib import Path

import torch
from transformers import AutoModelForCausalLM, AutoTokenizer

OOM_HINT = "error: out of memory; retry with a smaller --batch-size (currently {n})"


def read_pairs(path: Path) -> list[tuple[str, str]]:
    pairs: list[tuple[str, str]] = []
    try:
        with path.open(encoding="utf-8") as handle:
            for n, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                    pairs.append((record["input"], record["output"]))
                except (ValueError, KeyError, TypeError):
                    raise SystemExit(f"error: {path}:{n}: not a pairs record")
    except OSError as exc:
        raise SystemExit(f"error: cannot read {path}: {exc}")
    if not pairs:
        raise SystemExit(f"error: {path} contains no training pairs")
    return pairs


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--pairs", type=Path, required=True)
    parser.add_argument("--model", required=True, help="base model directory")
    parser.add_argument("--out", type=Path, required=True)
    parser.add_argument("--epochs", type=int, default=10)
    parser.add_argument("--lr", type=float, default=5e-05)
    parser.add_argument("--batch-size", type=int, default=8)
    parser.add_argument("--weight-decay", type=float, default=0.01)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument(
        "--dry-run", action="store_true", help="print the training plan and exit"
    )
    args = parser.parse_args(argv)

    pairs = read_pairs(args.pairs)
    n_batches = (len(pairs) + args.batch_size - 1) // args.batch_size
    print(f"pairs: {len(pairs)}")
    print(f"epochs: {args.epochs}")
    print(f"learning rate: {args.lr:g}")
    print(f"batch size: {args.batch_size} ({n_batches} batches per epoch)")
    print(f"weight decay: {args.weight_decay:g} (decoupled, AdamW)")
    print("loss: cross-entropy")
    if args.dry_run:
        print("dry run: nothing written")
        return 0

    tokenizer = AutoTokenizer.from_pretrained(args.model)
    model = AutoModelForCausalLM.from_pretrained(args.model)
    model.train()
    torch.manual_seed(args.seed)
    if tokenizer.pad_token_id is None:
        tokenizer.pad_token = tokenizer.eos_token
    texts = [f"{inp} <sep> {out} <eos>" for inp, out in pairs]
    optimizer = torch.optim.AdamW(
        model.parameters(), lr=args.lr, weight_decay=args.weight_decay
    )
    try:
        for epoch in range(1, args.epochs + 1):
            total = 0.0
            for start in range(0, len(texts), args.batch_size):
                batch = texts[start : start + args.batch_size]
                encoded = tokenizer(batch, return_tensors="pt", padding=True)
                labels = encoded["input_ids"].clone()
                labels[encoded["attention_mask"] == 0] = -100
                out = model(
                    input_ids=encoded["input_ids"],
                    attention_mask=encoded["attention_mask"],
                    labels=labels,
                )
                out.loss.backward()
                optimizer.step()
                optimizer.zero_grad()
                total += float(out.loss.detach())
            print(f"epoch {epoch}/{args.epochs}: loss {total / n_batches:.4f}")
    except torch.cuda.OutOfMemoryError:
        print(OOM_HINT.format(n=args.batch_size), file=sys.stderr)
        return 1
    except RuntimeError as exc:
        if "out of memory" in str(exc).lower():
            print(OOM_HINT.format(n=args.batch_size), file=sys.stderr)
            return 1
        raise
    args.out.mkdir(parents=True, exist_ok=True)
    tokenizer.save_pretrained(args.out)
    model.save_pretrained(args.out)
    print(f"model written to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
