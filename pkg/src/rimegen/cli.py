"""Command-line surface: clean, train, generate, rhyme, annotate.

Exit codes: 0 success, 1 domain-negative (a rhyme query with no
relation), 2 data problem (unreadable or malformed inputs, backend
failure), 3 usage error, 4 internal error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import random
import sys
from datetime import datetime, timezone
from pathlib import Path

import rimegen
from rimegen.bridge_client import BridgeError, bridge_connect
from rimegen.corpus import (
    CorpusError,
    KeywordError,
    KeywordSet,
    build_pairs,
    build_stats,
    corpus_keywords,
    ingest_dir,
    read_stanzas,
    split_train_val,
    write_keywords,
    write_pairs,
    write_stanzas,
)
from rimegen.generator import (
    GenerationConfig,
    GenerationError,
    generate_poem,
)
from rimegen.lm import LmError, NgramModel, train_ngram
from rimegen.phonetics import (
    Lexicon,
    LexiconError,
    VowelSet,
    classify,
    equalize,
    normalize_token,
)


class UsageError(Exception):
    """Bad flag combination or value; maps to exit code 3."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); we want 3
        raise UsageError(message)


def _sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _load_lexicon(path: str) -> Lexicon:
    return Lexicon.from_file(path)


def _load_vowels(path: str | None) -> VowelSet:
    return VowelSet.from_file(path) if path else VowelSet.default()


def cmd_clean(args) -> int:
    result = ingest_dir(args.in_dir)
    for message in result.skipped:
        print(f"warning: {message}", file=sys.stderr)
    if not result.stanzas:
        raise CorpusError(f"{args.in_dir}: no stanzas found")
    write_stanzas(args.out, result.stanzas)
    print(f"files: {result.n_files}")
    print(f"poems: {result.n_poems}")
    print(f"stanzas: {len(result.stanzas)}")
    return 0


def cmd_train(args) -> int:
    if args.order < 2:
        raise UsageError("order must be at least 2")
    stanzas = read_stanzas(args.corpus)
    if not stanzas:
        raise CorpusError(f"{args.corpus}: corpus is empty")
    stats = build_stats(stanzas)
    keyword_map = corpus_keywords(stanzas, stats)
    train_stanzas, val_stanzas = split_train_val(stanzas, 0.8, seed=args.seed)
    train_pairs = [
        pair
        for stanza in train_stanzas
        for pair in build_pairs(stanza, keyword_map.get(stanza.id))
    ]
    val_pairs = [
        pair
        for stanza in val_stanzas
        for pair in build_pairs(stanza, keyword_map.get(stanza.id))
    ]
    if not train_pairs:
        raise CorpusError("corpus produced no training pairs")
    model = train_ngram(train_pairs, order=args.order, seed=args.seed)
    model.save(args.out)
    print(
        f"stanzas: {len(stanzas)} "
        f"(train {len(train_stanzas)}, validation {len(val_stanzas)})"
    )
    print(f"pairs: {len(train_pairs)} train, {len(val_pairs)} validation")
    print(f"vocabulary: {len(model.vocab)}")
    if val_pairs:
        print(f"validation perplexity: {model.perplexity(val_pairs):.2f}")
    else:
        print("validation perplexity: n/a (empty validation split)")
    print(f"model written to {args.out}")
    return 0


def _explicit_keywords(raw: str) -> KeywordSet:
    words = []
    for piece in raw.split(","):
        norm = normalize_token(piece)
        if not norm:
            raise UsageError(f"empty keyword in {raw!r}")
        words.append(norm)
    if len(words) > 4:
        raise UsageError("at most 4 keywords are allowed")
    try:
        return KeywordSet(tuple(words))
    except KeywordError as exc:
        raise UsageError(str(exc)) from exc


def _random_keywords(args) -> tuple[list[KeywordSet], dict]:
    n = args.random_keywords
    if not 1 <= n <= 4:
        raise UsageError("--random-keywords takes a count between 1 and 4")
    if not args.corpus:
        raise UsageError("--random-keywords needs --corpus for sampling")
    stanzas = read_stanzas(args.corpus)
    if not stanzas:
        raise CorpusError(f"{args.corpus}: corpus is empty")
    stats = build_stats(stanzas)
    keyword_map = corpus_keywords(stanzas, stats)
    known = {frozenset(ks.keywords) for ks in keyword_map.values()}
    pool = sorted({word for ks in keyword_map.values() for word in ks.keywords})
    if len(pool) < n:
        raise CorpusError(
            f"keyword pool has only {len(pool)} words, need {n}"
        )
    rng = random.Random(args.seed)
    quadruples: list[KeywordSet] = []
    chosen: set[frozenset] = set()
    attempts = 0
    while len(quadruples) < args.count:
        attempts += 1
        if attempts > 1000 * args.count:
            raise CorpusError("cannot sample enough unseen keyword sets")
        words = tuple(rng.sample(pool, n))
        key = frozenset(words)
        if key in known or key in chosen:
            continue
        chosen.add(key)
        quadruples.append(KeywordSet(words))
    meta = {
        "mode": "random",
        "n": n,
        "corpus": {"path": str(args.corpus), "sha256": _sha256(args.corpus)},
    }
    return quadruples, meta


def cmd_generate(args) -> int:
    if bool(args.model) == bool(args.bridge):
        raise UsageError("specify exactly one of --model or --bridge")
    if args.keywords and args.random_keywords:
        raise UsageError("--keywords and --random-keywords are exclusive")
    if not args.keywords and not args.random_keywords:
        raise UsageError("specify --keywords or --random-keywords")
    if args.count < 1:
        raise UsageError("--count must be at least 1")
    if not args.lexicon:
        raise UsageError("--lexicon is required for generation")
    try:
        config = GenerationConfig(
            k=args.k,
            min_tokens=args.min_tokens,
            max_tokens=args.max_tokens,
            rhyme_weight=args.rhyme_weight,
            length_penalty=args.length_penalty,
            n_verses=args.verses,
            seed=args.seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc

    lexicon = _load_lexicon(args.lexicon)
    vowels = _load_vowels(args.vowels)
    if args.keywords:
        keyword_set = _explicit_keywords(args.keywords)
        quadruples = [keyword_set] * args.count
        keywords_meta = {"mode": "explicit", "values": list(keyword_set.keywords)}
    else:
        quadruples, keywords_meta = _random_keywords(args)

    started = datetime.now(timezone.utc).isoformat(timespec="seconds")
    if args.model:
        backend = NgramModel.load(args.model)
        backend_meta = {
            "kind": "ngram",
            "model": {"path": str(args.model), "sha256": _sha256(args.model)},
        }
        closer = None
    else:
        backend = bridge_connect(args.bridge)
        backend_meta = {
            "kind": "bridge",
            "command": args.bridge,
            "name": backend.name,
            "version": backend.version,
        }
        closer = backend.close

    trace_handle = open(args.trace, "w", encoding="utf-8") if args.trace else None
    blocks: list[str] = []
    try:
        for index, keyword_set in enumerate(quadruples, start=1):
            poem = generate_poem(keyword_set, backend, lexicon, vowels, config)
            lines = [f"=== poem {index} ===", f"keywords: {keyword_set.joined()}"]
            lines.extend(poem.verses)
            lines.append("")
            blocks.append("\n".join(lines) + "\n")
            if trace_handle is not None:
                _write_trace(trace_handle, index, poem)
    finally:
        if trace_handle is not None:
            trace_handle.close()
        if closer is not None:
            closer()

    output = "".join(blocks)
    sys.stdout.write(output)
    finished = datetime.now(timezone.utc).isoformat(timespec="seconds")
    manifest = {
        "inputs": {
            "tool": {"name": "rimegen", "version": rimegen.__version__},
            "backend": backend_meta,
            "lexicon": {"path": str(args.lexicon), "sha256": _sha256(args.lexicon)},
            "vowels": (
                {"path": str(args.vowels), "sha256": _sha256(args.vowels)}
                if args.vowels
                else {"builtin": "fr"}
            ),
            "keywords": keywords_meta,
            "count": args.count,
            "config": {
                "k": config.k,
                "min_tokens": config.min_tokens,
                "max_tokens": config.max_tokens,
                "rhyme_weight": config.rhyme_weight,
                "length_penalty": config.length_penalty,
                "n_verses": config.n_verses,
                "seed": config.seed,
            },
        },
        "run": {
            "started": started,
            "finished": finished,
            "poems": len(quadruples),
            "output_sha256": hashlib.sha256(output.encode("utf-8")).hexdigest(),
        },
    }
    with open(args.out, "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True, ensure_ascii=False)
        handle.write("\n")
    return 0


def _write_trace(handle, poem_index: int, poem) -> None:
    for verse_index, trace in enumerate(poem.traces, start=1):
        for step_index, step in enumerate(trace.steps, start=1):
            record = {
                "poem": poem_index,
                "verse": verse_index,
                "step": step_index,
                "context_length": step.context_length,
                "chosen": step.chosen,
                "candidates": [
                    {
                        "token": c.token,
                        "logprob": c.logprob,
                        "indicator": c.indicator,
                        "score": c.score,
                    }
                    for c in step.candidates
                ],
            }
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")


def _flags(relation) -> str:
    return (
        f"full={str(relation.full).lower()} "
        f"assonance={str(relation.assonance).lower()} "
        f"consonance={str(relation.consonance).lower()} "
        f"any={str(relation.any).lower()}"
    )


def cmd_rhyme(args) -> int:
    lexicon = _load_lexicon(args.lexicon)
    vowels = _load_vowels(args.vowels)
    pron_a = lexicon.lookup(args.token_a)
    pron_b = lexicon.lookup(args.token_b)
    print(f"{args.token_a}: " + (f"/{pron_a}/" if pron_a else "unknown"))
    print(f"{args.token_b}: " + (f"/{pron_b}/" if pron_b else "unknown"))
    if pron_a is None or pron_b is None:
        return 2
    eq_a, eq_b = equalize(pron_a, pron_b)
    print(f"equalized: /{eq_a}/ /{eq_b}/")
    relation = classify(pron_a, pron_b, vowels)
    print(_flags(relation))
    return 0 if relation.any else 1


def _final_word(line: str) -> str | None:
    from rimegen.lm import tokenize

    for token in reversed(tokenize(line)):
        norm = normalize_token(token)
        if norm:
            return norm
    return None


def cmd_annotate(args) -> int:
    try:
        text = Path(args.in_path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise CorpusError(f"cannot read poem file: {exc}") from exc
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines:
        raise CorpusError(f"{args.in_path}: empty poem file")
    lexicon = _load_lexicon(args.lexicon)
    vowels = _load_vowels(args.vowels)
    finals = [_final_word(line) for line in lines]
    for i in range(len(lines)):
        for j in range(i + 1, len(lines)):
            word_i = finals[i] or "-"
            word_j = finals[j] or "-"
            prefix = f"{i + 1} {j + 1} {word_i} {word_j}"
            if (
                finals[i] is None
                or finals[j] is None
                or lexicon.lookup(finals[i]) is None
                or lexicon.lookup(finals[j]) is None
            ):
                print(f"{prefix} unknown")
                continue
            relation = classify(
                lexicon.lookup(finals[i]), lexicon.lookup(finals[j]), vowels
            )
            print(f"{prefix} {_flags(relation)}")
    return 0


def cmd_keywords(args) -> int:
    stanzas = read_stanzas(args.corpus)
    if not stanzas:
        raise CorpusError(f"{args.corpus}: corpus is empty")
    keyword_map = corpus_keywords(stanzas, build_stats(stanzas))
    if args.out:
        write_keywords(args.out, keyword_map)
        print(f"keywords for {len(keyword_map)} stanzas written to {args.out}")
    else:
        for stanza_id, keyword_set in keyword_map.items():
            print(f"{stanza_id}\t{keyword_set.joined()}")
    return 0


def cmd_pairs(args) -> int:
    stanzas = read_stanzas(args.corpus)
    if not stanzas:
        raise CorpusError(f"{args.corpus}: corpus is empty")
    keyword_map = corpus_keywords(stanzas, build_stats(stanzas))
    pairs = [
        pair
        for stanza in stanzas
        for pair in build_pairs(stanza, keyword_map.get(stanza.id))
    ]
    if args.out:
        write_pairs(args.out, pairs)
        print(f"{len(pairs)} pairs written to {args.out}")
    else:
        for pair in pairs:
            print(json.dumps({"input": pair.input, "output": pair.output}, ensure_ascii=False))
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="rimegen", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_clean = sub.add_parser("clean", help="ingest a directory of poem files")
    p_clean.add_argument("--in", dest="in_dir", required=True)
    p_clean.add_argument("--out", required=True)
    p_clean.set_defaults(func=cmd_clean)

    p_train = sub.add_parser("train", help="train the built-in n-gram model")
    p_train.add_argument("--corpus", required=True)
    p_train.add_argument("--out", required=True)
    p_train.add_argument("--order", type=int, default=3)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.set_defaults(func=cmd_train)

    p_gen = sub.add_parser("generate", help="generate poems")
    p_gen.add_argument("--model")
    p_gen.add_argument("--bridge")
    p_gen.add_argument("--lexicon", required=True)
    p_gen.add_argument("--vowels")
    p_gen.add_argument("--corpus")
    p_gen.add_argument("--keywords")
    p_gen.add_argument("--random-keywords", type=int, dest="random_keywords")
    p_gen.add_argument("--verses", type=int, default=4)
    p_gen.add_argument("--count", type=int, default=1)
    p_gen.add_argument("--k", type=int, default=10)
    p_gen.add_argument("--min-tokens", type=int, default=4, dest="min_tokens")
    p_gen.add_argument("--max-tokens", type=int, default=20, dest="max_tokens")
    p_gen.add_argument("--rhyme-weight", type=float, default=0.5, dest="rhyme_weight")
    p_gen.add_argument(
        "--length-penalty", type=float, default=1.0, dest="length_penalty"
    )
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", default="rimegen-manifest.json")
    p_gen.add_argument("--trace")
    p_gen.set_defaults(func=cmd_generate)

    p_rhyme = sub.add_parser("rhyme", help="classify the rhyme between two tokens")
    p_rhyme.add_argument("--lexicon", required=True)
    p_rhyme.add_argument("--vowels")
    p_rhyme.add_argument("token_a")
    p_rhyme.add_argument("token_b")
    p_rhyme.set_defaults(func=cmd_rhyme)

    p_annot = sub.add_parser("annotate", help="rhyme table over a poem's lines")
    p_annot.add_argument("--lexicon", required=True)
    p_annot.add_argument("--vowels")
    p_annot.add_argument("--in", dest="in_path", required=True)
    p_annot.set_defaults(func=cmd_annotate)

    p_kw = sub.add_parser("keywords", help="extract per-stanza keywords")
    p_kw.add_argument("--corpus", required=True)
    p_kw.add_argument("--out")
    p_kw.set_defaults(func=cmd_keywords)

    p_pairs = sub.add_parser("pairs", help="dump seq2seq training pairs")
    p_pairs.add_argument("--corpus", required=True)
    p_pairs.add_argument("--out")
    p_pairs.set_defaults(func=cmd_pairs)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 3
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 3
    except (
        CorpusError,
        LexiconError,
        LmError,
        BridgeError,
        GenerationError,
        OSError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - safety net
        print(f"internal error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
