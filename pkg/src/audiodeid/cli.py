"""Multi-command CLI wiring the modules into the de-identification pipeline.

Commands: ``demo`` (materialize the bundled demo corpus), ``prep``
(annotated articles -> fold CoNLL files), ``tag`` (sentences -> entity
JSON + tagged CoNLL), ``redact`` (WAV + TextGrid + entities -> redacted
WAV), and ``eval fa|ner|pipeline``.

Defaults follow the pipeline's operating point: tolerance 0.25 s, outer
boundary test, confidence threshold 0.9, silence fill.  A ``--config``
key/value file can preset any flag; explicit flags win.  Diagnostics go to
stderr; reports and summaries go to stdout; exit code 0 means no errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import corpus_prep, demo, metrics, redaction, tagging, timealign
from .core import ConfusionCounts, EntitySpan, TimedEntity, WordAlignment
from .errors import AudioDeidError, ParseError
from .formats import (
    parse_conll,
    parse_entities_json,
    parse_textgrid,
    read_wav,
    write_conll,
    write_entities_json,
    write_wav,
)

_TEXTGRID_SUFFIXES = (".TextGrid", ".textgrid")


# ---------------------------------------------------------------------------
# argparse helpers
# ---------------------------------------------------------------------------


def _probability(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"must be within [0, 1], got {text}")
    return value


def _nonnegative(text: str) -> float:
    value = float(text)
    if value < 0.0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {text}")
    return value


def _fold_count(text: str) -> int:
    value = int(text)
    if value < 2:
        raise argparse.ArgumentTypeError(f"need at least 2 folds, got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _tolerance_list(text: str) -> list[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not values or any(v < 0 for v in values):
        raise argparse.ArgumentTypeError(f"tolerances must be non-negative: {text!r}")
    return values


def parse_config(path: str) -> dict[str, str]:
    """Read the ``key = value`` config format (``#`` comments)."""
    values: dict[str, str] = {}
    text = Path(path).read_text(encoding="utf-8")
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ParseError(f"expected 'key = value', found {raw_line.strip()!r}",
                             source=path, line=line_no)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_demo(args: argparse.Namespace) -> int:
    summary = demo.write_demo_corpus(args.out)
    print(f"demo corpus written to {summary['out_dir']}: "
          f"{summary['tokens']} tokens, {summary['entities']} entities, "
          f"{summary['articles']} articles")
    return 0


def _load_article(path: Path) -> tuple[str, str, list[corpus_prep.RawEntity]]:
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
        article_id = doc["id"]
        text = doc["text"]
        entities = [corpus_prep.RawEntity(e["label"], int(e["start"]), int(e["end"]))
                    for e in doc.get("entities", [])]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad article file: {exc}", source=str(path)) from None
    return article_id, text, entities


def cmd_prep(args: argparse.Namespace) -> int:
    article_files = sorted(Path(args.input).glob("*.json"))
    if not article_files:
        raise AudioDeidError(f"no *.json article files under {args.input}")
    table = corpus_prep.default_remap_table()
    if args.remap:
        table = table.merged_with(
            corpus_prep.parse_remap_table(
                Path(args.remap).read_text(encoding="utf-8"), source=args.remap))

    sentences: list[tuple[list[str], list[corpus_prep.LabeledSpan]]] = []
    article_ids: list[str] = []
    for path in article_files:
        article_id, text, raw_entities = _load_article(path)
        article_ids.append(article_id)
        normalized, entities = corpus_prep.normalize_with_entities(text, raw_entities)
        protected = [(e.start, e.end) for e in entities]
        for s_start, s_end in corpus_prep.sentence_spans(normalized, protected):
            sentence = normalized[s_start:s_end]
            offsets = corpus_prep.tokenize_with_offsets(sentence)
            spans: list[corpus_prep.LabeledSpan] = []
            for entity in entities:
                if entity.start >= s_end or entity.end <= s_start:
                    continue
                token_span = corpus_prep.char_span_to_token_span(
                    offsets, entity.start - s_start, entity.end - s_start)
                if token_span is None:
                    continue
                spans.append(corpus_prep.LabeledSpan(
                    entity.label, token_span[0], token_span[1],
                    normalized[entity.start:entity.end]))
            sentences.append(([t for t, _, _ in offsets], spans))

    # Surface every unmapped label at once, before writing anything.
    unknown: set[str] = set()
    for _, spans in sentences:
        for span in spans:
            try:
                table.action_for(span.label, span.text)
            except KeyError:
                unknown.add(span.label.strip().casefold())
    if unknown:
        raise corpus_prep.UnmappedLabelError(unknown)

    conll_sentences: list[tuple[list[str], list[str]]] = []
    for index, (tokens, spans) in enumerate(sentences):
        entity_spans = corpus_prep.remap_entities(spans, table)
        try:
            tags = tagging.encode_bio(entity_spans, len(tokens))
        except ValueError as exc:
            raise AudioDeidError(f"sentence {index}: {exc}") from None
        conll_sentences.append((tokens, tags))

    folds = corpus_prep.make_folds(len(conll_sentences), args.folds, args.seed)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for j, fold in enumerate(folds):
        fold_path = out_dir / f"fold_{j:02d}.conll"
        fold_path.write_bytes(write_conll([conll_sentences[i] for i in fold]))
    manifest = {
        "seed": args.seed,
        "folds": args.folds,
        "sentences": len(conll_sentences),
        "articles": article_ids,
        "fold_sizes": [len(fold) for fold in folds],
        "fold_membership": folds,
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {args.folds} folds covering {len(conll_sentences)} sentences to {out_dir}")
    return 0


def _read_text_sentences(path: str, with_ids: bool) -> list[tuple[str, list[str]]]:
    sentences: list[tuple[str, list[str]]] = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        tokens = line.split()
        if not tokens:
            continue
        if with_ids:
            if len(tokens) < 2:
                raise AudioDeidError(
                    f"{path}: line {line!r} has an id but no tokens")
            sentences.append((tokens[0], tokens[1:]))
        else:
            sentences.append((f"u{len(sentences) + 1}", tokens))
    return sentences


def cmd_tag(args: argparse.Namespace) -> int:
    input_path = Path(args.input)
    fmt = args.format
    if fmt == "auto":
        fmt = "conll" if input_path.suffix == ".conll" else "text"
    if fmt == "conll":
        parsed = parse_conll(input_path.read_bytes(), source=str(input_path))
        sentences = [(f"u{i + 1}", tokens) for i, (tokens, _) in enumerate(parsed)]
    else:
        sentences = _read_text_sentences(str(input_path), args.with_ids)
    if not sentences:
        raise AudioDeidError(f"{args.input}: no sentences to tag")

    backend = tagging.parse_backend_spec(args.backend)
    try:
        tagged = tagging.tag_sentences(
            [tokens for _, tokens in sentences], backend,
            theta=args.theta, threshold_mode=args.threshold_mode,
            strict_bio=args.strict_bio)
    finally:
        if hasattr(backend, "close"):
            backend.close()

    entity_doc = [
        (utterance_id, list(sentence.spans))
        for (utterance_id, _), sentence in zip(sentences, tagged)
    ]
    payload = write_entities_json(entity_doc)
    if args.out_entities == "-":
        sys.stdout.write(payload.decode("utf-8"))
    else:
        Path(args.out_entities).write_bytes(payload)
    if args.out_conll:
        Path(args.out_conll).write_bytes(
            write_conll([(s.tokens, s.labels) for s in tagged]))

    found = sum(len(s.spans) for s in tagged)
    print(f"tagged {len(tagged)} sentences, found {found} entities",
          file=sys.stderr)
    return 0


def _fill_from_args(args: argparse.Namespace) -> redaction.Fill:
    if args.fill == "silence":
        return redaction.Silence()
    if args.fill == "tone":
        return redaction.Tone(args.tone_freq, args.tone_amplitude)
    return redaction.WhiteNoise(args.noise_amplitude, args.noise_seed)


def _redact_one(wav_path: Path, textgrid_path: Path, out_path: Path,
                utterance_id: str, entities_by_id: dict, args: argparse.Namespace,
                transcript_tokens: list[str] | None) -> tuple[str, list[TimedEntity]]:
    audio = read_wav(wav_path.read_bytes(), source=str(wav_path))
    doc = parse_textgrid(textgrid_path.read_bytes(), source=str(textgrid_path))
    try:
        alignments = doc.tier(args.tier).entries
    except KeyError as exc:
        raise AudioDeidError(str(exc.args[0])) from None

    if utterance_id not in entities_by_id:
        available = ", ".join(sorted(entities_by_id)) or "none"
        raise AudioDeidError(
            f"utterance id {utterance_id!r} not in {args.entities} (available: {available})")

    if transcript_tokens is not None:
        try:
            mapping = timealign.reconcile(transcript_tokens, alignments)
        except timealign.ReconcileError as exc:
            if not args.skip_mismatched:
                raise
            print(f"audiodeid: skipping {utterance_id}: {exc}", file=sys.stderr)
            out_path.write_bytes(write_wav(audio))
            return (f"{out_path}: skipped (transcript mismatch), copied unredacted", [])
    else:
        mapping = {i: i for i in range(len(alignments))}

    timed: list[TimedEntity] = []
    for entity in entities_by_id[utterance_id]:
        if isinstance(entity, EntitySpan):
            timed.append(timealign.span_to_interval(entity, alignments, mapping))
        else:
            timed.append(entity)

    plan = redaction.build_plan(timed, pad=args.pad, fill=_fill_from_args(args))
    out_path.write_bytes(write_wav(redaction.redact(audio, plan)))
    summary = (f"{out_path}: redacted {plan.total_seconds:.3f} s "
               f"across {len(timed)} entities")
    return summary, timed


def cmd_redact(args: argparse.Namespace) -> int:
    entities_by_id = dict(parse_entities_json(
        Path(args.entities).read_bytes(), source=args.entities))
    wav_path = Path(args.wav)

    transcript_tokens = None
    if args.transcript:
        lines = _read_text_sentences(args.transcript, with_ids=False)
        if len(lines) != 1:
            raise AudioDeidError(
                f"{args.transcript}: expected a single-utterance transcript, "
                f"found {len(lines)} lines")
        transcript_tokens = lines[0][1]

    if wav_path.is_dir():
        if transcript_tokens is not None:
            raise AudioDeidError("--transcript is only supported in single-file mode")
        jobs = []
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        for wav_file in sorted(wav_path.glob("*.wav")):
            textgrid_file = _matching_textgrid(Path(args.textgrid), wav_file.stem)
            jobs.append((wav_file, textgrid_file, out_dir / wav_file.name, wav_file.stem))
        if not jobs:
            raise AudioDeidError(f"no *.wav files under {args.wav}")
        with ThreadPoolExecutor(max_workers=args.jobs or os.cpu_count()) as pool:
            results = list(pool.map(
                lambda job: _redact_one(*job, entities_by_id, args, None), jobs))
    else:
        utterance_id = args.id or wav_path.stem
        results = [_redact_one(wav_path, Path(args.textgrid), Path(args.out),
                               utterance_id, entities_by_id, args, transcript_tokens)]

    for summary, _ in results:
        print(summary)
    if args.emit_timed:
        timed_doc = []
        if wav_path.is_dir():
            for (_, timed), (_, _, _, stem) in zip(results, jobs):
                timed_doc.append((stem, list(timed)))
        else:
            timed_doc.append((args.id or wav_path.stem, list(results[0][1])))
        Path(args.emit_timed).write_bytes(write_entities_json(timed_doc))
    return 0


def _matching_textgrid(root: Path, stem: str) -> Path:
    for suffix in _TEXTGRID_SUFFIXES:
        candidate = root / f"{stem}{suffix}"
        if candidate.exists():
            return candidate
    raise AudioDeidError(f"no TextGrid for {stem!r} under {root}")


def _load_fa_corpus(path: str, tier: str) -> dict[str, list[WordAlignment]]:
    root = Path(path)
    if root.is_dir():
        files = sorted(p for p in root.iterdir() if p.suffix in _TEXTGRID_SUFFIXES)
        if not files:
            raise AudioDeidError(f"no TextGrid files under {path}")
    else:
        files = [root]
    corpus: dict[str, list[WordAlignment]] = {}
    for file in files:
        doc = parse_textgrid(file.read_bytes(), source=str(file))
        try:
            corpus[file.stem] = doc.tier(tier).entries
        except KeyError as exc:
            raise AudioDeidError(str(exc.args[0])) from None
    return corpus


def cmd_eval_fa(args: argparse.Namespace) -> int:
    pred = _load_fa_corpus(args.pred, args.tier)
    gold = _load_fa_corpus(args.gold, args.tier)
    if len(pred) == 1 == len(gold) and pred.keys() != gold.keys():
        # single-file comparison: stems need not match
        pred = {"corpus": next(iter(pred.values()))}
        gold = {"corpus": next(iter(gold.values()))}

    if args.sweep:
        rows = [(t,
                 metrics.fa_accuracy(pred, gold, t, "std"),
                 metrics.fa_accuracy(pred, gold, t, "outer"))
                for t in args.sweep]
        if args.json:
            print(json.dumps({"tolerances": [r[0] for r in rows],
                              "std": [r[1] for r in rows],
                              "outer": [r[2] for r in rows]}))
        else:
            print(f"{'Tolerance':>10}{'std':>10}{'outer':>10}")
            for t, acc_std, acc_outer in rows:
                print(f"{t:>10.3f}{acc_std:>10.3f}{acc_outer:>10.3f}")
        return 0

    accuracy = metrics.fa_accuracy(pred, gold, args.t, args.mode)
    if args.json:
        print(json.dumps({"t": args.t, "mode": args.mode, "accuracy": accuracy}))
    else:
        print(f"alignment accuracy (mode={args.mode}, t={args.t}): {accuracy:.3f}")
    return 0


def cmd_eval_ner(args: argparse.Namespace) -> int:
    pred = parse_conll(Path(args.pred).read_bytes(), source=args.pred)
    gold = parse_conll(Path(args.gold).read_bytes(), source=args.gold)
    if len(pred) != len(gold):
        raise AudioDeidError(
            f"{len(pred)} predicted sentences vs {len(gold)} gold sentences")
    pred_spans, gold_spans = [], []
    for index, ((p_tokens, p_tags), (g_tokens, g_tags)) in enumerate(zip(pred, gold)):
        if p_tokens != g_tokens:
            raise AudioDeidError(f"sentence {index}: token mismatch between files")
        pred_spans.append(tagging.decode_bio(p_tags))
        gold_spans.append(tagging.decode_bio(g_tags))
    report = metrics.evaluate_ner_spans(pred_spans, gold_spans)
    print(json.dumps(metrics.report_to_json(report)) if args.json
          else metrics.render_report(report))
    return 0


def _timed_entities(path: str) -> dict[str, list[TimedEntity]]:
    result: dict[str, list[TimedEntity]] = {}
    for utterance_id, entities in parse_entities_json(Path(path).read_bytes(), source=path):
        for entity in entities:
            if not isinstance(entity, TimedEntity):
                raise AudioDeidError(
                    f"{path}: utterance {utterance_id!r} has token-level entities; "
                    f"pipeline evaluation needs start_s/end_s")
        result[utterance_id] = list(entities)
    return result


def cmd_eval_pipeline(args: argparse.Namespace) -> int:
    pred = _timed_entities(args.pred)
    gold = _timed_entities(args.gold)
    if pred.keys() != gold.keys():
        raise AudioDeidError(
            f"utterance ids differ between files: {sorted(pred.keys() ^ gold.keys())}")
    counts = ConfusionCounts()
    for utterance_id in sorted(pred):
        counts = counts + metrics.nte_time_counts(
            pred[utterance_id], gold[utterance_id], args.t)
    report = metrics.build_report({}, counts)
    print(json.dumps(metrics.report_to_json(report)) if args.json
          else metrics.render_report(report))
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> tuple[argparse.ArgumentParser, dict[tuple, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="audiodeid",
        description="De-identify speech recordings from word-aligned transcripts.")
    registry: dict[tuple, argparse.ArgumentParser] = {}
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("demo", help="write the bundled demo corpus")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_demo)
    registry[("demo",)] = p

    p = sub.add_parser("prep", help="annotated articles -> fold CoNLL files")
    p.add_argument("--input", required=True, help="directory of article *.json files")
    p.add_argument("--remap", default="", help="remap rule file (extends built-in rules)")
    p.add_argument("--folds", type=_fold_count, default=10)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_prep)
    registry[("prep",)] = p

    p = sub.add_parser("tag", help="find entities in transcript sentences")
    p.add_argument("--input", required=True, help="plain text or CoNLL input")
    p.add_argument("--format", choices=("auto", "text", "conll"), default="auto")
    p.add_argument("--with-ids", action="store_true",
                   help="first field of each text line is the utterance id")
    p.add_argument("--backend", required=True,
                   help="gazetteer:<lexicon>, http:<url> or subprocess:<command>")
    p.add_argument("--theta", type=_probability, default=0.9,
                   help="confidence threshold on p(O); 0 disables")
    p.add_argument("--threshold-mode", choices=("renormalize", "softmax"),
                   default="renormalize")
    p.add_argument("--strict-bio", action="store_true",
                   help="reject orphan I- tags instead of opening a span")
    p.add_argument("--out-entities", default="-", help="entity JSON path (- for stdout)")
    p.add_argument("--out-conll", default="", help="also write tokens + predicted tags")
    p.set_defaults(func=cmd_tag)
    registry[("tag",)] = p

    p = sub.add_parser("redact", help="replace entity intervals in the audio")
    p.add_argument("--wav", required=True, help="input WAV file or directory")
    p.add_argument("--textgrid", required=True, help="TextGrid file or directory")
    p.add_argument("--entities", required=True, help="entity JSON (timed or token spans)")
    p.add_argument("--out", required=True, help="output WAV file or directory")
    p.add_argument("--tier", default="words", help="name of the word tier")
    p.add_argument("--id", default="", help="utterance id (default: wav file stem)")
    p.add_argument("--transcript", default="",
                   help="transcript tokens to reconcile against the tier")
    p.add_argument("--skip-mismatched", action="store_true",
                   help="copy the audio unredacted when the transcript mismatches")
    p.add_argument("--fill", choices=("silence", "tone", "noise"), default="silence")
    p.add_argument("--pad", type=_nonnegative, default=0.0,
                   help="seconds added on each side of every entity")
    p.add_argument("--tone-freq", type=float, default=440.0)
    p.add_argument("--tone-amplitude", type=float, default=0.3)
    p.add_argument("--noise-amplitude", type=float, default=0.3)
    p.add_argument("--noise-seed", type=int, default=0)
    p.add_argument("--jobs", type=_positive_int, default=None,
                   help="worker pool size in directory mode (default: CPU count)")
    p.add_argument("--emit-timed", default="",
                   help="also write the redacted intervals as timed entity JSON")
    p.set_defaults(func=cmd_redact)
    registry[("redact",)] = p

    p = sub.add_parser("eval", help="evaluate a pipeline stage")
    eval_sub = p.add_subparsers(dest="eval_command", required=True)

    q = eval_sub.add_parser("fa", help="word-boundary accuracy of an aligner")
    q.add_argument("--pred", required=True, help="TextGrid file or directory")
    q.add_argument("--gold", required=True, help="TextGrid file or directory")
    q.add_argument("--tier", default="words")
    q.add_argument("--t", type=_nonnegative, default=0.25, help="tolerance in seconds")
    q.add_argument("--mode", choices=metrics.FA_MODES, default="outer")
    q.add_argument("--sweep", type=_tolerance_list, default=None,
                   help="comma-separated tolerances; reports both modes")
    q.add_argument("--json", action="store_true")
    q.set_defaults(func=cmd_eval_fa)
    registry[("eval", "fa")] = q

    q = eval_sub.add_parser("ner", help="span precision/recall/F1 on CoNLL files")
    q.add_argument("--pred", required=True)
    q.add_argument("--gold", required=True)
    q.add_argument("--json", action="store_true")
    q.set_defaults(func=cmd_eval_ner)
    registry[("eval", "ner")] = q

    q = eval_sub.add_parser("pipeline", help="time-domain scoring of timed entities")
    q.add_argument("--pred", required=True, help="timed entity JSON")
    q.add_argument("--gold", required=True, help="timed entity JSON")
    q.add_argument("--t", type=_nonnegative, default=0.25, help="tolerance in seconds")
    q.add_argument("--json", action="store_true")
    q.set_defaults(func=cmd_eval_pipeline)
    registry[("eval", "pipeline")] = q

    return parser, registry


def _inject_config(argv: list[str], config: dict[str, str],
                   registry: dict[tuple, argparse.ArgumentParser]) -> list[str]:
    """Append config entries as flags, skipping any given explicitly and
    any the selected command does not define."""
    path = tuple(token for token in argv if not token.startswith("-"))[:2]
    target = registry.get(path) or registry.get(path[:1])
    if target is None:
        return argv
    given = {token.split("=", 1)[0] for token in argv if token.startswith("--")}
    extra: list[str] = []
    for key, value in config.items():
        flag = "--" + key.replace("_", "-")
        action = target._option_string_actions.get(flag)  # noqa: SLF001
        if action is None or flag in given:
            continue
        if action.nargs == 0:
            if value.strip().lower() in ("1", "true", "yes", "on"):
                extra.append(flag)
        else:
            extra.extend([flag, value])
    return argv + extra


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    config: dict[str, str] = {}
    if "--config" in argv:
        index = argv.index("--config")
        if index + 1 >= len(argv):
            print("audiodeid: error: --config needs a file argument", file=sys.stderr)
            return 2
        config_path = argv[index + 1]
        del argv[index:index + 2]
        try:
            config = parse_config(config_path)
        except (OSError, ParseError) as exc:
            print(f"audiodeid: error: {exc}", file=sys.stderr)
            return 1

    parser, registry = build_parser()
    if config:
        argv = _inject_config(argv, config, registry)
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AudioDeidError as exc:
        print(f"audiodeid: error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"audiodeid: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
