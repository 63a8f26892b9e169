"""Evaluation metrics for every pipeline stage.

Forced alignment is scored by boundary accuracy under two tolerance tests:
``std`` accepts a word when both absolute boundary differences are within
the tolerance, ``outer`` when the prediction covers the gold interval up
to the tolerance inside each edge (so ``outer`` accuracy always dominates
``std``).  Text NER is scored by exact-boundary precision/recall/F1, both
per type and ignoring types.  The time-domain variant pairs predictions
with gold intervals by overlap and counts a pair correct when the outer
test passes; the interval ``(0, 0)`` stands for "no interval on this
side" and never passes the outer test against a real gold interval.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import (
    ConfusionCounts,
    EntitySpan,
    EntityType,
    TimedEntity,
    TimeInterval,
    WordAlignment,
    check_spans_disjoint,
    interval_overlap,
)

FA_MODES = ("std", "outer")


def delta_std(p: TimeInterval, g: TimeInterval, t: float) -> int:
    """1 iff both absolute boundary differences are within ``t`` seconds."""
    if t < 0:
        raise ValueError(f"tolerance must be non-negative, got {t}")
    return int(abs(p.start - g.start) <= t and abs(p.end - g.end) <= t)


def delta_outer(p: TimeInterval, g: TimeInterval, t: float) -> int:
    """1 iff the prediction covers the gold interval up to ``t`` of slack
    inside each edge: ``p.start <= g.start + t`` and ``g.end - t <= p.end``."""
    if t < 0:
        raise ValueError(f"tolerance must be non-negative, got {t}")
    return int(p.start <= g.start + t and g.end - t <= p.end)


def fa_accuracy(pred: dict[str, list[WordAlignment]],
                gold: dict[str, list[WordAlignment]],
                t: float, mode: str = "outer") -> float:
    """Fraction of words whose predicted boundaries pass the tolerance test.

    Both corpora map utterance id to the word list; ids and per-utterance
    word counts must match.  Normalized by the total word count so the
    result lies in [0, 1].
    """
    if mode not in FA_MODES:
        raise ValueError(f"mode must be one of {FA_MODES}, got {mode!r}")
    if pred.keys() != gold.keys():
        extra = sorted(pred.keys() ^ gold.keys())
        raise ValueError(f"utterance ids differ between corpora: {extra}")
    delta = delta_std if mode == "std" else delta_outer

    passed = 0
    total = 0
    for utterance_id in sorted(pred):
        p_words, g_words = pred[utterance_id], gold[utterance_id]
        if len(p_words) != len(g_words):
            raise ValueError(
                f"utterance {utterance_id!r}: {len(p_words)} predicted words "
                f"vs {len(g_words)} gold words")
        total += len(g_words)
        passed += sum(delta(p.interval, g.interval, t) for p, g in zip(p_words, g_words))
    return passed / total if total else 0.0


def match_text_spans(pred: list[EntitySpan], gold: list[EntitySpan],
                     typed: bool = True) -> ConfusionCounts:
    """Exact-boundary span matching within one sentence.

    In typed mode a match must also agree on the entity type, so a
    wrong-type prediction over the right tokens costs one FP and one FN.
    In untyped mode the type is ignored, which is exactly what that
    wrong-type case is scored correct by.
    """
    check_spans_disjoint(pred, context="predictions")
    check_spans_disjoint(gold, context="gold")
    if typed:
        key = lambda s: (s.entity_type, s.token_start, s.token_end)
    else:
        key = lambda s: (s.token_start, s.token_end)
    tp = len({key(s) for s in pred} & {key(s) for s in gold})
    return ConfusionCounts(tp=tp, fp=len(pred) - tp, fn=len(gold) - tp)


def match_text_spans_by_type(pred: list[EntitySpan], gold: list[EntitySpan]
                             ) -> dict[EntityType, ConfusionCounts]:
    """Typed matching split per entity type; summing the rows reproduces
    the typed totals."""
    counts: dict[EntityType, ConfusionCounts] = {}
    for etype in EntityType:
        p = [s for s in pred if s.entity_type is etype]
        g = [s for s in gold if s.entity_type is etype]
        if p or g:
            counts[etype] = match_text_spans(p, g, typed=True)
    return counts


def pair_by_overlap(pred: list[TimedEntity], gold: list[TimedEntity]
                    ) -> list[tuple[int, int]]:
    """Greedy one-to-one pairing of predictions with gold intervals.

    Candidates are pairs with positive temporal overlap, taken in
    descending overlap order; ties prefer the earlier gold start, then the
    earlier prediction start.  Each side is used at most once.
    """
    candidates = []
    for pi, p in enumerate(pred):
        for gi, g in enumerate(gold):
            overlap = interval_overlap(p.interval, g.interval)
            if overlap > 0.0:
                candidates.append((-overlap, g.interval.start, p.interval.start, gi, pi))
    candidates.sort()

    pairs: list[tuple[int, int]] = []
    used_pred: set[int] = set()
    used_gold: set[int] = set()
    for _, _, _, gi, pi in candidates:
        if pi in used_pred or gi in used_gold:
            continue
        used_pred.add(pi)
        used_gold.add(gi)
        pairs.append((pi, gi))
    return pairs


def nte_time_counts(pred: list[TimedEntity], gold: list[TimedEntity],
                    t: float) -> ConfusionCounts:
    """Type-ignoring time-domain counts for one utterance.

    After pairing by overlap: TP counts pairs passing the outer test, FN
    counts pairs failing it plus gold entities left unpaired, FP counts
    predictions left unpaired.
    """
    pairs = pair_by_overlap(pred, gold)
    tp = sum(delta_outer(pred[pi].interval, gold[gi].interval, t) for pi, gi in pairs)
    misaligned = len(pairs) - tp
    fn = misaligned + (len(gold) - len(pairs))
    fp = len(pred) - len(pairs)
    return ConfusionCounts(tp=tp, fp=fp, fn=fn)


def precision(c: ConfusionCounts) -> float:
    """TP / (TP + FP); 0 when the denominator is 0."""
    return c.tp / (c.tp + c.fp) if c.tp + c.fp else 0.0


def recall(c: ConfusionCounts) -> float:
    """TP / (TP + FN); 0 when the denominator is 0."""
    return c.tp / (c.tp + c.fn) if c.tp + c.fn else 0.0


def f1(precision_value: float, recall_value: float) -> float:
    """Harmonic mean; 0 when both inputs are 0."""
    total = precision_value + recall_value
    return 2.0 * precision_value * recall_value / total if total else 0.0


@dataclass(frozen=True)
class Score:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, c: ConfusionCounts) -> "Score":
        p, r = precision(c), recall(c)
        return cls(p, r, f1(p, r))


@dataclass
class EvalReport:
    """Per-type, micro-averaged total, and type-ignoring rows, with the
    confusion counts behind each row."""

    per_type: dict[EntityType, Score] = field(default_factory=dict)
    total: Score = Score(0.0, 0.0, 0.0)
    nte: Score = Score(0.0, 0.0, 0.0)
    counts: dict[str, ConfusionCounts] = field(default_factory=dict)


def build_report(per_type_counts: dict[EntityType, ConfusionCounts],
                 nte_counts: ConfusionCounts) -> EvalReport:
    """Assemble a report: per-type rows, a micro-averaged total (counts
    summed before computing scores), and the type-ignoring row."""
    total_counts = sum(per_type_counts.values(), ConfusionCounts())
    counts: dict[str, ConfusionCounts] = {}
    per_type: dict[EntityType, Score] = {}
    for etype in EntityType:
        if etype in per_type_counts:
            per_type[etype] = Score.from_counts(per_type_counts[etype])
            counts[etype.display] = per_type_counts[etype]
    if per_type:
        counts["Total"] = total_counts
    counts["NTE"] = nte_counts
    return EvalReport(per_type=per_type,
                      total=Score.from_counts(total_counts),
                      nte=Score.from_counts(nte_counts),
                      counts=counts)


def evaluate_ner_spans(pred_sentences: list[list[EntitySpan]],
                       gold_sentences: list[list[EntitySpan]]) -> EvalReport:
    """Corpus-level text NER report from per-sentence span lists."""
    if len(pred_sentences) != len(gold_sentences):
        raise ValueError(f"{len(pred_sentences)} predicted sentences "
                         f"vs {len(gold_sentences)} gold sentences")
    per_type: dict[EntityType, ConfusionCounts] = {}
    nte = ConfusionCounts()
    for pred, gold in zip(pred_sentences, gold_sentences):
        for etype, c in match_text_spans_by_type(pred, gold).items():
            per_type[etype] = per_type.get(etype, ConfusionCounts()) + c
        nte = nte + match_text_spans(pred, gold, typed=False)
    return build_report(per_type, nte)


def render_report(report: EvalReport) -> str:
    """Fixed-width table: one row per entity type, then Total and NTE."""
    header = f"{'Entity Type':<14}{'Precision':>10}{'Recall':>10}{'F1 Score':>10}" \
             f"{'TP':>7}{'FP':>7}{'FN':>7}"
    lines = [header, "-" * len(header)]

    def row(name: str, score: Score, c: ConfusionCounts) -> str:
        return (f"{name:<14}{score.precision:>10.3f}{score.recall:>10.3f}"
                f"{score.f1:>10.3f}{c.tp:>7}{c.fp:>7}{c.fn:>7}")

    for etype, score in report.per_type.items():
        lines.append(row(etype.display, score, report.counts[etype.display]))
    if report.per_type:
        lines.append(row("Total", report.total, report.counts["Total"]))
    lines.append(row("NTE", report.nte, report.counts["NTE"]))
    return "\n".join(lines)


def report_to_json(report: EvalReport) -> dict:
    """JSON-ready dict mirroring the report fields."""
    def score_dict(score: Score) -> dict:
        return {"precision": score.precision, "recall": score.recall, "f1": score.f1}

    def counts_dict(c: ConfusionCounts) -> dict:
        return {"tp": c.tp, "fp": c.fp, "fn": c.fn}

    out: dict = {
        "per_type": {etype.code: score_dict(s) for etype, s in report.per_type.items()},
        "nte": score_dict(report.nte),
        "counts": {name: counts_dict(c) for name, c in report.counts.items()},
    }
    if report.per_type:
        out["total"] = score_dict(report.total)
    return out
