"""Brute-force oracles the fast implementations are checked against.

Kept deliberately independent of the code paths under test: the pairing
oracle enumerates every one-to-one assignment of predictions to
positive-overlap gold intervals instead of pairing greedily.
"""

from __future__ import annotations

from audiodeid.core import ConfusionCounts, TimedEntity, interval_overlap
from audiodeid.metrics import delta_outer


def oracle_nte_counts(pred: list[TimedEntity], gold: list[TimedEntity], t: float
                      ) -> tuple[ConfusionCounts, int, int]:
    """Exhaustive-search counts: the assignment maximizing (TP, pair count)
    over all one-to-one pairings of overlapping intervals.

    Returns (counts, best_tp, best_pair_count).
    """
    candidates = [
        [gi for gi, g in enumerate(gold) if interval_overlap(p.interval, g.interval) > 0.0]
        for p in pred
    ]
    best = (-1, -1)

    def search(pi: int, used: frozenset[int], tp: int, npairs: int) -> None:
        nonlocal best
        if pi == len(pred):
            if (tp, npairs) > best:
                best = (tp, npairs)
            return
        search(pi + 1, used, tp, npairs)  # leave this prediction unpaired
        for gi in candidates[pi]:
            if gi not in used:
                hit = delta_outer(pred[pi].interval, gold[gi].interval, t)
                search(pi + 1, used | {gi}, tp + hit, npairs + 1)

    search(0, frozenset(), 0, 0)
    tp, npairs = best
    fn = (npairs - tp) + (len(gold) - npairs)
    fp = len(pred) - npairs
    return ConfusionCounts(tp=tp, fp=fp, fn=fn), tp, npairs
