"""Count-based entity linker: alias surface matching plus a smoothed frequency score."""

from __future__ import annotations

from dataclasses import dataclass

from .kb import KBGraph
from .linguistics import MentionSpan, Question, find_mention_spans

TOP_K = 5
SMOOTHING_ALPHA = 1.0


@dataclass(frozen=True)
class EntityCandidate:
    entity: str
    mention: MentionSpan
    link_score: float


def _matches(kb: KBGraph, surface: str) -> dict[str, int]:
    """Entity -> count for aliases matching ``surface``.

    Exact lowercase match first; when nothing matches exactly, fall back to
    aliases that contain every mention token.
    """
    surface = surface.lower()
    exact = kb.alias_index.get(surface)
    if exact:
        return dict(exact)
    tokens = surface.split()
    if not tokens:
        return {}
    merged: dict[str, int] = {}
    for alias, per_entity in kb.alias_index.items():
        alias_tokens = set(alias.split())
        if all(t in alias_tokens for t in tokens):
            for eid, count in per_entity.items():
                merged[eid] = max(merged.get(eid, 0), count)
    return merged


def link(kb: KBGraph, m: MentionSpan) -> list[EntityCandidate]:
    """Top-5 candidate entities for a mention, scored by smoothed alias counts."""
    counts = _matches(kb, m.surface)
    if not counts:
        return []
    total = sum(counts.values()) + SMOOTHING_ALPHA * len(counts)
    scored = [
        EntityCandidate(eid, m, (count + SMOOTHING_ALPHA) / total)
        for eid, count in counts.items()
    ]
    scored.sort(key=lambda c: (-c.link_score, c.entity))
    return scored[:TOP_K]


def link_all(kb: KBGraph, q: Question) -> list[EntityCandidate]:
    """Candidates for every mention span, ordered by mention start then score."""
    out: list[EntityCandidate] = []
    for span in find_mention_spans(q):
        out.extend(link(kb, span))
    out.sort(key=lambda c: (c.mention.start, c.mention.end, -c.link_score, c.entity))
    return out
