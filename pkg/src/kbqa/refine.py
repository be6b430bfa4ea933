"""Answer refinement against an offline text corpus.

Each candidate answer is validated by the sentences of the topic entity's
document that mention it: a binary linear classifier over lowercased
(question token, sentence token) pairs decides whether a sentence supports
the candidate. A candidate survives if at least one of its evidence sentences
is classified positive; candidates without any evidence fall back to the KB
result, as does the whole question when the topic has no document.
"""

from __future__ import annotations

import os
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .kb import Entity, KBGraph
from .linguistics import Question

REFINE_FORMAT = "kbqa-refine v1"


class RefineError(Exception):
    pass


@dataclass
class WikiDoc:
    entity: str
    sentences: list[list[str]]
    # per sentence: (entity_id, start, end) token spans, 0-based inclusive
    annotations: list[list[tuple[str, int, int]]]


@dataclass(frozen=True)
class EvidenceSentence:
    doc_entity: str
    sentence_index: int
    tokens: tuple[str, ...]
    candidate: str
    matched_span: tuple[int, int]   # 0-based inclusive


def _parse_doc(entity: str, path: str) -> WikiDoc:
    sentences: list[list[str]] = []
    annotations: list[list[tuple[str, int, int]]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            text, _, ann_block = line.partition("|||")
            tokens = text.split()
            if not tokens:
                raise RefineError(f"{path}:{lineno}: empty sentence")
            anns: list[tuple[str, int, int]] = []
            for item in ann_block.split(";"):
                item = item.strip()
                if not item:
                    continue
                eid, _, span = item.partition(":")
                start_s, _, end_s = span.partition("-")
                try:
                    start, end = int(start_s), int(end_s)
                except ValueError:
                    raise RefineError(f"{path}:{lineno}: bad annotation {item!r}") from None
                if not (0 <= start <= end < len(tokens)):
                    raise RefineError(f"{path}:{lineno}: annotation span out of range")
                anns.append((eid, start, end))
            sentences.append(tokens)
            annotations.append(anns)
    return WikiDoc(entity, sentences, annotations)


def load_corpus(directory: str, mapping_path: str) -> dict[str, WikiDoc]:
    """Entity documents per the mapping file ``entity_id<TAB>relative/path``."""
    corpus: dict[str, WikiDoc] = {}
    with open(mapping_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise RefineError(f"{mapping_path}:{lineno}: expected 'entity<TAB>file'")
            entity, rel_path = parts
            doc_path = os.path.join(directory, rel_path)
            if not os.path.exists(doc_path):
                raise RefineError(f"{mapping_path}:{lineno}: missing document {doc_path}")
            corpus[entity] = _parse_doc(entity, doc_path)
    return corpus


def _alias_match(tokens: list[str], alias: str) -> Optional[tuple[int, int]]:
    alias_tokens = alias.lower().split()
    if not alias_tokens:
        return None
    lowered = [t.lower() for t in tokens]
    n = len(alias_tokens)
    for i in range(len(lowered) - n + 1):
        if lowered[i : i + n] == alias_tokens:
            return (i, i + n - 1)
    return None


def find_evidence(doc: WikiDoc, candidate: Entity) -> list[EvidenceSentence]:
    """Sentences mentioning the candidate by alias match or explicit annotation."""
    out = []
    for idx, tokens in enumerate(doc.sentences):
        span: Optional[tuple[int, int]] = None
        for eid, start, end in doc.annotations[idx]:
            if eid == candidate.id:
                span = (start, end)
                break
        if span is None:
            for alias in candidate.aliases:
                span = _alias_match(tokens, alias)
                if span is not None:
                    break
        if span is not None:
            out.append(EvidenceSentence(doc.entity, idx, tuple(tokens), candidate.id, span))
    return out


def featurize_evidence(q: Question, s: EvidenceSentence) -> Counter:
    """Multiset of lowercased (question token, sentence token) pairs.

    The matched answer span and the question word are excluded: their
    presence is structural, not evidential.
    """
    q_tokens = [
        t.surface.lower() for t in q.tree.tokens if t.index != q.qword_index
    ]
    s_tokens = [
        tok.lower()
        for i, tok in enumerate(s.tokens)
        if not (s.matched_span[0] <= i <= s.matched_span[1])
    ]
    pairs = Counter()
    for qt in q_tokens:
        for st in s_tokens:
            pairs[(qt, st)] += 1
    return pairs


@dataclass
class RefineModel:
    feature_ids: dict[tuple[str, str], int]
    weights: np.ndarray       # len(feature_ids) + 1; last entry is the bias
    C: float = 1.0

    def decision(self, pairs: Counter) -> float:
        score = self.weights[-1]
        for key, count in pairs.items():
            fid = self.feature_ids.get(key)
            if fid is not None:
                score += self.weights[fid] * count
        return float(score)

    def classify(self, q: Question, s: EvidenceSentence) -> bool:
        return self.decision(featurize_evidence(q, s)) > 0


def train_refine(examples: Sequence[tuple[Question, EvidenceSentence, bool]],
                 C: float = 1.0, seed: int = 0, epochs: int = 50,
                 learning_rate: float = 0.1, min_pair_count: int = 2) -> RefineModel:
    """Linear SVM (hinge + L2) by seeded subgradient descent.

    ``examples`` are (question, evidence sentence, is-correct-answer) triples.
    The feature dictionary keeps token pairs seen at least ``min_pair_count``
    times across the training data.
    """
    if not examples:
        raise RefineError("empty refinement training set")
    featurized = [(featurize_evidence(q, s), label) for q, s, label in examples]
    totals = Counter()
    for pairs, _label in featurized:
        totals.update(pairs)
    kept = sorted(key for key, count in totals.items() if count >= min_pair_count)
    feature_ids = {key: i for i, key in enumerate(kept)}
    dim = len(feature_ids) + 1  # + bias

    rows = []
    ys = []
    for pairs, label in featurized:
        x = np.zeros(dim)
        for key, count in pairs.items():
            fid = feature_ids.get(key)
            if fid is not None:
                x[fid] = count
        x[-1] = 1.0
        rows.append(x)
        ys.append(1.0 if label else -1.0)
    X = np.array(rows)
    y = np.array(ys)

    rng = np.random.default_rng(seed)
    w = rng.normal(0.0, 1e-3, size=dim)
    n = len(X)
    order = np.arange(n)
    for epoch in range(epochs):
        rng.shuffle(order)
        lr = learning_rate / (1.0 + 0.05 * epoch)
        for i in order:
            margin = y[i] * float(X[i] @ w)
            grad = w / (C * n)
            if margin < 1.0:
                grad = grad - y[i] * X[i]
            w = w - lr * grad
    return RefineModel(feature_ids, w, C)


def refine_answers(model: RefineModel, q: Question, candidates: set[str],
                   topic: str, corpus: dict[str, WikiDoc],
                   kb: KBGraph) -> set[str]:
    """Filter candidates by positive textual evidence.

    Per-candidate fallback keeps candidates without evidence; when the topic
    entity has no document at all, the KB answer set passes through unchanged.
    """
    doc = corpus.get(topic)
    if doc is None:
        return set(candidates)
    kept: set[str] = set()
    for candidate in sorted(candidates):
        entity = kb.entities.get(candidate)
        if entity is None:
            continue
        evidence = find_evidence(doc, entity)
        if not evidence:
            kept.add(candidate)  # no evidence either way: fall back to the KB
            continue
        if any(model.classify(q, s) for s in evidence):
            kept.add(candidate)
    return kept


def save_refine(model: RefineModel, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(REFINE_FORMAT + "\n")
        fh.write(f"C {float(model.C).hex()}\n")
        fh.write(f"features {len(model.feature_ids)}\n")
        for (qt, st), fid in sorted(model.feature_ids.items(), key=lambda kv: kv[1]):
            fh.write(f"{qt}\t{st}\t{fid}\n")
        fh.write("weights " + " ".join(float(v).hex() for v in model.weights) + "\n")


def load_refine(path: str) -> RefineModel:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != REFINE_FORMAT:
        raise RefineError(f"{path}: not a {REFINE_FORMAT} file")
    C = float.fromhex(lines[1].split()[1])
    n = int(lines[2].split()[1])
    feature_ids = {}
    for line in lines[3 : 3 + n]:
        qt, st, fid = line.split("\t")
        feature_ids[(qt, st)] = int(fid)
    weights = np.array([float.fromhex(v) for v in lines[3 + n].split()[1:]])
    return RefineModel(feature_ids, weights, C)
