"""Joint entity-linking & relation-extraction ranking.

Every (entity candidate, relation path) pair is described by eight clues from
the linker, the relation classifier, relation "documents" built over training
questions, and the KB answers themselves. A linear rank-SVM trained on
pairwise constraints from graded 3/2/1 labels orders the pairs.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .kb import KBGraph, RelationPath, query
from .linguistics import Question
from .linker import EntityCandidate

FEATURE_NAMES = (
    "el_score",
    "mention_name_overlap",
    "desc_overlap",
    "re_score",
    "tfidf_sum",
    "frag3_in_question",
    "qword_anstype_cooc",
    "answer_count",
)

STOPWORDS = frozenset(
    "a an the is are was were be been being do does did have has had of in on "
    "at to for with from by and or not no as it its this that these those".split()
)

RANKER_FORMAT = "kbqa-ranker v1"


class JointError(Exception):
    pass


@dataclass(frozen=True)
class PairFeatures:
    el_score: float
    mention_name_overlap: float
    desc_overlap: float
    re_score: float
    tfidf_sum: float
    frag3_in_question: float
    qword_anstype_cooc: float
    answer_count: float

    def as_vector(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in FEATURE_NAMES], dtype=np.float64)


@dataclass(frozen=True)
class ScoredPair:
    entity: EntityCandidate
    relation: RelationPath
    features: PairFeatures
    rank_score: float = 0.0

    def sort_key(self):
        return (
            -self.rank_score,
            -self.features.el_score,
            -self.features.re_score,
            self.entity.entity,
            self.relation,
        )


def answer_type(kb: KBGraph, eid: str) -> str:
    """Proxy answer type: the modal final fragment among incoming relations."""
    fragments = Counter(rel.split(".")[-1] for _subj, rel in kb.in_edges(eid))
    if not fragments:
        return "unknown"
    best = max(sorted(fragments), key=lambda f: fragments[f])
    return best


@dataclass
class RelationDocModel:
    tf: dict[RelationPath, Counter]
    df: Counter
    n_relations: int
    cooc: dict[str, Counter]      # question word -> answer type counts
    type_vocab: list[str]

    def idf(self, word: str) -> float:
        # floored so that a word present in every relation document scores 0
        return max(0.0, math.log(self.n_relations / max(self.df[word], 1)))

    def tfidf_sum(self, relation: RelationPath, words: Sequence[str]) -> float:
        table = self.tf.get(relation)
        if not table:
            return 0.0
        return sum(table[w] * self.idf(w) for w in words)

    def cooc_prob(self, qword: str, anstype: str) -> float:
        """Laplace-smoothed P(answer type | question word)."""
        counts = self.cooc.get(qword, Counter())
        total = sum(counts.values())
        vocab = max(len(self.type_vocab), 1) + 1  # +1 for unseen types
        return (counts[anstype] + 1.0) / (total + vocab)


def _question_words(q: Question) -> list[str]:
    return [t.lemma.lower() for t in q.tree.tokens if t.index != q.qword_index]


def build_relation_docs(kb: KBGraph,
                        training: Sequence[tuple[Question, RelationPath]]) -> RelationDocModel:
    """Relation 'documents' over training questions, plus answer-type statistics."""
    if not training:
        raise JointError("empty training set for relation documents")
    tf: dict[RelationPath, Counter] = {}
    cooc: dict[str, Counter] = {}
    for q, relation in training:
        tf.setdefault(relation, Counter()).update(_question_words(q))
        if q.gold_answers and q.qword_index is not None:
            qword = q.tree.token(q.qword_index).surface.lower()
            for gold in sorted(q.gold_answers):
                if gold in kb.entities:
                    cooc.setdefault(qword, Counter())[answer_type(kb, gold)] += 1
    df = Counter()
    for table in tf.values():
        df.update(set(table))
    types = sorted({t for counts in cooc.values() for t in counts})
    return RelationDocModel(tf, df, len(tf), cooc, types)


def _content_words(q: Question) -> list[str]:
    out = []
    for t in q.tree.tokens:
        if t.index == q.qword_index:
            continue
        if not (t.pos.startswith("NN") or t.pos.startswith("VB") or t.pos.startswith("JJ")):
            continue
        if t.lemma.lower() in STOPWORDS:
            continue
        out.append(t.lemma.lower())
    return out


def featurize_pair(kb: KBGraph, docs: RelationDocModel, q: Question,
                   e: EntityCandidate, r: RelationPath, re_score: float) -> PairFeatures:
    entity = kb.entities[e.entity]
    mention_tokens = set(e.mention.surface.lower().split())
    name_tokens = set(entity.name.lower().split())
    mention_name_overlap = float(len(mention_tokens & name_tokens))

    desc_tokens = Counter(entity.description.lower().split())
    desc_overlap = float(sum(desc_tokens[w] for w in set(_content_words(q))))

    tfidf_sum = docs.tfidf_sum(r, _question_words(q))

    frag3 = r[-1].split(".")[-1].lower()
    question_surfaces = {t.surface.lower() for t in q.tree.tokens}
    question_lemmas = {t.lemma.lower() for t in q.tree.tokens}
    frag3_in_question = 1.0 if frag3 in question_surfaces | question_lemmas else 0.0

    answers = query(kb, e.entity, r)
    answer_count = math.log1p(len(answers))
    cooc = 0.0
    if answers and q.qword_index is not None:
        types = Counter(answer_type(kb, a) for a in sorted(answers))
        dominant = max(sorted(types), key=lambda t: types[t])
        qword = q.tree.token(q.qword_index).surface.lower()
        cooc = docs.cooc_prob(qword, dominant)

    return PairFeatures(
        el_score=e.link_score,
        mention_name_overlap=mention_name_overlap,
        desc_overlap=desc_overlap,
        re_score=re_score,
        tfidf_sum=tfidf_sum,
        frag3_in_question=frag3_in_question,
        qword_anstype_cooc=cooc,
        answer_count=answer_count,
    )


def make_rank_labels(pairs: Sequence[ScoredPair], gold_entity: str,
                     gold_relation: RelationPath) -> list[tuple[int, ScoredPair]]:
    """3 for exact match, 2 for entity-or-relation match, 1 otherwise."""
    labeled = []
    for pair in pairs:
        entity_ok = pair.entity.entity == gold_entity
        relation_ok = pair.relation == gold_relation
        if entity_ok and relation_ok:
            label = 3
        elif entity_ok or relation_ok:
            label = 2
        else:
            label = 1
        labeled.append((label, pair))
    return labeled


@dataclass
class RankSvmModel:
    weights: np.ndarray           # aligned with FEATURE_NAMES
    mean: np.ndarray
    std: np.ndarray
    C: float

    def score(self, features: PairFeatures) -> float:
        z = (features.as_vector() - self.mean) / self.std
        return float(self.weights @ z)


def _pairwise_differences(groups, mean, std):
    diffs = []
    for group in groups:
        for i, (la, fa) in enumerate(group):
            for lb, fb in group:
                if la > lb:
                    diffs.append(((fa - mean) / std) - ((fb - mean) / std))
    return diffs


def train_rank_svm(groups: Sequence[Sequence[tuple[int, np.ndarray]]], C: float = 1.0,
                   seed: int = 0, epochs: int = 300,
                   learning_rate: float = 0.1) -> RankSvmModel:
    """Pairwise-hinge subgradient descent on z-scored features.

    ``groups`` holds (label, raw feature vector) lists, one list per question.
    Within each group every label-ordered pair contributes the constraint
    w.(f_high - f_low) >= 1.
    """
    all_vectors = np.array([f for group in groups for _l, f in group], dtype=np.float64)
    if all_vectors.size == 0:
        raise JointError("no training pairs")
    if all(len({l for l, _f in group}) < 2 for group in groups):
        raise JointError("no ranking signal: every group has a single label")
    mean = all_vectors.mean(axis=0)
    std = all_vectors.std(axis=0)
    std[std < 1e-12] = 1.0

    diffs = np.array(_pairwise_differences(groups, mean, std))
    n_features = all_vectors.shape[1]
    rng = np.random.default_rng(seed)
    w = rng.normal(0.0, 1e-3, size=n_features)
    n = len(diffs)
    for t in range(epochs):
        margins = diffs @ w
        violated = diffs[margins < 1.0]
        grad = w / (C * n)
        if len(violated):
            grad = grad - violated.sum(axis=0) / n
        w = w - learning_rate / (1.0 + 0.01 * t) * grad
    return RankSvmModel(w, mean, std, C)


def pairwise_accuracy(model: RankSvmModel,
                      groups: Sequence[Sequence[tuple[int, np.ndarray]]]) -> float:
    diffs = _pairwise_differences(groups, model.mean, model.std)
    if not diffs:
        return 1.0
    satisfied = sum(1 for d in diffs if float(model.weights @ d) > 0)
    return satisfied / len(diffs)


def rank_pairs(model: RankSvmModel, pairs: Sequence[ScoredPair]) -> list[ScoredPair]:
    """Pairs in descending learned-score order; the input list is untouched."""
    rescored = [replace(p, rank_score=model.score(p.features)) for p in pairs]
    return sorted(rescored, key=ScoredPair.sort_key)


DOCS_FORMAT = "kbqa-reldocs v1"


def save_relation_docs(docs: RelationDocModel, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(DOCS_FORMAT + "\n")
        fh.write(f"relations {docs.n_relations}\n")
        for relation in sorted(docs.tf):
            table = docs.tf[relation]
            fh.write("rel " + " ".join(relation) + "\n")
            for word in sorted(table):
                fh.write(f"tf\t{word}\t{table[word]}\n")
        for word in sorted(docs.df):
            fh.write(f"df\t{word}\t{docs.df[word]}\n")
        for qword in sorted(docs.cooc):
            for anstype in sorted(docs.cooc[qword]):
                fh.write(f"cooc\t{qword}\t{anstype}\t{docs.cooc[qword][anstype]}\n")
        fh.write("types " + " ".join(docs.type_vocab) + "\n")


def load_relation_docs(path: str) -> RelationDocModel:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != DOCS_FORMAT:
        raise JointError(f"{path}: not a {DOCS_FORMAT} file")
    n_relations = int(lines[1].split()[1])
    tf: dict[RelationPath, Counter] = {}
    df: Counter = Counter()
    cooc: dict[str, Counter] = {}
    type_vocab: list[str] = []
    current: Optional[RelationPath] = None
    for line in lines[2:]:
        if line.startswith("rel "):
            current = tuple(line.split()[1:])
            tf[current] = Counter()
        elif line.startswith("tf\t"):
            _, word, count = line.split("\t")
            tf[current][word] = int(count)
        elif line.startswith("df\t"):
            _, word, count = line.split("\t")
            df[word] = int(count)
        elif line.startswith("cooc\t"):
            _, qword, anstype, count = line.split("\t")
            cooc.setdefault(qword, Counter())[anstype] = int(count)
        elif line.startswith("types"):
            type_vocab = line.split()[1:]
    return RelationDocModel(tf, df, n_relations, cooc, type_vocab)


def save_ranker(model: RankSvmModel, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(RANKER_FORMAT + "\n")
        fh.write(f"C {model.C.hex() if isinstance(model.C, float) else float(model.C).hex()}\n")
        for name, row in (("weights", model.weights), ("mean", model.mean), ("std", model.std)):
            values = " ".join(float(v).hex() for v in row)
            fh.write(f"{name} {values}\n")
        fh.write("features " + " ".join(FEATURE_NAMES) + "\n")


def load_ranker(path: str) -> RankSvmModel:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != RANKER_FORMAT:
        raise JointError(f"{path}: not a {RANKER_FORMAT} file")
    fields = {}
    for line in lines[1:]:
        key, _, rest = line.partition(" ")
        fields[key] = rest
    if tuple(fields["features"].split()) != FEATURE_NAMES:
        raise JointError(f"{path}: feature names do not match this build")
    def vec(key):
        return np.array([float.fromhex(v) for v in fields[key].split()])
    return RankSvmModel(vec("weights"), vec("mean"), vec("std"), float.fromhex(fields["C"]))
