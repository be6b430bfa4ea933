"""End-to-end question answering: training stages, four answer modes, evaluation.

The four modes ablate the system. ``structured`` links the best entity and
picks the classifier's best relation; ``structured_joint`` reranks all
(entity, relation) pairs; the ``*_unstructured`` variants validate candidate
answers against the topic entity's document. Training runs in three stages
(relation extractor, pair ranker, evidence classifier), each resumable from
its saved artifact.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field, fields, replace
from typing import Optional, Sequence

import numpy as np

from .joint import (
    RankSvmModel,
    RelationDocModel,
    ScoredPair,
    build_relation_docs,
    featurize_pair,
    load_ranker,
    load_relation_docs,
    make_rank_labels,
    rank_pairs,
    save_ranker,
    save_relation_docs,
    train_rank_svm,
)
from .kb import KBGraph, RelationPath, candidate_relation_paths, f1_score, load_alias_counts, load_kb, query, surrogate_gold_relation
from .linguistics import (
    MentionSpan,
    Question,
    decompose,
    find_mention_spans,
    load_decomposition_patterns,
    load_questions,
)
from .linker import EntityCandidate, link
from .mccnn import (
    MccnnModel,
    TrainingExample,
    Vocab,
    encode_inputs,
    init_model,
    load_model,
    load_pretrained_embeddings,
    predict_relations,
    save_model,
    sentential_context,
    syntactic_symbols,
    train,
)
from .refine import (
    RefineModel,
    WikiDoc,
    find_evidence,
    load_corpus,
    load_refine,
    refine_answers,
    save_refine,
    train_refine,
)

MODES = (
    "structured",
    "structured_joint",
    "structured_unstructured",
    "structured_joint_unstructured",
)

NO_QWORD = "NO_QWORD"
NO_MENTION = "NO_MENTION"
NO_LINK = "NO_LINK"
NO_RELATION = "NO_RELATION"


class PipelineError(Exception):
    pass


# --- configuration ------------------------------------------------------------

@dataclass
class Config:
    kb_dir: str = "."
    questions: str = "questions.conll"
    corpus_dir: str = ""
    out_dir: str = "models"
    patterns: str = ""
    embeddings: str = ""
    seed: int = 0
    dev_fraction: float = 0.2
    mccnn_dim: int = 50
    mccnn_hidden1: int = 200
    mccnn_hidden2: int = 100
    mccnn_window: int = 3
    mccnn_epochs: int = 5
    mccnn_lr: float = 0.01
    mccnn_lambda: float = 1e-4
    mccnn_channels: str = "both"
    ranker_c: float = 1.0
    ranker_epochs: int = 300
    ranker_lr: float = 0.1
    refine_c: float = 1.0
    refine_epochs: int = 50
    refine_lr: float = 0.1
    refine_min_pair_count: int = 2
    max_relations_per_entity: int = 10
    top_pairs_union: int = 2


def load_config(path: str) -> Config:
    """Flat ``key = value`` file; unknown keys are an error, types follow defaults."""
    config = Config()
    types = {f.name: f.type for f in fields(Config)}
    casts = {"str": str, "int": int, "float": float}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise PipelineError(f"{path}:{lineno}: expected 'key = value'")
            key, value = key.strip(), value.strip()
            if key not in types:
                raise PipelineError(f"{path}:{lineno}: unknown config key {key!r}")
            try:
                setattr(config, key, casts[types[key]](value))
            except ValueError:
                raise PipelineError(f"{path}:{lineno}: bad value for {key}") from None
    return config


@dataclass
class World:
    """Everything loaded from disk that the stages and the answerer share."""
    kb: KBGraph
    questions: list[Question]
    corpus: dict[str, WikiDoc]
    patterns: Optional[dict[str, tuple[str, ...]]]


def load_world(config: Config) -> World:
    kb = load_kb(
        os.path.join(config.kb_dir, "triples.tsv"),
        os.path.join(config.kb_dir, "entities.tsv"),
    )
    counts_path = os.path.join(config.kb_dir, "alias_counts.tsv")
    if os.path.exists(counts_path):
        load_alias_counts(kb, counts_path)
    questions = load_questions(config.questions)
    corpus: dict[str, WikiDoc] = {}
    if config.corpus_dir:
        mapping = os.path.join(config.corpus_dir, "mapping.tsv")
        if os.path.exists(mapping):
            corpus = load_corpus(config.corpus_dir, mapping)
    patterns = None
    if config.patterns:
        patterns = load_decomposition_patterns(config.patterns)
    return World(kb, questions, corpus, patterns)


def split_questions(questions: Sequence[Question],
                    dev_fraction: float) -> tuple[list[Question], list[Question]]:
    """Deterministic train/dev split keyed on a stable hash of the question id."""
    threshold = int(round(dev_fraction * 100))
    train_qs, dev_qs = [], []
    for q in questions:
        digest = hashlib.md5(q.qid.encode("utf-8")).hexdigest()
        (dev_qs if int(digest, 16) % 100 < threshold else train_qs).append(q)
    return train_qs, dev_qs


# --- candidate pair generation ------------------------------------------------

@dataclass
class SubTrace:
    qid: str
    reason: Optional[str]
    pairs: list[ScoredPair] = field(default_factory=list)   # ranked order when a ranker ran
    chosen: list[ScoredPair] = field(default_factory=list)
    candidates: set[str] = field(default_factory=set)        # before refinement
    answers: set[str] = field(default_factory=set)           # after refinement


@dataclass
class AnswerSet:
    qid: str
    predicted: set[str]
    reason: Optional[str] = None
    traces: list[SubTrace] = field(default_factory=list)


def generate_pairs(kb: KBGraph, docs: RelationDocModel, mccnn: MccnnModel,
                   q: Question, max_relations: int = 10) -> tuple[list[ScoredPair], Optional[str]]:
    """All scored (entity candidate, relation path) pairs, or a failure reason."""
    if q.qword_index is None:
        return [], NO_QWORD
    spans = find_mention_spans(q)
    if not spans:
        return [], NO_MENTION
    linked: list[EntityCandidate] = []
    for span in spans:
        linked.extend(link(kb, span))
    if not linked:
        return [], NO_LINK
    pairs: list[ScoredPair] = []
    for cand in linked:
        relations = candidate_relation_paths(kb, cand.entity)
        if not relations:
            continue
        scored = predict_relations(mccnn, q, cand.mention, relations)
        for relation, re_score in scored[:max_relations]:
            feats = featurize_pair(kb, docs, q, cand, relation, re_score)
            pairs.append(ScoredPair(cand, relation, feats))
    if not pairs:
        return [], NO_RELATION
    pairs.sort(key=ScoredPair.sort_key)
    return pairs, None


def _best_linked(pairs: Sequence[ScoredPair]) -> EntityCandidate:
    """The entity the pure pipeline would link: highest score, stable tie-break."""
    best = min(pairs, key=lambda p: (-p.features.el_score, p.entity.mention.start,
                                     p.entity.entity))
    return best.entity


def _structured_pair(pairs: Sequence[ScoredPair]) -> ScoredPair:
    """Pipeline choice: top-1 entity by link score, then its best relation."""
    entity = _best_linked(pairs)
    own = [p for p in pairs if p.entity.entity == entity.entity
           and p.entity.mention == entity.mention]
    return min(own, key=lambda p: (-p.features.re_score, p.relation))


# --- answering ----------------------------------------------------------------

@dataclass
class ModelBundle:
    mccnn: MccnnModel
    docs: RelationDocModel
    ranker: Optional[RankSvmModel] = None
    refine: Optional[RefineModel] = None


def load_bundle(out_dir: str, mode: str = "structured_joint_unstructured") -> ModelBundle:
    mccnn = load_model(os.path.join(out_dir, "mccnn.model"))
    docs = load_relation_docs(os.path.join(out_dir, "docs.model"))
    ranker = None
    refine = None
    ranker_path = os.path.join(out_dir, "ranker.model")
    refine_path = os.path.join(out_dir, "refine.model")
    if "joint" in mode:
        ranker = load_ranker(ranker_path)
    if "unstructured" in mode:
        refine = load_refine(refine_path)
    return ModelBundle(mccnn, docs, ranker, refine)


def _answer_sub(kb: KBGraph, bundle: ModelBundle, q: Question, mode: str,
                corpus: dict[str, WikiDoc], max_relations: int,
                top_union: int) -> SubTrace:
    pairs, reason = generate_pairs(kb, bundle.docs, bundle.mccnn, q, max_relations)
    if reason is not None:
        return SubTrace(q.qid, reason)
    trace = SubTrace(q.qid, None)
    joint = "joint" in mode
    unstructured = "unstructured" in mode
    if joint:
        if bundle.ranker is None:
            raise PipelineError(f"mode {mode} requires a trained ranker")
        ranked = rank_pairs(bundle.ranker, pairs)
    else:
        ranked = list(pairs)
    trace.pairs = ranked

    if joint:
        top = ranked[0]
    else:
        top = _structured_pair(ranked)
    chosen = [top]
    if joint and unstructured:
        extras = [p for p in ranked if p is not ranked[0]]
        chosen = [top] + extras[: max(0, top_union - 1)]
    trace.chosen = chosen

    topic = top.entity.entity
    if unstructured and topic in corpus:
        candidates: set[str] = set()
        for p in chosen:
            candidates |= query(kb, p.entity.entity, p.relation)
        trace.candidates = candidates
        if bundle.refine is None:
            raise PipelineError(f"mode {mode} requires a trained evidence classifier")
        trace.answers = refine_answers(bundle.refine, q, candidates, topic, corpus, kb)
    else:
        # no document for the topic: degrade to the purely structured answer
        trace.candidates = query(kb, topic, top.relation)
        trace.answers = set(trace.candidates)
    return trace


def answer(kb: KBGraph, bundle: ModelBundle, q: Question, mode: str,
           corpus: Optional[dict[str, WikiDoc]] = None,
           patterns: Optional[dict[str, tuple[str, ...]]] = None,
           max_relations: int = 10, top_union: int = 2) -> AnswerSet:
    """Answer one question in the given mode.

    The question is decomposed first; sub-question answer sets are
    intersected. Sub-questions that fail with a reason code are skipped by the
    intersection; if every sub-question fails, the first reason is reported.
    """
    if mode not in MODES:
        raise PipelineError(f"unknown mode {mode!r}")
    corpus = corpus or {}
    if q.qword_index is None:
        return AnswerSet(q.qid, set(), NO_QWORD)
    subs = decompose(q, patterns)
    traces = [
        _answer_sub(kb, bundle, sub, mode, corpus, max_relations, top_union)
        for sub in subs
    ]
    answered = [t for t in traces if t.reason is None]
    if not answered:
        return AnswerSet(q.qid, set(), traces[0].reason, traces)
    predicted = set(answered[0].answers)
    for t in answered[1:]:
        predicted &= t.answers
    return AnswerSet(q.qid, predicted, None, traces)


# --- evaluation ---------------------------------------------------------------

@dataclass
class EvalResult:
    average_f1: float
    records: list[tuple[str, set[str], set[str], float, str]]  # qid, pred, gold, f1, reason
    skipped: list[str]                                         # qids without gold

    def report(self) -> str:
        lines = ["qid\tpredicted\tgold\tf1\treason"]
        for qid, pred, gold, score, reason in self.records:
            lines.append("\t".join([
                qid,
                ",".join(sorted(pred)),
                ",".join(sorted(gold)),
                f"{score:.6f}",
                reason,
            ]))
        for qid in self.skipped:
            lines.append(f"{qid}\t\t\t\tNO_GOLD")
        lines.append(f"average_f1\t{self.average_f1:.6f}")
        return "\n".join(lines) + "\n"


def evaluate(kb: KBGraph, bundle: ModelBundle, questions: Sequence[Question],
             mode: str, corpus: Optional[dict[str, WikiDoc]] = None,
             patterns: Optional[dict[str, tuple[str, ...]]] = None,
             max_relations: int = 10, top_union: int = 2) -> EvalResult:
    """Question-wise average F1 over every gold-annotated question."""
    records = []
    skipped = []
    for q in questions:
        if not q.gold_answers:
            skipped.append(q.qid)
            continue
        result = answer(kb, bundle, q, mode, corpus, patterns, max_relations, top_union)
        score = f1_score(result.predicted, q.gold_answers)
        records.append((q.qid, result.predicted, q.gold_answers, score,
                        result.reason or ""))
    if not records:
        raise PipelineError("no questions with gold answers to evaluate")
    avg = sum(r[3] for r in records) / len(records)
    return EvalResult(avg, records, skipped)


# --- training stages ----------------------------------------------------------

def surrogate_labels(kb: KBGraph,
                     questions: Sequence[Question]) -> list[tuple[Question, str, RelationPath]]:
    """(question, topic entity, surrogate relation) for each labelable question."""
    out = []
    for q in questions:
        if not q.gold_answers or not q.gold_topic or q.gold_topic not in kb.entities:
            continue
        relation = surrogate_gold_relation(kb, q.gold_topic, q.gold_answers)
        if relation is not None:
            out.append((q, q.gold_topic, relation))
    return out


def _topic_mention(kb: KBGraph, q: Question, topic: str) -> Optional[MentionSpan]:
    """The mention span whose linked candidates include the topic entity."""
    best: Optional[tuple[float, MentionSpan]] = None
    for span in find_mention_spans(q):
        for cand in link(kb, span):
            if cand.entity == topic:
                if best is None or cand.link_score > best[0]:
                    best = (cand.link_score, span)
    return best[1] if best else None


def _re_training_data(kb: KBGraph, labeled, config: Config):
    """Vocabulary, label set and encoded examples for the relation classifier."""
    vocab = Vocab()
    labels = sorted({relation for _q, _t, relation in labeled}, key=lambda p: (len(p), p))
    usable = []
    for q, topic, relation in labeled:
        span = _topic_mention(kb, q, topic)
        if span is None:
            continue
        for sym in syntactic_symbols(q, span):
            vocab.add(sym)
        for sym in sentential_context(q, span):
            vocab.add(sym)
        usable.append((q, span, relation))
    examples = []
    label_index = {path: k for k, path in enumerate(labels)}
    for q, span, relation in usable:
        syn, sen = encode_inputs(q, span, vocab, config.mccnn_window)
        examples.append(TrainingExample(tuple(syn), tuple(sen), label_index[relation]))
    return vocab, labels, examples


def stage_re(config: Config, world: World, log: list[str]) -> tuple[MccnnModel, RelationDocModel]:
    """Stage 1: surrogate labels, relation classifier, relation documents."""
    train_qs, _dev = split_questions(world.questions, config.dev_fraction)
    labeled = surrogate_labels(world.kb, train_qs)
    if not labeled:
        raise PipelineError("stage re: no labelable training questions")
    log.append(f"re: {len(labeled)} labeled questions, "
               f"{len({r for _q, _t, r in labeled})} relation labels")
    vocab, labels, examples = _re_training_data(world.kb, labeled, config)
    if not examples:
        raise PipelineError("stage re: no encodable training examples")
    pretrained = None
    if config.embeddings:
        if os.path.exists(config.embeddings):
            pretrained = load_pretrained_embeddings(config.embeddings)
            log.append(f"re: loaded {len(pretrained)} pretrained embeddings")
        else:
            log.append(f"re: embeddings file {config.embeddings} missing, "
                       "falling back to random initialization")
    model = init_model(vocab, labels, dim=config.mccnn_dim, hidden1=config.mccnn_hidden1,
                       hidden2=config.mccnn_hidden2, window=config.mccnn_window,
                       seed=config.seed, channels=config.mccnn_channels,
                       pretrained=pretrained)
    train(model, examples, epochs=config.mccnn_epochs, learning_rate=config.mccnn_lr,
          lam=config.mccnn_lambda, seed=config.seed)
    docs = build_relation_docs(world.kb, [(q, r) for q, _t, r in labeled])
    os.makedirs(config.out_dir, exist_ok=True)
    save_model(model, os.path.join(config.out_dir, "mccnn.model"))
    save_relation_docs(docs, os.path.join(config.out_dir, "docs.model"))
    log.append(f"re: trained on {len(examples)} examples for {config.mccnn_epochs} epochs")
    return model, docs


def stage_joint(config: Config, world: World, mccnn: MccnnModel,
                docs: RelationDocModel, log: list[str]) -> RankSvmModel:
    """Stage 2: pairwise ranker over (entity, relation) pairs."""
    train_qs, _dev = split_questions(world.questions, config.dev_fraction)
    labeled = surrogate_labels(world.kb, train_qs)
    groups = []
    for q, topic, relation in labeled:
        pairs, reason = generate_pairs(world.kb, docs, mccnn, q,
                                       config.max_relations_per_entity)
        if reason is not None:
            continue
        group = [(label, pair.features.as_vector())
                 for label, pair in make_rank_labels(pairs, topic, relation)]
        if len({label for label, _vec in group}) > 1:
            groups.append(group)
    if not groups:
        raise PipelineError("stage joint: no ranking groups with mixed labels")
    ranker = train_rank_svm(groups, C=config.ranker_c, seed=config.seed,
                            epochs=config.ranker_epochs,
                            learning_rate=config.ranker_lr)
    save_ranker(ranker, os.path.join(config.out_dir, "ranker.model"))
    log.append(f"joint: trained ranker on {len(groups)} question groups")
    return ranker


def stage_refine(config: Config, world: World, mccnn: MccnnModel,
                 docs: RelationDocModel, ranker: RankSvmModel,
                 log: list[str]) -> RefineModel:
    """Stage 3: evidence classifier over candidate answers of the joint top pairs."""
    train_qs, _dev = split_questions(world.questions, config.dev_fraction)
    labeled = surrogate_labels(world.kb, train_qs)
    examples = []
    for q, topic, _relation in labeled:
        doc = world.corpus.get(topic)
        if doc is None or not q.gold_answers:
            continue
        pairs, reason = generate_pairs(world.kb, docs, mccnn, q,
                                       config.max_relations_per_entity)
        if reason is not None:
            continue
        ranked = rank_pairs(ranker, pairs)
        candidates: set[str] = set()
        for p in ranked[: config.top_pairs_union]:
            candidates |= query(world.kb, p.entity.entity, p.relation)
        for candidate in sorted(candidates):
            entity = world.kb.entities.get(candidate)
            if entity is None:
                continue
            for sentence in find_evidence(doc, entity):
                examples.append((q, sentence, candidate in q.gold_answers))
    if not examples:
        raise PipelineError("stage refine: no evidence sentences in the corpus")
    model = train_refine(examples, C=config.refine_c, seed=config.seed,
                         epochs=config.refine_epochs,
                         learning_rate=config.refine_lr,
                         min_pair_count=config.refine_min_pair_count)
    save_refine(model, os.path.join(config.out_dir, "refine.model"))
    log.append(f"refine: trained on {len(examples)} evidence sentences")
    return model


def train_all(config: Config, world: Optional[World] = None) -> ModelBundle:
    """Run all training stages in dependency order and write the report."""
    if world is None:
        world = load_world(config)
    log: list[str] = []
    try:
        mccnn, docs = stage_re(config, world, log)
        ranker = stage_joint(config, world, mccnn, docs, log)
        refine = stage_refine(config, world, mccnn, docs, ranker, log)
    except PipelineError:
        _write_report(config, log)
        raise
    _write_report(config, log)
    return ModelBundle(mccnn, docs, ranker, refine)


def _write_report(config: Config, log: list[str]) -> None:
    os.makedirs(config.out_dir, exist_ok=True)
    with open(os.path.join(config.out_dir, "train_report.txt"), "w",
              encoding="utf-8") as fh:
        fh.write(f"seed {config.seed}\n")
        for line in log:
            fh.write(line + "\n")
