"""Command line interface: data validation, staged training, answering, evaluation."""

from __future__ import annotations

import argparse
import os
import sys

from . import pipeline
from .joint import load_ranker, load_relation_docs
from .mccnn import load_model
from .pipeline import (
    Config,
    ModelBundle,
    PipelineError,
    evaluate,
    load_bundle,
    load_config,
    load_world,
    split_questions,
    stage_joint,
    stage_re,
    stage_refine,
    train_all,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kbqa",
        description="Offline KB question answering: train, answer, evaluate.",
    )
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--kb", help="directory with entities.tsv / triples.tsv")
    parser.add_argument("--questions", help="parsed question file")
    parser.add_argument("--corpus", help="document corpus directory with mapping.tsv")
    parser.add_argument("--seed", type=int, help="override the training seed")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("ingest", help="load and validate all data files")
    sub.add_parser("train-re", help="train the relation classifier and relation documents")
    sub.add_parser("train-joint", help="train the pair ranker (needs train-re artifacts)")
    sub.add_parser("train-refine", help="train the evidence classifier (needs earlier stages)")
    sub.add_parser("train-all", help="run every training stage in order")

    p_answer = sub.add_parser("answer", help="answer a single question")
    p_answer.add_argument("--mode", default="structured_joint_unstructured",
                          choices=pipeline.MODES)
    p_answer.add_argument("--question", required=True,
                          help="question id or exact raw text from the question file")

    p_eval = sub.add_parser("eval", help="evaluate a question split")
    p_eval.add_argument("--mode", default="structured_joint_unstructured",
                        choices=pipeline.MODES)
    p_eval.add_argument("--split", default="all", choices=["train", "dev", "all", "test"])

    sub.add_parser("repl", help="interactive loop over the loaded question file")
    return parser


def _make_config(args: argparse.Namespace) -> Config:
    config = load_config(args.config) if args.config else Config()
    if args.kb:
        config.kb_dir = args.kb
    if args.questions:
        config.questions = args.questions
    if args.corpus:
        config.corpus_dir = args.corpus
    if args.seed is not None:
        config.seed = args.seed
    return config


def _find_question(world, text: str):
    for q in world.questions:
        if q.qid == text or q.raw == text:
            return q
    return None


def _bundle_for(config: Config, mode: str) -> ModelBundle:
    return load_bundle(config.out_dir, mode)


def _cmd_ingest(config: Config) -> int:
    world = load_world(config)
    mediators = sum(1 for e in world.kb.entities.values() if e.is_mediator)
    print(f"entities: {len(world.kb.entities)} ({mediators} mediators)")
    print(f"triples: {len(world.kb.edges)}")
    print(f"questions: {len(world.questions)}")
    with_gold = sum(1 for q in world.questions if q.gold_answers)
    print(f"questions with gold answers: {with_gold}")
    print(f"documents: {len(world.corpus)}")
    return 0


def _cmd_answer(config: Config, args: argparse.Namespace) -> int:
    world = load_world(config)
    q = _find_question(world, args.question)
    if q is None:
        print(f"question not found: {args.question!r}", file=sys.stderr)
        return 1
    bundle = _bundle_for(config, args.mode)
    result = pipeline.answer(world.kb, bundle, q, args.mode, world.corpus,
                             world.patterns, config.max_relations_per_entity,
                             config.top_pairs_union)
    names = sorted(result.predicted)
    print(f"{q.qid}\t{','.join(names)}\t{result.reason or ''}")
    for eid in names:
        entity = world.kb.entities.get(eid)
        if entity:
            print(f"  {eid}: {entity.name}")
    return 0


def _cmd_eval(config: Config, args: argparse.Namespace) -> int:
    world = load_world(config)
    train_qs, dev_qs = split_questions(world.questions, config.dev_fraction)
    questions = {"train": train_qs, "dev": dev_qs,
                 "all": world.questions, "test": world.questions}[args.split]
    if not questions:
        print(f"split {args.split!r} is empty", file=sys.stderr)
        return 1
    bundle = _bundle_for(config, args.mode)
    result = evaluate(world.kb, bundle, questions, args.mode, world.corpus,
                      world.patterns, config.max_relations_per_entity,
                      config.top_pairs_union)
    sys.stdout.write(result.report())
    return 0


def _cmd_repl(config: Config) -> int:
    world = load_world(config)
    bundle = _bundle_for(config, "structured_joint_unstructured")
    print("enter a question id or raw question text; 'quit' to exit")
    while True:
        try:
            line = input("kbqa> ").strip()
        except EOFError:
            break
        if not line:
            continue
        if line in ("quit", "exit"):
            break
        q = _find_question(world, line)
        if q is None:
            print("question not found in the loaded question file")
            continue
        result = pipeline.answer(world.kb, bundle, q, "structured_joint_unstructured",
                                 world.corpus, world.patterns,
                                 config.max_relations_per_entity,
                                 config.top_pairs_union)
        if result.reason:
            print(f"no answer ({result.reason})")
        else:
            names = [world.kb.entities[e].name for e in sorted(result.predicted)
                     if e in world.kb.entities]
            print(", ".join(names) if names else "(empty answer set)")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = _make_config(args)
        if args.command == "ingest":
            return _cmd_ingest(config)
        if args.command == "train-re":
            world = load_world(config)
            log: list[str] = []
            stage_re(config, world, log)
            print("\n".join(log))
            return 0
        if args.command == "train-joint":
            world = load_world(config)
            mccnn = load_model(os.path.join(config.out_dir, "mccnn.model"))
            docs = load_relation_docs(os.path.join(config.out_dir, "docs.model"))
            log = []
            stage_joint(config, world, mccnn, docs, log)
            print("\n".join(log))
            return 0
        if args.command == "train-refine":
            world = load_world(config)
            mccnn = load_model(os.path.join(config.out_dir, "mccnn.model"))
            docs = load_relation_docs(os.path.join(config.out_dir, "docs.model"))
            ranker = load_ranker(os.path.join(config.out_dir, "ranker.model"))
            log = []
            stage_refine(config, world, mccnn, docs, ranker, log)
            print("\n".join(log))
            return 0
        if args.command == "train-all":
            train_all(config)
            with open(os.path.join(config.out_dir, "train_report.txt"),
                      encoding="utf-8") as fh:
                sys.stdout.write(fh.read())
            return 0
        if args.command == "answer":
            return _cmd_answer(config, args)
        if args.command == "eval":
            return _cmd_eval(config, args)
        if args.command == "repl":
            return _cmd_repl(config)
    except (PipelineError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    raise SystemExit(main())
