import os

import pytest

from kbqa import pipeline, toyworld
from kbqa.linguistics import load_questions
from kbqa.pipeline import (
    NO_LINK,
    NO_MENTION,
    NO_QWORD,
    NO_RELATION,
    Config,
    PipelineError,
    answer,
    evaluate,
    generate_pairs,
    load_bundle,
    load_config,
    load_world,
    split_questions,
    train_all,
)
from helpers import build_question


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    root = str(tmp_path_factory.mktemp("world"))
    cfg_path = toyworld.build_world(root)
    config = load_config(cfg_path)
    world = load_world(config)
    bundle = train_all(config, world)
    heldout = load_questions(os.path.join(root, "heldout.conll"))
    return config, world, bundle, heldout


def by_qid(world):
    return {q.qid: q for q in world.questions}


class TestConfig:
    def test_parse_overrides(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("seed = 7\nmccnn_dim = 16\nranker_c = 2.5\nout_dir = /tmp/x\n")
        config = load_config(str(path))
        assert config.seed == 7
        assert config.mccnn_dim == 16
        assert config.ranker_c == 2.5
        assert config.out_dir == "/tmp/x"
        # untouched keys keep defaults
        assert config.mccnn_window == Config().mccnn_window

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("no_such_key = 1\n")
        with pytest.raises(PipelineError, match="no_such_key"):
            load_config(str(path))

    def test_bad_value(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("seed = banana\n")
        with pytest.raises(PipelineError, match="seed"):
            load_config(str(path))

    def test_comments_and_blanks(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("# comment\n\nseed = 3\n")
        assert load_config(str(path)).seed == 3


class TestSplit:
    def test_partition(self, trained):
        _config, world, _bundle, _heldout = trained
        train_qs, dev_qs = split_questions(world.questions, 0.2)
        assert len(train_qs) + len(dev_qs) == len(world.questions)
        assert {q.qid for q in train_qs}.isdisjoint({q.qid for q in dev_qs})

    def test_stable(self, trained):
        _config, world, _bundle, _heldout = trained
        a = split_questions(world.questions, 0.2)
        b = split_questions(world.questions, 0.2)
        assert [q.qid for q in a[0]] == [q.qid for q in b[0]]

    def test_zero_fraction(self, trained):
        _config, world, _bundle, _heldout = trained
        train_qs, dev_qs = split_questions(world.questions, 0.0)
        assert not dev_qs
        assert len(train_qs) == len(world.questions)


class TestReasonCodes:
    def test_no_qword(self, trained):
        _config, world, bundle, _heldout = trained
        q = build_question([("france", "france", "NNP", 0, "root")])
        result = answer(world.kb, bundle, q, "structured")
        assert result.reason == NO_QWORD
        assert result.predicted == set()

    def test_no_mention(self, trained):
        _config, world, bundle, _heldout = trained
        q = build_question([
            ("who", "who", "WP", 3, "nsubj"),
            ("is", "be", "VBZ", 3, "cop"),
            ("it", "it", "PRP", 0, "root"),
        ])
        pairs, reason = generate_pairs(world.kb, bundle.docs, bundle.mccnn, q)
        assert (pairs, reason) == ([], NO_MENTION)

    def test_no_link(self, trained):
        _config, world, bundle, _heldout = trained
        q = build_question([
            ("who", "who", "WP", 3, "nsubj"),
            ("is", "be", "VBZ", 3, "cop"),
            ("zorgon", "zorgon", "NNP", 0, "root"),
        ])
        pairs, reason = generate_pairs(world.kb, bundle.docs, bundle.mccnn, q)
        assert (pairs, reason) == ([], NO_LINK)

    def test_no_relation(self, trained):
        _config, world, bundle, _heldout = trained
        # "paris" links but the entity has no outgoing edges
        q = build_question([
            ("who", "who", "WP", 3, "nsubj"),
            ("is", "be", "VBZ", 3, "cop"),
            ("paris", "paris", "NNP", 0, "root"),
        ])
        pairs, reason = generate_pairs(world.kb, bundle.docs, bundle.mccnn, q)
        assert (pairs, reason) == ([], NO_RELATION)

    def test_reason_surfaces_in_answer(self, trained):
        _config, world, bundle, _heldout = trained
        q = build_question([
            ("who", "who", "WP", 3, "nsubj"),
            ("is", "be", "VBZ", 3, "cop"),
            ("zorgon", "zorgon", "NNP", 0, "root"),
        ])
        result = answer(world.kb, bundle, q, "structured_joint", {})
        assert result.reason == NO_LINK
        assert result.predicted == set()


class TestAnswerModes:
    def test_unknown_mode(self, trained):
        _config, world, bundle, _heldout = trained
        q = by_qid(world)["t1_france"]
        with pytest.raises(PipelineError, match="mode"):
            answer(world.kb, bundle, q, "oracle")

    def test_structured_single_relation(self, trained):
        _config, world, bundle, _heldout = trained
        q = by_qid(world)["t1_france"]
        result = answer(world.kb, bundle, q, "structured", world.corpus)
        assert result.predicted == {"paris"}

    def test_joint_fixes_ambiguous_alias(self, trained):
        _config, world, bundle, _heldout = trained
        q = by_qid(world)["t11_springfield"]
        plain = answer(world.kb, bundle, q, "structured", world.corpus)
        joint = answer(world.kb, bundle, q, "structured_joint", world.corpus)
        assert plain.predicted != {"matt"}
        assert joint.predicted == {"matt"}

    def test_refinement_narrows_first_team(self, trained):
        _config, world, bundle, _heldout = trained
        q = by_qid(world)["t12_shaq"]
        joint = answer(world.kb, bundle, q, "structured_joint", world.corpus)
        full = answer(world.kb, bundle, q, "structured_joint_unstructured", world.corpus)
        assert joint.predicted == {"orlando_magic", "la_lakers", "boston_celtics", "miami_heat"}
        assert full.predicted == {"orlando_magic"}

    def test_empty_corpus_degrades_to_joint(self, trained):
        _config, world, bundle, _heldout = trained
        for qid in ("t1_france", "t12_shaq", "t11_springfield", "t15_emma"):
            q = by_qid(world)[qid]
            joint = answer(world.kb, bundle, q, "structured_joint", {})
            full = answer(world.kb, bundle, q, "structured_joint_unstructured", {})
            assert full.predicted == joint.predicted

    def test_compositional_intersection(self, trained):
        _config, world, bundle, heldout = trained
        q = next(q for q in heldout if q.qid == "h16_beta_gamma")
        result = answer(world.kb, bundle, q, "structured_joint_unstructured", world.corpus)
        assert len(result.traces) == 2
        assert result.predicted == {"lee"}

    def test_predicted_subset_of_traced(self, trained):
        _config, world, bundle, _heldout = trained
        for q in world.questions:
            result = answer(world.kb, bundle, q, "structured_joint_unstructured",
                            world.corpus)
            traced = set()
            for trace in result.traces:
                traced |= trace.candidates
            assert result.predicted <= traced

    def test_trace_records_all_pairs(self, trained):
        _config, world, bundle, _heldout = trained
        q = by_qid(world)["t11_springfield"]
        result = answer(world.kb, bundle, q, "structured_joint", world.corpus)
        entities = {p.entity.entity for p in result.traces[0].pairs}
        assert {"springfield_city", "springfield_show"} <= entities


class TestEvaluate:
    def test_perfect_subset(self, trained):
        _config, world, bundle, _heldout = trained
        easy = [q for q in world.questions if q.qid.startswith(("t1_", "t7_"))]
        result = evaluate(world.kb, bundle, easy, "structured_joint_unstructured",
                          world.corpus)
        assert result.average_f1 == 1.0

    def test_missing_gold_flagged(self, trained):
        _config, world, bundle, _heldout = trained
        q = by_qid(world)["t1_france"]
        no_gold = build_question(
            [(t.surface, t.lemma, t.pos, q.tree.head[t.index], q.tree.label[t.index])
             for t in q.tree.tokens], qid="nogold")
        result = evaluate(world.kb, bundle, [q, no_gold], "structured", world.corpus)
        assert result.skipped == ["nogold"]
        assert len(result.records) == 1

    def test_report_shape(self, trained):
        _config, world, bundle, _heldout = trained
        qs = [q for q in world.questions if q.qid.startswith("t1_")]
        report = evaluate(world.kb, bundle, qs, "structured", world.corpus).report()
        lines = report.strip().split("\n")
        assert lines[0] == "qid\tpredicted\tgold\tf1\treason"
        assert lines[-1].startswith("average_f1\t")
        assert len(lines) == len(qs) + 2

    def test_all_unanswerable_mean(self, trained):
        _config, world, bundle, _heldout = trained
        bad = build_question([
            ("who", "who", "WP", 3, "nsubj"),
            ("is", "be", "VBZ", 3, "cop"),
            ("zorgon", "zorgon", "NNP", 0, "root"),
        ], qid="bad", gold={"paris"})
        good = by_qid(world)["t1_france"]
        result = evaluate(world.kb, bundle, [good, bad], "structured", world.corpus)
        assert result.average_f1 == pytest.approx(0.5)


class TestTrainAll:
    def test_artifacts_written(self, trained):
        config, _world, _bundle, _heldout = trained
        for name in ("mccnn.model", "docs.model", "ranker.model",
                     "refine.model", "train_report.txt"):
            assert os.path.exists(os.path.join(config.out_dir, name))

    def test_bundle_round_trip(self, trained):
        config, world, bundle, _heldout = trained
        loaded = load_bundle(config.out_dir)
        q = by_qid(world)["t12_shaq"]
        a = answer(world.kb, bundle, q, "structured_joint_unstructured", world.corpus)
        b = answer(world.kb, loaded, q, "structured_joint_unstructured", world.corpus)
        assert a.predicted == b.predicted

    def test_heldout_quality(self, trained):
        _config, world, bundle, heldout = trained
        result = evaluate(world.kb, bundle, heldout,
                          "structured_joint_unstructured", world.corpus)
        assert result.average_f1 >= 0.9

    def test_missing_questions_file(self, tmp_path):
        config = Config(kb_dir=str(tmp_path), questions=str(tmp_path / "none.conll"),
                        out_dir=str(tmp_path / "models"))
        with pytest.raises((PipelineError, OSError)):
            train_all(config)


class TestCli:
    def test_ingest(self, trained, capsys):
        from kbqa.cli import main
        config, _world, _bundle, _heldout = trained
        root = config.kb_dir
        rc = main(["--config", os.path.join(root, "toyworld.cfg"), "ingest"])
        out = capsys.readouterr().out
        assert rc == 0
        assert "questions: 40" in out

    def test_answer_by_qid(self, trained, capsys):
        from kbqa.cli import main
        config, _world, _bundle, _heldout = trained
        rc = main(["--config", os.path.join(config.kb_dir, "toyworld.cfg"),
                   "answer", "--mode", "structured_joint_unstructured",
                   "--question", "t12_shaq"])
        out = capsys.readouterr().out
        assert rc == 0
        assert "orlando_magic" in out

    def test_answer_unknown_question(self, trained, capsys):
        from kbqa.cli import main
        config, _world, _bundle, _heldout = trained
        rc = main(["--config", os.path.join(config.kb_dir, "toyworld.cfg"),
                   "answer", "--question", "no_such_qid"])
        assert rc == 1

    def test_eval_heldout(self, trained, capsys):
        from kbqa.cli import main
        config, _world, _bundle, _heldout = trained
        rc = main(["--config", os.path.join(config.kb_dir, "toyworld.cfg"),
                   "--questions", os.path.join(config.kb_dir, "heldout.conll"),
                   "eval", "--mode", "structured_joint_unstructured",
                   "--split", "all"])
        out = capsys.readouterr().out
        assert rc == 0
        assert out.strip().split("\n")[-1].startswith("average_f1")

    def test_staged_training_matches_train_all(self, trained, tmp_path, capsys):
        from kbqa.cli import main
        config, _world, _bundle, _heldout = trained
        root = config.kb_dir
        staged_cfg = tmp_path / "staged.cfg"
        original = open(os.path.join(root, "toyworld.cfg")).read()
        staged_out = str(tmp_path / "models")
        staged_cfg.write_text(
            "\n".join(
                f"out_dir = {staged_out}" if line.startswith("out_dir") else line
                for line in original.splitlines()
            )
            + "\n"
        )
        for command in ("train-re", "train-joint", "train-refine"):
            assert main(["--config", str(staged_cfg), command]) == 0
        capsys.readouterr()
        for name in ("mccnn.model", "docs.model", "ranker.model", "refine.model"):
            staged = open(os.path.join(staged_out, name), "rb").read()
            reference = open(os.path.join(config.out_dir, name), "rb").read()
            assert staged == reference


class TestToyworld:
    def test_world_shape(self, trained):
        from kbqa.kb import candidate_relation_paths
        _config, world, _bundle, _heldout = trained
        non_mediator = [e for e in world.kb.entities.values() if not e.is_mediator]
        assert 50 <= len(non_mediator) <= 90
        paths = set()
        for eid in world.kb.entities:
            paths.update(candidate_relation_paths(world.kb, eid))
        assert 10 <= len(paths) <= 20

    def test_question_counts(self, trained):
        _config, world, _bundle, heldout = trained
        assert len(world.questions) == 40
        assert len(heldout) == 10
        assert all(q.gold_answers for q in world.questions + heldout)

    def test_build_is_deterministic(self, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        toyworld.build_world(str(a))
        toyworld.build_world(str(b))
        for name in ("entities.tsv", "triples.tsv", "train.conll", "heldout.conll"):
            assert (a / name).read_text() == (b / name).read_text()
