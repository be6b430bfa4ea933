import random

import pytest
from hypothesis import given, settings, strategies as st

from kbqa.kb import (
    KBError,
    candidate_relation_paths,
    dump_triples,
    f1_score,
    load_alias_counts,
    load_kb,
    query,
    surrogate_gold_relation,
)
from helpers import tiny_kb


def write_kb_files(tmp_path, entity_lines, triple_lines):
    entities = tmp_path / "entities.tsv"
    triples = tmp_path / "triples.tsv"
    entities.write_text("".join(l + "\n" for l in entity_lines))
    triples.write_text("".join(l + "\n" for l in triple_lines))
    return str(triples), str(entities)


class TestLoadKb:
    def test_three_triples_three_entities(self, tmp_path):
        triples, entities = write_kb_files(
            tmp_path,
            [
                "m.a\tAlpha\tAlpha\t0\t",
                "m.b\tBeta\tBeta|the beta\t0\tsome description",
                "m.c\tGamma\tGamma\t0\t",
            ],
            [
                "m.a\tx.y.z\tm.b",
                "m.a\tx.y.w\tm.c",
                "m.b\tx.y.z\tm.c",
            ],
        )
        kb = load_kb(triples, entities)
        assert len(kb.edges) == 3
        assert len(kb.entities) == 3
        assert kb.entities["m.b"].description == "some description"

    def test_empty_triples_one_entity(self, tmp_path):
        triples, entities = write_kb_files(tmp_path, ["m.a\tAlpha\tAlpha\t0\t"], [])
        kb = load_kb(triples, entities)
        assert kb.edges == set()
        assert set(kb.entities) == {"m.a"}

    def test_dangling_reference(self, tmp_path):
        triples, entities = write_kb_files(
            tmp_path, ["m.a\tAlpha\tAlpha\t0\t"], ["m.a\tx.y.z\tm.x"]
        )
        with pytest.raises(KBError, match="unknown entity m.x"):
            load_kb(triples, entities)

    def test_malformed_line_names_file_and_lineno(self, tmp_path):
        triples, entities = write_kb_files(
            tmp_path, ["m.a\tAlpha\tAlpha\t0\t"], ["m.a\tonly-two-fields"]
        )
        with pytest.raises(KBError, match=r"triples\.tsv:1"):
            load_kb(triples, entities)

    def test_comments_and_blank_lines_ignored(self, tmp_path):
        triples, entities = write_kb_files(
            tmp_path,
            ["# header", "m.a\tAlpha\tAlpha\t0\t", "", "m.b\tBeta\tBeta\t0\t"],
            ["# comment", "m.a\tx.y.z\tm.b", ""],
        )
        kb = load_kb(triples, entities)
        assert len(kb.edges) == 1

    def test_round_trip(self, tmp_path):
        triples, entities = write_kb_files(
            tmp_path,
            ["m.a\tAlpha\tAlpha\t0\t", "m.b\tBeta\tBeta\t0\t"],
            ["m.b\tx.y.z\tm.a", "m.a\tx.y.z\tm.b", "m.a\tx.y.q\tm.b"],
        )
        kb = load_kb(triples, entities)
        dumped = tmp_path / "dumped.tsv"
        dumped.write_text(dump_triples(kb))
        kb2 = load_kb(str(dumped), entities)
        assert kb2.edges == kb.edges

    def test_alias_counts_file(self, tmp_path):
        triples, entities = write_kb_files(
            tmp_path, ["m.a\tAlpha\tAlpha\t0\t"], []
        )
        kb = load_kb(triples, entities)
        counts = tmp_path / "aliases_counts.tsv"
        counts.write_text("alpha\tm.a\t30\n")
        load_alias_counts(kb, str(counts))
        assert kb.alias_index["alpha"]["m.a"] == 30

    def test_alias_counts_unknown_entity(self, tmp_path):
        triples, entities = write_kb_files(tmp_path, ["m.a\tAlpha\tAlpha\t0\t"], [])
        kb = load_kb(triples, entities)
        counts = tmp_path / "aliases_counts.tsv"
        counts.write_text("alpha\tm.zz\t3\n")
        with pytest.raises(KBError, match="unknown entity m.zz"):
            load_alias_counts(kb, str(counts))


def shaq_fixture():
    teams = [
        ("m.magic", "Orlando Magic", ["Orlando Magic", "Magic"], False, ""),
        ("m.lakers", "Los Angeles Lakers", ["Los Angeles Lakers", "Lakers"], False, ""),
        ("m.celtics", "Boston Celtics", ["Boston Celtics", "Celtics"], False, ""),
        ("m.heat", "Miami Heat", ["Miami Heat", "Heat"], False, ""),
    ]
    entities = teams + [
        ("m.shaq", "Shaquille O'Neal", ["Shaquille O'Neal", "shaq"], False, ""),
        ("m.cvt1", "", [], True, ""),
    ]
    edges = [("m.shaq", "sports.pro_athlete.teams", t[0]) for t in teams]
    return tiny_kb(entities, edges)


class TestQuery:
    def test_one_hop_four_teams(self):
        kb = shaq_fixture()
        answers = query(kb, "m.shaq", ("sports.pro_athlete.teams",))
        assert answers == {"m.magic", "m.lakers", "m.celtics", "m.heat"}

    def test_two_hop_through_mediator(self):
        kb = tiny_kb(
            [
                ("m.p", "Person", ["Person"], False, ""),
                ("m.cvt", "", [], True, ""),
                ("m.school", "School", ["School"], False, ""),
            ],
            [
                ("m.p", "people.person.education", "m.cvt"),
                ("m.cvt", "education.education.institution", "m.school"),
            ],
        )
        answers = query(
            kb, "m.p", ("people.person.education", "education.education.institution")
        )
        assert answers == {"m.school"}

    def test_no_matching_edges(self):
        kb = shaq_fixture()
        assert query(kb, "m.shaq", ("no.such.relation",)) == set()

    def test_unknown_entity(self):
        kb = shaq_fixture()
        with pytest.raises(KBError, match="unknown entity"):
            query(kb, "m.nobody", ("x.y.z",))

    def test_two_hop_first_hop_non_mediator(self):
        kb = shaq_fixture()
        assert query(kb, "m.shaq", ("sports.pro_athlete.teams", "x.y.z")) == set()

    def test_never_returns_mediator(self):
        kb = tiny_kb(
            [
                ("m.a", "A", ["A"], False, ""),
                ("m.cvt", "", [], True, ""),
                ("m.b", "B", ["B"], False, ""),
            ],
            [("m.a", "x.y.z", "m.cvt"), ("m.a", "x.y.z", "m.b")],
        )
        assert query(kb, "m.a", ("x.y.z",)) == {"m.b"}


class TestF1Score:
    def test_identity(self):
        assert f1_score({"russia"}, {"russia"}) == 1.0

    def test_superset_prediction(self):
        assert f1_score({"kazakhstan", "turkey", "russia"}, {"russia"}) == pytest.approx(0.5)

    def test_empty_prediction(self):
        assert f1_score(set(), {"russia"}) == 0.0

    def test_both_empty(self):
        assert f1_score(set(), set()) == 1.0

    def test_symmetry(self):
        a, b = {"x", "y"}, {"y", "z", "w"}
        assert f1_score(a, b) == pytest.approx(f1_score(b, a))


class TestCandidatePaths:
    def test_mixed_one_and_two_hop(self):
        kb = tiny_kb(
            [
                ("m.e", "E", ["E"], False, ""),
                ("m.o1", "O1", ["O1"], False, ""),
                ("m.o2", "O2", ["O2"], False, ""),
                ("m.cvt", "", [], True, ""),
                ("m.t1", "T1", ["T1"], False, ""),
                ("m.t2", "T2", ["T2"], False, ""),
            ],
            [
                ("m.e", "a.b.c", "m.o1"),
                ("m.e", "a.b.d", "m.o2"),
                ("m.e", "a.b.m", "m.cvt"),
                ("m.cvt", "a.b.x", "m.t1"),
                ("m.cvt", "a.b.y", "m.t2"),
            ],
        )
        paths = candidate_relation_paths(kb, "m.e")
        assert paths == [
            ("a.b.c",),
            ("a.b.d",),
            ("a.b.m", "a.b.x"),
            ("a.b.m", "a.b.y"),
        ]

    def test_isolated_entity(self):
        kb = tiny_kb([("m.e", "E", ["E"], False, "")], [])
        assert candidate_relation_paths(kb, "m.e") == []

    def test_mediator_without_out_edges(self):
        kb = tiny_kb(
            [("m.e", "E", ["E"], False, ""), ("m.cvt", "", [], True, "")],
            [("m.e", "a.b.m", "m.cvt")],
        )
        assert candidate_relation_paths(kb, "m.e") == []


class TestSurrogateGoldRelation:
    def test_exact_match_wins(self):
        kb = tiny_kb(
            [
                ("m.e", "E", ["E"], False, ""),
                ("m.g", "G", ["G"], False, ""),
                ("m.x", "X", ["X"], False, ""),
            ],
            [
                ("m.e", "a.b.good", "m.g"),
                ("m.e", "a.b.noise", "m.g"),
                ("m.e", "a.b.noise", "m.x"),
            ],
        )
        assert surrogate_gold_relation(kb, "m.e", {"m.g"}) == ("a.b.good",)

    def test_tie_prefers_one_hop(self):
        kb = tiny_kb(
            [
                ("m.e", "E", ["E"], False, ""),
                ("m.g", "G", ["G"], False, ""),
                ("m.cvt", "", [], True, ""),
            ],
            [
                ("m.e", "a.b.direct", "m.g"),
                ("m.e", "a.b.hop", "m.cvt"),
                ("m.cvt", "a.b.inst", "m.g"),
            ],
        )
        assert surrogate_gold_relation(kb, "m.e", {"m.g"}) == ("a.b.direct",)

    def test_all_disjoint_returns_none(self):
        kb = tiny_kb(
            [
                ("m.e", "E", ["E"], False, ""),
                ("m.x", "X", ["X"], False, ""),
            ],
            [("m.e", "a.b.c", "m.x")],
        )
        assert surrogate_gold_relation(kb, "m.e", {"m.missing"}) is None

    def test_empty_gold_rejected(self):
        kb = tiny_kb([("m.e", "E", ["E"], False, "")], [])
        with pytest.raises(KBError):
            surrogate_gold_relation(kb, "m.e", set())


def random_graph(rng, n_entities=12, n_edges=40):
    ids = [f"m.{i}" for i in range(n_entities)]
    entities = []
    for eid in ids:
        is_mediator = rng.random() < 0.3
        entities.append((eid, eid.upper(), [] if is_mediator else [eid.upper()], is_mediator, ""))
    rels = [f"a.b.r{i}" for i in range(5)]
    edges = set()
    for _ in range(n_edges):
        edges.add((rng.choice(ids), rng.choice(rels), rng.choice(ids)))
    return tiny_kb(entities, sorted(edges))


def brute_force_surrogate(kb, e, gold):
    scored = []
    for path in candidate_relation_paths(kb, e):
        s = f1_score(query(kb, e, path), gold)
        if s > 0:
            scored.append((-s, len(path), path))
    if not scored:
        return None
    return min(scored)[2]


class TestSurrogateOracle:
    def test_matches_brute_force_on_random_graphs(self):
        rng = random.Random(7)
        checked = 0
        for trial in range(100):
            kb = random_graph(rng, n_entities=rng.randint(5, 20), n_edges=rng.randint(5, 200))
            non_mediators = sorted(
                eid for eid, ent in kb.entities.items() if not ent.is_mediator
            )
            if not non_mediators:
                continue
            e = rng.choice(non_mediators)
            gold = set(rng.sample(non_mediators, min(3, len(non_mediators))))
            assert surrogate_gold_relation(kb, e, gold) == brute_force_surrogate(kb, e, gold)
            checked += 1
        assert checked >= 90

    def test_query_never_returns_mediators_random(self):
        rng = random.Random(11)
        for _ in range(30):
            kb = random_graph(rng)
            for eid, ent in kb.entities.items():
                for path in candidate_relation_paths(kb, eid):
                    for answer in query(kb, eid, path):
                        assert not kb.entities[answer].is_mediator


@given(
    a=st.sets(st.integers(0, 20)),
    b=st.sets(st.integers(0, 20)),
)
def test_f1_properties(a, b):
    a = {str(x) for x in a}
    b = {str(x) for x in b}
    assert f1_score(a, b) == pytest.approx(f1_score(b, a))
    assert 0.0 <= f1_score(a, b) <= 1.0
    if a:
        assert f1_score(a, a) == 1.0
