import pytest

from kbqa.linguistics import MentionSpan
from kbqa.linker import link, link_all
from helpers import build_question, shaq_question, tiny_kb


def shaq_alias_kb():
    entities = [
        ("m.012xdf", "Shaquille O'Neal", ["Shaquille O'Neal", "shaq"], False,
         "basketball player who used to play center"),
        ("m.05n7bp", "Shaq Fu", ["Shaq Fu", "shaq"], False, "video game"),
        ("m.06_ttvh", "Shaq Vs.", ["Shaq Vs.", "shaq"], False, "television show"),
    ]
    counts = {
        ("shaq", "m.012xdf"): 30,
        ("shaq", "m.05n7bp"): 3,
        ("shaq", "m.06_ttvh"): 2,
    }
    return tiny_kb(entities, [], counts)


def span(surface, start=1):
    toks = surface.split()
    return MentionSpan(start, start + len(toks) - 1, surface, start)


class TestLink:
    def test_shaq_top_candidate(self):
        kb = shaq_alias_kb()
        candidates = link(kb, span("shaq"))
        assert candidates[0].entity == "m.012xdf"
        assert [c.entity for c in candidates] == ["m.012xdf", "m.05n7bp", "m.06_ttvh"]
        # smoothed conditional probabilities
        assert candidates[0].link_score == pytest.approx(31 / 38)

    def test_single_match_scores_one(self):
        kb = tiny_kb([("m.a", "Alpha", ["Alpha"], False, "")], [])
        candidates = link(kb, span("alpha"))
        assert len(candidates) == 1
        assert candidates[0].link_score == pytest.approx(1.0)

    def test_no_match(self):
        kb = shaq_alias_kb()
        assert link(kb, span("zzzz")) == []

    def test_containment_fallback(self):
        kb = tiny_kb([("m.a", "New York City", ["New York City"], False, "")], [])
        candidates = link(kb, span("york city"))
        assert [c.entity for c in candidates] == ["m.a"]

    def test_truncates_to_five(self):
        entities = [(f"m.{i}", f"E{i}", ["common"], False, "") for i in range(8)]
        kb = tiny_kb(entities, [])
        candidates = link(kb, span("common"))
        assert len(candidates) == 5

    def test_scores_sum_below_one_and_in_range(self):
        kb = shaq_alias_kb()
        candidates = link(kb, span("shaq"))
        assert sum(c.link_score for c in candidates) <= 1.0 + 1e-12
        assert all(0.0 <= c.link_score <= 1.0 for c in candidates)

    def test_count_monotonicity(self):
        kb = shaq_alias_kb()
        before = [c.entity for c in link(kb, span("shaq"))]
        rank_before = before.index("m.05n7bp")
        kb.alias_index["shaq"]["m.05n7bp"] = 100
        after = [c.entity for c in link(kb, span("shaq"))]
        assert after.index("m.05n7bp") <= rank_before


class TestLinkAll:
    def test_union_over_mentions(self):
        kb = tiny_kb(
            [
                ("m.s", "shaq", ["shaq"], False, ""),
                ("m.s2", "shaq fu", ["shaq"], False, ""),
                ("m.s3", "shaq vs", ["shaq"], False, ""),
            ],
            [],
        )
        q = shaq_question()
        candidates = link_all(kb, q)
        assert len(candidates) == 3

    def test_no_mentions(self):
        kb = shaq_alias_kb()
        q = build_question(
            [
                ("who", "who", "WP", 3, "nsubj"),
                ("is", "be", "VBZ", 3, "cop"),
                ("he", "he", "PRP", 0, "root"),
            ]
        )
        assert link_all(kb, q) == []

    def test_candidate_per_mention_entity_pair(self):
        kb = tiny_kb([("m.a", "star wars", ["star wars", "star"], False, "")], [])
        q = build_question(
            [
                ("who", "who", "WP", 2, "nsubj"),
                ("directed", "direct", "VBD", 0, "root"),
                ("star", "star", "NNP", 4, "compound"),
                ("wars", "war", "NNP", 2, "dobj"),
            ]
        )
        candidates = link_all(kb, q)
        keys = {(c.mention.start, c.mention.end, c.entity) for c in candidates}
        assert len(keys) == len(candidates)
