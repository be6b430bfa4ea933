"""Shared test helpers: compact builders for trees, questions and tiny KBs."""

from kbqa.kb import Entity, KBGraph
from kbqa.linguistics import DepTree, Question, Token, make_question


def build_tree(rows):
    """rows: (surface, lemma, pos, head, label) tuples, 1-based heads."""
    tokens = [Token(i, r[0], r[1], r[2]) for i, r in enumerate(rows, 1)]
    head = {i: r[3] for i, r in enumerate(rows, 1)}
    label = {i: r[4] for i, r in enumerate(rows, 1)}
    return DepTree(tokens, head, label)


def build_question(rows, qid="q", gold=None, topic=None):
    return make_question(qid, build_tree(rows), gold, topic)


def shaq_question(gold=None, topic=None):
    """'who did shaq first play for' with the dependency tree used throughout."""
    rows = [
        ("who", "who", "WP", 5, "dobj"),
        ("did", "do", "VBD", 5, "aux"),
        ("shaq", "shaq", "NN", 5, "nsubj"),
        ("first", "first", "RB", 5, "advmod"),
        ("play", "play", "VB", 0, "root"),
        ("for", "for", "IN", 5, "prep"),
    ]
    return build_question(rows, qid="shaq", gold=gold, topic=topic)


def tiny_kb(entities, edges, counts=None):
    """entities: (id, name, aliases, is_mediator, description) tuples."""
    kb = KBGraph()
    for eid, name, aliases, is_mediator, desc in entities:
        kb.add_entity(Entity(eid, name, tuple(aliases), desc, is_mediator))
    for s, r, o in edges:
        kb.add_edge(s, r, o)
    if counts:
        for (surface, eid), c in counts.items():
            kb.alias_index.setdefault(surface, {})[eid] = c
    return kb
