"""In-memory triple store with 1-hop/2-hop querying and surrogate relation labeling.

Entities live in a directed multigraph. Mediator nodes encode n-ary facts:
they are traversed by 2-hop relation paths and are never returned as answers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

# A relation path is one relation id (1-hop) or an ordered pair of relation
# ids through a mediator (2-hop).
RelationPath = tuple[str, ...]


class KBError(Exception):
    """Raised for malformed KB files or queries against unknown entities."""


@dataclass(frozen=True)
class Entity:
    id: str
    name: str
    aliases: tuple[str, ...]
    description: str = ""
    is_mediator: bool = False


@dataclass
class KBGraph:
    """Immutable-after-load triple store.

    ``alias_index`` maps a lowercased surface form to ``{entity_id: count}``;
    counts default to 1 and may be overridden from a count file.
    """

    entities: dict[str, Entity] = field(default_factory=dict)
    edges: set[tuple[str, str, str]] = field(default_factory=set)
    alias_index: dict[str, dict[str, int]] = field(default_factory=dict)
    # out-adjacency: subject -> relation -> sorted objects
    _out: dict[str, dict[str, list[str]]] = field(default_factory=dict)

    def add_entity(self, entity: Entity) -> None:
        self.entities[entity.id] = entity
        for alias in entity.aliases:
            surface = alias.strip().lower()
            if surface:
                self.alias_index.setdefault(surface, {}).setdefault(entity.id, 1)

    def add_edge(self, subj: str, rel: str, obj: str) -> None:
        for eid in (subj, obj):
            if eid not in self.entities:
                raise KBError(f"unknown entity {eid}")
        if len([f for f in rel.split(".") if f]) < 3:
            raise KBError(f"malformed relation id {rel!r}: expected >=3 dotted fragments")
        if (subj, rel, obj) not in self.edges:
            self.edges.add((subj, rel, obj))
            objs = self._out.setdefault(subj, {}).setdefault(rel, [])
            objs.append(obj)
            objs.sort()

    def is_mediator(self, eid: str) -> bool:
        return self.entities[eid].is_mediator

    def out_relations(self, eid: str) -> dict[str, list[str]]:
        if eid not in self.entities:
            raise KBError(f"unknown entity {eid}")
        return self._out.get(eid, {})

    def in_edges(self, eid: str) -> list[tuple[str, str]]:
        """(subject, relation) pairs of edges pointing at ``eid``."""
        return sorted((s, r) for (s, r, o) in self.edges if o == eid)


def load_kb(triples_path: str, entities_path: str) -> KBGraph:
    """Load a KBGraph from the entity and triple TSV files.

    Entity lines: ``id<TAB>name<TAB>alias1|alias2<TAB>is_mediator<TAB>description``.
    Triple lines: ``subject<TAB>relation<TAB>object``; '#'-comments ignored.
    """
    kb = KBGraph()
    with open(entities_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) < 4:
                raise KBError(f"{entities_path}:{lineno}: expected >=4 tab-separated fields")
            eid, name, alias_field, mediator_field = parts[:4]
            description = parts[4] if len(parts) > 4 else ""
            if not eid:
                raise KBError(f"{entities_path}:{lineno}: empty entity id")
            if mediator_field not in ("0", "1"):
                raise KBError(f"{entities_path}:{lineno}: is_mediator must be 0 or 1")
            is_mediator = mediator_field == "1"
            aliases = [a for a in alias_field.split("|") if a]
            if not is_mediator and name not in aliases:
                aliases.insert(0, name)
            if is_mediator:
                aliases = []
            kb.add_entity(Entity(eid, name, tuple(aliases), description, is_mediator))
    with open(triples_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise KBError(f"{triples_path}:{lineno}: expected 3 tab-separated fields")
            subj, rel, obj = parts
            try:
                kb.add_edge(subj, rel, obj)
            except KBError as exc:
                raise KBError(f"{triples_path}:{lineno}: {exc}") from exc
    return kb


def load_alias_counts(kb: KBGraph, path: str) -> None:
    """Override alias counts from ``surface<TAB>entity_id<TAB>count`` lines."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise KBError(f"{path}:{lineno}: expected 3 tab-separated fields")
            surface, eid, count_str = parts
            if eid not in kb.entities:
                raise KBError(f"{path}:{lineno}: unknown entity {eid}")
            try:
                count = int(count_str)
            except ValueError:
                raise KBError(f"{path}:{lineno}: bad count {count_str!r}") from None
            if count < 1:
                raise KBError(f"{path}:{lineno}: count must be >=1")
            kb.alias_index.setdefault(surface.lower(), {})[eid] = count


def dump_triples(kb: KBGraph) -> str:
    """Serialize the edge set; loading the result reproduces it exactly."""
    return "".join(f"{s}\t{r}\t{o}\n" for s, r, o in sorted(kb.edges))


def query(kb: KBGraph, e: str, path: RelationPath) -> set[str]:
    """Answer entities of the query triple (e, path, ?).

    1-hop returns non-mediator objects; 2-hop traverses a mediator on the
    first hop. Mediators are never returned.
    """
    if e not in kb.entities:
        raise KBError(f"unknown entity {e}")
    if len(path) not in (1, 2):
        raise KBError(f"relation path must have 1 or 2 hops, got {len(path)}")
    out = kb.out_relations(e)
    if len(path) == 1:
        return {o for o in out.get(path[0], []) if not kb.is_mediator(o)}
    answers: set[str] = set()
    for mid in out.get(path[0], []):
        if not kb.is_mediator(mid):
            continue
        for obj in kb.out_relations(mid).get(path[1], []):
            if not kb.is_mediator(obj):
                answers.add(obj)
    return answers


def f1_score(predicted: set[str], gold: set[str]) -> float:
    """Set F1; two empty sets score 1.0, a one-sided empty set scores 0.0."""
    if not predicted and not gold:
        return 1.0
    if not predicted or not gold:
        return 0.0
    hits = len(predicted & gold)
    if hits == 0:
        return 0.0
    precision = hits / len(predicted)
    recall = hits / len(gold)
    return 2 * precision * recall / (precision + recall)


def candidate_relation_paths(kb: KBGraph, e: str) -> list[RelationPath]:
    """All 1-hop and 2-hop relation paths out of ``e``, lexicographically sorted.

    A relation whose objects are all mediators does not count as a 1-hop path;
    it contributes 2-hop paths through each mediator's out-relations instead.
    """
    out = kb.out_relations(e)
    paths: set[RelationPath] = set()
    for rel, objs in out.items():
        if any(not kb.is_mediator(o) for o in objs):
            paths.add((rel,))
        for obj in objs:
            if kb.is_mediator(obj):
                for rel2, objs2 in kb.out_relations(obj).items():
                    if any(not kb.is_mediator(o2) for o2 in objs2):
                        paths.add((rel, rel2))
    return sorted(paths, key=lambda p: (len(p), p))


def surrogate_gold_relation(kb: KBGraph, e: str, gold: set[str]) -> Optional[RelationPath]:
    """Candidate path whose answers have minimal F1-loss against ``gold``.

    Ties prefer 1-hop over 2-hop, then lexicographic order. Returns None when
    every candidate scores 0.
    """
    if not gold:
        raise KBError("gold answer set must be non-empty")
    best: Optional[RelationPath] = None
    best_score = 0.0
    for path in candidate_relation_paths(kb, e):
        score = f1_score(query(kb, e, path), gold)
        if score > best_score + 1e-12:
            best, best_score = path, score
    return best
