"""Pre-parsed question handling: mention spans, dependency paths, decomposition.

Questions arrive as CoNLL-style blocks (token, lemma, POS, head, label); no
parser is embedded. Mention spans come from configurable POS-tag patterns,
and multi-relation questions are split into sub-questions by dependency-tree
patterns P1-P6.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

QUESTION_WORDS = {"who", "when", "what", "where", "how", "which", "why", "whom", "whose"}

UP = "↑"    # edge traversed toward the root
DOWN = "↓"  # edge traversed away from the root

# Default POS-tag sequences that may indicate an entity mention.
DEFAULT_MENTION_PATTERNS = ("NNP+", "NN+", "DT-JJ-NN", "NN-IN-NN", "JJ-NN+")


class ParseError(Exception):
    """Raised for malformed question files or broken dependency trees."""


@dataclass(frozen=True)
class Token:
    index: int          # 1-based
    surface: str
    lemma: str
    pos: str


@dataclass
class DepTree:
    tokens: list[Token]
    head: dict[int, int]    # token index -> head index, 0 for ROOT
    label: dict[int, str]   # token index -> dependency label

    def __post_init__(self) -> None:
        indices = [t.index for t in self.tokens]
        if indices != list(range(1, len(self.tokens) + 1)):
            raise ParseError("token indices must be contiguous from 1")
        roots = [i for i in indices if self.head.get(i) == 0]
        if len(roots) != 1:
            raise ParseError(f"expected exactly one ROOT, found {len(roots)}")
        for i in indices:
            if i not in self.head:
                raise ParseError(f"token {i} has no head link")
            seen = {i}
            j = i
            while self.head[j] != 0:
                j = self.head[j]
                if j in seen:
                    raise ParseError(f"cycle in head links at token {i}")
                if j not in self.head:
                    raise ParseError(f"head of token {i} points outside the sentence")
                seen.add(j)

    def __len__(self) -> int:
        return len(self.tokens)

    def token(self, index: int) -> Token:
        return self.tokens[index - 1]

    def children(self, index: int) -> list[int]:
        return [i for i in self.head if self.head[i] == index]

    def subtree(self, index: int) -> set[int]:
        """Indices of ``index`` and all its descendants."""
        out = {index}
        frontier = [index]
        while frontier:
            node = frontier.pop()
            for child in self.children(node):
                if child not in out:
                    out.add(child)
                    frontier.append(child)
        return out

    def root(self) -> int:
        return next(i for i in self.head if self.head[i] == 0)


@dataclass
class Question:
    qid: str
    raw: str
    tree: DepTree
    qword_index: Optional[int]  # None when no question word was found
    gold_answers: Optional[set[str]] = None
    gold_topic: Optional[str] = None

    @property
    def unanswerable(self) -> bool:
        return self.qword_index is None


@dataclass(frozen=True)
class MentionSpan:
    start: int
    end: int            # inclusive
    surface: str
    head_index: int


@dataclass(frozen=True)
class DepPathElement:
    kind: str   # "word" or "edge"
    value: str  # lemma for words; "label/direction" for edges


def _find_qword(tree: DepTree) -> Optional[int]:
    for tok in tree.tokens:
        if tok.surface.lower() in QUESTION_WORDS:
            return tok.index
    return None


def make_question(qid: str, tree: DepTree, gold_answers: Optional[set[str]] = None,
                  gold_topic: Optional[str] = None) -> Question:
    raw = " ".join(t.surface for t in tree.tokens)
    return Question(qid, raw, tree, _find_qword(tree), gold_answers, gold_topic)


def load_questions(path: str) -> list[Question]:
    """Parse blank-line-separated CoNLL blocks into Questions.

    Block header: ``#qid <id> [gold: id1,id2] [topic: id]``; token lines are
    ``index<TAB>surface<TAB>lemma<TAB>pos<TAB>head<TAB>deplabel``.
    """
    questions = []
    with open(path, encoding="utf-8") as fh:
        blocks: list[list[str]] = [[]]
        for line in fh:
            line = line.rstrip("\n")
            if not line.strip():
                if blocks[-1]:
                    blocks.append([])
            else:
                blocks[-1].append(line)
        if not blocks[-1]:
            blocks.pop()
    for blockno, block in enumerate(blocks, 1):
        qid = f"q{blockno}"
        gold: Optional[set[str]] = None
        topic: Optional[str] = None
        tokens: list[Token] = []
        head: dict[int, int] = {}
        label: dict[int, str] = {}
        for line in block:
            if line.startswith("#"):
                fields = line[1:].split()
                if fields and fields[0] == "qid" and len(fields) > 1:
                    qid = fields[1]
                    i = 2
                    while i < len(fields):
                        if fields[i] == "gold:" and i + 1 < len(fields):
                            gold = set(fields[i + 1].split(","))
                            i += 2
                        elif fields[i] == "topic:" and i + 1 < len(fields):
                            topic = fields[i + 1]
                            i += 2
                        else:
                            i += 1
                continue
            parts = line.split("\t")
            if len(parts) != 6:
                raise ParseError(f"block {blockno}: expected 6 fields, got {len(parts)}")
            try:
                idx, hd = int(parts[0]), int(parts[4])
            except ValueError:
                raise ParseError(f"block {blockno}: non-integer index or head") from None
            tokens.append(Token(idx, parts[1], parts[2], parts[3]))
            head[idx] = hd
            label[idx] = parts[5]
        try:
            tree = DepTree(tokens, head, label)
        except ParseError as exc:
            raise ParseError(f"block {blockno}: {exc}") from exc
        questions.append(make_question(qid, tree, gold, topic))
    return questions


def _pattern_matches(pattern: str, tags: list[str], start: int) -> int:
    """Length of the longest match of ``pattern`` at ``start``, or 0."""
    parts = pattern.split("-")
    pos = start
    total = 0
    for part in parts:
        repeat = part.endswith("+")
        tag = part.rstrip("+")
        count = 0
        while pos < len(tags) and tags[pos] == tag:
            count += 1
            pos += 1
            if not repeat:
                break
        if count == 0:
            return 0
        total += count
    return total


def _span_head(tree: DepTree, start: int, end: int) -> int:
    span = set(range(start, end + 1))
    external = [i for i in span if tree.head[i] not in span]
    if len(external) == 1:
        return external[0]
    nouns = [i for i in span if tree.token(i).pos.startswith("NN")]
    if nouns:
        return nouns[-1]
    return end


def find_mention_spans(q: Question, patterns: Iterable[str] = DEFAULT_MENTION_PATTERNS) -> list[MentionSpan]:
    """Maximal POS-pattern matches; spans containing the question word are skipped.

    Overlapping candidates from different patterns are retained for the joint
    inference stage to disambiguate.
    """
    tree = q.tree
    tags = [t.pos for t in tree.tokens]
    found: dict[tuple[int, int], MentionSpan] = {}
    for pattern in patterns:
        start = 0
        while start < len(tags):
            length = _pattern_matches(pattern, tags, start)
            if length == 0:
                start += 1
                continue
            s, e = start + 1, start + length  # 1-based inclusive
            if q.qword_index is None or not (s <= q.qword_index <= e):
                if (s, e) not in found:
                    surface = " ".join(tree.token(i).surface for i in range(s, e + 1))
                    found[(s, e)] = MentionSpan(s, e, surface, _span_head(tree, s, e))
            start += length
    return [found[key] for key in sorted(found)]


def shortest_dep_path(q: Question, m: MentionSpan) -> list[DepPathElement]:
    """Tree path from the question word to the mention head, endpoints excluded.

    Edges traversed toward the root carry direction UP, away from it DOWN.
    """
    if q.qword_index is None:
        raise ParseError("question has no question word")
    tree = q.tree
    if m.head_index == q.qword_index:
        return []

    def ancestors(i: int) -> list[int]:
        chain = [i]
        while tree.head[chain[-1]] != 0:
            chain.append(tree.head[chain[-1]])
        return chain

    up_chain = ancestors(q.qword_index)
    down_chain = ancestors(m.head_index)
    common = set(up_chain) & set(down_chain)
    lca = next(i for i in up_chain if i in common)
    up_part = up_chain[: up_chain.index(lca)]          # qword ... child of lca
    down_part = down_chain[: down_chain.index(lca)]    # mention head ... child of lca
    nodes = up_part + [lca] + list(reversed(down_part))

    elements: list[DepPathElement] = []
    for a, b in zip(nodes, nodes[1:]):
        if tree.head[a] == b:
            elements.append(DepPathElement("edge", f"{tree.label[a]}/{UP}"))
        else:
            elements.append(DepPathElement("edge", f"{tree.label[b]}/{DOWN}"))
        if b != nodes[-1]:
            elements.append(DepPathElement("word", tree.token(b).lemma))
    return elements


def sentential_context(q: Question, m: MentionSpan) -> list[str]:
    """All token lemmas in order, minus the question word and the mention span."""
    out = []
    for tok in q.tree.tokens:
        if tok.index == q.qword_index:
            continue
        if m.start <= tok.index <= m.end:
            continue
        out.append(tok.lemma)
    return out


# --- question decomposition -------------------------------------------------

# pattern name -> dependency labels it inspects; editable via a pattern file
DEFAULT_DECOMPOSITION_PATTERNS: dict[str, tuple[str, ...]] = {
    "P1": ("nsubj", "dobj", "obj", "iobj", "nmod", "prep", "pobj"),
    "P2": ("conj",),
    "P3": ("nmod", "prep", "pobj"),
    "P4": ("appos",),
    "P5": ("acl:relcl", "rcmod", "acl"),
    "P6": ("advcl",),
}


def load_decomposition_patterns(path: str) -> dict[str, tuple[str, ...]]:
    """Pattern file: one ``Pn<TAB>label1,label2,...`` line per pattern."""
    patterns: dict[str, tuple[str, ...]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError(f"{path}:{lineno}: expected 'name<TAB>labels'")
            name, labels = parts
            if name not in DEFAULT_DECOMPOSITION_PATTERNS:
                raise ParseError(f"{path}:{lineno}: unknown pattern {name!r}")
            patterns[name] = tuple(l for l in labels.split(",") if l)
    return patterns


def _has_entity(tree: DepTree, indices: set[int], proper_only: bool = False) -> bool:
    tag = "NNP" if proper_only else "NN"
    return any(tree.token(i).pos.startswith(tag) for i in indices)


def _subquestion(q: Question, keep: set[int], suffix: str,
                 rehead: Optional[dict[int, tuple[int, str]]] = None) -> Question:
    """Build a sub-question from a token subset; gaps close, heads remap.

    ``rehead`` overrides head links on the old indexing: old index ->
    (new head old-index, label); a head of 0 makes the token the new root.
    """
    tree = q.tree
    old_indices = sorted(keep)
    remap = {old: new for new, old in enumerate(old_indices, 1)}
    tokens = [replace(tree.token(old), index=remap[old]) for old in old_indices]
    head: dict[int, int] = {}
    label: dict[int, str] = {}
    for old in old_indices:
        if rehead and old in rehead:
            new_head_old, new_label = rehead[old]
            head[remap[old]] = remap[new_head_old] if new_head_old else 0
            label[remap[old]] = new_label
        else:
            h = tree.head[old]
            if h != 0 and h not in keep:
                raise ParseError(f"sub-question drops the head of kept token {old}")
            head[remap[old]] = remap[h] if h else 0
            label[remap[old]] = tree.label[old]
    sub_tree = DepTree(tokens, head, label)
    return make_question(f"{q.qid}{suffix}", sub_tree, None, None)


def _argument_slots(q: Question, labels: tuple[str, ...]) -> list[tuple[int, set[int]]]:
    """Entity-bearing argument subtrees of the main verb, excluding the qword side."""
    tree = q.tree
    slots = []
    for node in sorted(tree.head):
        if tree.label[node] not in labels:
            continue
        if not tree.token(tree.head[node]).pos.startswith("VB"):
            continue
        sub = tree.subtree(node)
        if q.qword_index in sub:
            continue
        if _has_entity(tree, sub, proper_only=True):
            slots.append((node, sub))
    return slots


def _fire_two_arguments(q: Question, labels: tuple[str, ...]) -> Optional[list[Question]]:
    """P1/P3: a verb with two entity arguments yields one sub-question per argument."""
    slots = _argument_slots(q, labels)
    by_verb: dict[int, list[tuple[int, set[int]]]] = {}
    for node, sub in slots:
        by_verb.setdefault(q.tree.head[node], []).append((node, sub))
    for verb in sorted(by_verb):
        args = by_verb[verb]
        if len(args) < 2:
            continue
        all_tokens = set(range(1, len(q.tree) + 1))
        subs = []
        for i, (node, sub) in enumerate(args, 1):
            drop: set[int] = set()
            for other_node, other_sub in args:
                if other_node != node:
                    drop |= other_sub
            subs.append(_subquestion(q, all_tokens - drop, f".{i}"))
        return subs
    return None


def _fire_coordination(q: Question, labels: tuple[str, ...]) -> Optional[list[Question]]:
    """P2: one sub-question per conjunct of a coordinated entity group."""
    tree = q.tree
    for node in sorted(tree.head):
        conjs = [c for c in sorted(tree.children(node)) if tree.label[c] in labels]
        if not conjs or not tree.token(node).pos.startswith("NN"):
            continue
        conj_subtrees = {c: tree.subtree(c) for c in conjs}
        if not all(_has_entity(tree, s) for s in conj_subtrees.values()):
            continue
        head_subtree = tree.subtree(node) - set().union(*conj_subtrees.values())
        cc_tokens = {i for i in head_subtree if tree.label[i] == "cc"}
        case_tokens = {i for i in head_subtree if tree.label[i] == "case"}
        all_tokens = set(range(1, len(tree) + 1))
        every_conj: set[int] = set().union(*conj_subtrees.values())
        subs = []
        # first conjunct: keep the head entity, drop the others and any cc
        subs.append(_subquestion(q, all_tokens - every_conj - cc_tokens, ".1"))
        # remaining conjuncts replace the head entity in its slot,
        # inheriting its case marker ("in film_a and film_b" -> "in film_b")
        for i, c in enumerate(conjs, 2):
            keep = (all_tokens - tree.subtree(node)) | conj_subtrees[c] | case_tokens
            rehead = {c: (tree.head[node], tree.label[node])}
            for t in case_tokens:
                rehead[t] = (c, tree.label[t])
            subs.append(_subquestion(q, keep, f".{i}", rehead))
        return subs
    return None


def _fire_apposition(q: Question, labels: tuple[str, ...]) -> Optional[list[Question]]:
    """P4: an appositive entity splits into its own sub-question."""
    tree = q.tree
    for node in sorted(tree.head):
        if tree.label[node] not in labels:
            continue
        host = tree.head[node]
        sub = tree.subtree(node)
        if q.qword_index in sub or not _has_entity(tree, sub):
            continue
        all_tokens = set(range(1, len(tree) + 1))
        punct = {i for i in tree.head if tree.label[i] == "punct" and tree.head[i] in (host, node)}
        matrix = _subquestion(q, all_tokens - sub - punct, ".1")
        # the appositive replaces its host; the host's own modifiers go with it
        drop = {host} | punct
        for child in tree.children(host):
            if tree.label[child] in ("det", "amod", "compound", "nn", "nmod:poss"):
                drop |= tree.subtree(child)
        keep = all_tokens - drop
        rehead = {node: (tree.head[host], tree.label[host])}
        for child in tree.children(host):
            if child in keep and child != node:
                rehead[child] = (node, tree.label[child])
        appos = _subquestion(q, keep, ".2", rehead)
        return [matrix, appos]
    return None


def _fire_clause(q: Question, labels: tuple[str, ...],
                 relativizers: set[str]) -> Optional[list[Question]]:
    """P5/P6: split off a relative or subordinate clause as its own sub-question."""
    tree = q.tree
    if q.qword_index is None:
        return None
    for node in sorted(tree.head):
        if tree.label[node] not in labels:
            continue
        sub = tree.subtree(node)
        if q.qword_index in sub or not _has_entity(tree, sub):
            continue
        introducers = [i for i in sorted(sub)
                       if tree.token(i).surface.lower() in relativizers]
        if not introducers:
            continue
        intro = introducers[0]
        all_tokens = set(range(1, len(tree) + 1))
        punct = {i for i in tree.head if tree.label[i] == "punct" and tree.head[i] == node}
        matrix = _subquestion(q, all_tokens - sub - punct, ".1")
        # the clause becomes a root question: the question word replaces the introducer
        keep = (sub - {intro} - punct) | {q.qword_index}
        rehead = {
            node: (0, "root"),
            q.qword_index: (tree.head[intro] if tree.head[intro] in keep else node,
                            tree.label[intro]),
        }
        for i in sub:
            if i in keep and tree.head[i] == intro:
                rehead[i] = (node, tree.label[i])
        clause = _subquestion(q, keep, ".2", rehead)
        return [matrix, clause]
    return None


_RELATIVIZERS_P5 = {"that", "who", "which", "whom"}
_RELATIVIZERS_P6 = {"when", "where", "while", "after", "before"}


def decompose(q: Question, patterns: Optional[dict[str, tuple[str, ...]]] = None) -> list[Question]:
    """Split a multi-relation question into sub-questions; [q] when nothing fires.

    Patterns are tried in order P1..P6; the first that yields two or more
    well-formed sub-questions wins.
    """
    if q.qword_index is None:
        return [q]
    pats = dict(DEFAULT_DECOMPOSITION_PATTERNS)
    if patterns:
        pats.update(patterns)
    attempts = (
        ("P1", lambda: _fire_two_arguments(q, pats["P1"])),
        ("P2", lambda: _fire_coordination(q, pats["P2"])),
        ("P3", lambda: _fire_two_arguments(q, pats["P3"])),
        ("P4", lambda: _fire_apposition(q, pats["P4"])),
        ("P5", lambda: _fire_clause(q, pats["P5"], _RELATIVIZERS_P5)),
        ("P6", lambda: _fire_clause(q, pats["P6"], _RELATIVIZERS_P6)),
    )
    for _name, fire in attempts:
        try:
            subs = fire()
        except ParseError:
            continue
        if subs and len(subs) >= 2:
            if all(s.qword_index is not None for s in subs):
                return subs
    return [q]
