"""Deterministic synthetic fixture world: a small KB, questions, and documents.

``build_world(out_dir)`` writes a complete dataset directory: a knowledge
base (countries, families, athletes, students, films, TV shows), a training
file of 40 parsed questions, 10 held-out questions, a per-topic document
corpus, and a ready-to-use config file. The world exercises every part of
the system: 2-hop relation paths through mediators, an ambiguous alias
("springfield" is both a city and a show), aggregation questions whose KB
answer set is broader than gold ("first play for", "largest nation"), and
sub-lexical questions ("father", "college").
"""

from __future__ import annotations

import os
import sys

# (id, name, extra aliases, is_mediator, description)
ENTITIES = [
    # countries, capitals, largest cities, currencies, regions
    ("france", "France", [], 0, "a country in western europe"),
    ("germany", "Germany", [], 0, "a country in central europe"),
    ("japan", "Japan", [], 0, "an island country in east asia"),
    ("china", "China", [], 0, "a large country in east asia"),
    ("paris", "Paris", [], 0, "capital city of france"),
    ("berlin", "Berlin", [], 0, "capital city of germany"),
    ("tokyo", "Tokyo", [], 0, "capital city of japan"),
    ("beijing", "Beijing", [], 0, "capital city of china"),
    ("marseille", "Marseille", [], 0, "port city in southern france"),
    ("hamburg", "Hamburg", [], 0, "port city in northern germany"),
    ("osaka", "Osaka", [], 0, "city in western japan"),
    ("shanghai", "Shanghai", [], 0, "city on the chinese coast"),
    ("euro", "euro", [], 0, "currency used across europe"),
    ("yen", "yen", [], 0, "currency of japan"),
    ("yuan", "yuan", [], 0, "currency of china"),
    ("europe", "Europe", [], 0, "a continent of many nations"),
    ("asia", "Asia", [], 0, "the largest continent"),
    # three families
    ("alice", "Alice", [], 0, "a writer"),
    ("bob", "Bob", [], 0, "a teacher married to alice"),
    ("victor", "Victor", [], 0, "father of alice"),
    ("wendy", "Wendy", [], 0, "mother of alice"),
    ("carol", "Carol", [], 0, "daughter of alice"),
    ("dave", "Dave", [], 0, "son of alice"),
    ("john", "John", [], 0, "an engineer"),
    ("jane", "Jane", [], 0, "a doctor married to john"),
    ("peter", "Peter", [], 0, "father of john"),
    ("mary", "Mary", [], 0, "mother of john"),
    ("tom", "Tom", [], 0, "son of john"),
    ("sara", "Sara", [], 0, "a painter"),
    ("leo", "Leo", [], 0, "a chef married to sara"),
    ("hugo", "Hugo", [], 0, "father of sara"),
    ("ines", "Ines", [], 0, "mother of sara"),
    ("nina", "Nina", [], 0, "daughter of sara"),
    # athletes and teams (rosters go through mediator nodes)
    ("shaq", "Shaq", [], 0, "a retired basketball center"),
    ("jordan", "Jordan", [], 0, "a retired basketball guard"),
    ("gretzky", "Gretzky", [], 0, "a retired hockey forward"),
    ("orlando_magic", "Orlando Magic", ["Magic"], 0, "basketball team from orlando"),
    ("la_lakers", "Los Angeles Lakers", ["Lakers"], 0, "basketball team from los angeles"),
    ("boston_celtics", "Boston Celtics", ["Celtics"], 0, "basketball team from boston"),
    ("miami_heat", "Miami Heat", ["Heat"], 0, "basketball team from miami"),
    ("chicago_bulls", "Chicago Bulls", ["Bulls"], 0, "basketball team from chicago"),
    ("washington_wizards", "Washington Wizards", ["Wizards"], 0, "basketball team from washington"),
    ("edmonton_oilers", "Edmonton Oilers", ["Oilers"], 0, "hockey team from edmonton"),
    ("la_kings", "Los Angeles Kings", ["Kings"], 0, "hockey team from los angeles"),
    # students and schools (education goes through mediator nodes)
    ("emma", "Emma", [], 0, "a biologist"),
    ("liam", "Liam", [], 0, "a lawyer"),
    ("noah", "Noah", [], 0, "a physicist"),
    ("stanford", "Stanford University", ["Stanford"], 0, "university in california"),
    ("harvard", "Harvard University", ["Harvard"], 0, "university in massachusetts"),
    ("yale", "Yale University", ["Yale"], 0, "university in connecticut"),
    ("lincoln_high", "Lincoln High School", [], 0, "public high school"),
    ("roosevelt_high", "Roosevelt High School", [], 0, "public high school"),
    ("jefferson_high", "Jefferson High School", [], 0, "public high school"),
    # films, directors, actors
    ("film_alpha", "Film Alpha", ["film_alpha"], 0, "a drama film"),
    ("film_beta", "Film Beta", ["film_beta"], 0, "a comedy film"),
    ("film_gamma", "Film Gamma", ["film_gamma"], 0, "a thriller film"),
    ("film_delta", "Film Delta", ["film_delta"], 0, "a western film"),
    ("smith", "Smith", [], 0, "a film director"),
    ("jones", "Jones", [], 0, "a film director"),
    ("kim", "Kim", [], 0, "an actor"),
    ("lee", "Lee", [], 0, "an actor"),
    ("ray", "Ray", [], 0, "an actor"),
    # ambiguous aliases: each of these surfaces names a city and a tv show
    ("springfield_city", "Springfield", [], 0, "a small city"),
    ("springfield_show", "Springfield", [], 0, "a television show"),
    ("shelbyville_city", "Shelbyville", [], 0, "a small city"),
    ("shelbyville_show", "Shelbyville", [], 0, "a television show"),
    ("nova_show", "Nova", [], 0, "a television show"),
    ("matt", "Matt", [], 0, "a television writer"),
    ("seth", "Seth", [], 0, "a television writer"),
    ("rita", "Rita", [], 0, "a television writer"),
    ("pc_37049", "37049", [], 0, "a postal code"),
    ("pc_49007", "49007", [], 0, "a postal code"),
]

ROSTERS = [
    ("shaq", ["orlando_magic", "la_lakers", "boston_celtics", "miami_heat"]),
    ("jordan", ["chicago_bulls", "washington_wizards"]),
    ("gretzky", ["edmonton_oilers", "la_kings"]),
]
# the first team in each roster is the one the player was drafted by;
# that fact lives only in the text corpus, never in the KB
DRAFT_TEAM = {player: teams[0] for player, teams in ROSTERS}

EDUCATION = [
    ("emma", ["stanford", "lincoln_high"]),
    ("liam", ["harvard", "roosevelt_high"]),
    ("noah", ["yale", "jefferson_high"]),
]

TRIPLES = [
    ("france", "location.country.capital", "paris"),
    ("germany", "location.country.capital", "berlin"),
    ("japan", "location.country.capital", "tokyo"),
    ("china", "location.country.capital", "beijing"),
    ("france", "location.country.largest_city", "marseille"),
    ("germany", "location.country.largest_city", "hamburg"),
    ("japan", "location.country.largest_city", "osaka"),
    ("china", "location.country.largest_city", "shanghai"),
    ("france", "location.country.currency_used", "euro"),
    ("germany", "location.country.currency_used", "euro"),
    ("japan", "location.country.currency_used", "yen"),
    ("china", "location.country.currency_used", "yuan"),
    ("europe", "location.location.contains", "france"),
    ("europe", "location.location.contains", "germany"),
    ("asia", "location.location.contains", "japan"),
    ("asia", "location.location.contains", "china"),
    ("alice", "people.person.parents", "victor"),
    ("alice", "people.person.parents", "wendy"),
    ("john", "people.person.parents", "peter"),
    ("john", "people.person.parents", "mary"),
    ("sara", "people.person.parents", "hugo"),
    ("sara", "people.person.parents", "ines"),
    ("alice", "people.person.spouse", "bob"),
    ("john", "people.person.spouse", "jane"),
    ("sara", "people.person.spouse", "leo"),
    ("alice", "people.person.children", "carol"),
    ("alice", "people.person.children", "dave"),
    ("john", "people.person.children", "tom"),
    ("sara", "people.person.children", "nina"),
    ("film_alpha", "film.film.directed_by", "smith"),
    ("film_beta", "film.film.directed_by", "smith"),
    ("film_gamma", "film.film.directed_by", "jones"),
    ("film_delta", "film.film.directed_by", "jones"),
    ("film_alpha", "film.film.starring", "kim"),
    ("film_alpha", "film.film.starring", "ray"),
    ("film_beta", "film.film.starring", "kim"),
    ("film_beta", "film.film.starring", "lee"),
    ("film_gamma", "film.film.starring", "lee"),
    ("film_gamma", "film.film.starring", "ray"),
    ("film_delta", "film.film.starring", "ray"),
    ("springfield_show", "tv.program.created_by", "matt"),
    ("shelbyville_show", "tv.program.created_by", "seth"),
    ("nova_show", "tv.program.created_by", "rita"),
    ("springfield_city", "location.citytown.postal_code", "pc_37049"),
    ("shelbyville_city", "location.citytown.postal_code", "pc_49007"),
]

# the city reading of each ambiguous alias is far more common than the show
ALIAS_COUNTS = [
    ("springfield", "springfield_city", 30),
    ("springfield", "springfield_show", 5),
    ("shelbyville", "shelbyville_city", 30),
    ("shelbyville", "shelbyville_show", 5),
]

DOCS = {
    "france": [
        "Paris is the capital of France",
        "Marseille is the largest city in France",
        "the euro is the currency of France",
    ],
    "germany": [
        "Berlin is the capital of Germany",
        "Hamburg is the largest city in Germany",
        "the euro is the currency of Germany",
    ],
    "japan": [
        "Tokyo is the capital of Japan",
        "Osaka is the largest city in Japan",
        "the yen is the currency of Japan",
    ],
    "china": [
        "Beijing is the capital of China",
        "Shanghai is the largest city in China",
        "the yuan is the currency of China",
    ],
    "europe": [
        "Germany is the largest nation in Europe",
        "France is a nation in Europe",
    ],
    "asia": [
        "China is the largest nation in Asia",
        "Japan is a nation in Asia",
    ],
    "alice": [
        "her father is Victor",
        "her mother is Wendy",
        "her spouse is Bob",
        "her children are Carol and Dave",
    ],
    "john": [
        "his father is Peter",
        "his mother is Mary",
        "his spouse is Jane",
        "Tom is the child of John",
    ],
    "sara": [
        "her father is Hugo",
        "her mother is Ines",
        "her spouse is Leo",
        "Nina is the child of Sara",
    ],
    "shaq": [
        "Shaq was drafted by the Orlando Magic in the first round",
        "Shaq played for the Los Angeles Lakers for several seasons",
        "Shaq played for the Boston Celtics for several seasons",
        "Shaq played for the Miami Heat for several seasons",
    ],
    "jordan": [
        "Jordan was drafted by the Chicago Bulls in the first round",
        "Jordan played for the Washington Wizards for several seasons",
    ],
    "gretzky": [
        "Gretzky was drafted by the Edmonton Oilers in the first round",
        "Gretzky played for the Los Angeles Kings for several seasons",
    ],
    "emma": [
        "Emma went to college at Stanford University",
        "Emma attended Lincoln High School",
    ],
    "liam": [
        "Liam went to college at Harvard University",
        "Liam attended Roosevelt High School",
    ],
    "noah": [
        "Noah went to college at Yale University",
        "Noah attended Jefferson High School",
    ],
    "film_alpha": [
        "Smith directed Film Alpha",
        "Kim starred in Film Alpha",
        "Ray starred in Film Alpha",
    ],
    "film_beta": [
        "Smith directed Film Beta",
        "Kim starred in Film Beta",
        "Lee starred in Film Beta",
    ],
    "film_gamma": [
        "Jones directed Film Gamma",
        "Lee starred in Film Gamma",
        "Ray starred in Film Gamma",
    ],
    "film_delta": [
        "Jones directed Film Delta",
        "Ray starred in Film Delta",
    ],
    "springfield_show": [
        "Matt created the Springfield television show",
        "Springfield is a city with postal code 37049",
    ],
    "shelbyville_show": [
        "Seth created the Shelbyville television show",
        "Shelbyville is a city with postal code 49007",
    ],
    "nova_show": [
        "Rita created the Nova television show",
    ],
}


# --- question templates (hand-built dependency trees) ---------------------------

def _cop_np(qword, be, noun, noun_pos, prep, entity, adj=None, noun_lemma=None):
    """"<qword> <be> the [<adj>] <noun> <prep> <entity>"  (copular question)."""
    rows = [(qword, qword, "WP", None, "nsubj"), (be, "be", "VBZ" if be == "is" else "VBP", None, "cop"),
            ("the", "the", "DT", None, "det")]
    if adj:
        rows.append((adj, adj, "JJS", None, "amod"))
    root_pos = len(rows) + 1
    rows.append((noun, noun_lemma or noun, noun_pos, 0, "root"))
    rows.append((prep, prep, "IN", root_pos + 2, "case"))
    rows.append((entity, entity, "NNP", root_pos, "nmod"))
    return [(s, l, p, root_pos if h is None else h, lab) for s, l, p, h, lab in rows]


def _verb_obj(verb, verb_lemma, entity):
    """"who <verb> <entity>"."""
    return [
        ("who", "who", "WP", 2, "nsubj"),
        (verb, verb_lemma, "VBD", 0, "root"),
        (entity, entity, "NNP", 2, "dobj"),
    ]


def _verb_prep(verb, verb_lemma, prep, entity):
    """"who <verb> <prep> <entity>"."""
    return [
        ("who", "who", "WP", 2, "nsubj"),
        (verb, verb_lemma, "VBD", 0, "root"),
        (prep, prep, "IN", 4, "case"),
        (entity, entity, "NNP", 2, "nmod"),
    ]


def _what_noun(noun, aux, subject, verb, tail=None):
    """"what <noun> <aux> <subject> <verb> [<tail>]"."""
    rows = [
        ("what", "what", "WDT", 2, "det"),
        (noun, noun, "NN", 5, "dobj"),
        (aux, "do", "VBD" if aux == "did" else "VBZ", 5, "aux"),
        (subject, subject, "NNP", 5, "nsubj"),
        (verb, verb, "VB", 0, "root"),
    ]
    if tail:
        rows.append((tail, tail, "IN", 5, "prep"))
    return rows


def _where_go(subject, noun):
    """"where did <subject> go to <noun>"."""
    return [
        ("where", "where", "WRB", 4, "advmod"),
        ("did", "do", "VBD", 4, "aux"),
        (subject, subject, "NNP", 4, "nsubj"),
        ("go", "go", "VB", 0, "root"),
        ("to", "to", "IN", 6, "case"),
        (noun, noun, "NN", 4, "nmod"),
    ]


def _first_play(subject):
    """"who did <subject> first play for"."""
    return [
        ("who", "who", "WP", 5, "dobj"),
        ("did", "do", "VBD", 5, "aux"),
        (subject, subject, "NNP", 5, "nsubj"),
        ("first", "first", "RB", 5, "advmod"),
        ("play", "play", "VB", 0, "root"),
        ("for", "for", "IN", 5, "prep"),
    ]


def _poss(owner, noun):
    """"who is <owner> <noun>"  (possessive, e.g. "who is alice father")."""
    return [
        ("who", "who", "WP", 4, "nsubj"),
        ("is", "be", "VBZ", 4, "cop"),
        (owner, owner, "NNP", 4, "nmod:poss"),
        (noun, noun, "NN", 0, "root"),
    ]


def _coord(verb, verb_lemma, prep, e1, e2):
    """"who <verb> <prep> <e1> and <e2>"  (coordinated entities)."""
    return [
        ("who", "who", "WP", 2, "nsubj"),
        (verb, verb_lemma, "VBD", 0, "root"),
        (prep, prep, "IN", 4, "case"),
        (e1, e1, "NNP", 2, "nmod"),
        ("and", "and", "CC", 4, "cc"),
        (e2, e2, "NNP", 4, "conj"),
    ]


def q_capital(country, answer):
    return _cop_np("what", "is", "capital", "NN", "of", country), {answer}, country


def q_largest_city(country, answer):
    return (_cop_np("what", "is", "city", "NN", "in", country, adj="largest"),
            {answer}, country)


def q_currency(country, answer):
    return _what_noun("currency", "does", country, "use"), {answer}, country


def q_parents(person, answers):
    return (_cop_np("who", "are", "parents", "NNS", "of", person, noun_lemma="parent"),
            set(answers), person)


def q_spouse(person, answer):
    return _cop_np("who", "is", "spouse", "NN", "of", person), {answer}, person


def q_children(person, answers):
    return (_cop_np("who", "are", "children", "NNS", "of", person, noun_lemma="child"),
            set(answers), person)


def q_directed(film, answer):
    return _verb_obj("directed", "direct", film), {answer}, film


def q_starred(film, answers):
    return _verb_prep("starred", "star", "in", film), set(answers), film


def q_team(player, answers):
    return _what_noun("team", "did", player, "play", tail="for"), set(answers), player


def q_school(student, answers):
    return _where_go(student, "school"), set(answers), student


def q_created(show_surface, show_id, answer):
    return _verb_obj("created", "create", show_surface), {answer}, show_id


def q_first_play(player):
    return _first_play(player), {DRAFT_TEAM[player]}, player


def q_largest_nation(region, answer):
    return (_cop_np("what", "is", "nation", "NN", "in", region, adj="largest"),
            {answer}, region)


def q_parent_word(person, word, answer):
    return _poss(person, word), {answer}, person


def q_college(student, answer):
    return _where_go(student, "college"), {answer}, student


def q_starred_both(film1, film2, answers):
    return _coord("starred", "star", "in", film1, film2), set(answers), None


def _with_topic(builders):
    out = []
    for qid, (rows, gold, topic) in builders:
        out.append((qid, rows, gold, topic))
    return out


TRAIN_QUESTIONS = _with_topic([
    ("t1_france", q_capital("france", "paris")),
    ("t1_germany", q_capital("germany", "berlin")),
    ("t1_china", q_capital("china", "beijing")),
    ("t2_france", q_largest_city("france", "marseille")),
    ("t2_germany", q_largest_city("germany", "hamburg")),
    ("t2_japan", q_largest_city("japan", "osaka")),
    ("t3_france", q_currency("france", "euro")),
    ("t3_japan", q_currency("japan", "yen")),
    ("t3_china", q_currency("china", "yuan")),
    ("t4_alice", q_parents("alice", ["victor", "wendy"])),
    ("t4_john", q_parents("john", ["peter", "mary"])),
    ("t5_john", q_spouse("john", "jane")),
    ("t5_sara", q_spouse("sara", "leo")),
    ("t6_alice", q_children("alice", ["carol", "dave"])),
    ("t6_john", q_children("john", ["tom"])),
    ("t6_sara", q_children("sara", ["nina"])),
    ("t7_alpha", q_directed("film_alpha", "smith")),
    ("t7_beta", q_directed("film_beta", "smith")),
    ("t7_gamma", q_directed("film_gamma", "jones")),
    ("t8_alpha", q_starred("film_alpha", ["kim", "ray"])),
    ("t8_beta", q_starred("film_beta", ["kim", "lee"])),
    ("t8_delta", q_starred("film_delta", ["ray"])),
    ("t9_shaq", q_team("shaq", ["orlando_magic", "la_lakers", "boston_celtics", "miami_heat"])),
    ("t9_jordan", q_team("jordan", ["chicago_bulls", "washington_wizards"])),
    ("t10_emma", q_school("emma", ["stanford", "lincoln_high"])),
    ("t10_noah", q_school("noah", ["yale", "jefferson_high"])),
    ("t11_springfield", q_created("springfield", "springfield_show", "matt")),
    ("t11_shelbyville", q_created("shelbyville", "shelbyville_show", "seth")),
    ("t11_nova", q_created("nova", "nova_show", "rita")),
    ("t12_shaq", q_first_play("shaq")),
    ("t12_jordan", q_first_play("jordan")),
    ("t13_europe", q_largest_nation("europe", "germany")),
    ("t13_asia", q_largest_nation("asia", "china")),
    ("t14_alice_father", q_parent_word("alice", "father", "victor")),
    ("t14_alice_mother", q_parent_word("alice", "mother", "wendy")),
    ("t14_sara_father", q_parent_word("sara", "father", "hugo")),
    ("t14_sara_mother", q_parent_word("sara", "mother", "ines")),
    ("t15_emma", q_college("emma", "stanford")),
    ("t15_noah", q_college("noah", "yale")),
    ("t16_alpha_beta", q_starred_both("film_alpha", "film_beta", ["kim"])),
])

HELDOUT_QUESTIONS = _with_topic([
    ("h1_japan", q_capital("japan", "tokyo")),
    ("h2_china", q_largest_city("china", "shanghai")),
    ("h3_germany", q_currency("germany", "euro")),
    ("h7_delta", q_directed("film_delta", "jones")),
    ("h8_gamma", q_starred("film_gamma", ["lee", "ray"])),
    ("h9_gretzky", q_team("gretzky", ["edmonton_oilers", "la_kings"])),
    ("h12_gretzky", q_first_play("gretzky")),
    ("h14_john_mother", q_parent_word("john", "mother", "mary")),
    ("h15_liam", q_college("liam", "harvard")),
    ("h16_beta_gamma", q_starred_both("film_beta", "film_gamma", ["lee"])),
])

CONFIG_TEMPLATE = """\
kb_dir = {root}
questions = {root}/train.conll
corpus_dir = {root}/corpus
out_dir = {root}/models
seed = 0
dev_fraction = 0.0
mccnn_dim = 24
mccnn_hidden1 = 40
mccnn_hidden2 = 20
mccnn_window = 3
mccnn_epochs = 12
mccnn_lr = 0.05
mccnn_lambda = 1e-4
ranker_c = 10.0
ranker_epochs = 400
ranker_lr = 0.1
refine_c = 10.0
refine_epochs = 80
refine_lr = 0.1
refine_min_pair_count = 2
max_relations_per_entity = 10
top_pairs_union = 2
"""


def _write_questions(path: str, questions) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for qid, rows, gold, topic in questions:
            header = f"#qid {qid} gold: {','.join(sorted(gold))}"
            if topic:
                header += f" topic: {topic}"
            fh.write(header + "\n")
            for i, (surface, lemma, pos, head, label) in enumerate(rows, 1):
                fh.write(f"{i}\t{surface}\t{lemma}\t{pos}\t{head}\t{label}\n")
            fh.write("\n")


def build_world(root: str) -> str:
    """Write the full fixture dataset under ``root``; returns the config path."""
    os.makedirs(root, exist_ok=True)
    corpus_dir = os.path.join(root, "corpus")
    os.makedirs(corpus_dir, exist_ok=True)

    entities = list(ENTITIES)
    triples = list(TRIPLES)
    for player, teams in ROSTERS:
        for team in teams:
            mid = f"m_{player}_{team}"
            entities.append((mid, mid, [], 1, ""))
            triples.append((player, "sports.pro_athlete.teams", mid))
            triples.append((mid, "sports.sports_team_roster.team", team))
    for student, schools in EDUCATION:
        for school in schools:
            mid = f"m_{student}_{school}"
            entities.append((mid, mid, [], 1, ""))
            triples.append((student, "people.person.education", mid))
            triples.append((mid, "education.education.institution", school))

    with open(os.path.join(root, "entities.tsv"), "w", encoding="utf-8") as fh:
        for eid, name, aliases, is_mediator, desc in entities:
            fh.write(f"{eid}\t{name}\t{'|'.join(aliases)}\t{is_mediator}\t{desc}\n")
    with open(os.path.join(root, "triples.tsv"), "w", encoding="utf-8") as fh:
        for subj, rel, obj in triples:
            fh.write(f"{subj}\t{rel}\t{obj}\n")
    with open(os.path.join(root, "alias_counts.tsv"), "w", encoding="utf-8") as fh:
        for surface, eid, count in ALIAS_COUNTS:
            fh.write(f"{surface}\t{eid}\t{count}\n")

    with open(os.path.join(corpus_dir, "mapping.tsv"), "w", encoding="utf-8") as fh:
        for eid in sorted(DOCS):
            fh.write(f"{eid}\t{eid}.txt\n")
    for eid, sentences in DOCS.items():
        with open(os.path.join(corpus_dir, f"{eid}.txt"), "w", encoding="utf-8") as fh:
            for sentence in sentences:
                fh.write(sentence + "\n")

    _write_questions(os.path.join(root, "train.conll"), TRAIN_QUESTIONS)
    _write_questions(os.path.join(root, "heldout.conll"), HELDOUT_QUESTIONS)

    config_path = os.path.join(root, "toyworld.cfg")
    with open(config_path, "w", encoding="utf-8") as fh:
        fh.write(CONFIG_TEMPLATE.format(root=root))
    return config_path


def main(argv=None) -> int:
    argv = argv if argv is not None else sys.argv[1:]
    if len(argv) != 1:
        print("usage: python3 -m kbqa.toyworld OUT_DIR", file=sys.stderr)
        return 2
    config_path = build_world(argv[0])
    print(config_path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
