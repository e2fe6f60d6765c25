"""Seeded synthetic graphs and question corpora for offline experiments.

The translator is simulated: its output is the gold query with the entity
name damaged the way generated queries tend to be (qualifier dropped, a
one-character typo) and, for a ``garble_rate`` fraction of questions, an
unusable answer.
"""

from __future__ import annotations

import csv
import json
import os
import random
import string
from dataclasses import dataclass, field

from kgqa.cql import execute_cql
from kgqa.cql.parser import quote
from kgqa.graph import KnowledgeGraph, Triple
from kgqa.pipeline import DatasetExample, dump_dataset
from kgqa.text import base_name

GIVEN = (
    "Alden Briony Cassius Delphine Emrys Fenna Gideon Hollis Imogen Jasper Kestrel Linnea Marlow "
    "Nerys Orrin Perpetua Quillon Rosalind Severin Tamsin Ulric Verity Wystan Xanthe Yorick Zelda"
).split()
FAMILY = (
    "Ashcombe Brightwater Calloway Dunmore Everleigh Fairbanks Greyhaven Holloway Ingleby Jessop "
    "Kingsley Lockhart Merriweather Northcott Oakenfold Pemberton Quartermain Ravensworth "
    "Stansfield Thistlewood Underhill Vantongeren Whitcombe Yarborough"
).split()
QUALIFIERS = ("singer", "novelist", "physicist", "footballer", "painter", "architect", "chess player")
CITIES = ("Port Aurel", "Velmora", "Kastrin", "Oderwick", "Saltmere", "Brannock", "Quenby", "Lysandra")
COUNTRIES = ("Aurelia", "Norvania", "Estmark", "Caldoria")
WORD_A = "Silent Crimson Hollow Distant Golden Broken Quiet Burning Endless Northern Paper Glass".split()
WORD_B = "Harbour Orchard Lantern Meridian Tide Archive Garden Echo Citadel Compass Winter River".split()


@dataclass
class SyntheticCase:
    question: str
    gold_cql: str
    generated_cql: str
    gold_answers: frozenset[str]
    true_entity: str
    mention: str  # damaged entity name in generated_cql
    perturbation: str  # "qualifier" | "edit" | "both" | "garbled"
    kind: str  # "lookup" | "count" | "where" | "two-hop"


@dataclass
class SyntheticCorpus:
    graph: KnowledgeGraph
    cases: list[SyntheticCase] = field(default_factory=list)

    @property
    def examples(self) -> list[DatasetExample]:
        return [DatasetExample(c.question, c.gold_answers, c.gold_cql) for c in self.cases]

    @property
    def translator_table(self) -> dict[str, str]:
        return {c.question: c.generated_cql for c in self.cases}


def _one_char_edit(rng: random.Random, text: str) -> str:
    letters = [i for i, ch in enumerate(text) if ch.isalpha()]
    while True:
        pos = rng.choice(letters)
        op = rng.choice(("sub", "del", "ins"))
        ch = rng.choice(string.ascii_lowercase)
        if op == "sub":
            out = text[:pos] + ch + text[pos + 1 :]
        elif op == "del":
            out = text[:pos] + text[pos + 1 :]
        else:
            out = text[:pos] + ch + text[pos:]
        if out != text:
            return out


def build_graph(rng: random.Random, n_people: int) -> tuple[KnowledgeGraph, list[str], dict[str, list[str]]]:
    names = rng.sample([f"{g} {f}" for g in GIVEN for f in FAMILY], n_people)
    people = [f"{n} [{rng.choice(QUALIFIERS)}]" for n in names]
    triples: list[Triple] = []
    works_of: dict[str, list[str]] = {}
    used_titles: set[str] = set()
    for city in CITIES:
        triples.append(Triple(city, "country", rng.choice(COUNTRIES)))
    for person in people:
        triples.append(Triple(person, "birthplace", rng.choice(CITIES)))
        works = []
        for _ in range(rng.randint(2, 4)):
            title = f"The {rng.choice(WORD_A)} {rng.choice(WORD_B)}"
            while title in used_titles:
                title = f"The {rng.choice(WORD_A)} {rng.choice(WORD_B)} {rng.randint(2, 99)}"
            used_titles.add(title)
            works.append(title)
            triples.append(Triple(person, "notable work", title))
            triples.append(Triple(title, "release year", str(rng.randint(1950, 2020))))
        works_of[person] = works
        if rng.random() < 0.6:
            triples.append(Triple(person, "award", f"{rng.choice(WORD_A)} Prize"))
    for a, b in zip(people[::2], people[1::2]):
        triples.append(Triple(a, "spouse", base_name(b)))
    return KnowledgeGraph(triples), people, works_of


def _gold_query(kind: str, entity: str, rng: random.Random) -> tuple[str, str]:
    anchor = f"(:ENTITY{{name:{quote(entity)}}})"
    base = base_name(entity)
    if kind == "lookup":
        rel = rng.choice(("birthplace", "notable work", "award"))
        q = {
            "birthplace": f"What is the birthplace of {base}?",
            "notable work": f"What are the notable works of {base}?",
            "award": f"Which award did {base} receive?",
        }[rel]
        return q, f'match {anchor}-[:Relationship{{name:"{rel}"}}]->(m) return m.name'
    if kind == "count":
        return (
            f"How many notable works does {base} have?",
            f'match {anchor}-[:Relationship{{name:"notable work"}}]->(m) return count(*)',
        )
    if kind == "where":
        year = rng.randint(1970, 2000)
        return (
            f"Which notable works of {base} came out after {year}?",
            f'match {anchor}-[:Relationship{{name:"notable work"}}]->(m)'
            f'-[:Relationship{{name:"release year"}}]->(y) where y.name > {year} return m.name',
        )
    return (
        f"In which country was {base} born?",
        f'match {anchor}-[:Relationship{{name:"birthplace"}}]->(c)-[:Relationship{{name:"country"}}]->(k) return k.name',
    )


def make_corpus(
    n_questions: int = 50,
    seed: int = 0,
    n_people: int = 80,
    garble_rate: float = 0.0,
    kinds: tuple[str, ...] = ("lookup", "lookup", "count", "where", "two-hop"),
) -> SyntheticCorpus:
    """Graph plus ``n_questions`` cases with damaged translator output."""
    rng = random.Random(seed)
    graph, people, _ = build_graph(rng, n_people)
    corpus = SyntheticCorpus(graph)
    seen_questions: set[str] = set()
    while len(corpus.cases) < n_questions:
        entity = rng.choice(people)
        kind = rng.choice(kinds)
        question, gold = _gold_query(kind, entity, rng)
        answers = execute_cql(gold, graph)
        if not answers or question in seen_questions:
            continue
        seen_questions.add(question)
        base = base_name(entity)
        damage = rng.choice(("qualifier", "edit", "both"))
        if damage == "qualifier":
            mention = base
        elif damage == "edit":
            mention = entity.replace(base, _one_char_edit(rng, base), 1)
        else:
            mention = _one_char_edit(rng, base)
        generated = gold.replace(quote(entity), quote(mention), 1)
        if rng.random() < garble_rate:
            damage = "garbled"
            other = rng.choice([p for p in people if p != entity])
            generated = rng.choice(("Sorry, I cannot answer that.", gold.replace(quote(entity), quote(other), 1)))
        corpus.cases.append(SyntheticCase(question, gold, generated, answers, entity, mention, damage, kind))
    return corpus


def write_corpus(corpus: SyntheticCorpus, directory: str | os.PathLike, selection_mode: str = "oracle") -> str:
    """Write graph, dataset, translator table and an all-stub config; return the config path."""
    os.makedirs(directory, exist_ok=True)
    with open(os.path.join(directory, "graph.csv"), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for t in corpus.graph.triples:
            writer.writerow([t.head, t.relation, t.tail])
    dump_dataset(corpus.examples, os.path.join(directory, "dataset.jsonl"))
    with open(os.path.join(directory, "translator.json"), "w", encoding="utf-8") as fh:
        json.dump(corpus.translator_table, fh, indent=2, ensure_ascii=False)
    config = {
        "graph": "graph.csv",
        "dataset": "dataset.jsonl",
        "err": {"top_k": 3, "candidate_limit": 10, "selection_mode": selection_mode},
        "fusion": {"sigma": 1.0, "rule": "dda"},
        "backends": {
            "translator": {"type": "stub", "table": "translator.json"},
            "selector": {"type": "stub"},
            "reader": {"type": "stub"},
        },
        "workflows": "both",
        "concurrency": 1,
    }
    path = os.path.join(directory, "config.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config, fh, indent=2)
    return path
