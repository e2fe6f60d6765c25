import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import JACKIE, MOVIES
from kgqa.graph import KnowledgeGraph, Triple, TripleFormatError, load_triples
from oracles import find_relative

JACKIE_ROWS = [f"{JACKIE},classic movie,{m}" for m in sorted(MOVIES)]


def test_empty_source_gives_empty_graph():
    g = load_triples([])
    assert g.stats() == {"triples": 0, "entities": 0, "relations": 0}


def test_three_records():
    g = load_triples(JACKIE_ROWS)
    assert len(g.entity_names) == 1
    assert len(g.relation_names) == 1
    assert len(g.triples) == 3


def test_exact_duplicate_is_dropped():
    assert len(load_triples(JACKIE_ROWS + JACKIE_ROWS[:1]).triples) == 3


def test_stream_source_and_comments():
    text = "# comment\n\n" + "\n".join(JACKIE_ROWS) + "\n"
    assert len(load_triples(io.StringIO(text)).triples) == 3


def test_quoted_field_with_comma():
    g = load_triples(['"Chan, Jackie",alias,"Jackie Chan"'])
    assert g.triples == (Triple("Chan, Jackie", "alias", "Jackie Chan"),)


@pytest.mark.parametrize(
    "bad",
    ["only,two", "a,b,c,d", "a,,c", ' ,b,c', 'a,b,"unterminated'],
)
def test_malformed_record_reports_line(bad):
    with pytest.raises(TripleFormatError) as info:
        load_triples(["a,b,c", bad])
    assert info.value.line_no == 2
    assert info.value.raw == bad


def test_load_from_path(tiny_kg):
    assert tiny_kg.stats() == {"triples": 8, "entities": 5, "relations": 4}


def test_find_relative_qualified_name(tiny_kg):
    assert JACKIE in tiny_kg.find_relative_entities("Jackie Chan", 10)
    assert tiny_kg.find_relative_entities("Jackie Chan", 10)[0] == JACKIE


def test_exact_match_first(tiny_kg):
    assert tiny_kg.find_relative_entities("China", 10)[0] == "China"
    assert tiny_kg.find_relative_relations("classic movie", 10)[0] == "classic movie"


def test_chan_matches_brute_force(tiny_kg):
    for limit in (1, 2, 3, 10):
        expected = find_relative("Chan", tiny_kg.entity_names, limit)
        assert tiny_kg.find_relative_entities("Chan", limit) == expected


def test_movie_prefers_classic_movie():
    g = KnowledgeGraph.from_triples([("x", "classic movie", "y"), ("China", "capital", "Beijing")])
    ranked = g.find_relative_relations("movie", 10)
    assert ranked.index("classic movie") < ranked.index("capital")


def test_empty_graph_lookups():
    g = KnowledgeGraph([])
    assert g.find_relative_entities("anything", 5) == []
    assert g.find_relative_relations("anything", 5) == []


def test_limit_must_be_positive(tiny_kg):
    with pytest.raises(ValueError):
        tiny_kg.find_relative_entities("Chan", 0)


def test_one_hop(tiny_kg):
    hop = tiny_kg.one_hop_subgraph(JACKIE)
    assert {t.tail for t in hop if t.relation == "classic movie"} == MOVIES
    assert all(t.head == JACKIE for t in hop)
    assert tiny_kg.one_hop_subgraph("Nonexistent") == []
    assert tiny_kg.one_hop_subgraph("China") == [Triple("China", "capital", "Beijing")]


def test_one_hop_order_is_relation_then_tail(tiny_kg):
    hop = tiny_kg.one_hop_subgraph(JACKIE)
    assert hop == sorted(hop, key=lambda t: (t.relation, t.tail))


# Names mix qualifiers, shared substrings and near-duplicates so every
# FindRelative rule fires.
_words = st.sampled_from(["Chan", "Jackie", "Jack", "Lin", "Joan", "China", "Chin", "Hong Kong", "actor", "ab", "a"])
_names = st.builds(
    lambda words, qual: " ".join(words) + (f" [{qual}]" if qual else ""),
    st.lists(_words, min_size=1, max_size=3),
    st.one_of(st.none(), _words),
)
_triples = st.lists(st.tuples(_names, _names, _names), max_size=25)


@settings(max_examples=200, deadline=None)
@given(_triples, st.one_of(_names, _words, st.text(max_size=6)), st.integers(1, 12))
def test_find_relative_matches_exhaustive_scan(rows, mention, limit):
    g = KnowledgeGraph.from_triples(rows)
    assert g.find_relative_entities(mention, limit) == find_relative(mention, g.entity_names, limit)
    assert g.find_relative_relations(mention, limit) == find_relative(mention, g.relation_names, limit)


@settings(max_examples=100, deadline=None)
@given(_triples, st.randoms(use_true_random=False))
def test_graph_ignores_record_order(rows, rnd):
    shuffled = rows[:]
    rnd.shuffle(shuffled)
    a, b = KnowledgeGraph.from_triples(rows), KnowledgeGraph.from_triples(shuffled)
    assert a.triples == b.triples
    for name in a.entity_names:
        assert a.one_hop_subgraph(name) == b.one_hop_subgraph(name)
        assert a.find_relative_entities(name, 5) == b.find_relative_entities(name, 5)


@settings(max_examples=100, deadline=None)
@given(_triples)
def test_one_hop_is_exactly_the_head_scan(rows):
    g = KnowledgeGraph.from_triples(rows)
    for name in g.entity_names:
        assert set(g.one_hop_subgraph(name)) == {t for t in g.triples if t.head == name}
