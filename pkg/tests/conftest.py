from importlib import resources
from pathlib import Path

import pytest

from kgqa.graph import load_triples

DATA = Path(str(resources.files("kgqa") / "data"))

JACKIE = "Jackie Chan [Hong Kong actor]"
MOVIES = frozenset({"Police Story", "Rush Hour", "Shinjuku Incident"})
PAPER_QUERY = (
    'match(:ENTITY{name:"Jackie Chan"})-[:Relationship{name:"classic movie"}]->(m) '
    "return distinct m.name limit 3"
)
MOVIE_QUESTION = "What are the classic movies of Jackie Chan?"


@pytest.fixture(scope="session")
def tiny_kg():
    return load_triples(DATA / "tiny_kg.csv")


@pytest.fixture(scope="session")
def data_dir():
    return DATA


# Acceptance tests append "criterion N: PASS/FAIL ..." lines here; they are
# echoed in the terminal summary so they show up even with output captured.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
