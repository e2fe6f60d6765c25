import json
import shutil

import pytest

from conftest import JACKIE, MOVIES
from kgqa.cli import main
from kgqa.pipeline import (
    ConfigError,
    DatasetExample,
    DatasetFormatError,
    PipelineConfig,
    difficulty,
    dump_dataset,
    load_dataset,
    run_benchmark,
)


@pytest.fixture
def tiny_dir(tmp_path, data_dir):
    for name in ("tiny_kg.csv", "tiny_dataset.jsonl", "tiny_translator.json", "tiny_config.json"):
        shutil.copy(data_dir / name, tmp_path / name)
    return tmp_path


def _config(tiny_dir, **changes):
    return PipelineConfig.from_file(tiny_dir / "tiny_config.json").replace(**changes)


def test_load_dataset(data_dir):
    examples = load_dataset(data_dir / "tiny_dataset.jsonl")
    assert len(examples) == 5
    assert examples[0].gold_answers == MOVIES
    assert examples[0].gold_cql.startswith("match(")


def test_blank_lines_are_skipped(tmp_path):
    p = tmp_path / "d.jsonl"
    p.write_text('\n{"question": "q", "answers": ["a"]}\n\n', encoding="utf-8")
    assert load_dataset(p) == [DatasetExample("q", frozenset({"a"}))]


def test_empty_dataset_file(tmp_path):
    p = tmp_path / "d.jsonl"
    p.write_text("", encoding="utf-8")
    assert load_dataset(p) == []


@pytest.mark.parametrize(
    "line", ["{not json", '{"answers": ["a"]}', '{"question": "q", "answers": "a"}', '["q"]', '{"question": "q", "cql": 3}']
)
def test_malformed_line_reports_number(tmp_path, line):
    p = tmp_path / "d.jsonl"
    p.write_text('{"question": "ok", "answers": []}\n' + line + "\n", encoding="utf-8")
    with pytest.raises(DatasetFormatError) as info:
        load_dataset(p)
    assert info.value.line_no == 2


def test_round_trip_ten_examples(tmp_path):
    examples = [
        DatasetExample(f"question {i}?", frozenset({f"a{i}", "shared"}), None if i % 3 else f'match (n) return n{i}')
        for i in range(10)
    ]
    dump_dataset(examples, tmp_path / "d.jsonl")
    assert load_dataset(tmp_path / "d.jsonl") == examples


def test_difficulty_tags():
    assert difficulty(None) is None
    assert difficulty('match (:ENTITY{name:"A"})-[:Relationship{name:"r"}]->(m) return m.name') == "simple"
    assert difficulty('match (:ENTITY{name:"A"})-[:Relationship{name:"r"}]->(m) return count(*)') == "complex"
    assert difficulty('match (:ENTITY{name:"A"})-[:Relationship{name:"r"}]->(m) where m.name > 1 return m') == "complex"
    two = 'match (:ENTITY{name:"A"})-[:Relationship{name:"r"}]->(m)-[:Relationship{name:"s"}]->(n) return n'
    assert difficulty(two) == "complex"


def test_tiny_benchmark(tiny_dir):
    scores = {
        wf: run_benchmark(_config(tiny_dir, workflows=wf)).acc_ex for wf in ("translator", "searcher", "both")
    }
    assert scores == {"translator": 0.8, "searcher": 0.6, "both": 1.0}


def test_tiny_records(tiny_dir):
    report = run_benchmark(_config(tiny_dir))
    first = report.records[0]
    assert first.translator_answers == first.searcher_answers == first.pred_answers == MOVIES
    assert JACKIE in first.pred_cql
    assert report.acc_lx == pytest.approx(0.8)  # the spouse query is garbage
    assert report.by_difficulty["complex"]["count"] == 2
    assert report.config["err"]["selection_mode"] == "oracle"
    assert "concurrency" not in report.config


def test_dda_beats_bna_when_translator_is_wrong(tiny_dir):
    table = json.loads((tiny_dir / "tiny_translator.json").read_text())
    table["What is the capital of China?"] = (
        f'match (:ENTITY{{name:"{JACKIE}"}})-[:Relationship{{name:"spouse"}}]->(m) return m.name'
    )
    (tiny_dir / "tiny_translator.json").write_text(json.dumps(table))
    dda = run_benchmark(_config(tiny_dir))
    bna = run_benchmark(_config(tiny_dir, fusion=type(_config(tiny_dir).fusion)(1.0, "bna")))
    capital = [r for r in bna.records if "capital" in r.question][0]
    assert capital.pred_answers == {"Joan Lin"}
    assert dda.acc_ex == 1.0 and bna.acc_ex == 0.8


class _Boom:
    backend_id = "boom"

    def complete(self, request):
        if "capital" in request.meta.get("question", ""):
            raise RuntimeError("translator crashed")
        return ""


def test_failure_is_isolated_per_question(tiny_dir):
    from kgqa.llm import Gateway
    from kgqa.pipeline import evaluate, load_inputs
    from kgqa.stubs import ReaderStub, SelectorStub

    config = _config(tiny_dir)
    graph, examples = load_inputs(config)
    gw = Gateway({"translator": _Boom(), "selector": SelectorStub(), "reader": ReaderStub()})
    report = evaluate(examples, graph, config, gw)
    failed = [r for r in report.records if r.errors]
    assert len(failed) == 1 and "crashed" in failed[0].errors[0]
    assert failed[0].pred_answers == {"Beijing"}


def test_config_errors(tmp_path, tiny_dir):
    with pytest.raises(ConfigError):
        PipelineConfig.from_file(tmp_path / "missing.json")
    with pytest.raises(ConfigError):
        PipelineConfig.from_dict({"graph": "g"})
    with pytest.raises(ConfigError):
        PipelineConfig.from_dict({"graph": "g", "dataset": "d", "workflows": "all"})
    with pytest.raises(ConfigError):
        PipelineConfig.from_dict({"graph": "g", "dataset": "d", "backends": {"writer": {}}})
    with pytest.raises(ConfigError):
        run_benchmark(_config(tiny_dir, graph="nope.csv"))


# CLI


def test_cli_run_and_eval(tiny_dir, capsys):
    out = tiny_dir / "report.json"
    assert main(["run", str(tiny_dir / "tiny_config.json"), "-o", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["aggregates"]["acc_ex"] == 1.0
    assert doc["runtime"]["concurrency"] == 4
    assert main(["eval", str(out)]) == 0
    doc["aggregates"]["f1"] = 0.5
    out.write_text(json.dumps(doc))
    assert main(["eval", str(out)]) == 1
    capsys.readouterr()


def test_cli_overrides(tiny_dir, capsys):
    assert main(["run", str(tiny_dir / "tiny_config.json"), "--workflows", "searcher", "--concurrency", "1"]) == 0
    assert "acc_ex:  60.00" in capsys.readouterr().out


def test_cli_bad_config_exits_1(tmp_path, capsys):
    assert main(["run", str(tmp_path / "missing.json")]) == 1
    assert "error" in capsys.readouterr().err


def test_cli_exit_codes_for_bad_table_and_dead_endpoint(tiny_dir, capsys):
    (tiny_dir / "tiny_translator.json").write_text("[1, 2]")  # a list, not a table
    cfg = json.loads((tiny_dir / "tiny_config.json").read_text())
    assert main(["run", str(tiny_dir / "tiny_config.json")]) == 1
    cfg["backends"]["reader"] = {"type": "http", "endpoint": "http://127.0.0.1:9/v1/chat/completions", "model": "m", "timeout": 0.2, "max_retries": 0}
    cfg["backends"]["translator"] = {"type": "stub", "table": "table.json"}
    cfg["workflows"] = "searcher"
    (tiny_dir / "table.json").write_text("{}")
    (tiny_dir / "broken.json").write_text(json.dumps(cfg))
    assert main(["run", str(tiny_dir / "broken.json")]) == 2
    capsys.readouterr()


def test_cli_tools(tiny_dir, capsys):
    graph = str(tiny_dir / "tiny_kg.csv")
    assert main(["kg", "stats", graph]) == 0
    assert json.loads(capsys.readouterr().out)["triples"] == 8

    assert main(["search", "What are the classic movies of Jackie Chan?", "--graph", graph]) == 0
    assert capsys.readouterr().out.split("\n")[:3] == sorted(MOVIES)

    q = 'match(:ENTITY{name:"Jackie Chan"})-[:Relationship{name:"classic movie"}]->(m) return m.name'
    assert main(["err", "q", q, "--graph", graph, "--gold", "Rush Hour", "--gold", "Police Story", "--gold", "Shinjuku Incident"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["mode_used"] == "oracle" and doc["best_answers"] == sorted(MOVIES)

    assert main(["translate", "What is the capital of China?", "--config", str(tiny_dir / "tiny_config.json")]) == 0
    assert "capital city" in capsys.readouterr().out

    assert main(["kg", "stats", str(tiny_dir / "nope.csv")]) == 1
