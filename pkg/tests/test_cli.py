import json

import pytest
import yaml
from click.testing import CliRunner

from adex.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def persona_file(tmp_path):
    path = tmp_path / "personas.yaml"
    path.write_text(yaml.safe_dump({"personas": [
        {"name": "Eager", "p_no": 0.1, "p_bc": 0.7, "p_s": 0.2,
         "p_pos": 0.9, "p_neg": 0.1},
    ]}))
    return path


@pytest.fixture()
def fast_config(tmp_path):
    path = tmp_path / "engine.yaml"
    path.write_text(yaml.safe_dump({"engine": {
        "mcts_iterations": 48, "horizon": 3}}))
    return path


def test_simulate_writes_exports(runner, persona_file, fast_config, tmp_path):
    out = tmp_path / "out"
    result = runner.invoke(main, [
        "simulate", "--graph", "quarto", "--personas", str(persona_file),
        "--runs", "1", "--seed", "7", "--out", str(out),
        "--config", str(fast_config)])
    assert result.exit_code == 0, result.output
    assert "Eager" in result.output
    for name in ("runs.csv", "cycles.csv", "summary.json"):
        assert (out / name).exists()


def test_simulate_byte_stable(runner, persona_file, fast_config, tmp_path):
    outputs, files = [], []
    for sub in ("x", "y"):
        out = tmp_path / sub
        result = runner.invoke(main, [
            "simulate", "--graph", "quarto", "--personas", str(persona_file),
            "--runs", "1", "--seed", "11", "--out", str(out),
            "--config", str(fast_config)])
        assert result.exit_code == 0
        outputs.append(result.output.replace(str(out), "OUT"))
        files.append((out / "summary.json").read_bytes())
    assert outputs[0] == outputs[1]
    assert files[0] == files[1]


def test_simulate_missing_graph_exits_2(runner, tmp_path):
    result = runner.invoke(main, ["simulate", "--graph",
                                  str(tmp_path / "nope.yaml")])
    assert result.exit_code == 2
    assert "nope.yaml" in result.output


def test_simulate_bad_persona_file_exits_2(runner, tmp_path):
    bad = tmp_path / "personas.yaml"
    bad.write_text(yaml.safe_dump({"personas": [
        {"name": "Broken", "p_no": 0.9, "p_bc": 0.9, "p_s": 0.9,
         "p_pos": 0.5, "p_neg": 0.5}]}))
    result = runner.invoke(main, ["simulate", "--graph", "quarto",
                                  "--personas", str(bad)])
    assert result.exit_code == 2
    assert "Broken" in result.output


def test_simulate_bad_engine_config_exits_2(runner, persona_file, tmp_path):
    bad = tmp_path / "engine.yaml"
    bad.write_text(yaml.safe_dump({"engine": {"alpha": 0.0}}))
    result = runner.invoke(main, ["simulate", "--graph", "quarto",
                                  "--personas", str(persona_file),
                                  "--config", str(bad)])
    assert result.exit_code == 2
    assert "alpha" in result.output


def test_inspect_graph(runner):
    result = runner.invoke(main, ["inspect", "--graph", "quarto"])
    assert result.exit_code == 0
    assert "40 triples" in result.output
    assert "strategy" in result.output


def test_inspect_pm_config(runner, fast_config):
    result = runner.invoke(main, ["inspect", "--pm-config", str(fast_config)])
    assert result.exit_code == 0
    assert "belief tables validated" in result.output


def test_inspect_requires_arguments(runner):
    result = runner.invoke(main, ["inspect"])
    assert result.exit_code == 2


def test_inspect_rejects_broken_graph(runner, tmp_path):
    bad = tmp_path / "graph.yaml"
    bad.write_text("concepts: []\nblocks: []\ntriples: []\n")
    result = runner.invoke(main, ["inspect", "--graph", str(bad)])
    assert result.exit_code == 2


def test_interact_backchannel_and_eof(runner, fast_config, tmp_path):
    transcript = tmp_path / "t.jsonl"
    result = runner.invoke(main, [
        "interact", "--graph", "quarto", "--seed", "3",
        "--config", str(fast_config), "--transcript", str(transcript)],
        input="+\n:pm\n\n")
    assert result.exit_code == 0
    assert "agent>" in result.output
    assert "expertise=" in result.output
    assert transcript.exists()
    lines = [json.loads(l) for l in transcript.read_text().splitlines()]
    assert lines and lines[0]["cycle"] == 1


def test_interact_question_answered(runner, fast_config, tmp_path):
    transcript = tmp_path / "t.jsonl"
    result = runner.invoke(main, [
        "interact", "--graph", "quarto", "--seed", "3",
        "--config", str(fast_config), "--transcript", str(transcript)],
        input="?p quarto-is-boardgame\n\n")
    assert result.exit_code == 0
    assert "Yes, Quarto is a board game." in result.output \
        or "board game, that is what Quarto is" in result.output


def test_interact_unknown_triple_reprompts(runner, fast_config, tmp_path):
    result = runner.invoke(main, [
        "interact", "--graph", "quarto", "--seed", "3",
        "--config", str(fast_config),
        "--transcript", str(tmp_path / "t.jsonl")],
        input="?p bogus-triple\n+\n")
    assert result.exit_code == 0
    assert "unknown triple" in result.output
