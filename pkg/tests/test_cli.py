from __future__ import annotations

import json
import os

import pytest

from helperaudit.cli import (
    EXIT_DIAGNOSTICS, EXIT_FINDINGS, EXIT_INPUT_ERROR, EXIT_OK, SEEDS_ENV_VAR,
    main,
)
from helperaudit.corpusgen import GenSpec, generate


@pytest.fixture
def corpus_files(tmp_path):
    generated = generate(GenSpec(seed=5, units=10))
    paths = {}
    payloads = {
        "corpus.json": generated.document,
        "permissions.json": generated.truth.permissions,
        "restrictions.json": generated.truth.restrictions,
    }
    for name, payload in payloads.items():
        p = tmp_path / name
        p.write_text(json.dumps(payload))
        paths[name] = str(p)
    return paths, generated.truth, tmp_path


def test_validate_clean_corpus_exits_zero(corpus_files, capsys):
    paths, _, _ = corpus_files
    assert main(["validate", "--corpus", paths["corpus.json"]]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out == {"diagnostics": []}


def test_validate_reports_diagnostics(tmp_path, capsys):
    doc = {"version": 1, "externals": [], "classes": [
        {"name": "A", "package": "p", "kind": "class", "methods": [
            {"name": "m", "params": [], "returnType": "int", "modifiers": [],
             "body": [{"op": "return", "value": "ghost"}]}]},
    ]}
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(doc))
    assert main(["validate", "--corpus", str(p)]) == EXIT_DIAGNOSTICS
    out = json.loads(capsys.readouterr().out)
    assert out["diagnostics"][0]["code"] == "unassigned-read"


def test_malformed_corpus_is_input_error(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    assert main(["validate", "--corpus", str(p)]) == EXIT_INPUT_ERROR
    assert "error:" in capsys.readouterr().err


def test_missing_file_is_input_error(capsys):
    assert main(["analyze", "--corpus", "/nonexistent.json"]) == EXIT_INPUT_ERROR


def test_pairs_output(corpus_files, capsys):
    paths, _, _ = corpus_files
    assert main(["pairs", "--corpus", paths["corpus.json"]]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["pairs"]
    assert {"helper", "ipcSignature", "service", "helperClass",
            "native"} <= set(out["pairs"][0])


def test_analyze_findings_exit_code_and_report(corpus_files, tmp_path):
    paths, truth, _ = corpus_files
    out_path = tmp_path / "report.json"
    code = main(["analyze", "--corpus", paths["corpus.json"],
                 "--permissions", paths["permissions.json"],
                 "--restrictions", paths["restrictions.json"],
                 "--out", str(out_path)])
    report = json.loads(out_path.read_text())
    unsuppressed = [f for f in report["findings"] if not f["suppressed"]]
    assert code == (EXIT_FINDINGS if unsuppressed else EXIT_OK)
    got = sorted((f["helper"], f["ipcSignature"], f["vulnClass"], f["suppressed"])
                 for f in report["findings"])
    want = sorted((f["helper"], f["ipcSignature"], f["vulnClass"], f["suppressed"])
                  for f in truth.findings)
    assert got == want
    assert list(report) == ["version", "corpusDigest", "pairs", "vocabulary",
                            "findings", "tallies", "directOnly"]
    # no stray temp files from the atomic write
    assert not [n for n in os.listdir(tmp_path) if n.startswith(".helperaudit-")]


def test_analyze_markdown_format(corpus_files, tmp_path):
    paths, _, _ = corpus_files
    out_path = tmp_path / "report.md"
    main(["analyze", "--corpus", paths["corpus.json"],
          "--format", "markdown", "--out", str(out_path)])
    text = out_path.read_text()
    assert text.startswith("# ")
    assert "## Findings" in text


def test_analyze_clean_corpus_exits_zero(tmp_path):
    # consistent twins only -> no findings
    from helperaudit.corpusgen import build_unit, _EXTERNALS
    classes = []
    for i, base in enumerate(("Uno", "Duo", "Tri", "Qua", "Pen")):
        unit_classes, _ = build_unit(base, i, False)
        classes.extend(unit_classes)
    p = tmp_path / "clean.json"
    p.write_text(json.dumps({"version": 1, "externals": list(_EXTERNALS),
                             "classes": classes}))
    assert main(["analyze", "--corpus", str(p), "--out",
                 str(tmp_path / "r.json")]) == EXIT_OK


def test_seeds_env_var_fallback(corpus_files, tmp_path, monkeypatch, capsys):
    paths, _, _ = corpus_files
    seeds = tmp_path / "seeds.json"
    seeds.write_text(json.dumps({"status_apis": []}))
    monkeypatch.setenv(SEEDS_ENV_VAR, str(seeds))
    assert main(["pairs", "--corpus", paths["corpus.json"]]) == EXIT_OK
    capsys.readouterr()
    # a broken seeds file from the env var must surface as an input error
    seeds.write_text("{oops")
    assert main(["pairs", "--corpus", paths["corpus.json"]]) == EXIT_INPUT_ERROR


def test_gen_writes_all_artifacts(tmp_path):
    out_dir = tmp_path / "gen"
    assert main(["gen", "--seed", "9", "--units", "6",
                 "--out-dir", str(out_dir)]) == EXIT_OK
    names = sorted(os.listdir(out_dir))
    assert names == ["corpus.json", "labels.json", "permissions.json",
                     "restrictions.json"]
    labels = json.loads((out_dir / "labels.json").read_text())
    assert "findings" in labels
    # generated output must itself analyze without input errors
    code = main(["analyze", "--corpus", str(out_dir / "corpus.json"),
                 "--permissions", str(out_dir / "permissions.json"),
                 "--restrictions", str(out_dir / "restrictions.json"),
                 "--out", str(tmp_path / "rep.json")])
    assert code in (EXIT_OK, EXIT_FINDINGS)
