from __future__ import annotations

import json

from helperaudit.corpusgen import GenSpec, generate
from helperaudit.pipeline import analyze, corpus_digest, render_markdown

from conftest import load_document


def test_report_shape_and_digest(small_generated_corpus):
    corpus, _ = small_generated_corpus
    report = analyze(corpus)
    payload = report.to_dict()
    assert list(payload) == ["version", "corpusDigest", "pairs", "vocabulary",
                             "findings", "tallies", "directOnly"]
    assert payload["version"] == 1
    assert payload["corpusDigest"].startswith("sha256:")
    assert payload["corpusDigest"] == corpus_digest(corpus)
    assert list(payload["vocabulary"]) == ["identityAccessMined",
                                           "identityEnforceMined",
                                           "supportCounts"]


def test_findings_sorted_and_json_stable(small_generated_corpus):
    corpus, _ = small_generated_corpus
    a = analyze(corpus).to_json()
    b = analyze(corpus).to_json()
    assert a == b
    findings = json.loads(a)["findings"]
    keys = [(f["ipcSignature"], f["helper"], f["vulnClass"]) for f in findings]
    assert keys == sorted(keys)


def test_markdown_derived_from_json_only(small_generated_corpus):
    corpus, _ = small_generated_corpus
    report = analyze(corpus)
    text = report.to_markdown()
    assert text == render_markdown(json.loads(report.to_json()))
    for f in report.findings:
        assert f.vuln_class in text


def test_digest_tracks_corpus_content():
    a = load_document(generate(GenSpec(seed=1, units=3)).document)
    b = load_document(generate(GenSpec(seed=2, units=3)).document)
    assert corpus_digest(a) != corpus_digest(b)
