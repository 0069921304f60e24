from __future__ import annotations

import pytest

from helperaudit.corpusgen import (
    GenSpec, build_unit, fixture_patterns, generate,
)
from helperaudit.ir import validate_corpus

from conftest import load_document


def test_generate_is_deterministic():
    a = generate(GenSpec(seed=42, units=9))
    b = generate(GenSpec(seed=42, units=9))
    assert a.document == b.document
    assert a.truth.findings == b.truth.findings
    assert a.truth.permissions == b.truth.permissions
    assert a.truth.restrictions == b.truth.restrictions


def test_generate_seed_changes_output():
    a = generate(GenSpec(seed=1, units=6))
    b = generate(GenSpec(seed=2, units=6))
    assert a.document != b.document


def test_generate_rejects_bad_units():
    with pytest.raises(ValueError):
        generate(GenSpec(seed=0, units=0))


def test_generated_corpus_parses_clean():
    for seed in range(5):
        generated = generate(GenSpec(seed=seed, units=7))
        corpus = load_document(generated.document)
        assert validate_corpus(corpus) == []


def test_labels_reference_generated_classes():
    generated = generate(GenSpec(seed=3, units=10))
    class_names = {c["name"] for c in generated.document["classes"]}
    for label in generated.truth.findings:
        helper_cls = label["helper"].split("(", 1)[0].rsplit(".", 1)[0]
        ipc_cls = label["ipcSignature"].split("(", 1)[0].rsplit(".", 1)[0]
        assert helper_cls in class_names
        assert ipc_cls in class_names
    for ref in generated.truth.permissions:
        assert ref.split("(", 1)[0].rsplit(".", 1)[0] in class_names


def test_suppression_labels_follow_permission_level():
    high = {"signature", "signatureOrSystem"}
    for seed in range(10):
        generated = generate(GenSpec(seed=seed, units=10))
        for label in generated.truth.findings:
            perms = generated.truth.permissions.get(label["ipcSignature"], [])
            levels = {p["level"] for p in perms}
            assert label["suppressed"] == bool(levels & high)


def test_build_unit_rejects_unknown_pattern():
    with pytest.raises(ValueError):
        build_unit("Alpha", 9, True)


def test_fixture_patterns_cover_all_five_classes():
    fixtures = fixture_patterns()
    assert [f["vulnClass"] for f in fixtures] == [
        "envBypass", "fakeIdentity", "fakeStatus", "illegalParameter",
        "ipcFlood"]
    for fx in fixtures:
        for key in ("vulnerable", "twin"):
            corpus = load_document(fx[key])
            assert validate_corpus(corpus) == []
