from __future__ import annotations

import json

import pytest

from helperaudit.corpusgen import GenSpec, generate
from helperaudit.ir import parse_corpus


def load_document(document: dict):
    """Parse a corpus document given as a plain dict."""
    return parse_corpus(json.dumps(document))


@pytest.fixture
def small_generated_corpus():
    generated = generate(GenSpec(seed=7, units=5))
    return load_document(generated.document), generated.truth
