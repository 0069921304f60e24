from __future__ import annotations

import random

import pytest

from helperaudit.callgraph import CallChain
from helperaudit.config import SeedConfig
from helperaudit.mining import (
    InvalidConfig, SeedVocabulary, Transaction, build_transactions, fp_growth,
    keyword_filter, tokenize_identifier,
)

from conftest import load_document
from oracles import apriori_oracle


def _tx(*item_groups):
    return [Transaction("I.m()", frozenset(items)) for items in item_groups]


def test_tokenize_identifier_camel_snake_digits():
    assert tokenize_identifier("getCallingUid") == {"get", "calling", "uid"}
    assert tokenize_identifier("check_op2") == {"check", "op", "2"}
    assert tokenize_identifier("HTTPServer") == {"http", "server"}


def test_fp_growth_plain_supports():
    txs = _tx({"a", "b"}, {"a", "b"}, {"a", "c"}, {"a"})
    result = dict(fp_growth(txs, min_support=2))
    assert result[frozenset({"a"})] == 4
    assert result[frozenset({"b"})] == 2
    assert result[frozenset({"a", "b"})] == 2
    assert frozenset({"c"}) not in result


def test_fp_growth_seed_exemption_reports_true_support():
    txs = _tx({"seedy", "rare"}, {"common"}, {"common"}, {"common"})
    result = dict(fp_growth(txs, min_support=3, seeds={"seedy"}))
    # the seed itemsets survive with their real (sub-threshold) supports
    assert result[frozenset({"seedy"})] == 1
    assert result[frozenset({"seedy", "rare"})] == 1
    assert frozenset({"rare"}) not in result
    assert result[frozenset({"common"})] == 3


def test_fp_growth_itemset_size_cap():
    txs = _tx({"a", "b", "c", "d", "e"}, {"a", "b", "c", "d", "e"},
              {"a", "b", "c", "d", "e"})
    result = fp_growth(txs, min_support=3)
    assert all(len(s) <= 4 for s, _ in result)
    assert max(len(s) for s, _ in result) == 4


def test_fp_growth_validates_config():
    with pytest.raises(InvalidConfig):
        fp_growth([], min_support=0)
    with pytest.raises(InvalidConfig):
        fp_growth([], min_support=5, seeds={"s"}, seed_boost=2)


def test_fp_growth_matches_apriori_oracle_random():
    rng = random.Random(11)
    alphabet = ["i%d" % k for k in range(8)] + ["seed0", "seed1"]
    for _ in range(30):
        txs = [Transaction("I.m()",
                           frozenset(rng.sample(alphabet,
                                                rng.randint(1, 6))))
               for _ in range(rng.randint(1, 10))]
        min_support = rng.randint(1, 4)
        seeds = frozenset(rng.sample(["seed0", "seed1"], rng.randint(0, 2)))
        got = fp_growth(txs, min_support, seeds)
        want = apriori_oracle(txs, min_support, seeds)
        assert got == want


def test_build_transactions_collects_chain_and_invoke_names():
    corpus = load_document({"version": 1, "externals": ["Binder"], "classes": [
        {"name": "A", "package": "p", "kind": "class", "methods": [
            {"name": "entry", "params": [], "returnType": "void",
             "modifiers": [], "body": [
                 {"op": "invoke", "dispatch": "static",
                  "target": "Binder.getCallingUid()", "result": "u"},
                 {"op": "invoke", "dispatch": "static", "target": "B.hop()"},
             ]}]},
        {"name": "B", "package": "p", "kind": "class", "methods": [
            {"name": "hop", "params": [], "returnType": "void",
             "modifiers": [], "body": [{"op": "return"}]}]},
    ]})
    chain = CallChain(("A.entry()", "B.hop()"))
    txs = build_transactions(corpus, [("I.m()", chain)])
    assert len(txs) == 1
    assert txs[0].items == {"entry", "hop", "getCallingUid"}


def test_keyword_filter_classifies_access_then_enforce():
    vocab = SeedVocabulary.from_config(SeedConfig())
    candidates = [
        (frozenset({"getCallingUid", "checkPermission"}), 5),
        (frozenset({"getCallingUid"}), 7),
        (frozenset({"myUid", "enforceQuota"}), 4),
        (frozenset({"myUid", "renderFrame"}), 4),  # no keyword tokens
        (frozenset({"getCallingUserId"}), 3),      # never co-occurs with a seed
    ]
    mined = keyword_filter(candidates, vocab)
    # "getCallingUid" tokens hit both access and enforce lists; access wins
    assert "getCallingUid" in mined.identity_access_mined
    assert "enforceQuota" in mined.identity_enforce_mined
    assert "renderFrame" not in mined.identity_access_mined | mined.identity_enforce_mined
    assert "getCallingUserId" not in mined.identity_access_mined
    assert mined.support_counts["getCallingUid"] == 7
    assert mined.support_counts["enforceQuota"] == 4
