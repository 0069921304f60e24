from __future__ import annotations

import pytest

from helperaudit.callgraph import CallChain
from helperaudit.dataflow import (
    UnknownParameter, aliases_of, backward_track, chain_argument_segments,
    def_use, escape_analysis, find_call_site,
)
from helperaudit.ir import flatten_statements

from conftest import load_document


def _doc(classes, externals=()):
    return {"version": 1, "externals": list(externals), "classes": classes}


def _cls(name, methods, **kw):
    out = {"name": name, "package": "p", "kind": "class", "methods": methods}
    out.update(kw)
    return out


def _method(name, body, params=(), ret="void"):
    return {"name": name,
            "params": [{"name": n, "type": t} for n, t in params],
            "returnType": ret, "modifiers": [], "body": body}


def test_def_use_tracks_params_and_results():
    corpus = load_document(_doc([_cls("A", [_method("m", [
        {"op": "assign", "lhs": "x", "rhs": "n"},
        {"op": "invoke", "dispatch": "static", "target": "Ext.f(int)",
         "args": ["x"], "result": "r"},
        {"op": "return", "value": "r"},
    ], params=[("n", "int")], ret="int")])], externals=["Ext"]))
    idx = def_use(corpus.classes["A"].methods[0])
    assert idx.uses["n"] == [0]
    assert idx.defs["x"] == [0]
    assert idx.uses["x"] == [1]
    assert idx.defs["r"] == [1]
    assert idx.uses["r"] == [2]


def test_alias_classes_merge_copies_but_not_call_results():
    corpus = load_document(_doc([_cls("A", [_method("m", [
        {"op": "assign", "lhs": "x", "rhs": "n"},
        {"op": "assign", "lhs": "this.f", "rhs": "x"},
        {"op": "invoke", "dispatch": "static", "target": "Ext.f(int)",
         "args": ["x"], "result": "fresh"},
        {"op": "assign", "lhs": "y", "rhs": {"binop": {"left": "n", "op": "+", "right": 1}}},
    ], params=[("n", "int")])])], externals=["Ext"]))
    m = corpus.classes["A"].methods[0]
    group = aliases_of(m, "n")
    assert group == {"n", "x", "this.f"}
    assert "fresh" not in group
    assert "y" not in group


def _two_hop_corpus(arg="v"):
    return load_document(_doc([
        _cls("A", [_method("entry", [
            {"op": "assign", "lhs": "v", "rhs": "n"},
            {"op": "invoke", "dispatch": "static", "target": "B.mid(int)",
             "args": [arg]},
        ], params=[("n", "int")])]),
        _cls("B", [_method("mid", [
            {"op": "if", "cond": {"left": "w", "rel": "lt", "right": 0},
             "then": [{"op": "throw", "type": "IllegalArgumentException"}]},
            {"op": "invoke", "dispatch": "static", "target": "T.sink(int)",
             "args": ["w"]},
        ], params=[("w", "int")])]),
        _cls("T", [_method("sink", [{"op": "return"}], params=[("q", "int")])]),
    ]))


def test_backward_track_crosses_call_boundaries():
    corpus = _two_hop_corpus()
    chain = CallChain(("A.entry(int)", "B.mid(int)", "T.sink(int)"))
    trace = backward_track(corpus, chain, 0)
    assert trace.origin.kind == "param"
    assert trace.origin.method == "A.entry(int)"
    assert trace.origin.detail == "n"
    facts = [(s.method, s.fact) for s in trace.steps]
    assert ("B.mid(int)", "compared") in facts
    assert ("B.mid(int)", "passedAsArg") in facts
    assert ("A.entry(int)", "passedAsArg") in facts
    assert "B.mid(int)#if@0" in trace.sinks


def test_constant_argument_yields_literal_origin_no_steps():
    corpus = _two_hop_corpus(arg=41)
    chain = CallChain(("A.entry(int)", "B.mid(int)"))
    trace = backward_track(corpus, chain, 0)
    assert trace.origin.kind == "literal"
    assert trace.steps == []


def test_chain_segments_stop_at_call_origin():
    corpus = load_document(_doc([
        _cls("A", [_method("entry", [
            {"op": "invoke", "dispatch": "static", "target": "Ext.id()",
             "result": "p"},
            {"op": "invoke", "dispatch": "static", "target": "B.mid(int)",
             "args": ["p"]},
        ])]),
        _cls("B", [_method("mid", [{"op": "return"}], params=[("w", "int")])]),
    ], externals=["Ext"]))
    chain = CallChain(("A.entry()", "B.mid(int)"))
    segments, origin = chain_argument_segments(corpus, chain, 0)
    assert origin.kind == "call"
    assert origin.detail == "Ext.id()"
    assert [s.method for s in segments] == ["A.entry()"]


def test_find_call_site_first_match_depth_first():
    corpus = _two_hop_corpus()
    flat = flatten_statements(corpus.classes["B"].methods[0].body)
    fs = find_call_site(flat, "sink(int)")
    assert fs is not None and fs.index == 2


def test_escape_analysis_field_store_and_mutator():
    corpus = load_document(_doc([_cls("A", [_method("m", [
        {"op": "assign", "lhs": "x", "rhs": "cb"},
        {"op": "assign", "lhs": "this.mCb", "rhs": "x"},
        {"op": "invoke", "dispatch": "virtual", "target": "ArrayList.add(Object)",
         "receiver": "this.mList", "args": ["cb"]},
        {"op": "invoke", "dispatch": "static", "target": "Ext.use(Object)",
         "args": ["n"]},
    ], params=[("cb", "Object"), ("n", "int")])])], externals=["ArrayList", "Ext"]))
    m = corpus.classes["A"].methods[0]
    report = escape_analysis(m, "cb")
    assert report.escapes
    assert len(report.escape_sites) == 2
    clean = escape_analysis(m, "n")
    assert not clean.escapes
    with pytest.raises(UnknownParameter):
        escape_analysis(m, "nope")


def test_escape_analysis_callback_registration():
    corpus = load_document(_doc([_cls("A", [_method("m", [
        {"op": "invoke", "dispatch": "static", "target": "Bus.register(Object)",
         "args": ["cb"]},
    ], params=[("cb", "Object")])])], externals=["Bus"]))
    m = corpus.classes["A"].methods[0]
    assert not escape_analysis(m, "cb").escapes
    assert escape_analysis(m, "cb",
                           callback_registrations=("Bus.register",)).escapes
