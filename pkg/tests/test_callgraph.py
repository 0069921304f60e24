from __future__ import annotations

import pytest

from helperaudit.callgraph import (
    CallbackTable, build_graph, enumerate_chains, resolve_invoke,
)
from helperaudit.ir import Invoke, UnknownMethod, Var, iter_invokes

from conftest import load_document


def _doc(classes, externals=()):
    return {"version": 1, "externals": list(externals), "classes": classes}


def _cls(name, package="p", kind="class", **kw):
    out = {"name": name, "package": package, "kind": kind, "methods": []}
    out.update(kw)
    return out


def _method(name, body, params=(), ret="void", modifiers=()):
    return {"name": name,
            "params": [{"name": n, "type": t} for n, t in params],
            "returnType": ret,
            "modifiers": list(modifiers),
            "body": body}


def _call(target, dispatch="virtual", receiver="this"):
    return {"op": "invoke", "dispatch": dispatch, "target": target,
            "receiver": receiver, "args": []}


@pytest.fixture
def dispatch_corpus():
    return load_document(_doc([
        _cls("Base", methods=[_method("run", [{"op": "return"}])]),
        _cls("Mid", superclass="Base", methods=[
            _method("run", [{"op": "return"}])]),
        _cls("Leaf", superclass="Mid"),
        _cls("Abstract", kind="abstract", superclass="Base", methods=[
            _method("run", [], modifiers=["abstract"])]),
        _cls("Caller", methods=[
            _method("go", [_call("Base.run()")]),
            _method("goStatic", [_call("Base.run()", dispatch="static")]),
        ]),
    ]))


def test_virtual_dispatch_collects_concrete_overrides(dispatch_corpus):
    inv = next(iter_invokes(dispatch_corpus.classes["Caller"].methods[0].body))
    callees = resolve_invoke(dispatch_corpus, inv)
    # Leaf inherits Mid.run; Abstract's redeclaration is abstract, skipped
    assert callees == ["Base.run()", "Mid.run()"]


def test_static_dispatch_resolves_exactly_one(dispatch_corpus):
    inv = next(iter_invokes(dispatch_corpus.classes["Caller"].methods[1].body))
    assert resolve_invoke(dispatch_corpus, inv) == ["Base.run()"]


def test_external_target_is_opaque_leaf():
    corpus = load_document(_doc([
        _cls("A", methods=[_method("m", [
            _call("Ext.go()", dispatch="static", receiver=None)])]),
    ], externals=["Ext"]))
    inv = next(iter_invokes(corpus.classes["A"].methods[0].body))
    assert resolve_invoke(corpus, inv) == ["Ext.go()"]
    graph = build_graph(corpus, "A.m()")
    assert "Ext.go()" in graph.nodes
    assert graph.successors("Ext.go()") == []


def test_callback_table_adds_implementations():
    corpus = load_document(_doc([
        _cls("Listener", kind="interface", methods=[
            _method("onEvent", [], modifiers=["abstract"])]),
        _cls("Impl", interfaces=["Listener"], methods=[
            _method("onEvent", [{"op": "return"}])]),
        _cls("A", methods=[_method("m", [
            _call("Bus.register()", dispatch="static", receiver=None)])]),
    ], externals=["Bus"]))
    table = CallbackTable.from_dicts([
        {"registration": "Bus.register()", "interface": "Listener",
         "callback": "onEvent()"},
    ])
    inv = next(iter_invokes(corpus.classes["A"].methods[0].body))
    assert resolve_invoke(corpus, inv, table) == ["Bus.register()", "Impl.onEvent()"]
    graph = build_graph(corpus, "A.m()", table)
    assert "Impl.onEvent()" in graph.nodes


def test_build_graph_respects_max_depth():
    chain = [_cls("C%d" % i, methods=[
        _method("m", [_call("C%d.m()" % (i + 1), dispatch="static")])])
        for i in range(5)]
    chain.append(_cls("C5", methods=[_method("m", [{"op": "return"}])]))
    corpus = load_document(_doc(chain))
    shallow = build_graph(corpus, "C0.m()", max_depth=2)
    deep = build_graph(corpus, "C0.m()", max_depth=10)
    assert "C2.m()" in shallow.nodes and "C3.m()" not in shallow.nodes
    assert "C5.m()" in deep.nodes
    with pytest.raises(ValueError):
        build_graph(corpus, "C0.m()", max_depth=0)
    with pytest.raises(UnknownMethod):
        build_graph(corpus, "Nope.m()")


def test_enumerate_chains_acyclic_sorted_and_limited():
    corpus = load_document(_doc([
        _cls("A", methods=[_method("m", [
            _call("B.m()", dispatch="static"),
            _call("C.m()", dispatch="static"),
        ])]),
        _cls("B", methods=[_method("m", [_call("T.m()", dispatch="static")])]),
        _cls("C", methods=[_method("m", [
            _call("T.m()", dispatch="static"),
            _call("A.m()", dispatch="static"),  # back edge, must not loop
        ])]),
        _cls("T", methods=[_method("m", [{"op": "return"}])]),
    ]))
    graph = build_graph(corpus, "A.m()", proxy_methods={"T.m()"})
    enum = enumerate_chains(graph)
    assert [c.methods for c in enum.chains] == [
        ("A.m()", "B.m()", "T.m()"),
        ("A.m()", "C.m()", "T.m()"),
    ]
    assert not enum.truncated
    capped = enumerate_chains(graph, limit=1)
    assert len(capped.chains) == 1
    assert capped.truncated
