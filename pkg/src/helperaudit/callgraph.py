"""Method-level call graphs from helper entries to IPC invocations.

Graphs are built by breadth-first search from one entry method. Virtual and
interface invokes resolve through the class hierarchy (all concrete
overrides on subtypes of the declared receiver class); implicit callback
edges come from a configured callback table. Externals and native methods
are leaf nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ir import (
    CorpusIR, Invoke, UnknownMethod, flatten_statements, method_ref, split_ref,
)

DEFAULT_MAX_DEPTH = 12
DEFAULT_CHAIN_LIMIT = 256


@dataclass(frozen=True)
class CallbackEdge:
    registration: str  # method reference "Class.sig"
    interface: str
    callback: str  # signature on the interface


@dataclass(frozen=True)
class CallbackTable:
    entries: tuple[CallbackEdge, ...] = ()

    @classmethod
    def from_dicts(cls, raw: tuple[dict, ...] | list[dict]) -> "CallbackTable":
        return cls(tuple(CallbackEdge(e["registration"], e["interface"], e["callback"])
                         for e in raw))

    def matches(self, target: str) -> list[CallbackEdge]:
        return [e for e in self.entries if e.registration == target]


@dataclass
class CallGraph:
    entry: str
    nodes: set[str] = field(default_factory=set)
    edges: set[tuple[str, int, str]] = field(default_factory=set)
    targets: set[str] = field(default_factory=set)

    def successors(self, ref: str) -> list[str]:
        return sorted({callee for caller, _, callee in self.edges if caller == ref})


@dataclass(frozen=True)
class CallChain:
    methods: tuple[str, ...]


@dataclass
class ChainEnumeration:
    chains: list[CallChain]
    truncated: bool = False


def canonical_ref(corpus: CorpusIR, class_name: str, signature: str) -> str | None:
    """Reference keyed by the class that actually defines the signature."""
    found = corpus.resolve_method(class_name, signature)
    if found is None:
        return None
    return method_ref(found[0], signature)


def resolve_invoke(corpus: CorpusIR, inv: Invoke,
                   table: CallbackTable | None = None) -> list[str]:
    """All callee references an invoke may dispatch to.

    External targets resolve to themselves (opaque leaves). Virtual and
    interface dispatch takes every concrete definition on subtypes of the
    declared receiver class (CHA). Callback-registration targets add the
    callback implementations on subtypes of the callback interface.
    """
    cls_name, sig = split_ref(inv.target)
    callees: set[str] = set()
    if corpus.is_external(cls_name):
        callees.add(inv.target)
    elif inv.dispatch in ("static", "special"):
        ref = canonical_ref(corpus, cls_name, sig)
        if ref is not None:
            callees.add(ref)
    else:
        if cls_name in corpus.classes:
            for sub in corpus.hierarchy.subtypes_of(cls_name):
                found = corpus.resolve_method(sub, sig)
                if found is None:
                    continue
                def_cls, mdef = found
                if mdef.is_abstract:
                    continue
                callees.add(method_ref(def_cls, sig))
    if table is not None:
        for edge in table.matches(inv.target):
            itf = edge.interface
            if itf in corpus.classes:
                for sub in corpus.hierarchy.subtypes_of(itf):
                    found = corpus.resolve_method(sub, edge.callback)
                    if found is None or found[1].is_abstract:
                        continue
                    callees.add(method_ref(found[0], edge.callback))
    return sorted(callees)


def build_graph(corpus: CorpusIR, entry: str,
                table: CallbackTable | None = None,
                max_depth: int = DEFAULT_MAX_DEPTH,
                proxy_methods: frozenset[str] | set[str] = frozenset()) -> CallGraph:
    """BFS call graph from entry, bounded by max_depth.

    proxy_methods names the IPC proxy references whose reachability is
    collected into graph.targets.
    """
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    entry_cls, entry_sig = split_ref(entry)
    if entry_cls not in corpus.classes:
        raise UnknownMethod(entry)
    entry_ref = canonical_ref(corpus, entry_cls, entry_sig)
    if entry_ref is None:
        raise UnknownMethod(entry)

    graph = CallGraph(entry=entry_ref)
    graph.nodes.add(entry_ref)
    queue: list[tuple[str, int]] = [(entry_ref, 0)]
    expanded: set[str] = set()
    while queue:
        ref, depth = queue.pop(0)
        if ref in expanded or depth >= max_depth:
            continue
        expanded.add(ref)
        cls_name, sig = split_ref(ref)
        if corpus.is_external(cls_name):
            continue
        _, mdef = corpus.method(ref)
        if mdef.is_native or mdef.is_abstract:
            continue
        for fs in flatten_statements(mdef.body):
            if not isinstance(fs.stmt, Invoke):
                continue
            for callee in resolve_invoke(corpus, fs.stmt, table):
                graph.edges.add((ref, fs.index, callee))
                if callee in proxy_methods:
                    graph.targets.add(callee)
                if callee not in graph.nodes:
                    graph.nodes.add(callee)
                    queue.append((callee, depth + 1))
    return graph


def enumerate_chains(graph: CallGraph,
                     limit: int = DEFAULT_CHAIN_LIMIT) -> ChainEnumeration:
    """Acyclic entry-to-target paths, lexicographic by node sequence."""
    succ: dict[str, list[str]] = {}
    for caller, _, callee in graph.edges:
        succ.setdefault(caller, []).append(callee)
    for lst in succ.values():
        lst.sort()

    chains: list[CallChain] = []
    truncated = False

    def dfs(path: list[str]) -> bool:
        # returns False once the limit is exceeded
        node = path[-1]
        if node in graph.targets:
            if len(chains) >= limit:
                return False
            chains.append(CallChain(tuple(path)))
        seen_next: str | None = None
        for nxt in succ.get(node, ()):
            if nxt == seen_next or nxt in path:
                continue
            seen_next = nxt
            path.append(nxt)
            ok = dfs(path)
            path.pop()
            if not ok:
                return False
        return True

    if not dfs([graph.entry]):
        truncated = True
    return ChainEnumeration(chains=chains, truncated=truncated)


def service_entry_invokes(corpus: CorpusIR, service: str) -> list[Invoke]:
    """The Invoke statements of the service method body, in depth-first
    source order; no transitive expansion."""
    _, mdef = corpus.method(service)
    return [fs.stmt for fs in flatten_statements(mdef.body)
            if isinstance(fs.stmt, Invoke)]
