"""Service, stub/proxy, and helper identification plus method pairing.

A system service is a class some corpus method registers through a
registration call (addService-style, suffix-matched against the seed
config). IPC interfaces are interfaces carrying both stub marker
interfaces; their concrete implementations split into the stub (on a
registered service class) and the proxy (client side). A helper is a
top-level class in the helper package namespace with at least one method
that transitively reaches a proxy invocation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .callgraph import (
    CallbackTable, CallGraph, DEFAULT_MAX_DEPTH, build_graph,
)
from .config import SeedConfig
from .ir import (
    Assign, ClassDef, CorpusIR, If, MethodDef, Var, iter_invokes, method_ref,
)


@dataclass(frozen=True)
class ServiceRegistry:
    services: frozenset[str]
    stub_methods: dict[str, str]   # IPC ref -> stub implementation ref
    proxy_methods: dict[str, str]  # IPC ref -> proxy implementation ref

    def proxy_refs(self) -> frozenset[str]:
        return frozenset(self.proxy_methods.values())

    def ipc_of_proxy(self) -> dict[str, str]:
        return {proxy: ipc for ipc, proxy in self.proxy_methods.items()}


@dataclass(frozen=True)
class MethodPair:
    helper: str        # helper method reference
    ipc_signature: str  # IPC method reference on the interface
    service: str       # stub implementation reference
    helper_class: str  # top-level helper class
    native_stub: bool = False


@dataclass
class PairingResult:
    pairs: list[MethodPair]
    direct_only: list[str]
    graphs: dict[str, CallGraph] = field(default_factory=dict)


def _ref_head_matches(target: str, patterns: tuple[str, ...]) -> bool:
    head = target.split("(", 1)[0]
    return any(head == p or head.endswith("." + p) or head.endswith(p)
               for p in patterns)


def _static_arg_types(cls: ClassDef, m: MethodDef) -> dict[str, str]:
    """Function-level static types: this, parameters, and var-to-var copies."""
    types: dict[str, str] = {"this": cls.name}
    for name, typ in m.params:
        types[name] = typ
    changed = True
    while changed:
        changed = False
        for stmt in _walk_assigns(m.body):
            if isinstance(stmt.lhs, Var) and isinstance(stmt.rhs, Var):
                src = types.get(stmt.rhs.name)
                if src is not None and types.get(stmt.lhs.name) != src:
                    types[stmt.lhs.name] = src
                    changed = True
    return types


def _walk_assigns(body):
    for stmt in body:
        if isinstance(stmt, Assign):
            yield stmt
        elif isinstance(stmt, If):
            yield from _walk_assigns(stmt.then_block)
            yield from _walk_assigns(stmt.else_block)


def _marker_closure(corpus: CorpusIR, class_name: str) -> set[str]:
    """All super-interface/superclass names reachable from a class,
    including external names (which terminate the walk)."""
    seen: set[str] = set()
    work = [class_name]
    while work:
        cur = work.pop()
        if cur in seen:
            continue
        seen.add(cur)
        if cur not in corpus.classes:
            continue
        cls = corpus.classes[cur]
        if cls.superclass:
            work.append(cls.superclass)
        work.extend(cls.interfaces)
    seen.discard(class_name)
    return seen


def identify_services(corpus: CorpusIR, config: SeedConfig | None = None) -> ServiceRegistry:
    config = config or SeedConfig()
    config.validate()

    services: set[str] = set()
    for cls in corpus.classes.values():
        for m in cls.methods:
            types = None
            for inv in iter_invokes(m.body):
                if not _ref_head_matches(inv.target, config.registration_methods):
                    continue
                if types is None:
                    types = _static_arg_types(cls, m)
                for arg in inv.args:
                    if isinstance(arg, Var):
                        typ = types.get(arg.name)
                        if typ in corpus.classes:
                            services.add(typ)

    def has_markers(name: str) -> bool:
        closure = _marker_closure(corpus, name)
        return all(any(c == marker or c.endswith(marker) for c in closure)
                   for marker in config.stub_markers)

    ipc_interfaces = [cls for cls in corpus.classes.values()
                      if cls.kind == "interface" and has_markers(cls.name)]

    stub_methods: dict[str, str] = {}
    proxy_methods: dict[str, str] = {}
    for itf in ipc_interfaces:
        implementors = sorted(
            s for s in corpus.hierarchy.subtypes_of(itf.name)
            if corpus.classes[s].kind != "interface")
        for m in itf.methods:
            ipc_ref = method_ref(itf.name, m.signature)
            for impl in implementors:
                found = corpus.resolve_method(impl, m.signature)
                if found is None or found[1].is_abstract:
                    continue
                impl_ref = method_ref(found[0], m.signature)
                if impl in services or found[0] in services:
                    stub_methods.setdefault(ipc_ref, impl_ref)
                else:
                    proxy_methods.setdefault(ipc_ref, impl_ref)

    return ServiceRegistry(
        services=frozenset(services),
        stub_methods=stub_methods,
        proxy_methods=proxy_methods,
    )


def _candidate_entry_methods(corpus: CorpusIR, config: SeedConfig):
    """(top-level class, entry method ref) for every concrete method on a
    class whose top-level enclosing class sits in the helper namespace."""
    for cls in corpus.classes.values():
        if cls.kind == "interface":
            continue
        top = corpus.top_level_class(cls.name)
        top_cls = corpus.classes[top]
        if not any(top_cls.name.startswith(p) or top_cls.package.startswith(p.rstrip("."))
                   for p in config.helper_package_prefixes):
            continue
        for m in cls.methods:
            if m.is_abstract:
                continue
            yield top, method_ref(cls.name, m.signature)


def identify_helpers(corpus: CorpusIR, registry: ServiceRegistry,
                     config: SeedConfig | None = None,
                     table: CallbackTable | None = None,
                     max_depth: int = DEFAULT_MAX_DEPTH) -> set[str]:
    config = config or SeedConfig()
    proxies = registry.proxy_refs()
    helpers: set[str] = set()
    for top, entry in _candidate_entry_methods(corpus, config):
        if top in helpers:
            continue
        graph = build_graph(corpus, entry, table, max_depth, proxies)
        if graph.targets:
            helpers.add(top)
    return helpers


def pair_methods(corpus: CorpusIR, registry: ServiceRegistry,
                 helpers: set[str],
                 config: SeedConfig | None = None,
                 table: CallbackTable | None = None,
                 max_depth: int = DEFAULT_MAX_DEPTH) -> PairingResult:
    """One MethodPair per (helper entry method, reachable IPC proxy).

    IPC methods no helper reaches are reported as direct-only signatures.
    A pair is attributed to the top-level class where the traversal started.
    """
    config = config or SeedConfig()
    proxies = registry.proxy_refs()
    ipc_of_proxy = registry.ipc_of_proxy()
    pairs: list[MethodPair] = []
    graphs: dict[str, CallGraph] = {}
    paired_ipc: set[str] = set()

    for top, entry in sorted(_candidate_entry_methods(corpus, config)):
        if top not in helpers:
            continue
        graph = build_graph(corpus, entry, table, max_depth, proxies)
        if not graph.targets:
            continue
        graphs[entry] = graph
        for proxy in sorted(graph.targets):
            ipc = ipc_of_proxy[proxy]
            stub = registry.stub_methods.get(ipc)
            if stub is None:
                continue
            _, stub_def = corpus.method(stub)
            pairs.append(MethodPair(
                helper=entry,
                ipc_signature=ipc,
                service=stub,
                helper_class=top,
                native_stub=stub_def.is_native,
            ))
            paired_ipc.add(ipc)

    pairs.sort(key=lambda p: (p.ipc_signature, p.helper))
    direct_only = sorted(set(registry.stub_methods) - paired_ipc)
    return PairingResult(pairs=pairs, direct_only=direct_only, graphs=graphs)
