"""Security-enforcement extraction for both sides of a method pair.

Helper side: parameter validation, caller-status checks, identity passing,
environment checks, duplicate-request constraints. Service side: identity
and permission checks (including sanity checks deeper in the call path),
validated-parameter set, and parameter escape hazards.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .callgraph import CallChain, DEFAULT_MAX_DEPTH, build_graph, resolve_invoke
from .config import SeedConfig
from .dataflow import (
    ChainSegment, EscapeReport, Origin, UnboundArgument, _operand_reads,
    aliases_of, chain_argument_segments, escape_analysis, find_call_site,
    guard_locus, location,
)
from .ir import (
    Assign, Const, CorpusIR, FieldPath, FlatStmt, If, Invoke, MethodDef,
    Return, Throw, Var, flatten_statements, simple_name, split_ref,
)
from .mining import MinedVocabulary, tokenize_identifier

HELPER_KINDS = ("paramValidation", "callerStatus", "identityPassing",
                "envCheck", "dupConstraint")
SERVICE_KINDS = ("identityCheck", "permissionCheck")
IDENTITY_KINDS = ("packageName", "uid", "pid", "gid", "tid", "ppid", "userHandle")

_SIZE_QUERY_NAMES = frozenset({"size", "isEmpty"})


@dataclass
class EnforcementSet:
    side: str  # helper | service
    mechanisms: dict[str, list[str]] = field(default_factory=dict)
    validated_params: set[int] = field(default_factory=set)
    identities_passed: set[tuple[str, int]] = field(default_factory=set)
    escape_hazards: list[EscapeReport] = field(default_factory=list)
    # extra detail the comparison step needs
    throw_guarded_params: set[int] = field(default_factory=set)
    identity_checked_positions: set[int] = field(default_factory=set)
    binder_identity_check: bool = False
    escape_positions: set[int] = field(default_factory=set)

    def add_mechanism(self, kind: str, locus: str) -> None:
        self.mechanisms.setdefault(kind, [])
        if locus not in self.mechanisms[kind]:
            self.mechanisms[kind].append(locus)

    def has(self, kind: str) -> bool:
        return kind in self.mechanisms


# ---------------------------------------------------------------------------
# Guard machinery

def _branch_exits(flat: list[FlatStmt], if_idx: int, branch: str) -> tuple[bool, bool]:
    """(contains Throw, contains Return) anywhere inside the branch."""
    has_throw = has_return = False
    key = (if_idx, branch)
    for fs in flat:
        if key in fs.path:
            if isinstance(fs.stmt, Throw):
                has_throw = True
            elif isinstance(fs.stmt, Return):
                has_return = True
    return has_throw, has_return


def _returns_boolean(corpus: CorpusIR, target: str) -> bool:
    cls_name, sig = split_ref(target)
    if cls_name not in corpus.classes:
        return False
    found = corpus.resolve_method(cls_name, sig)
    return found is not None and found[1].return_type == "boolean"


def _bool_check_aliases(corpus: CorpusIR, mdef: MethodDef,
                        flat: list[FlatStmt],
                        value_aliases: frozenset[str]) -> frozenset[str]:
    """Alias locations of boolean results computed over the tracked value."""
    out: set[str] = set()
    for fs in flat:
        stmt = fs.stmt
        if not isinstance(stmt, Invoke) or stmt.result is None:
            continue
        consumed: set[str] = set()
        if stmt.receiver is not None:
            consumed.update(_operand_reads(stmt.receiver))
        for a in stmt.args:
            consumed.update(_operand_reads(a))
        if consumed & value_aliases and _returns_boolean(corpus, stmt.target):
            out.update(aliases_of(mdef, stmt.result.name))
    return frozenset(out)


def _cond_reads(stmt: If) -> set[str]:
    return set(_operand_reads(stmt.cond.left) + _operand_reads(stmt.cond.right))


@dataclass(frozen=True)
class Guard:
    if_index: int
    has_throw: bool
    locus: str


def _exit_guards(corpus: CorpusIR, method_ref: str, mdef: MethodDef,
                 flat: list[FlatStmt], value_aliases: frozenset[str],
                 bound: FlatStmt | None,
                 include_bool_calls: bool = True) -> list[Guard]:
    """Ifs testing the value whose failing branch throws or returns early.

    bound is the guarded (IPC-ward) call: the If must precede it in
    depth-first order and the call must not sit inside the exiting branch.
    With bound=None (service side) only the exiting branch is required.
    """
    bool_aliases = (_bool_check_aliases(corpus, mdef, flat, value_aliases)
                    if include_bool_calls else frozenset())
    guards: list[Guard] = []
    for fs in flat:
        if not isinstance(fs.stmt, If):
            continue
        if bound is not None and fs.index >= bound.index:
            continue
        locs = _cond_reads(fs.stmt)
        if not (locs & value_aliases or locs & bool_aliases):
            continue
        for branch in ("then", "else"):
            has_throw, has_return = _branch_exits(flat, fs.index, branch)
            if not (has_throw or has_return):
                continue
            if bound is not None and (fs.index, branch) in bound.path:
                continue
            guards.append(Guard(fs.index, has_throw,
                                guard_locus(method_ref, fs.index)))
            break
    return guards


def _forwarding_bound(corpus: CorpusIR, chain: CallChain, pos: int
                      ) -> tuple[str, MethodDef, list[FlatStmt], FlatStmt] | None:
    """Chain method at pos with the call site forwarding toward pos+1."""
    m_ref = chain.methods[pos]
    cls_name = m_ref.split("(", 1)[0].rsplit(".", 1)[0]
    if cls_name not in corpus.classes:
        return None
    _, mdef = corpus.method(m_ref)
    flat = flatten_statements(mdef.body)
    callee_sig = split_ref(chain.methods[pos + 1])[1]
    call_fs = find_call_site(flat, callee_sig)
    if call_fs is None:
        return None
    return m_ref, mdef, flat, call_fs


# ---------------------------------------------------------------------------
# Helper-side detectors

@dataclass
class ParamValidation:
    validated: set[int] = field(default_factory=set)
    throw_guarded: set[int] = field(default_factory=set)
    evidence: dict[int, list[str]] = field(default_factory=dict)


def detect_param_validation(corpus: CorpusIR, chain: CallChain,
                            arity: int) -> ParamValidation:
    """IPC parameter positions guarded (directly or via a boolean check
    call) by an exception/early-return branch before the IPC call."""
    out = ParamValidation()
    for p in range(arity):
        try:
            segments, _ = chain_argument_segments(corpus, chain, p)
        except UnboundArgument:
            continue
        for seg in segments:
            guards = _exit_guards(corpus, seg.method, seg.mdef, seg.flat,
                                  seg.aliases, seg.call_site)
            if guards:
                out.validated.add(p)
                out.evidence.setdefault(p, []).extend(g.locus for g in guards)
                if any(g.has_throw for g in guards):
                    out.throw_guarded.add(p)
    return out


def detect_caller_status(corpus: CorpusIR, chain: CallChain,
                         config: SeedConfig) -> list[str]:
    """Status-API result gating the IPC call with an exiting branch."""
    evidence: list[str] = []
    status_names = frozenset(config.status_apis)
    for pos in range(len(chain.methods) - 1):
        found = _forwarding_bound(corpus, chain, pos)
        if found is None:
            continue
        m_ref, mdef, flat, bound = found
        status_aliases: set[str] = set()
        for fs in flat:
            stmt = fs.stmt
            if isinstance(stmt, Invoke) and stmt.result is not None \
                    and simple_name(stmt.target) in status_names:
                status_aliases.update(aliases_of(mdef, stmt.result.name))
        if not status_aliases:
            continue
        guards = _exit_guards(corpus, m_ref, mdef, flat,
                              frozenset(status_aliases), bound,
                              include_bool_calls=False)
        evidence.extend(g.locus for g in guards)
    return evidence


def infer_identity_kind(name: str) -> str:
    tokens = tokenize_identifier(name)
    for kind in ("uid", "pid", "gid", "tid", "ppid"):
        if kind in tokens:
            return kind
    if "package" in tokens:
        return "packageName"
    if "handle" in tokens:
        return "userHandle"
    if "user" in tokens and "id" in tokens:
        return "uid"
    if "user" in tokens:
        return "userHandle"
    return "uid"


def detect_identity_passing(corpus: CorpusIR, chain: CallChain, arity: int,
                            config: SeedConfig,
                            mined: MinedVocabulary | None = None
                            ) -> set[tuple[str, int]]:
    """(identity kind, IPC position) for arguments whose backward trace
    originates at an identity-access method."""
    kind_map = dict(config.identity_kind_map)
    if mined is not None:
        for name in mined.identity_access_mined:
            kind_map.setdefault(name, infer_identity_kind(name))
    out: set[tuple[str, int]] = set()
    for p in range(arity):
        try:
            _, origin = chain_argument_segments(corpus, chain, p)
        except UnboundArgument:
            continue
        if origin.kind != "call":
            continue
        name = simple_name(origin.detail)
        if name in kind_map:
            out.add((kind_map[name], p))
    return out


def _ipc_of_target(corpus: CorpusIR, registry, target: str) -> str | None:
    if target in registry.proxy_methods:
        return target
    reverse = registry.ipc_of_proxy()
    return reverse.get(target)


def detect_env_check(corpus: CorpusIR, chain: CallChain,
                     registry, config: SeedConfig) -> dict[str, list[str]]:
    """Boolean IPC result gating a second IPC call on the same interface.

    Keyed by the gated IPC method reference: the mechanism belongs to the
    pair whose IPC method is invoked under the gate.
    """
    fires: dict[str, list[str]] = {}
    for pos in range(len(chain.methods) - 1):
        m_ref = chain.methods[pos]
        cls_name = m_ref.split("(", 1)[0].rsplit(".", 1)[0]
        if cls_name not in corpus.classes:
            continue
        _, mdef = corpus.method(m_ref)
        flat = flatten_statements(mdef.body)
        gate_results: dict[str, str] = {}  # alias location -> gating ipc ref
        for fs in flat:
            stmt = fs.stmt
            if not isinstance(stmt, Invoke) or stmt.result is None:
                continue
            ipc = _ipc_of_target(corpus, registry, stmt.target)
            if ipc is None or not _returns_boolean(corpus, ipc):
                continue
            for loc in aliases_of(mdef, stmt.result.name):
                gate_results[loc] = ipc
        if not gate_results:
            continue
        for fs in flat:
            if not isinstance(fs.stmt, If):
                continue
            gating = {gate_results[loc] for loc in _cond_reads(fs.stmt)
                      if loc in gate_results}
            if not gating:
                continue
            for branch in ("then", "else"):
                key = (fs.index, branch)
                for inner in flat:
                    if key not in inner.path or not isinstance(inner.stmt, Invoke):
                        continue
                    gated = _ipc_of_target(corpus, registry, inner.stmt.target)
                    if gated is None or gated in gating:
                        continue
                    gate_itf = {split_ref(g)[0] for g in gating}
                    if split_ref(gated)[0] not in gate_itf:
                        continue
                    fires.setdefault(gated, []).append(
                        guard_locus(m_ref, fs.index))
    return fires


def detect_dup_constraint(corpus: CorpusIR, chain: CallChain,
                          config: SeedConfig) -> list[str]:
    """Counter-threshold or listener-list gating of the IPC call."""
    evidence: list[str] = []
    mutators = config.mutator_names
    for pos in range(len(chain.methods) - 1):
        found = _forwarding_bound(corpus, chain, pos)
        if found is None:
            continue
        m_ref, mdef, flat, bound = found
        param_aliases: set[str] = set()
        for name, _ in mdef.params:
            param_aliases.update(aliases_of(mdef, name))

        # variant B precondition: a parameter added to a field-backed list
        listener_fields: set[str] = set()
        size_results: dict[str, str] = {}  # alias loc -> queried field
        for fs in flat:
            stmt = fs.stmt
            if not isinstance(stmt, Invoke):
                continue
            recv = stmt.receiver
            if not isinstance(recv, FieldPath):
                continue
            arg_locs = set()
            for a in stmt.args:
                arg_locs.update(_operand_reads(a))
            if simple_name(stmt.target) in mutators and arg_locs & param_aliases:
                listener_fields.add(recv.path)
            if simple_name(stmt.target) in _SIZE_QUERY_NAMES \
                    and stmt.result is not None:
                for loc in aliases_of(mdef, stmt.result.name):
                    size_results[loc] = recv.path

        def gates_bound(fs: FlatStmt) -> bool:
            # IPC inside a branch of the If, or exit-branch form before it
            for branch in ("then", "else"):
                if (fs.index, branch) in bound.path:
                    return True
            if fs.index >= bound.index:
                return False
            for branch in ("then", "else"):
                has_throw, has_return = _branch_exits(flat, fs.index, branch)
                if (has_throw or has_return) \
                        and (fs.index, branch) not in bound.path:
                    return True
            return False

        for fs in flat:
            if not isinstance(fs.stmt, If):
                continue
            left, right = fs.stmt.cond.left, fs.stmt.cond.right
            operands = (left, right)
            # variant A: field-backed counter vs integral constant
            has_field = any(isinstance(o, FieldPath) for o in operands)
            has_int = any(isinstance(o, Const)
                          and isinstance(o.value, int)
                          and not isinstance(o.value, bool)
                          for o in operands)
            if has_field and has_int and gates_bound(fs):
                evidence.append(guard_locus(m_ref, fs.index))
                continue
            # variant B: size/emptiness comparison on the listener field
            locs = _cond_reads(fs.stmt)
            queried = {size_results[l] for l in locs if l in size_results}
            queried.update(l for l in locs if l in listener_fields)
            if queried & listener_fields and gates_bound(fs):
                evidence.append(guard_locus(m_ref, fs.index))
    return evidence


def extract_helper_enforcements(corpus: CorpusIR, pair, chains: list[CallChain],
                                registry, config: SeedConfig,
                                mined: MinedVocabulary | None = None
                                ) -> EnforcementSet:
    """Union of the five helper-side mechanisms over every chain of the pair."""
    es = EnforcementSet(side="helper")
    _, ipc_def = corpus.method(pair.ipc_signature)
    arity = len(ipc_def.params)
    for chain in chains:
        pv = detect_param_validation(corpus, chain, arity)
        es.validated_params |= pv.validated
        es.throw_guarded_params |= pv.throw_guarded
        for p, loci in sorted(pv.evidence.items()):
            for locus in loci:
                es.add_mechanism("paramValidation", locus)
        for locus in detect_caller_status(corpus, chain, config):
            es.add_mechanism("callerStatus", locus)
        ids = detect_identity_passing(corpus, chain, arity, config, mined)
        es.identities_passed |= ids
        if ids:
            es.add_mechanism("identityPassing", chain.methods[0])
        env = detect_env_check(corpus, chain, registry, config)
        for locus in env.get(pair.ipc_signature, []):
            es.add_mechanism("envCheck", locus)
        for locus in detect_dup_constraint(corpus, chain, config):
            es.add_mechanism("dupConstraint", locus)
    return es


# ---------------------------------------------------------------------------
# Service side

def _enforce_names(config: SeedConfig, mined: MinedVocabulary | None) -> frozenset[str]:
    names = set(config.identity_enforce)
    if mined is not None:
        names |= mined.identity_enforce_mined
    return frozenset(names)


def _is_permission_check(name: str, enforce_names: frozenset[str]) -> bool:
    tokens = tokenize_identifier(name)
    return "permission" in tokens and bool(tokens & {"check", "enforce"})


def _service_param_validated(corpus: CorpusIR, m_ref: str, pos: int,
                             enforce_names: frozenset[str],
                             depth: int, visited: set[tuple[str, int]],
                             es: EnforcementSet, top_pos: int) -> bool:
    """Whether parameter pos of m_ref is validated, looking through sanity
    check callees up to the depth bound."""
    key = (m_ref, pos)
    if key in visited or depth < 0:
        return False
    visited.add(key)
    _, mdef = corpus.method(m_ref)
    if pos >= len(mdef.params):
        return False
    pname = mdef.params[pos][0]
    aliases = aliases_of(mdef, pname)
    flat = flatten_statements(mdef.body)
    validated = False
    for g in _exit_guards(corpus, m_ref, mdef, flat, aliases, None):
        es.add_mechanism("paramValidation", g.locus)
        validated = True
    for fs in flat:
        stmt = fs.stmt
        if not isinstance(stmt, Invoke):
            continue
        consumed_positions = [j for j, a in enumerate(stmt.args)
                              if location(a) in aliases]
        if not consumed_positions:
            continue
        if simple_name(stmt.target) in enforce_names:
            es.add_mechanism("identityCheck", "%s@%d" % (m_ref, fs.index))
            es.identity_checked_positions.add(top_pos)
            validated = True
            continue
        for callee in resolve_invoke(corpus, stmt):
            callee_cls = callee.split("(", 1)[0].rsplit(".", 1)[0]
            if callee_cls not in corpus.classes:
                continue
            for j in consumed_positions:
                if _service_param_validated(corpus, callee, j, enforce_names,
                                            depth - 1, visited, es, top_pos):
                    validated = True
    return validated


def detect_service_enforcements(corpus: CorpusIR, service_ref: str,
                                registry, config: SeedConfig,
                                mined: MinedVocabulary | None = None,
                                max_depth: int = DEFAULT_MAX_DEPTH
                                ) -> EnforcementSet:
    es = EnforcementSet(side="service")
    enforce_names = _enforce_names(config, mined)
    _, mdef = corpus.method(service_ref)

    for pos, (pname, _) in enumerate(mdef.params):
        if _service_param_validated(corpus, service_ref, pos, enforce_names,
                                    max_depth, set(), es, pos):
            es.validated_params.add(pos)
        report = escape_analysis(mdef, pname, config)
        if report.escapes:
            es.escape_hazards.append(report)
            es.escape_positions.add(pos)

    # Binder-derived identity checks and permission checks anywhere on the
    # service-side call graph (bounded by the same depth as graph building).
    graph = build_graph(corpus, service_ref, None, max_depth)
    for node in sorted(graph.nodes):
        node_cls = node.split("(", 1)[0].rsplit(".", 1)[0]
        if node_cls not in corpus.classes:
            continue
        _, node_def = corpus.method(node)
        if node_def.is_abstract or node_def.is_native:
            continue
        flat = flatten_statements(node_def.body)
        binder_aliases: set[str] = set()
        for fs in flat:
            stmt = fs.stmt
            if not isinstance(stmt, Invoke):
                continue
            head = stmt.target.split("(", 1)[0]
            if any(head == s or head.endswith(s)
                   for s in config.binder_identity_sources) \
                    and stmt.result is not None:
                binder_aliases.update(aliases_of(node_def, stmt.result.name))
        for fs in flat:
            stmt = fs.stmt
            if not isinstance(stmt, Invoke):
                continue
            name = simple_name(stmt.target)
            arg_locs: set[str] = set()
            for a in stmt.args:
                arg_locs.update(_operand_reads(a))
            if name in enforce_names and arg_locs & binder_aliases:
                es.add_mechanism("identityCheck", "%s@%d" % (node, fs.index))
                es.binder_identity_check = True
            if _is_permission_check(name, enforce_names):
                es.add_mechanism("permissionCheck", "%s@%d" % (node, fs.index))

    # mirrored mechanisms on the service entry itself
    flat = flatten_statements(mdef.body)
    status_names = frozenset(config.status_apis)
    status_aliases: set[str] = set()
    bool_call_aliases: set[str] = set()
    for fs in flat:
        stmt = fs.stmt
        if isinstance(stmt, Invoke) and stmt.result is not None:
            if simple_name(stmt.target) in status_names:
                status_aliases.update(aliases_of(mdef, stmt.result.name))
            if _returns_boolean(corpus, stmt.target):
                bool_call_aliases.update(aliases_of(mdef, stmt.result.name))
    if status_aliases:
        for g in _exit_guards(corpus, service_ref, mdef, flat,
                              frozenset(status_aliases), None,
                              include_bool_calls=False):
            es.add_mechanism("callerStatus", g.locus)
    if bool_call_aliases:
        for g in _exit_guards(corpus, service_ref, mdef, flat,
                              frozenset(bool_call_aliases), None,
                              include_bool_calls=False):
            es.add_mechanism("envCheck", g.locus)
    for fs in flat:
        if not isinstance(fs.stmt, If):
            continue
        operands = (fs.stmt.cond.left, fs.stmt.cond.right)
        has_field = any(isinstance(o, FieldPath) for o in operands)
        has_int = any(isinstance(o, Const) and isinstance(o.value, int)
                      and not isinstance(o.value, bool) for o in operands)
        if has_field and has_int:
            for branch in ("then", "else"):
                has_throw, has_return = _branch_exits(flat, fs.index, branch)
                if has_throw or has_return:
                    es.add_mechanism("dupConstraint",
                                     guard_locus(service_ref, fs.index))
                    break
    return es
