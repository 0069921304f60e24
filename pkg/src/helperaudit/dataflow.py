"""Def-use indexing, backward argument tracking, and escape analysis.

Aliasing is function-level only: every copy assignment between variables
and field paths merges the two locations into one abstract value. Invoke
results and binop results are fresh values, so flow never passes through
arithmetic or opaque calls.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .callgraph import CallChain
from .config import SeedConfig
from .ir import (
    Assign, BinOp, Const, CorpusIR, FieldPath, FlatStmt, If, Invoke,
    MethodDef, Return, Statement, Throw, Var, flatten_statements, simple_name,
    split_ref,
)


class UnboundArgument(Exception):
    pass


class UnknownParameter(Exception):
    pass


def location(op) -> str | None:
    """Abstract location name of an operand; None for constants."""
    if isinstance(op, Var):
        return op.name
    if isinstance(op, FieldPath):
        return op.path
    return None


# ---------------------------------------------------------------------------
# Def-use

@dataclass
class DefUseIndex:
    defs: dict[str, list[int]]
    uses: dict[str, list[int]]


def _operand_reads(op) -> list[str]:
    if op is None:
        return []
    if isinstance(op, BinOp):
        return _operand_reads(op.left) + _operand_reads(op.right)
    loc = location(op)
    return [loc] if loc is not None else []


def def_use(method: MethodDef) -> DefUseIndex:
    defs: dict[str, list[int]] = {}
    uses: dict[str, list[int]] = {n: [] for n, _ in method.params}
    for fs in flatten_statements(method.body):
        stmt = fs.stmt
        reads: list[str] = []
        writes: list[str] = []
        if isinstance(stmt, Assign):
            reads = _operand_reads(stmt.rhs)
            writes = [location(stmt.lhs)]
        elif isinstance(stmt, Invoke):
            if stmt.receiver is not None:
                reads.extend(_operand_reads(stmt.receiver))
            for a in stmt.args:
                reads.extend(_operand_reads(a))
            if stmt.result is not None:
                writes = [stmt.result.name]
        elif isinstance(stmt, If):
            reads = _operand_reads(stmt.cond.left) + _operand_reads(stmt.cond.right)
        elif isinstance(stmt, Return):
            reads = _operand_reads(stmt.value)
        for r in reads:
            uses.setdefault(r, []).append(fs.index)
        for w in writes:
            if w is not None:
                defs.setdefault(w, []).append(fs.index)
    return DefUseIndex(defs=defs, uses=uses)


# ---------------------------------------------------------------------------
# Function-level aliasing

def alias_classes(method: MethodDef) -> dict[str, frozenset[str]]:
    """Union-find over copy assignments: locations that ever hold the same
    value belong to one class. Invoke/binop results start fresh classes."""
    parent: dict[str, str] = {}

    def find(x: str) -> str:
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a: str, b: str) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    for fs in flatten_statements(method.body):
        stmt = fs.stmt
        if isinstance(stmt, Assign) and not isinstance(stmt.rhs, (BinOp, Const)):
            lhs, rhs = location(stmt.lhs), location(stmt.rhs)
            if lhs is not None and rhs is not None:
                union(lhs, rhs)

    groups: dict[str, set[str]] = {}
    for loc in parent:
        groups.setdefault(find(loc), set()).add(loc)
    return {loc: frozenset(groups[find(loc)]) for loc in parent}


def aliases_of(method: MethodDef, loc: str) -> frozenset[str]:
    return alias_classes(method).get(loc, frozenset({loc}))


# ---------------------------------------------------------------------------
# Backward tracking

@dataclass(frozen=True)
class Origin:
    kind: str  # param | call | literal | field
    method: str | None  # owning method reference (None for literal)
    detail: str  # parameter name, call target, field path, or literal repr
    position: int | None = None  # parameter position for kind=param


@dataclass(frozen=True)
class TraceStep:
    method: str
    statement: int
    fact: str  # copied | compared | passedAsArg | storedToField | returned


@dataclass
class TaintTrace:
    origin: Origin
    steps: list[TraceStep]
    sinks: set[str]


def guard_locus(method_ref: str, index: int) -> str:
    return "%s#if@%d" % (method_ref, index)


def _consume_scan(method_ref: str, flat: list[FlatStmt],
                  aliases: frozenset[str], bound: int) -> tuple[list[TraceStep], set[str]]:
    """Steps and sinks for statements strictly before the forwarding call."""
    steps: list[TraceStep] = []
    sinks: set[str] = set()
    for fs in flat:
        if fs.index >= bound:
            continue
        stmt = fs.stmt
        if isinstance(stmt, Assign):
            rhs_locs = set(_operand_reads(stmt.rhs))
            if rhs_locs & aliases:
                if isinstance(stmt.lhs, FieldPath):
                    steps.append(TraceStep(method_ref, fs.index, "storedToField"))
                    sinks.add(stmt.lhs.path)
                else:
                    steps.append(TraceStep(method_ref, fs.index, "copied"))
        elif isinstance(stmt, Invoke):
            consumed = set()
            if stmt.receiver is not None:
                consumed.update(_operand_reads(stmt.receiver))
            for a in stmt.args:
                consumed.update(_operand_reads(a))
            if consumed & aliases:
                steps.append(TraceStep(method_ref, fs.index, "passedAsArg"))
                sinks.add(stmt.target)
        elif isinstance(stmt, If):
            cond_locs = set(_operand_reads(stmt.cond.left)
                            + _operand_reads(stmt.cond.right))
            if cond_locs & aliases:
                steps.append(TraceStep(method_ref, fs.index, "compared"))
                sinks.add(guard_locus(method_ref, fs.index))
        elif isinstance(stmt, Return):
            if set(_operand_reads(stmt.value)) & aliases:
                steps.append(TraceStep(method_ref, fs.index, "returned"))
    return steps, sinks


def find_call_site(flat: list[FlatStmt], callee_signature: str) -> FlatStmt | None:
    """First invoke whose target signature matches, in depth-first order."""
    for fs in flat:
        if isinstance(fs.stmt, Invoke):
            _, sig = split_ref(fs.stmt.target)
            if sig == callee_signature:
                return fs
    return None


def _origin_in_method(method_ref: str, mdef: MethodDef, flat: list[FlatStmt],
                      aliases: frozenset[str]) -> Origin:
    for pos, (name, _) in enumerate(mdef.params):
        if name in aliases:
            return Origin("param", method_ref, name, pos)
    for fs in flat:
        stmt = fs.stmt
        if isinstance(stmt, Invoke) and stmt.result is not None \
                and stmt.result.name in aliases:
            return Origin("call", method_ref, stmt.target)
    for fs in flat:
        stmt = fs.stmt
        if isinstance(stmt, Assign) and isinstance(stmt.rhs, Const) \
                and location(stmt.lhs) in aliases:
            return Origin("literal", method_ref, repr(stmt.rhs.value))
    for loc in sorted(aliases):
        if "." in loc:
            return Origin("field", method_ref, loc)
    # nothing defines it; treat as an unresolved field-like location
    return Origin("field", method_ref, sorted(aliases)[0])


@dataclass
class ChainSegment:
    """One method of a chain walk: the tracked value's alias set and the
    forwarding call (toward the IPC target) that bounds "before the call"."""
    method: str
    mdef: MethodDef
    flat: list[FlatStmt]
    aliases: frozenset[str]
    call_site: FlatStmt


def chain_argument_segments(corpus: CorpusIR, chain: CallChain,
                            ipc_arg_index: int
                            ) -> tuple[list[ChainSegment], Origin]:
    """Walk an IPC argument caller-ward along the chain.

    Segments run from the IPC-adjacent method toward the entry; the walk
    stops when the value no longer originates at a parameter.
    """
    methods = chain.methods
    if len(methods) < 2:
        raise ValueError("chain must contain at least caller and target")
    segments: list[ChainSegment] = []
    cur = len(methods) - 2
    callee_sig = split_ref(methods[-1])[1]
    arg_pos = ipc_arg_index
    origin: Origin | None = None

    while cur >= 0:
        m_ref = methods[cur]
        _, mdef = corpus.method(m_ref)
        flat = flatten_statements(mdef.body)
        call_fs = find_call_site(flat, callee_sig)
        if call_fs is None:
            raise UnboundArgument("no call site for %s in %s" % (callee_sig, m_ref))
        inv: Invoke = call_fs.stmt
        if arg_pos >= len(inv.args):
            raise UnboundArgument(
                "argument %d out of range at %s" % (arg_pos, m_ref))
        arg = inv.args[arg_pos]
        if isinstance(arg, Const):
            origin = Origin("literal", m_ref, repr(arg.value))
            break
        aliases = aliases_of(mdef, location(arg))
        segments.append(ChainSegment(m_ref, mdef, flat, aliases, call_fs))
        origin = _origin_in_method(m_ref, mdef, flat, aliases)
        if origin.kind == "param" and cur > 0:
            callee_sig = mdef.signature
            arg_pos = origin.position
            cur -= 1
            continue
        break

    assert origin is not None
    return segments, origin


def backward_track(corpus: CorpusIR, chain: CallChain,
                   ipc_arg_index: int) -> TaintTrace:
    """Walk an IPC argument backward along the call chain.

    Records every statement that consumed the value (or an alias) before
    the IPC call, hopping caller-ward whenever the value originates at a
    parameter of the current method.
    """
    segments, origin = chain_argument_segments(corpus, chain, ipc_arg_index)
    all_steps: list[TraceStep] = []
    all_sinks: set[str] = set()
    for seg in reversed(segments):
        steps, sinks = _consume_scan(seg.method, seg.flat, seg.aliases,
                                     seg.call_site.index)
        steps.append(TraceStep(seg.method, seg.call_site.index, "passedAsArg"))
        all_steps.extend(steps)
        all_sinks.update(sinks)
    return TaintTrace(origin=origin, steps=all_steps, sinks=all_sinks)


# ---------------------------------------------------------------------------
# Escape analysis

@dataclass
class EscapeReport:
    parameter: str
    escapes: bool
    escape_sites: list[str]


def escape_analysis(method: MethodDef, parameter: str,
                    config: SeedConfig | None = None,
                    callback_registrations: tuple[str, ...] = ()) -> EscapeReport:
    """True iff the parameter (or an alias) is stored to a field, handed to
    a collection-mutating call, or handed to a callback-registering call."""
    config = config or SeedConfig()
    if parameter not in {n for n, _ in method.params}:
        raise UnknownParameter(parameter)
    aliases = aliases_of(method, parameter)
    mutators = config.mutator_names
    sites: list[str] = []
    for fs in flatten_statements(method.body):
        stmt = fs.stmt
        if isinstance(stmt, Assign) and isinstance(stmt.lhs, FieldPath):
            if set(_operand_reads(stmt.rhs)) & aliases:
                sites.append("%d:%s" % (fs.index, stmt.lhs.path))
        elif isinstance(stmt, Invoke):
            arg_locs = set()
            for a in stmt.args:
                arg_locs.update(_operand_reads(a))
            if not (arg_locs & aliases):
                continue
            name = simple_name(stmt.target)
            is_mutator = name in mutators
            is_registration = any(stmt.target.split("(", 1)[0].endswith(r)
                                  for r in callback_registrations)
            if is_mutator or is_registration:
                sites.append("%d:%s" % (fs.index, stmt.target))
    return EscapeReport(parameter=parameter, escapes=bool(sites),
                        escape_sites=sites)
