"""Intermediate representation of a framework corpus.

A corpus is a set of classes with three-address-style method bodies plus a
class hierarchy. Corpora are parsed from a strict JSON document format and
are immutable after parsing; all analyses share one CorpusIR instance.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field


class CorpusError(Exception):
    """Base for corpus loading failures."""


class CorpusSyntaxError(CorpusError):
    """Malformed corpus document (bad structure, unknown keys, bad values)."""


class ResolutionError(CorpusError):
    """A superclass/interface/enclosing/invoke-target reference does not
    resolve to a corpus class or a declared external."""


class CycleError(CorpusError):
    """The inheritance relation contains a cycle."""


class UnknownClass(CorpusError):
    pass


class UnknownMethod(CorpusError):
    pass


# ---------------------------------------------------------------------------
# Operands

@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class FieldPath:
    path: str  # e.g. "this.mCount"


@dataclass(frozen=True)
class Const:
    value: object  # int | float | str | bool | None


Operand = Var | FieldPath | Const


@dataclass(frozen=True)
class BinOp:
    left: Operand
    op: str
    right: Operand


# ---------------------------------------------------------------------------
# Statements

DISPATCH_KINDS = ("virtual", "static", "interface", "special")
RELATIONS = ("eq", "ne", "lt", "le", "gt", "ge")


@dataclass(frozen=True)
class Invoke:
    dispatch: str
    target: str  # canonical "Class.name(type1,type2)"
    receiver: Var | FieldPath | None
    args: tuple[Operand, ...]
    result: Var | None


@dataclass(frozen=True)
class Assign:
    lhs: Var | FieldPath
    rhs: Operand | BinOp


@dataclass(frozen=True)
class Comparison:
    left: Operand
    rel: str
    right: Operand


@dataclass(frozen=True)
class If:
    cond: Comparison
    then_block: tuple["Statement", ...]
    else_block: tuple["Statement", ...]


@dataclass(frozen=True)
class Throw:
    exception_type: str


@dataclass(frozen=True)
class Return:
    value: Operand | None


Statement = Invoke | Assign | If | Throw | Return


# ---------------------------------------------------------------------------
# Declarations

@dataclass(frozen=True)
class MethodDef:
    name: str
    params: tuple[tuple[str, str], ...]  # (name, type)
    return_type: str
    body: tuple[Statement, ...]
    modifiers: frozenset[str]

    @property
    def signature(self) -> str:
        return "%s(%s)" % (self.name, ",".join(t for _, t in self.params))

    @property
    def is_abstract(self) -> bool:
        return "abstract" in self.modifiers

    @property
    def is_native(self) -> bool:
        return "native" in self.modifiers


@dataclass(frozen=True)
class ClassDef:
    name: str  # fully qualified
    package: str
    kind: str  # class | interface | abstract
    superclass: str | None
    interfaces: tuple[str, ...]
    enclosing: str | None
    methods: tuple[MethodDef, ...]

    def method_map(self) -> dict[str, MethodDef]:
        out: dict[str, MethodDef] = {}
        for m in self.methods:
            out.setdefault(m.signature, m)
        return out


@dataclass
class Diagnostic:
    code: str
    message: str
    class_name: str | None = None
    method: str | None = None
    statement: int | None = None

    def key(self) -> tuple:
        return (self.code, self.class_name or "", self.method or "",
                -1 if self.statement is None else self.statement, self.message)


# ---------------------------------------------------------------------------
# Method reference strings

def method_ref(class_name: str, signature: str) -> str:
    return "%s.%s" % (class_name, signature)


def split_ref(ref: str) -> tuple[str, str]:
    """Split "Class.name(types)" into (class name, signature)."""
    paren = ref.find("(")
    if paren < 0:
        raise ValueError("not a method reference: %r" % ref)
    dot = ref.rfind(".", 0, paren)
    if dot < 0:
        raise ValueError("not a method reference: %r" % ref)
    return ref[:dot], ref[dot + 1:]


def simple_name(ref_or_sig: str) -> str:
    """Bare method name of a reference or signature string."""
    paren = ref_or_sig.find("(")
    head = ref_or_sig[:paren] if paren >= 0 else ref_or_sig
    return head.rsplit(".", 1)[-1]


# ---------------------------------------------------------------------------
# Corpus

class TypeHierarchy:
    """Reflexive-transitive subtype index over the corpus classes."""

    def __init__(self, classes: dict[str, ClassDef]):
        children: dict[str, set[str]] = {name: set() for name in classes}
        for cls in classes.values():
            if cls.superclass and cls.superclass in classes:
                children[cls.superclass].add(cls.name)
            for itf in cls.interfaces:
                if itf in classes:
                    children[itf].add(cls.name)
        self._children = children
        self._classes = classes
        self.subtype_index: dict[str, frozenset[str]] = {}
        for name in classes:
            seen = {name}
            work = [name]
            while work:
                cur = work.pop()
                for child in children[cur]:
                    if child not in seen:
                        seen.add(child)
                        work.append(child)
            self.subtype_index[name] = frozenset(seen)
        self.implementor_index: dict[str, frozenset[str]] = {
            name: frozenset(s for s in self.subtype_index[name]
                            if classes[s].kind != "interface")
            for name, cls in classes.items() if cls.kind == "interface"
        }

    def subtypes_of(self, name: str) -> frozenset[str]:
        if name not in self.subtype_index:
            raise UnknownClass(name)
        return self.subtype_index[name]


@dataclass
class CorpusIR:
    classes: dict[str, ClassDef]
    externals: frozenset[str]
    hierarchy: TypeHierarchy
    callback_edges: tuple[dict, ...] = ()

    def class_of(self, name: str) -> ClassDef:
        try:
            return self.classes[name]
        except KeyError:
            raise UnknownClass(name) from None

    def is_external(self, class_name: str) -> bool:
        return class_name in self.externals

    def resolve_method(self, class_name: str, signature: str) -> tuple[str, MethodDef] | None:
        """Walk the superclass chain looking for a definition of signature.

        Returns (defining class name, MethodDef) or None.
        """
        cur: str | None = class_name
        while cur is not None and cur in self.classes:
            cls = self.classes[cur]
            m = cls.method_map().get(signature)
            if m is not None:
                return cur, m
            cur = cls.superclass
        return None

    def method(self, ref: str) -> tuple[ClassDef, MethodDef]:
        cls_name, sig = split_ref(ref)
        if cls_name not in self.classes:
            raise UnknownMethod(ref)
        found = self.resolve_method(cls_name, sig)
        if found is None:
            raise UnknownMethod(ref)
        def_cls, mdef = found
        return self.classes[def_cls], mdef

    def top_level_class(self, class_name: str) -> str:
        """Outermost enclosing class of a (possibly nested) class."""
        cur = self.class_of(class_name)
        while cur.enclosing is not None:
            cur = self.class_of(cur.enclosing)
        return cur.name


def subtypes_of(hierarchy: TypeHierarchy, name: str) -> frozenset[str]:
    return hierarchy.subtypes_of(name)


# ---------------------------------------------------------------------------
# Parsing

_OPERAND_CONST_KEYS = {"const"}


def _parse_operand(raw, where: str) -> Operand:
    if raw is None or isinstance(raw, (bool, int, float)):
        return Const(raw)
    if isinstance(raw, str):
        if "." in raw:
            return FieldPath(raw)
        return Var(raw)
    if isinstance(raw, dict):
        if set(raw) != _OPERAND_CONST_KEYS:
            raise CorpusSyntaxError("%s: bad operand keys %s" % (where, sorted(raw)))
        return Const(raw["const"])
    raise CorpusSyntaxError("%s: bad operand %r" % (where, raw))


def _parse_lvalue(raw, where: str) -> Var | FieldPath:
    op = _parse_operand(raw, where)
    if isinstance(op, Const):
        raise CorpusSyntaxError("%s: constant cannot be assigned" % where)
    return op


def _check_keys(raw: dict, allowed: set[str], required: set[str], where: str) -> None:
    extra = set(raw) - allowed
    if extra:
        raise CorpusSyntaxError("%s: unknown keys %s" % (where, sorted(extra)))
    missing = required - set(raw)
    if missing:
        raise CorpusSyntaxError("%s: missing keys %s" % (where, sorted(missing)))


def _parse_rhs(raw, where: str) -> Operand | BinOp:
    if isinstance(raw, dict) and "binop" in raw:
        _check_keys(raw, {"binop"}, {"binop"}, where)
        b = raw["binop"]
        _check_keys(b, {"left", "op", "right"}, {"left", "op", "right"}, where)
        return BinOp(_parse_operand(b["left"], where), b["op"],
                     _parse_operand(b["right"], where))
    return _parse_operand(raw, where)


def _parse_statement(raw, where: str) -> Statement:
    if not isinstance(raw, dict):
        raise CorpusSyntaxError("%s: statement must be an object" % where)
    op = raw.get("op")
    if op == "invoke":
        _check_keys(raw, {"op", "dispatch", "target", "receiver", "args", "result"},
                    {"op", "dispatch", "target"}, where)
        if raw["dispatch"] not in DISPATCH_KINDS:
            raise CorpusSyntaxError("%s: bad dispatch %r" % (where, raw["dispatch"]))
        recv = raw.get("receiver")
        receiver = None if recv is None else _parse_lvalue(recv, where)
        args = tuple(_parse_operand(a, where) for a in raw.get("args", []))
        res = raw.get("result")
        result = None if res is None else Var(res)
        target = raw["target"]
        try:
            split_ref(target)
        except ValueError:
            raise CorpusSyntaxError("%s: bad target %r" % (where, target)) from None
        return Invoke(raw["dispatch"], target, receiver, args, result)
    if op == "assign":
        _check_keys(raw, {"op", "lhs", "rhs"}, {"op", "lhs", "rhs"}, where)
        return Assign(_parse_lvalue(raw["lhs"], where), _parse_rhs(raw["rhs"], where))
    if op == "if":
        _check_keys(raw, {"op", "cond", "then", "else"}, {"op", "cond", "then"}, where)
        cond = raw["cond"]
        _check_keys(cond, {"left", "rel", "right"}, {"left", "rel", "right"}, where)
        if cond["rel"] not in RELATIONS:
            raise CorpusSyntaxError("%s: bad relation %r" % (where, cond["rel"]))
        comparison = Comparison(_parse_operand(cond["left"], where), cond["rel"],
                                _parse_operand(cond["right"], where))
        then_block = tuple(_parse_statement(s, where) for s in raw["then"])
        else_block = tuple(_parse_statement(s, where) for s in raw.get("else", []))
        return If(comparison, then_block, else_block)
    if op == "throw":
        _check_keys(raw, {"op", "type"}, {"op", "type"}, where)
        return Throw(raw["type"])
    if op == "return":
        _check_keys(raw, {"op", "value"}, {"op"}, where)
        val = raw.get("value")
        value = None if val is None else _parse_operand(val, where)
        return Return(value)
    raise CorpusSyntaxError("%s: unknown statement op %r" % (where, op))


def _parse_method(raw, where: str) -> MethodDef:
    _check_keys(raw, {"name", "params", "returnType", "body", "modifiers"},
                {"name", "returnType"}, where)
    params = []
    for p in raw.get("params", []):
        _check_keys(p, {"name", "type"}, {"name", "type"}, where)
        params.append((p["name"], p["type"]))
    modifiers = frozenset(raw.get("modifiers", []))
    bad = modifiers - {"static", "abstract", "native"}
    if bad:
        raise CorpusSyntaxError("%s: unknown modifiers %s" % (where, sorted(bad)))
    body = tuple(_parse_statement(s, "%s.%s" % (where, raw["name"]))
                 for s in raw.get("body", []))
    return MethodDef(raw["name"], tuple(params), raw["returnType"], body, modifiers)


def _parse_class(raw) -> ClassDef:
    if not isinstance(raw, dict):
        raise CorpusSyntaxError("class entry must be an object")
    name = raw.get("name", "<unnamed>")
    _check_keys(raw, {"name", "package", "kind", "superclass", "interfaces",
                      "enclosing", "methods"},
                {"name", "package", "kind"}, "class %s" % name)
    if raw["kind"] not in ("class", "interface", "abstract"):
        raise CorpusSyntaxError("class %s: bad kind %r" % (name, raw["kind"]))
    methods = tuple(_parse_method(m, name) for m in raw.get("methods", []))
    return ClassDef(
        name=name,
        package=raw["package"],
        kind=raw["kind"],
        superclass=raw.get("superclass"),
        interfaces=tuple(raw.get("interfaces", [])),
        enclosing=raw.get("enclosing"),
        methods=methods,
    )


@dataclass(frozen=True)
class FlatStmt:
    """One statement with its depth-first index and enclosing-branch path.

    path is a tuple of (if_index, branch) pairs, outermost first, where
    branch is "then" or "else".
    """
    index: int
    stmt: "Statement"
    path: tuple[tuple[int, str], ...]


def flatten_statements(body: tuple[Statement, ...]) -> list[FlatStmt]:
    """Depth-first statement numbering: an If precedes its blocks."""
    out: list[FlatStmt] = []

    def walk(block, path):
        for stmt in block:
            idx = len(out)
            out.append(FlatStmt(idx, stmt, path))
            if isinstance(stmt, If):
                walk(stmt.then_block, path + ((idx, "then"),))
                walk(stmt.else_block, path + ((idx, "else"),))

    walk(body, ())
    return out


def iter_invokes(body: tuple[Statement, ...]):
    """Depth-first walk yielding every Invoke in a body."""
    for stmt in body:
        if isinstance(stmt, Invoke):
            yield stmt
        elif isinstance(stmt, If):
            yield from iter_invokes(stmt.then_block)
            yield from iter_invokes(stmt.else_block)


def _check_resolution(corpus_classes: dict[str, ClassDef], externals: frozenset[str]) -> None:
    def known(name: str) -> bool:
        return name in corpus_classes or name in externals

    for cls in corpus_classes.values():
        for ref_name, what in ((cls.superclass, "superclass"),
                               (cls.enclosing, "enclosing")):
            if ref_name is not None and not known(ref_name):
                raise ResolutionError("class %s: dangling %s %s" % (cls.name, what, ref_name))
        for itf in cls.interfaces:
            if not known(itf):
                raise ResolutionError("class %s: dangling interface %s" % (cls.name, itf))
        for m in cls.methods:
            for inv in iter_invokes(m.body):
                target_cls, _ = split_ref(inv.target)
                if not known(target_cls):
                    raise ResolutionError(
                        "%s.%s: dangling invoke target class %s"
                        % (cls.name, m.signature, target_cls))


def _check_cycles(classes: dict[str, ClassDef]) -> None:
    # superclass + interface edges; DFS with colors
    WHITE, GREY, BLACK = 0, 1, 2
    color = {name: WHITE for name in classes}

    def edges(name: str):
        cls = classes[name]
        if cls.superclass in classes:
            yield cls.superclass
        for itf in cls.interfaces:
            if itf in classes:
                yield itf

    def visit(name: str, path: list[str]) -> None:
        color[name] = GREY
        path.append(name)
        for nxt in edges(name):
            if color[nxt] == GREY:
                raise CycleError("inheritance cycle: %s -> %s" % (" -> ".join(path), nxt))
            if color[nxt] == WHITE:
                visit(nxt, path)
        path.pop()
        color[name] = BLACK

    for name in classes:
        if color[name] == WHITE:
            visit(name, [])


def parse_corpus(text: str) -> CorpusIR:
    """Parse a corpus document (strict JSON) into an immutable CorpusIR."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise CorpusSyntaxError("invalid JSON: %s" % e) from None
    if not isinstance(doc, dict):
        raise CorpusSyntaxError("top level must be an object")
    _check_keys(doc, {"version", "externals", "classes", "callback_edges"},
                {"version", "classes"}, "document")
    if doc["version"] != 1:
        raise CorpusSyntaxError("unsupported version %r" % doc["version"])
    externals = frozenset(doc.get("externals", []))
    classes: dict[str, ClassDef] = {}
    for raw in doc["classes"]:
        cls = _parse_class(raw)
        if cls.name in classes:
            raise CorpusSyntaxError("duplicate class name %s" % cls.name)
        classes[cls.name] = cls
    _check_resolution(classes, externals)
    _check_cycles(classes)
    callback_edges = []
    for raw in doc.get("callback_edges", []):
        _check_keys(raw, {"registration", "interface", "callback"},
                    {"registration", "interface", "callback"}, "callback edge")
        callback_edges.append(dict(raw))
    return CorpusIR(
        classes=classes,
        externals=externals,
        hierarchy=TypeHierarchy(classes),
        callback_edges=tuple(callback_edges),
    )


# ---------------------------------------------------------------------------
# Serialization (canonical; classes sorted by name)

def _operand_json(op: Operand):
    if isinstance(op, Var):
        return op.name
    if isinstance(op, FieldPath):
        return op.path
    if isinstance(op.value, str):
        return {"const": op.value}
    return op.value


def _statement_json(stmt: Statement) -> dict:
    if isinstance(stmt, Invoke):
        out = {"op": "invoke", "dispatch": stmt.dispatch, "target": stmt.target}
        if stmt.receiver is not None:
            out["receiver"] = _operand_json(stmt.receiver)
        out["args"] = [_operand_json(a) for a in stmt.args]
        if stmt.result is not None:
            out["result"] = stmt.result.name
        return out
    if isinstance(stmt, Assign):
        if isinstance(stmt.rhs, BinOp):
            rhs = {"binop": {"left": _operand_json(stmt.rhs.left), "op": stmt.rhs.op,
                             "right": _operand_json(stmt.rhs.right)}}
        else:
            rhs = _operand_json(stmt.rhs)
        return {"op": "assign", "lhs": _operand_json(stmt.lhs), "rhs": rhs}
    if isinstance(stmt, If):
        out = {"op": "if",
               "cond": {"left": _operand_json(stmt.cond.left), "rel": stmt.cond.rel,
                        "right": _operand_json(stmt.cond.right)},
               "then": [_statement_json(s) for s in stmt.then_block]}
        if stmt.else_block:
            out["else"] = [_statement_json(s) for s in stmt.else_block]
        return out
    if isinstance(stmt, Throw):
        return {"op": "throw", "type": stmt.exception_type}
    if isinstance(stmt, Return):
        out = {"op": "return"}
        if stmt.value is not None:
            out["value"] = _operand_json(stmt.value)
        return out
    raise TypeError(stmt)


def serialize_corpus(corpus: CorpusIR) -> str:
    doc = {
        "version": 1,
        "externals": sorted(corpus.externals),
        "classes": [],
        "callback_edges": [dict(e) for e in corpus.callback_edges],
    }
    for name in sorted(corpus.classes):
        cls = corpus.classes[name]
        entry = {
            "name": cls.name,
            "package": cls.package,
            "kind": cls.kind,
        }
        if cls.superclass is not None:
            entry["superclass"] = cls.superclass
        if cls.interfaces:
            entry["interfaces"] = list(cls.interfaces)
        if cls.enclosing is not None:
            entry["enclosing"] = cls.enclosing
        entry["methods"] = [
            {
                "name": m.name,
                "params": [{"name": n, "type": t} for n, t in m.params],
                "returnType": m.return_type,
                "modifiers": sorted(m.modifiers),
                "body": [_statement_json(s) for s in m.body],
            }
            for m in cls.methods
        ]
        doc["classes"].append(entry)
    if not doc["callback_edges"]:
        del doc["callback_edges"]
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


# ---------------------------------------------------------------------------
# Validation

def _reads_of_operand(op: Operand | BinOp | None) -> list[str]:
    if op is None:
        return []
    if isinstance(op, Var):
        return [op.name]
    if isinstance(op, BinOp):
        return _reads_of_operand(op.left) + _reads_of_operand(op.right)
    return []  # constants and field paths are always readable


def _check_definite_assignment(cls: ClassDef, m: MethodDef,
                               diags: list[Diagnostic]) -> None:
    params = {n for n, _ in m.params}

    def walk(block: tuple[Statement, ...], assigned: set[str],
             counter: list[int]) -> set[str]:
        for stmt in block:
            idx = counter[0]
            counter[0] += 1

            def check(names: list[str]) -> None:
                for v in names:
                    if v not in params and v not in assigned and v != "this":
                        diags.append(Diagnostic(
                            "unassigned-read",
                            "variable %s read before assignment" % v,
                            cls.name, m.signature, idx))

            if isinstance(stmt, Invoke):
                reads = []
                if isinstance(stmt.receiver, Var):
                    reads.append(stmt.receiver.name)
                for a in stmt.args:
                    reads.extend(_reads_of_operand(a))
                check(reads)
                if stmt.result is not None:
                    assigned.add(stmt.result.name)
            elif isinstance(stmt, Assign):
                check(_reads_of_operand(stmt.rhs))
                if isinstance(stmt.lhs, Var):
                    assigned.add(stmt.lhs.name)
            elif isinstance(stmt, If):
                check(_reads_of_operand(stmt.cond.left)
                      + _reads_of_operand(stmt.cond.right))
                a1 = walk(stmt.then_block, set(assigned), counter)
                a2 = walk(stmt.else_block, set(assigned), counter)
                assigned |= (a1 & a2)
            elif isinstance(stmt, Return):
                check(_reads_of_operand(stmt.value))
        return assigned

    walk(m.body, set(), [0])


def validate_corpus(corpus: CorpusIR) -> list[Diagnostic]:
    """Structural invariant checks; diagnostics, never exceptions."""
    diags: list[Diagnostic] = []
    for cls in corpus.classes.values():
        if cls.kind == "interface" and cls.superclass is not None:
            diags.append(Diagnostic("interface-superclass",
                                    "interface declares a superclass",
                                    cls.name))
        seen_sigs: set[str] = set()
        for m in cls.methods:
            if m.signature in seen_sigs:
                diags.append(Diagnostic("duplicate-signature",
                                        "duplicate method signature %s" % m.signature,
                                        cls.name, m.signature))
                continue
            seen_sigs.add(m.signature)
            if (m.is_abstract or m.is_native) and m.body:
                diags.append(Diagnostic(
                    "body-on-abstract",
                    "abstract/native method has a non-empty body",
                    cls.name, m.signature))
            _check_definite_assignment(cls, m, diags)
    diags.sort(key=Diagnostic.key)
    return diags
