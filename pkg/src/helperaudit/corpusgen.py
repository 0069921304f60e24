"""Deterministic synthetic-corpus generator with ground-truth labels.

Every generated corpus is assembled from self-contained service units. A
unit instantiates one of five enforcement patterns either in a vulnerable
form (the helper enforces something the service does not mirror) or as a
consistent twin (the service mirrors it); the generator records exactly
which findings an analyzer must report. Decoy classes, inert methods, and
randomized names are layered on top without changing the labels.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

_SYLLABLES = (
    "dor", "va", "len", "mir", "tof", "bek", "sul", "rin",
    "gax", "pol", "neb", "qua", "zim", "hol", "fet", "wix",
)

_PATTERN_CLASSES = ("envBypass", "fakeIdentity", "fakeStatus",
                    "illegalParameter", "ipcFlood")

_EXTERNALS = ("ServiceManager", "IBinder", "IInterface", "Context",
              "Activity", "Binder", "AppOpsManager", "ArrayList")

_PERMISSION_CHOICES = (None, "normal", "dangerous", "signature",
                       "signatureOrSystem")
_HIGH_LEVELS = frozenset({"signature", "signatureOrSystem"})
_RESTRICTION_CHOICES = (None, "whitelist", "greylist", "blacklist")


@dataclass(frozen=True)
class GenSpec:
    seed: int
    units: int = 10


@dataclass
class GroundTruth:
    findings: list[dict] = field(default_factory=list)
    permissions: dict = field(default_factory=dict)
    restrictions: dict = field(default_factory=dict)


@dataclass
class GeneratedCorpus:
    document: dict
    truth: GroundTruth


# ---------------------------------------------------------------------------
# Document construction shorthands

def _invoke(dispatch: str, target: str, receiver=None, args=(), result=None) -> dict:
    out: dict = {"op": "invoke", "dispatch": dispatch, "target": target}
    if receiver is not None:
        out["receiver"] = receiver
    out["args"] = list(args)
    if result is not None:
        out["result"] = result
    return out


def _assign(lhs, rhs) -> dict:
    return {"op": "assign", "lhs": lhs, "rhs": rhs}


def _binop(left, op, right) -> dict:
    return {"binop": {"left": left, "op": op, "right": right}}


def _if(left, rel, right, then, els=None) -> dict:
    out = {"op": "if", "cond": {"left": left, "rel": rel, "right": right},
           "then": then}
    if els:
        out["else"] = els
    return out


def _throw(exc_type: str) -> dict:
    return {"op": "throw", "type": exc_type}


def _ret(value=None, bare: bool = False) -> dict:
    if bare:
        return {"op": "return"}
    return {"op": "return", "value": value}


def _method(name: str, params, return_type: str, body=None, modifiers=()) -> dict:
    out: dict = {
        "name": name,
        "params": [{"name": n, "type": t} for n, t in params],
        "returnType": return_type,
    }
    if modifiers:
        out["modifiers"] = list(modifiers)
    if body is not None:
        out["body"] = body
    return out


def _class(name: str, package: str, kind: str, methods,
           interfaces=(), superclass=None, enclosing=None) -> dict:
    out: dict = {"name": name, "package": package, "kind": kind}
    if superclass is not None:
        out["superclass"] = superclass
    if interfaces:
        out["interfaces"] = list(interfaces)
    if enclosing is not None:
        out["enclosing"] = enclosing
    out["methods"] = list(methods)
    return out


class _Namer:
    """Deterministic pseudo-name supply; no name is handed out twice."""

    def __init__(self, rng: random.Random):
        self._rng = rng
        self._used: set[str] = set()

    def fresh(self) -> str:
        while True:
            name = "".join(self._rng.choice(_SYLLABLES) for _ in range(2))
            if name not in self._used:
                self._used.add(name)
                return name.capitalize()


# ---------------------------------------------------------------------------
# Service units

@dataclass(frozen=True)
class UnitTruth:
    ipc_ref: str
    helper_ref: str
    vuln_class: str
    vulnerable: bool


def build_unit(base: str, pattern: int, vulnerable: bool) -> tuple[list[dict], UnitTruth]:
    """Classes for one service unit: IPC interface, registered service,
    client proxy, and a helper manager, wired as the chosen pattern."""
    if not 0 <= pattern < len(_PATTERN_CLASSES):
        raise ValueError("pattern must be in 0..%d" % (len(_PATTERN_CLASSES) - 1))
    iface = "com.svc.I%s" % base
    svc = "com.svc.%sService" % base
    proxy = "com.svc.%sProxy" % base
    mgr = "android.app.%sManager" % base
    builder = _PATTERN_BUILDERS[pattern]
    iface_methods, svc_methods, proxy_methods, helper_method, ipc_ref, helper_ref = \
        builder(base, iface, svc, proxy, mgr, vulnerable)

    register = _method("register", [], "void", [
        _invoke("static", "ServiceManager.addService(String,IBinder)",
                args=[{"const": base.lower()}, "this"]),
    ])
    classes = [
        _class(iface, "com.svc", "interface", iface_methods,
               interfaces=("IBinder", "IInterface")),
        _class(svc, "com.svc", "class", [register] + svc_methods,
               interfaces=(iface,)),
        _class(proxy, "com.svc", "class", proxy_methods, interfaces=(iface,)),
        _class(mgr, "android.app", "class", [helper_method]),
    ]
    return classes, UnitTruth(ipc_ref, helper_ref, _PATTERN_CLASSES[pattern],
                              vulnerable)


def _unit_env_bypass(base, iface, svc, proxy, mgr, vulnerable):
    gate_sig = "isEnabled%s()" % base
    ipc_sig = "fetch%s(String)" % base
    helper_sig = "warm%s(String)" % base

    iface_methods = [
        _method("isEnabled%s" % base, [], "boolean", modifiers=("abstract",)),
        _method("fetch%s" % base, [("key", "String")], "String",
                modifiers=("abstract",)),
    ]
    helper = _method("warm%s" % base, [("key", "String")], "String", [
        _invoke("interface", "%s.%s" % (iface, gate_sig),
                receiver="this.mSvc", result="en"),
        _if("en", "eq", True, [
            _invoke("interface", "%s.%s" % (iface, ipc_sig),
                    receiver="this.mSvc", args=["key"], result="r"),
            _ret("r"),
        ]),
        _ret(bare=True),
    ])
    proxy_methods = [
        _method("isEnabled%s" % base, [], "boolean", []),
        _method("fetch%s" % base, [("key", "String")], "String", []),
    ]
    if vulnerable:
        fetch_body = [_ret("this.mData")]
        svc_methods = [
            _method("isEnabled%s" % base, [], "boolean", [_ret("this.mOn")]),
            _method("fetch%s" % base, [("key", "String")], "String", fetch_body),
        ]
    else:
        svc_methods = [
            _method("isEnabled%s" % base, [], "boolean", [_ret("this.mOn")]),
            _method("ready%s" % base, [], "boolean", [_ret("this.mOn")]),
            _method("fetch%s" % base, [("key", "String")], "String", [
                _invoke("virtual", "%s.ready%s()" % (svc, base),
                        receiver="this", result="ok"),
                _if("ok", "eq", False, [_throw("SecurityException")]),
                _ret("this.mData"),
            ]),
        ]
    return (iface_methods, svc_methods, proxy_methods, helper,
            "%s.%s" % (iface, ipc_sig), "%s.%s" % (mgr, helper_sig))


def _unit_fake_identity(base, iface, svc, proxy, mgr, vulnerable):
    ipc_sig = "push%s(String,int)" % base
    helper_sig = "send%s(int)" % base

    iface_methods = [
        _method("push%s" % base, [("pkg", "String"), ("val", "int")], "void",
                modifiers=("abstract",)),
    ]
    helper = _method("send%s" % base, [("val", "int")], "void", [
        _invoke("virtual", "Context.getOpPackageName()",
                receiver="this.mCtx", result="p"),
        _invoke("interface", "%s.%s" % (iface, ipc_sig),
                receiver="this.mSvc", args=["p", "val"]),
    ])
    proxy_methods = [
        _method("push%s" % base, [("pkg", "String"), ("val", "int")], "void", []),
    ]
    if vulnerable:
        push_body = [
            _if("pkg", "eq", {"const": "keyguard"},
                [_assign("this.mFlag", "val")]),
            _assign("this.mVal", "val"),
        ]
    else:
        push_body = [
            _invoke("static", "Binder.getCallingUid()", result="u"),
            _invoke("virtual", "AppOpsManager.checkPackage(int,String)",
                    receiver="this.mAppOps", args=["u", "pkg"]),
            _assign("this.mVal", "val"),
        ]
    svc_methods = [
        _method("push%s" % base, [("pkg", "String"), ("val", "int")], "void",
                push_body),
    ]
    return (iface_methods, svc_methods, proxy_methods, helper,
            "%s.%s" % (iface, ipc_sig), "%s.%s" % (mgr, helper_sig))


def _unit_fake_status(base, iface, svc, proxy, mgr, vulnerable):
    ipc_sig = "focus%s(int)" % base
    helper_sig = "grab%s(int)" % base

    iface_methods = [
        _method("focus%s" % base, [("id", "int")], "void",
                modifiers=("abstract",)),
    ]
    helper = _method("grab%s" % base, [("id", "int")], "void", [
        _invoke("virtual", "Activity.isResumed()",
                receiver="this.mAct", result="s"),
        _if("s", "eq", False, [_throw("IllegalStateException")]),
        _invoke("interface", "%s.%s" % (iface, ipc_sig),
                receiver="this.mSvc", args=["id"]),
    ])
    proxy_methods = [_method("focus%s" % base, [("id", "int")], "void", [])]
    if vulnerable:
        focus_body = [_assign("this.mFocus", "id")]
    else:
        focus_body = [
            _invoke("static", "Binder.getCallingUid()", result="u"),
            _invoke("virtual", "AppOpsManager.checkOp(int)",
                    receiver="this.mAppOps", args=["u"]),
            _assign("this.mFocus", "id"),
        ]
    svc_methods = [_method("focus%s" % base, [("id", "int")], "void", focus_body)]
    return (iface_methods, svc_methods, proxy_methods, helper,
            "%s.%s" % (iface, ipc_sig), "%s.%s" % (mgr, helper_sig))


def _unit_illegal_parameter(base, iface, svc, proxy, mgr, vulnerable):
    ipc_sig = "store%s(String)" % base
    helper_sig = "keep%s(String)" % base

    iface_methods = [
        _method("store%s" % base, [("name", "String")], "void",
                modifiers=("abstract",)),
    ]
    helper = _method("keep%s" % base, [("name", "String")], "void", [
        _if("name", "eq", None, [_throw("IllegalArgumentException")]),
        _invoke("interface", "%s.%s" % (iface, ipc_sig),
                receiver="this.mSvc", args=["name"]),
    ])
    proxy_methods = [_method("store%s" % base, [("name", "String")], "void", [])]
    add = _invoke("virtual", "ArrayList.add(String)",
                  receiver="this.mNames", args=["name"])
    if vulnerable:
        store_body = [add]
    else:
        store_body = [
            _if("name", "eq", None, [_throw("IllegalArgumentException")]),
            add,
        ]
    svc_methods = [_method("store%s" % base, [("name", "String")], "void",
                           store_body)]
    return (iface_methods, svc_methods, proxy_methods, helper,
            "%s.%s" % (iface, ipc_sig), "%s.%s" % (mgr, helper_sig))


def _unit_ipc_flood(base, iface, svc, proxy, mgr, vulnerable):
    ipc_sig = "poke%s()" % base
    helper_sig = "nudge%s()" % base

    iface_methods = [
        _method("poke%s" % base, [], "void", modifiers=("abstract",)),
    ]
    helper = _method("nudge%s" % base, [], "void", [
        _if("this.mCount", "ge", 4, [_ret(bare=True)]),
        _assign("this.mCount", _binop("this.mCount", "+", 1)),
        _invoke("interface", "%s.%s" % (iface, ipc_sig), receiver="this.mSvc"),
    ])
    proxy_methods = [_method("poke%s" % base, [], "void", [])]
    bump = _assign("this.mHits", _binop("this.mHits", "+", 1))
    if vulnerable:
        poke_body = [bump]
    else:
        poke_body = [
            _if("this.mHits", "ge", 8, [_throw("IllegalStateException")]),
            bump,
        ]
    svc_methods = [_method("poke%s" % base, [], "void", poke_body)]
    return (iface_methods, svc_methods, proxy_methods, helper,
            "%s.%s" % (iface, ipc_sig), "%s.%s" % (mgr, helper_sig))


_PATTERN_BUILDERS = (
    _unit_env_bypass,
    _unit_fake_identity,
    _unit_fake_status,
    _unit_illegal_parameter,
    _unit_ipc_flood,
)


# ---------------------------------------------------------------------------
# Noise

def _decoy_method(name: str) -> dict:
    """An inert method: local arithmetic and a non-exiting conditional that
    no detector should interpret as enforcement."""
    return _method(name, [("n", "int")], "int", [
        _assign("t", _binop("n", "*", 2)),
        _if("t", "gt", 10, [_assign("t", _binop("t", "-", 1))]),
        _ret("t"),
    ])


def _decoy_class(base: str) -> dict:
    return _class("com.misc.%sUtil" % base, "com.misc", "class",
                  [_decoy_method("shape%s" % base)])


def _noise_manager(base: str) -> dict:
    """An android-namespace class with no proxy reach; it must never be
    classified as a helper."""
    return _class("android.util.%sTool" % base, "android.util", "class", [
        _method("spin%s" % base, [], "void", [
            _invoke("virtual", "Context.getOpPackageName()",
                    receiver="this.mCtx", result="p"),
            _assign("this.mTag", "p"),
        ]),
    ])


# ---------------------------------------------------------------------------
# Generation

def generate(spec: GenSpec) -> GeneratedCorpus:
    """Build a labeled corpus document; identical specs yield identical
    documents and labels."""
    if spec.units < 1:
        raise ValueError("units must be >= 1")
    rng = random.Random(spec.seed)
    namer = _Namer(rng)
    classes: list[dict] = []
    truth = GroundTruth()

    for i in range(spec.units):
        base = namer.fresh()
        pattern = i % len(_PATTERN_CLASSES)
        vulnerable = rng.random() < 0.5
        unit_classes, unit = build_unit(base, pattern, vulnerable)

        # attach an inert extra method to the manager class sometimes
        if rng.random() < 0.5:
            unit_classes[-1]["methods"].append(_decoy_method("idle%s" % base))
        classes.extend(unit_classes)

        level = rng.choice(_PERMISSION_CHOICES)
        if level is not None:
            truth.permissions[unit.ipc_ref] = [
                {"permission": "android.permission.%s" % base.upper(),
                 "level": level}]
        category = rng.choice(_RESTRICTION_CHOICES)
        if category is not None:
            truth.restrictions[unit.ipc_ref] = category

        if unit.vulnerable:
            truth.findings.append({
                "helper": unit.helper_ref,
                "ipcSignature": unit.ipc_ref,
                "vulnClass": unit.vuln_class,
                "suppressed": level in _HIGH_LEVELS,
            })

        if rng.random() < 0.4:
            classes.append(_decoy_class(namer.fresh()))
        if rng.random() < 0.3:
            classes.append(_noise_manager(namer.fresh()))

    document = {
        "version": 1,
        "externals": list(_EXTERNALS),
        "classes": classes,
    }
    return GeneratedCorpus(document=document, truth=truth)


# ---------------------------------------------------------------------------
# Fixed fixtures for the five patterns

_FIXTURE_BASES = ("Alpha", "Bravo", "Clove", "Delta", "Ember")


def fixture_patterns() -> list[dict]:
    """Five canonical pattern fixtures, each with a vulnerable document and
    a consistent twin sharing the same helper."""
    out = []
    for pattern, base in enumerate(_FIXTURE_BASES):
        vuln_classes, unit = build_unit(base, pattern, True)
        twin_classes, _ = build_unit(base, pattern, False)
        out.append({
            "vulnClass": unit.vuln_class,
            "ipcRef": unit.ipc_ref,
            "helperRef": unit.helper_ref,
            "vulnerable": {"version": 1, "externals": list(_EXTERNALS),
                           "classes": vuln_classes},
            "twin": {"version": 1, "externals": list(_EXTERNALS),
                     "classes": twin_classes},
        })
    return out
