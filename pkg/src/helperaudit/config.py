"""Seed-list configuration: name sets the analyses match against.

The analyzer never hard-codes Android symbol names; everything a detector
matches by name comes from this config so synthetic corpora can rename
freely. The defaults mirror the stock framework vocabulary.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace


class ConfigError(Exception):
    pass


DEFAULT_REGISTRATION_METHODS = (
    "ServiceManager.addService",
    "SystemService.publishBinderService",
)

DEFAULT_STUB_MARKERS = ("IBinder", "IInterface")

DEFAULT_HELPER_PACKAGE_PREFIXES = ("android.",)

# Client-side identity access methods, keyed to the seven identity kinds.
DEFAULT_IDENTITY_KIND_MAP = {
    "getPackageName": "packageName",
    "getBasePackageName": "packageName",
    "getOpPackageName": "packageName",
    "myUid": "uid",
    "getUidForPid": "uid",
    "getUserId": "uid",
    "myPid": "pid",
    "getPids": "pid",
    "getPidsForCommands": "pid",
    "getGidForName": "gid",
    "getProcessGroup": "gid",
    "myTid": "tid",
    "myPpid": "ppid",
    "getParentPid": "ppid",
    "myUserHandle": "userHandle",
}

DEFAULT_IDENTITY_ENFORCE = (
    "checkPackage",
    "checkOperation",
    "checkOp",
    "noteOp",
    "checkPermission",
    "checkCallingPermission",
    "enforcePermission",
    "enforceCallingPermission",
    "enforceCallingOrSelfPermission",
)

DEFAULT_KEYWORDS = (
    "userid", "uid", "pid", "identity", "package",
    "enforce", "permission", "check", "user",
)

DEFAULT_CLASSIFY_ACCESS_TOKENS = (
    "get", "my", "calling",
    "uid", "pid", "gid", "tid", "ppid",
    "user", "userid", "package", "identity", "handle",
)

DEFAULT_CLASSIFY_ENFORCE_TOKENS = ("check", "enforce", "verify")

DEFAULT_STATUS_APIS = ("isResumed", "isForeground", "isInForeground")

DEFAULT_BINDER_IDENTITY_SOURCES = ("Binder.getCallingUid", "Binder.getCallingPid")

# Exception types the IPC layer forwards to the caller instead of crashing.
DEFAULT_HANDLED_EXCEPTIONS = (
    "BadParcelableException",
    "IllegalArgumentException",
    "IllegalStateException",
    "NullPointerException",
    "SecurityException",
    "NetworkOnMainThreadException",
)

DEFAULT_COLLECTION_MUTATORS = (".add", ".put", ".offer")


@dataclass(frozen=True)
class SeedConfig:
    registration_methods: tuple[str, ...] = DEFAULT_REGISTRATION_METHODS
    stub_markers: tuple[str, ...] = DEFAULT_STUB_MARKERS
    helper_package_prefixes: tuple[str, ...] = DEFAULT_HELPER_PACKAGE_PREFIXES
    identity_kind_map: dict = field(default_factory=lambda: dict(DEFAULT_IDENTITY_KIND_MAP))
    identity_enforce: tuple[str, ...] = DEFAULT_IDENTITY_ENFORCE
    keywords: tuple[str, ...] = DEFAULT_KEYWORDS
    classify_access_tokens: tuple[str, ...] = DEFAULT_CLASSIFY_ACCESS_TOKENS
    classify_enforce_tokens: tuple[str, ...] = DEFAULT_CLASSIFY_ENFORCE_TOKENS
    status_apis: tuple[str, ...] = DEFAULT_STATUS_APIS
    binder_identity_sources: tuple[str, ...] = DEFAULT_BINDER_IDENTITY_SOURCES
    handled_exceptions: tuple[str, ...] = DEFAULT_HANDLED_EXCEPTIONS
    collection_mutators: tuple[str, ...] = DEFAULT_COLLECTION_MUTATORS

    @property
    def identity_access(self) -> frozenset[str]:
        return frozenset(self.identity_kind_map)

    @property
    def mutator_names(self) -> frozenset[str]:
        # suffixes like ".add" match on the bare method name
        return frozenset(s.lstrip(".") for s in self.collection_mutators)

    def validate(self) -> None:
        if not self.registration_methods:
            raise ConfigError("registration_methods must be nonempty")
        if not self.stub_markers:
            raise ConfigError("stub_markers must be nonempty")


_FILE_KEYS = {
    "registration_methods": "registration_methods",
    "stub_markers": "stub_markers",
    "helper_package_prefixes": "helper_package_prefixes",
    "identity_enforce": "identity_enforce",
    "keywords": "keywords",
    "classify_access_tokens": "classify_access_tokens",
    "classify_enforce_tokens": "classify_enforce_tokens",
    "status_apis": "status_apis",
    "binder_identity_sources": "binder_identity_sources",
    "handled_exceptions": "handled_exceptions",
    "collection_mutators": "collection_mutators",
}


def load_seed_config(path: str) -> SeedConfig:
    """Load a seed-list JSON file; unspecified sections keep their defaults.

    "identity_access" may be either a list of names (kinds inferred from the
    default map when present, else "uid") or a {name: kind} mapping.
    """
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError("invalid seed file %s: %s" % (path, e)) from None
    if not isinstance(doc, dict):
        raise ConfigError("seed file must be a JSON object")
    cfg = SeedConfig()
    updates: dict = {}
    for file_key, attr in _FILE_KEYS.items():
        if file_key in doc:
            updates[attr] = tuple(doc[file_key])
    if "identity_access" in doc:
        raw = doc["identity_access"]
        if isinstance(raw, dict):
            updates["identity_kind_map"] = dict(raw)
        else:
            updates["identity_kind_map"] = {
                name: DEFAULT_IDENTITY_KIND_MAP.get(name, "uid") for name in raw
            }
    cfg = replace(cfg, **updates)
    cfg.validate()
    return cfg
