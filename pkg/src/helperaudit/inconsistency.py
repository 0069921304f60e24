"""Enforcement comparison, permission filtering, and restriction tallies.

The core rule: the parameter positions a service validates (S) must be a
superset of what its helper validates (H). Mechanism classes map to the
five vulnerability categories; findings behind signature-level permissions
are retained but suppressed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .detectors import EnforcementSet
from .services import MethodPair

VULN_CLASSES = ("illegalParameter", "fakeIdentity", "fakeStatus",
                "envBypass", "ipcFlood")
PERMISSION_LEVELS = ("normal", "dangerous", "signature", "signatureOrSystem")
HIGH_PERMISSION_LEVELS = frozenset({"signature", "signatureOrSystem"})
RESTRICTION_CATEGORIES = ("whitelist", "greylist", "blacklist")

# severity order for presentation: escape-backed parameter and identity
# findings first
SEVERITY_RANK = {"fakeIdentity": 0, "illegalParameter": 1, "ipcFlood": 2,
                 "fakeStatus": 3, "envBypass": 4}


@dataclass
class Finding:
    pair: MethodPair
    vuln_class: str
    missing_on_service: list[str]
    helper_evidence: list[str]
    service_evidence: list[str]
    permission_level: str | None = None
    restriction: str | None = None
    suppressed: bool = False
    suppress_reason: str | None = None


@dataclass(frozen=True)
class PermissionMap:
    entries: dict[str, tuple[tuple[str, str], ...]]  # ipc ref -> ((name, level), ...)

    @classmethod
    def from_dict(cls, raw: dict) -> "PermissionMap":
        entries = {}
        for ref, perms in raw.items():
            parsed = []
            for p in perms:
                level = p["level"]
                if level not in PERMISSION_LEVELS:
                    raise ValueError("unknown permission level %r" % level)
                parsed.append((p["permission"], level))
            entries[ref] = tuple(parsed)
        return cls(entries)

    def level_of(self, ipc_ref: str) -> str | None:
        perms = self.entries.get(ipc_ref)
        if not perms:
            return None
        # strongest level wins
        order = {lvl: i for i, lvl in enumerate(PERMISSION_LEVELS)}
        return max((lvl for _, lvl in perms), key=order.__getitem__)


@dataclass(frozen=True)
class RestrictionList:
    entries: dict[str, str]

    @classmethod
    def from_dict(cls, raw: dict) -> "RestrictionList":
        for ref, cat in raw.items():
            if cat not in RESTRICTION_CATEGORIES:
                raise ValueError("unknown restriction %r for %s" % (cat, ref))
        return cls(dict(raw))

    def category_of(self, ref: str) -> str:
        # unlisted methods are ordinary whitelist APIs
        return self.entries.get(ref, "whitelist")


def compare_pair(helper_set: EnforcementSet,
                 service_set: EnforcementSet) -> list[tuple[str, list[str]]]:
    """(vuln class, missing items) for every inconsistency; empty when the
    service mirrors the helper's enforcements."""
    results: list[tuple[str, list[str]]] = []

    h = helper_set.validated_params
    s = service_set.validated_params
    if not h.issubset(s):
        missing = sorted(h - s)
        hazardous = any(p in service_set.escape_positions
                        or p in helper_set.throw_guarded_params
                        for p in missing)
        if hazardous:
            results.append(("illegalParameter", [str(p) for p in missing]))

    if helper_set.identities_passed:
        uncovered = sorted({
            pos for _, pos in helper_set.identities_passed
            if pos not in service_set.identity_checked_positions
            and not service_set.binder_identity_check})
        if uncovered:
            results.append(("fakeIdentity", [str(p) for p in uncovered]))

    if helper_set.has("callerStatus") \
            and not (service_set.has("callerStatus")
                     or service_set.has("identityCheck")):
        results.append(("fakeStatus", ["callerStatus"]))

    if helper_set.has("envCheck") \
            and not (service_set.has("envCheck")
                     or service_set.has("permissionCheck")):
        results.append(("envBypass", ["envCheck"]))

    if helper_set.has("dupConstraint") and not service_set.has("dupConstraint"):
        results.append(("ipcFlood", ["dupConstraint"]))

    return results


def apply_permission_filter(findings: list[Finding],
                            pmap: PermissionMap) -> list[Finding]:
    """Mark findings on signature-protected interfaces suppressed; record
    the level for the rest. Unmapped interfaces pass with no level."""
    for f in findings:
        level = pmap.level_of(f.pair.ipc_signature)
        f.permission_level = level
        if level in HIGH_PERMISSION_LEVELS:
            f.suppressed = True
            f.suppress_reason = "protected by %s-level permission" % level
    return findings


def tally_restrictions(findings: list[Finding],
                       rlist: RestrictionList) -> dict[str, dict[str, int]]:
    """Unsuppressed finding counts per (vuln class, restriction category)."""
    table: dict[str, dict[str, int]] = {
        vc: {cat: 0 for cat in RESTRICTION_CATEGORIES} for vc in VULN_CLASSES}
    total = 0
    for f in findings:
        f.restriction = rlist.category_of(f.pair.ipc_signature)
        if f.suppressed:
            continue
        table[f.vuln_class][f.restriction] += 1
        total += 1
    table["total"] = {"count": total}
    return table
