from __future__ import annotations

import pytest

from helperaudit.detectors import EnforcementSet
from helperaudit.inconsistency import (
    Finding, PermissionMap, RestrictionList, apply_permission_filter,
    compare_pair, tally_restrictions,
)
from helperaudit.services import MethodPair


def _pair(ipc="I.m(int)"):
    return MethodPair(helper="H.h(int)", ipc_signature=ipc, service="S.m(int)",
                      helper_class="H")


def _helper(**kw):
    es = EnforcementSet(side="helper")
    for k, v in kw.items():
        setattr(es, k, v)
    return es


def _service(**kw):
    es = EnforcementSet(side="service")
    for k, v in kw.items():
        setattr(es, k, v)
    return es


def test_superset_rule_needs_hazard():
    helper = _helper(validated_params={0, 1})
    # missing positions but no escape and no throw guard: not reportable
    assert compare_pair(helper, _service(validated_params={0})) == []
    # throw-guarded helper check makes it reportable
    helper.throw_guarded_params = {1}
    assert compare_pair(helper, _service(validated_params={0})) == [
        ("illegalParameter", ["1"])]
    # so does a service-side escape of the missing position
    helper.throw_guarded_params = set()
    svc = _service(validated_params={0}, escape_positions={1})
    assert compare_pair(helper, svc) == [("illegalParameter", ["1"])]
    # superset service is always fine
    assert compare_pair(helper, _service(validated_params={0, 1, 2})) == []


def test_fake_identity_coverage_by_position_or_binder():
    helper = _helper(identities_passed={("uid", 0), ("packageName", 1)})
    assert compare_pair(helper, _service()) == [("fakeIdentity", ["0", "1"])]
    partially = _service(identity_checked_positions={0})
    assert compare_pair(helper, partially) == [("fakeIdentity", ["1"])]
    binder = _service(binder_identity_check=True)
    assert compare_pair(helper, binder) == []


def test_fake_status_satisfied_by_identity_check():
    helper = _helper(mechanisms={"callerStatus": ["H.h(int)#if@1"]})
    assert compare_pair(helper, _service()) == [("fakeStatus", ["callerStatus"])]
    assert compare_pair(helper, _service(
        mechanisms={"identityCheck": ["S.m(int)@0"]})) == []
    assert compare_pair(helper, _service(
        mechanisms={"callerStatus": ["S.m(int)#if@0"]})) == []


def test_env_bypass_satisfied_by_permission_check():
    helper = _helper(mechanisms={"envCheck": ["H.h(int)#if@1"]})
    assert compare_pair(helper, _service()) == [("envBypass", ["envCheck"])]
    assert compare_pair(helper, _service(
        mechanisms={"permissionCheck": ["S.m(int)@0"]})) == []


def test_ipc_flood_requires_service_constraint():
    helper = _helper(mechanisms={"dupConstraint": ["H.h(int)#if@0"]})
    assert compare_pair(helper, _service()) == [("ipcFlood", ["dupConstraint"])]
    assert compare_pair(helper, _service(
        mechanisms={"dupConstraint": ["S.m(int)#if@0"]})) == []


def test_permission_map_strongest_level_wins():
    pmap = PermissionMap.from_dict({"I.m(int)": [
        {"permission": "a", "level": "normal"},
        {"permission": "b", "level": "signature"},
    ]})
    assert pmap.level_of("I.m(int)") == "signature"
    assert pmap.level_of("I.other()") is None
    with pytest.raises(ValueError):
        PermissionMap.from_dict({"x()": [{"permission": "a", "level": "huge"}]})


def _finding(ipc="I.m(int)", vuln="fakeStatus"):
    return Finding(pair=_pair(ipc), vuln_class=vuln, missing_on_service=[],
                   helper_evidence=[], service_evidence=[])


def test_permission_filter_suppresses_only_high_levels():
    findings = [_finding("I.a()"), _finding("I.b()"), _finding("I.c()")]
    pmap = PermissionMap.from_dict({
        "I.a()": [{"permission": "p", "level": "dangerous"}],
        "I.b()": [{"permission": "p", "level": "signatureOrSystem"}],
    })
    apply_permission_filter(findings, pmap)
    assert [f.suppressed for f in findings] == [False, True, False]
    assert findings[0].permission_level == "dangerous"
    assert findings[1].suppress_reason
    assert findings[2].permission_level is None


def test_restriction_list_defaults_to_whitelist():
    rlist = RestrictionList.from_dict({"I.a()": "blacklist"})
    assert rlist.category_of("I.a()") == "blacklist"
    assert rlist.category_of("I.unknown()") == "whitelist"
    with pytest.raises(ValueError):
        RestrictionList.from_dict({"I.a()": "redlist"})


def test_tally_skips_suppressed_and_totals():
    findings = [_finding("I.a()"), _finding("I.b()", "ipcFlood"),
                _finding("I.c()")]
    findings[2].suppressed = True
    rlist = RestrictionList.from_dict({"I.a()": "greylist"})
    table = tally_restrictions(findings, rlist)
    assert table["fakeStatus"]["greylist"] == 1
    assert table["ipcFlood"]["whitelist"] == 1
    assert table["total"]["count"] == 2
    assert findings[0].restriction == "greylist"
    assert findings[2].restriction == "whitelist"
