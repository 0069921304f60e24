"""End-to-end analysis: pairing, graphs, mining, detection, comparison.

The report is a pure function of its inputs: all collections are sorted
before serialization and the JSON rendering is byte-stable, so repeated
runs (at any parallelism) produce identical files.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .callgraph import (
    CallbackTable, DEFAULT_CHAIN_LIMIT, DEFAULT_MAX_DEPTH, enumerate_chains,
)
from .config import SeedConfig
from .detectors import detect_service_enforcements, extract_helper_enforcements
from .inconsistency import (
    Finding, PermissionMap, RestrictionList, SEVERITY_RANK, apply_permission_filter,
    compare_pair, tally_restrictions,
)
from .ir import CorpusIR, serialize_corpus
from .mining import (
    DEFAULT_MIN_SUPPORT, DEFAULT_SEED_BOOST, MinedVocabulary, SeedVocabulary,
    build_transactions, fp_growth, keyword_filter,
)
from .services import identify_helpers, identify_services, pair_methods


@dataclass
class AnalysisReport:
    corpus_digest: str
    pairs: list[dict]
    vocabulary: dict
    findings: list[Finding]
    tallies: dict
    direct_only: list[str]

    @property
    def unsuppressed(self) -> list[Finding]:
        return [f for f in self.findings if not f.suppressed]

    def to_dict(self) -> dict:
        return {
            "version": 1,
            "corpusDigest": self.corpus_digest,
            "pairs": self.pairs,
            "vocabulary": self.vocabulary,
            "findings": [_finding_dict(f) for f in self.findings],
            "tallies": self.tallies,
            "directOnly": self.direct_only,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_markdown(self) -> str:
        return render_markdown(self.to_dict())

    def summary_line(self) -> str:
        suppressed = sum(1 for f in self.findings if f.suppressed)
        return "pairs=%d findings=%d suppressed=%d" % (
            len(self.pairs), len(self.unsuppressed), suppressed)


def _finding_dict(f: Finding) -> dict:
    return {
        "helper": f.pair.helper,
        "ipcSignature": f.pair.ipc_signature,
        "service": f.pair.service,
        "helperClass": f.pair.helper_class,
        "vulnClass": f.vuln_class,
        "missingOnService": list(f.missing_on_service),
        "evidence": {
            "helper": sorted(f.helper_evidence),
            "service": sorted(f.service_evidence),
        },
        "permissionLevel": f.permission_level,
        "restriction": f.restriction,
        "suppressed": f.suppressed,
        "suppressReason": f.suppress_reason,
    }


def corpus_digest(corpus: CorpusIR) -> str:
    return "sha256:" + hashlib.sha256(
        serialize_corpus(corpus).encode("utf-8")).hexdigest()


def mine_vocabulary(corpus: CorpusIR, pair_chains: dict,
                    config: SeedConfig,
                    min_support: int = DEFAULT_MIN_SUPPORT,
                    seed_boost: int = DEFAULT_SEED_BOOST) -> MinedVocabulary:
    seed_vocab = SeedVocabulary.from_config(config)
    labelled = []
    for (_, ipc), chains in sorted(pair_chains.items()):
        for chain in chains:
            labelled.append((ipc, chain))
    transactions = build_transactions(corpus, labelled)
    candidates = fp_growth(transactions, min_support, seed_vocab.seeds,
                           seed_boost)
    return keyword_filter(candidates, seed_vocab)


def analyze(corpus: CorpusIR,
            config: SeedConfig | None = None,
            pmap: PermissionMap | None = None,
            rlist: RestrictionList | None = None,
            table: CallbackTable | None = None,
            min_support: int = DEFAULT_MIN_SUPPORT,
            seed_boost: int = DEFAULT_SEED_BOOST,
            max_depth: int = DEFAULT_MAX_DEPTH,
            chain_limit: int = DEFAULT_CHAIN_LIMIT,
            parallel: int = 1) -> AnalysisReport:
    config = config or SeedConfig()
    pmap = pmap or PermissionMap({})
    rlist = rlist or RestrictionList({})
    if table is None and corpus.callback_edges:
        table = CallbackTable.from_dicts(corpus.callback_edges)

    registry = identify_services(corpus, config)
    helpers = identify_helpers(corpus, registry, config, table, max_depth)
    pairing = pair_methods(corpus, registry, helpers, config, table, max_depth)

    # chains per (helper entry, ipc signature)
    ipc_of_proxy = registry.ipc_of_proxy()
    pair_chains: dict[tuple[str, str], list] = {}
    for entry, graph in pairing.graphs.items():
        enum = enumerate_chains(graph, chain_limit)
        for chain in enum.chains:
            ipc = ipc_of_proxy[chain.methods[-1]]
            pair_chains.setdefault((entry, ipc), []).append(chain)

    mined = mine_vocabulary(corpus, pair_chains, config, min_support, seed_boost)

    def evaluate(pair):
        chains = pair_chains.get((pair.helper, pair.ipc_signature), [])
        helper_set = extract_helper_enforcements(
            corpus, pair, chains, registry, config, mined)
        service_set = detect_service_enforcements(
            corpus, pair.service, registry, config, mined, max_depth)
        found = []
        for vuln_class, missing in compare_pair(helper_set, service_set):
            found.append(Finding(
                pair=pair,
                vuln_class=vuln_class,
                missing_on_service=missing,
                helper_evidence=sorted(
                    l for loci in helper_set.mechanisms.values() for l in loci),
                service_evidence=sorted(
                    l for loci in service_set.mechanisms.values() for l in loci),
            ))
        return found

    if parallel > 1:
        with ThreadPoolExecutor(max_workers=parallel) as pool:
            per_pair = list(pool.map(evaluate, pairing.pairs))
    else:
        per_pair = [evaluate(p) for p in pairing.pairs]

    findings = [f for found in per_pair for f in found]
    findings.sort(key=lambda f: (f.pair.ipc_signature, f.pair.helper,
                                 f.vuln_class))
    apply_permission_filter(findings, pmap)
    tallies = tally_restrictions(findings, rlist)

    vocab_dict = {
        "identityAccessMined": sorted(mined.identity_access_mined),
        "identityEnforceMined": sorted(mined.identity_enforce_mined),
        "supportCounts": {k: mined.support_counts[k]
                          for k in sorted(mined.support_counts)},
    }
    pair_dicts = [
        {"helper": p.helper, "ipcSignature": p.ipc_signature,
         "service": p.service, "helperClass": p.helper_class,
         "native": p.native_stub}
        for p in pairing.pairs
    ]
    return AnalysisReport(
        corpus_digest=corpus_digest(corpus),
        pairs=pair_dicts,
        vocabulary=vocab_dict,
        findings=findings,
        tallies=tallies,
        direct_only=pairing.direct_only,
    )


def render_markdown(report: dict) -> str:
    """Markdown view derived from the JSON report; no recomputation."""
    lines = ["# Helper/service enforcement audit", ""]
    lines.append("Corpus digest: `%s`" % report["corpusDigest"])
    lines.append("")
    lines.append("## Pairs (%d)" % len(report["pairs"]))
    lines.append("")
    for p in report["pairs"]:
        flag = " *(native stub)*" if p["native"] else ""
        lines.append("- `%s` -> `%s`%s" % (p["helper"], p["ipcSignature"], flag))
    lines.append("")
    findings = sorted(
        report["findings"],
        key=lambda f: (SEVERITY_RANK.get(f["vulnClass"], 99),
                       f["ipcSignature"], f["helper"]))
    lines.append("## Findings (%d, %d suppressed)" % (
        sum(1 for f in findings if not f["suppressed"]),
        sum(1 for f in findings if f["suppressed"])))
    lines.append("")
    for f in findings:
        mark = " [suppressed: %s]" % f["suppressReason"] if f["suppressed"] else ""
        lines.append("- **%s** `%s` via `%s` missing=%s%s" % (
            f["vulnClass"], f["ipcSignature"], f["helper"],
            ",".join(f["missingOnService"]), mark))
    lines.append("")
    lines.append("## Restriction tallies")
    lines.append("")
    for vc, row in report["tallies"].items():
        if vc == "total":
            continue
        lines.append("- %s: %s" % (
            vc, ", ".join("%s=%d" % (k, row[k]) for k in sorted(row))))
    lines.append("- total unsuppressed: %d" % report["tallies"]["total"]["count"])
    lines.append("")
    if report["directOnly"]:
        lines.append("## Direct-only IPC methods (no helper caller)")
        lines.append("")
        for ref in report["directOnly"]:
            lines.append("- `%s`" % ref)
        lines.append("")
    return "\n".join(lines)
