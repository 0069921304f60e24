"""Seeded FP-Growth vocabulary mining over call-chain name transactions.

Seed items get an artificial ordering frequency (the boost) and are exempt
from minimum-support pruning, so every itemset that co-occurs with a seed
survives; reported supports are always the true observed counts. Candidate
names are then filtered by identifier-token keyword intersection.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field

from .callgraph import CallChain
from .config import SeedConfig
from .ir import CorpusIR, Invoke, iter_invokes, simple_name


class InvalidConfig(Exception):
    pass


DEFAULT_MIN_SUPPORT = 3
DEFAULT_SEED_BOOST = 1000
MAX_ITEMSET_SIZE = 4


@dataclass(frozen=True)
class Transaction:
    ipc_signature: str
    items: frozenset[str]


@dataclass(frozen=True)
class SeedVocabulary:
    identity_access: frozenset[str]
    identity_enforce: frozenset[str]
    keywords: frozenset[str]
    classify_access_tokens: frozenset[str]
    classify_enforce_tokens: frozenset[str]

    @classmethod
    def from_config(cls, config: SeedConfig) -> "SeedVocabulary":
        return cls(
            identity_access=frozenset(config.identity_access),
            identity_enforce=frozenset(config.identity_enforce),
            keywords=frozenset(k.lower() for k in config.keywords),
            classify_access_tokens=frozenset(config.classify_access_tokens),
            classify_enforce_tokens=frozenset(config.classify_enforce_tokens),
        )

    @property
    def seeds(self) -> frozenset[str]:
        return self.identity_access | self.identity_enforce


@dataclass
class MinedVocabulary:
    identity_access_mined: set[str] = field(default_factory=set)
    identity_enforce_mined: set[str] = field(default_factory=set)
    support_counts: dict[str, int] = field(default_factory=dict)


def build_transactions(corpus: CorpusIR,
                       chains: list[tuple[str, CallChain]]) -> list[Transaction]:
    """One transaction per (ipc signature, chain): the simple names of the
    chain's methods plus every invoke target inside those methods."""
    out: list[Transaction] = []
    for ipc, chain in chains:
        items: set[str] = set()
        for ref in chain.methods:
            items.add(simple_name(ref))
            cls_name = ref.split("(", 1)[0].rsplit(".", 1)[0]
            if cls_name in corpus.classes:
                found = corpus.method(ref)
                for inv in iter_invokes(found[1].body):
                    items.add(simple_name(inv.target))
        if items:
            out.append(Transaction(ipc_signature=ipc, items=frozenset(items)))
    return out


# ---------------------------------------------------------------------------
# FP-tree

class _Node:
    __slots__ = ("item", "count", "parent", "children")

    def __init__(self, item, parent):
        self.item = item
        self.count = 0
        self.parent = parent
        self.children: dict[str, _Node] = {}


def _build_tree(itemlists: list[tuple[list[str], int]]):
    root = _Node(None, None)
    header: dict[str, list[_Node]] = {}
    for items, count in itemlists:
        node = root
        for item in items:
            child = node.children.get(item)
            if child is None:
                child = _Node(item, node)
                node.children[item] = child
                header.setdefault(item, []).append(child)
            child.count += count
            node = child
    return root, header


def fp_growth(transactions: list[Transaction], min_support: int,
              seeds: frozenset[str] | set[str] = frozenset(),
              seed_boost: int = DEFAULT_SEED_BOOST,
              max_itemset_size: int = MAX_ITEMSET_SIZE
              ) -> list[tuple[frozenset[str], int]]:
    """Frequent itemsets with true supports.

    An itemset is reported iff its support is >= min_support or it contains
    a seed item (and occurs at least once). Results are sorted by support
    descending, then lexicographically.
    """
    if min_support < 1:
        raise InvalidConfig("min_support must be >= 1")
    seeds = frozenset(seeds)
    if seeds and seed_boost < min_support:
        raise InvalidConfig("seed_boost must be >= min_support")
    counts: Counter[str] = Counter()
    for t in transactions:
        counts.update(t.items)
    if not counts:
        return []

    def boosted(item: str) -> int:
        c = counts[item]
        return max(c, seed_boost) if item in seeds else c

    rank = {item: r for r, item in
            enumerate(sorted(counts, key=lambda i: (-boosted(i), i)))}
    itemlists = [(sorted(t.items, key=rank.__getitem__), 1) for t in transactions]
    results: list[tuple[frozenset[str], int]] = []
    _mine(itemlists, frozenset(), False, min_support, seeds, rank,
          max_itemset_size, results)
    results.sort(key=lambda pair: (-pair[1], tuple(sorted(pair[0]))))
    return results


def _mine(itemlists, suffix, suffix_has_seed, min_support, seeds, rank,
          max_size, results):
    root, header = _build_tree(itemlists)
    # ascending frequency order: emit an itemset at its lowest-ranked member
    for item in sorted(header, key=rank.__getitem__, reverse=True):
        support = sum(n.count for n in header[item])
        has_seed = suffix_has_seed or item in seeds
        itemset = suffix | {item}
        if support >= min_support or (has_seed and support >= 1):
            results.append((itemset, support))
        if len(itemset) >= max_size:
            continue
        base: list[tuple[list[str], int]] = []
        cond_counts: Counter[str] = Counter()
        for node in header[item]:
            prefix: list[str] = []
            cur = node.parent
            while cur is not None and cur.item is not None:
                prefix.append(cur.item)
                cur = cur.parent
            if prefix:
                prefix.reverse()
                base.append((prefix, node.count))
                for j in prefix:
                    cond_counts[j] += node.count
        if not base:
            continue
        # seed exemption breaks anti-monotonicity of retention, so pruning
        # must keep any item a seed extension might still rescue; retention
        # itself is re-checked at emission above.
        seed_in_base = any(s in cond_counts for s in seeds)
        keep = {j for j, c in cond_counts.items()
                if c >= min_support or has_seed or j in seeds or seed_in_base}
        filtered = [([j for j in prefix if j in keep], count)
                    for prefix, count in base]
        filtered = [(p, c) for p, c in filtered if p]
        if filtered:
            _mine(filtered, itemset, has_seed, min_support, seeds, rank,
                  max_size, results)


# ---------------------------------------------------------------------------
# Keyword filtering

_TOKEN_RE = re.compile(r"[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z]+|[A-Z]+|\d+")


def tokenize_identifier(name: str) -> frozenset[str]:
    return frozenset(tok.lower() for tok in _TOKEN_RE.findall(name))


def keyword_filter(candidates: list[tuple[frozenset[str], int]],
                   vocab: SeedVocabulary) -> MinedVocabulary:
    """Retain candidate names that co-occur with a seed in some reported
    itemset and whose token decomposition hits the keyword list."""
    seeds = vocab.seeds
    co_occurring: set[str] = set()
    singleton_support: dict[str, int] = {}
    max_support: dict[str, int] = {}
    for itemset, support in candidates:
        if len(itemset) == 1:
            (name,) = itemset
            singleton_support[name] = max(singleton_support.get(name, 0), support)
        for name in itemset:
            max_support[name] = max(max_support.get(name, 0), support)
        if itemset & seeds:
            co_occurring.update(itemset - seeds)

    mined = MinedVocabulary()
    for name in sorted(co_occurring):
        tokens = tokenize_identifier(name)
        if not (tokens & vocab.keywords):
            continue
        if tokens & vocab.classify_access_tokens:
            mined.identity_access_mined.add(name)
        elif tokens & vocab.classify_enforce_tokens:
            mined.identity_enforce_mined.add(name)
        else:
            continue
        mined.support_counts[name] = singleton_support.get(
            name, max_support.get(name, 0))
    return mined
