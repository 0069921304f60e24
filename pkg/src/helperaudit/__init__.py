"""Static analysis of enforcement consistency between service helpers and
service IPC methods over a JSON corpus format."""

from .callgraph import (
    CallbackTable, CallChain, CallGraph, build_graph, enumerate_chains,
    resolve_invoke,
)
from .config import SeedConfig, load_seed_config
from .corpusgen import GenSpec, GeneratedCorpus, GroundTruth, generate
from .inconsistency import Finding, PermissionMap, RestrictionList
from .ir import CorpusIR, parse_corpus, serialize_corpus, validate_corpus
from .pipeline import AnalysisReport, analyze
from .services import MethodPair, identify_helpers, identify_services, pair_methods

__version__ = "0.1.0"

__all__ = [
    "AnalysisReport", "CallbackTable", "CallChain", "CallGraph", "CorpusIR",
    "Finding", "GenSpec", "GeneratedCorpus", "GroundTruth", "MethodPair",
    "PermissionMap", "RestrictionList", "SeedConfig", "analyze",
    "build_graph", "enumerate_chains", "generate", "identify_helpers",
    "identify_services", "load_seed_config", "pair_methods", "parse_corpus",
    "resolve_invoke", "serialize_corpus", "validate_corpus",
]
