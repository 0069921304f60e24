"""Command-line front end.

Exit codes: 0 success/clean, 1 validation diagnostics, 2 input error,
3 unsuppressed findings. All logging goes to stderr; reports are written
atomically (temp file + rename) or printed to stdout.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile

from .callgraph import CallbackTable, DEFAULT_CHAIN_LIMIT, DEFAULT_MAX_DEPTH
from .config import ConfigError, SeedConfig, load_seed_config
from .corpusgen import GenSpec, generate
from .inconsistency import PermissionMap, RestrictionList
from .ir import CorpusError, parse_corpus, validate_corpus
from .mining import DEFAULT_MIN_SUPPORT, DEFAULT_SEED_BOOST, InvalidConfig
from .pipeline import analyze
from .services import identify_helpers, identify_services, pair_methods

EXIT_OK = 0
EXIT_DIAGNOSTICS = 1
EXIT_INPUT_ERROR = 2
EXIT_FINDINGS = 3

SEEDS_ENV_VAR = "HELPER_AUDIT_SEEDS"

log = logging.getLogger("helperaudit")


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".helperaudit-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        _write_atomic(out, text)
        log.info("wrote %s", out)


def _load_corpus(path: str):
    with open(path, encoding="utf-8") as fh:
        return parse_corpus(fh.read())


def _load_config(args) -> SeedConfig:
    path = args.seeds or os.environ.get(SEEDS_ENV_VAR)
    if path:
        return load_seed_config(path)
    return SeedConfig()


def _load_json(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _callback_table(args) -> CallbackTable | None:
    if args.callbacks:
        raw = _load_json(args.callbacks)
        return CallbackTable.from_dicts(raw)
    return None


def _add_corpus_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--corpus", required=True, help="corpus document (JSON)")
    p.add_argument("--seeds", help="seed-list config (JSON); falls back to "
                                   "the %s environment variable" % SEEDS_ENV_VAR)


def _add_graph_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--callbacks", help="callback edge table (JSON list)")
    p.add_argument("--max-depth", type=int, default=DEFAULT_MAX_DEPTH,
                   help="call graph depth bound (default %(default)s)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="helperaudit",
        description="Detect inconsistent security enforcement between "
                    "service helpers and service IPC methods.")
    parser.add_argument("--verbose", action="store_true",
                        help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check corpus structural invariants")
    _add_corpus_options(p)
    p.add_argument("--out", help="write diagnostics JSON here")

    p = sub.add_parser("pairs", help="list helper/IPC method pairs")
    _add_corpus_options(p)
    _add_graph_options(p)
    p.add_argument("--out", help="write pair list here")

    p = sub.add_parser("mine", help="mine the identity vocabulary")
    _add_corpus_options(p)
    _add_graph_options(p)
    p.add_argument("--min-support", type=int, default=DEFAULT_MIN_SUPPORT)
    p.add_argument("--seed-boost", type=int, default=DEFAULT_SEED_BOOST)
    p.add_argument("--out", help="write vocabulary here")

    p = sub.add_parser("analyze", help="run the full inconsistency analysis")
    _add_corpus_options(p)
    _add_graph_options(p)
    p.add_argument("--permissions", help="permission map (JSON)")
    p.add_argument("--restrictions", help="restriction list (JSON)")
    p.add_argument("--min-support", type=int, default=DEFAULT_MIN_SUPPORT)
    p.add_argument("--seed-boost", type=int, default=DEFAULT_SEED_BOOST)
    p.add_argument("--parallel", type=int, default=1,
                   help="worker threads for pair evaluation")
    p.add_argument("--format", choices=("json", "markdown"), default="json")
    p.add_argument("--out", help="write the report here")

    p = sub.add_parser("gen", help="generate a labeled synthetic corpus")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--units", type=int, default=10)
    p.add_argument("--out-dir", required=True,
                   help="directory for corpus.json, permissions.json, "
                        "restrictions.json, labels.json")
    return parser


def _cmd_validate(args) -> int:
    corpus = _load_corpus(args.corpus)
    diags = validate_corpus(corpus)
    payload = [
        {"code": d.code, "message": d.message, "class": d.class_name,
         "method": d.method, "statement": d.statement}
        for d in diags
    ]
    _emit(json.dumps({"diagnostics": payload}, indent=2) + "\n", args.out)
    return EXIT_DIAGNOSTICS if diags else EXIT_OK


def _cmd_pairs(args) -> int:
    corpus = _load_corpus(args.corpus)
    config = _load_config(args)
    table = _callback_table(args)
    registry = identify_services(corpus, config)
    helpers = identify_helpers(corpus, registry, config, table, args.max_depth)
    result = pair_methods(corpus, registry, helpers, config, table,
                          args.max_depth)
    payload = {
        "pairs": [
            {"helper": p.helper, "ipcSignature": p.ipc_signature,
             "service": p.service, "helperClass": p.helper_class,
             "native": p.native_stub}
            for p in result.pairs
        ],
        "directOnly": result.direct_only,
    }
    _emit(json.dumps(payload, indent=2) + "\n", args.out)
    return EXIT_OK


def _cmd_mine(args) -> int:
    corpus = _load_corpus(args.corpus)
    config = _load_config(args)
    table = _callback_table(args)
    report = analyze(corpus, config, table=table,
                     min_support=args.min_support, seed_boost=args.seed_boost,
                     max_depth=args.max_depth)
    _emit(json.dumps(report.vocabulary, indent=2) + "\n", args.out)
    return EXIT_OK


def _cmd_analyze(args) -> int:
    corpus = _load_corpus(args.corpus)
    config = _load_config(args)
    table = _callback_table(args)
    pmap = PermissionMap.from_dict(_load_json(args.permissions)) \
        if args.permissions else None
    rlist = RestrictionList.from_dict(_load_json(args.restrictions)) \
        if args.restrictions else None
    if args.parallel < 1:
        raise InvalidConfig("--parallel must be >= 1")
    report = analyze(corpus, config, pmap, rlist, table,
                     min_support=args.min_support, seed_boost=args.seed_boost,
                     max_depth=args.max_depth, parallel=args.parallel)
    text = report.to_json() if args.format == "json" else report.to_markdown()
    _emit(text, args.out)
    log.info("%s", report.summary_line())
    return EXIT_FINDINGS if report.unsuppressed else EXIT_OK


def _cmd_gen(args) -> int:
    generated = generate(GenSpec(seed=args.seed, units=args.units))
    os.makedirs(args.out_dir, exist_ok=True)
    files = {
        "corpus.json": generated.document,
        "permissions.json": generated.truth.permissions,
        "restrictions.json": generated.truth.restrictions,
        "labels.json": {"findings": generated.truth.findings},
    }
    for name, payload in files.items():
        _write_atomic(os.path.join(args.out_dir, name),
                      json.dumps(payload, indent=2) + "\n")
    log.info("generated corpus with %d labels in %s",
             len(generated.truth.findings), args.out_dir)
    return EXIT_OK


_COMMANDS = {
    "validate": _cmd_validate,
    "pairs": _cmd_pairs,
    "mine": _cmd_mine,
    "analyze": _cmd_analyze,
    "gen": _cmd_gen,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except (CorpusError, ConfigError, InvalidConfig, ValueError,
            OSError, json.JSONDecodeError, KeyError) as e:
        log.error("%s: %s", type(e).__name__, e)
        sys.stderr.write("error: %s\n" % e)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
