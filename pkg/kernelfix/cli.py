#!/usr/bin/env python3
"""Command-line front end for kernelfix.

Exit codes are uniform across commands: 0 when the property holds, 1 when
it fails (a witness is printed), 2 on any error.
"""

import argparse
import json
import sys
import time
from collections.abc import Callable, Sequence
from functools import wraps
from pathlib import Path
from typing import Any

import structlog
from pydantic import ValidationError
from tqdm import tqdm

from . import __version__
from .config import RunConfig, Settings, build_run_config, get_settings_loader, get_worker_count
from .dynamics import (
    apply_word,
    format_config,
    is_independent,
    is_kernel,
    parse_config,
    parse_word,
    run_word,
    vertex_name,
)
from .graph_core import (
    ENUMERATE_MAX_N,
    BoundExceededError,
    Graph,
    KernelFixError,
    VertexSet,
    WitnessError,
    enumerate_graphs,
    is_tethered,
    load_graph,
    mask_of,
    vertices_of,
    write_graph6,
)
from .logging import configure_logging
from .permis import (
    PermisStatus,
    certify_no_permis_tethered,
    composition_permis,
    comparability_permis,
    construct_permis,
    find_permis,
    is_permis,
    iter_census,
    simplicial_permis,
)
from .reductions import (
    ReductionKind,
    graph_set_instances,
    load_instance,
    reduce_instance,
    setcover_instances,
    sweep_preservation,
    verify_preservation,
)
from .set_analysis import (
    DominionWitness,
    is_colony,
    is_dominion,
    uncovered_edge,
    validate_colony_witness,
    validate_dominion_witness,
)
from .word_analysis import (
    ConfigWitness,
    EdgeWitness,
    SearchStatus,
    SuffixWitness,
    Witness,
    WordVerdict,
    check_prefix_suffix_split,
    fixes,
    fixing_set,
    prefixes,
    shortest_fixing_word,
    suffixes,
)

logger = structlog.get_logger()

EXIT_YES = 0
EXIT_NO = 1
EXIT_ERROR = 2

Handler = Callable[[argparse.Namespace], int]


def command_log(command: str) -> Callable[[Handler], Handler]:
    """Decorator to add start/finish logging to CLI commands."""

    def decorator(func: Handler) -> Handler:
        @wraps(func)
        def wrapper(args: argparse.Namespace) -> int:
            start_time = time.time()
            logger.info(f"Command called: {command}", command=command)
            try:
                code = func(args)
            except Exception as e:
                logger.error(
                    f"Command failed: {command}",
                    command=command,
                    duration_ms=round((time.time() - start_time) * 1000, 2),
                    error=str(e),
                    error_type=type(e).__name__,
                )
                raise
            logger.info(
                f"Command completed: {command}",
                command=command,
                duration_ms=round((time.time() - start_time) * 1000, 2),
                exit_code=code,
            )
            return code

        return wrapper

    return decorator


def command_error_handler(func: Handler) -> Handler:
    """Decorator turning expected failures into a JSON error object and exit code 2."""

    @wraps(func)
    def wrapper(args: argparse.Namespace) -> int:
        try:
            return func(args)
        except (
            KernelFixError,
            ValidationError,
            OSError,
            json.JSONDecodeError,
            ValueError,
        ) as e:
            logger.error(f"Error in {func.__name__}", error=str(e))
            print(
                json.dumps(
                    {"status": "error", "error": str(e), "error_type": type(e).__name__},
                    sort_keys=True,
                )
            )
            return EXIT_ERROR

    return wrapper


# shared plumbing


def _settings() -> Settings:
    return get_settings_loader().load_settings()


def _run_config(args: argparse.Namespace, *, requires_graph: bool = True) -> RunConfig:
    settings = _settings()
    workers = args.workers if args.workers is not None else get_worker_count(settings.workers)
    return build_run_config(
        graph=getattr(args, "graph", None),
        graph_file=getattr(args, "graph_file", None),
        workers=workers,
        output_format=args.format,
        deterministic=args.deterministic,
        requires_graph=requires_graph,
    )


def _graph(config: RunConfig) -> Graph:
    return load_graph(config.graph_text())


def _check_limit(operation: str, size: int, limit: int) -> None:
    if size > limit:
        raise BoundExceededError(operation, size, limit)


def _names(vertices: Sequence[int], n: int) -> str:
    return "{" + ", ".join(vertex_name(v, n) for v in vertices) + "}"


def _emit(config: RunConfig, payload: dict[str, Any], text: Sequence[str]) -> None:
    if config.output_format == "text":
        for line in text:
            print(line)
    else:
        print(json.dumps(payload, sort_keys=True))


def _parse_set(text: str, n: int) -> VertexSet:
    return mask_of(parse_word(text, n))


def _witness_payload(witness: Witness | None, n: int) -> dict[str, Any] | None:
    if witness is None:
        return None
    payload = witness.to_json()
    x = getattr(witness, "x", None)
    if x is not None:
        payload["config"] = format_config(x, n)
    return payload


def _witness_text(witness: Witness | None, n: int) -> list[str]:
    if witness is None:
        return []
    if isinstance(witness, ConfigWitness):
        return [f"counterexample: {format_config(witness.x, n)}"]
    if isinstance(witness, EdgeWitness):
        u, v = vertex_name(witness.u, n), vertex_name(witness.v, n)
        return [f"uncovered edge: {u}{v}", f"counterexample: {format_config(witness.x, n)}"]
    dominion = witness.dominion if isinstance(witness, SuffixWitness) else witness
    lines = [
        f"dominion witness: v={vertex_name(dominion.v, n)} "
        f"I={_names(vertices_of(dominion.independent), n)}"
    ]
    if isinstance(witness, SuffixWitness):
        lines.append(f"counterexample: {format_config(witness.x, n)}")
    return lines


def revalidate_word_witness(g: Graph, word: Sequence[int], verdict: WordVerdict) -> None:
    """Replay a negative word verdict with the pure checkers before printing it."""
    witness = verdict.witness
    if verdict.answer or witness is None:
        return
    visited = mask_of(word)
    if isinstance(witness, EdgeWitness):
        if not g.has_edge(witness.u, witness.v) or visited >> witness.u & 1 or visited >> witness.v & 1:
            raise WitnessError("Edge witness is not an uncovered edge")
        if is_independent(g, run_word(g.adj, witness.x, word)):
            raise WitnessError("Edge witness configuration does not break independence")
    elif isinstance(witness, SuffixWitness):
        validate_dominion_witness(g, visited, witness.dominion)
        if not is_independent(g, witness.x) or is_kernel(g, run_word(g.adj, witness.x, word)):
            raise WitnessError("Suffix witness configuration is not refuted")
    elif isinstance(witness, ConfigWitness):
        if is_kernel(g, run_word(g.adj, witness.x, word)):
            raise WitnessError("Counterexample configuration reaches a kernel")
    elif isinstance(witness, DominionWitness):
        validate_dominion_witness(g, visited, witness)


# commands


@command_log("enumerate")
@command_error_handler
def cmd_enumerate(args: argparse.Namespace) -> int:
    config = _run_config(args, requires_graph=False)
    _check_limit("enumerate", args.n, ENUMERATE_MAX_N)
    graphs = [write_graph6(g) for g in enumerate_graphs(args.n)]
    _emit(config, {"n": args.n, "count": len(graphs), "graphs": graphs}, graphs)
    return EXIT_YES


@command_log("trajectory")
@command_error_handler
def cmd_trajectory(args: argparse.Namespace) -> int:
    config = _run_config(args)
    g = _graph(config)
    word = parse_word(args.word, g.n)
    x = parse_config(args.config, g.n)
    y, trajectory = apply_word(g, x, word, record=args.full)
    payload: dict[str, Any] = {"x": format_config(x, g.n), "y": format_config(y, g.n)}
    text = [format_config(y, g.n)]
    if trajectory is not None:
        states = [format_config(state, g.n) for state in trajectory.states]
        payload["trajectory"] = states
        text = states
    _emit(config, payload, text)
    return EXIT_YES


@command_log("check-word")
@command_error_handler
def cmd_check_word(args: argparse.Namespace) -> int:
    config = _run_config(args)
    g = _graph(config)
    word = parse_word(args.word, g.n)
    settings = _settings()
    if args.prefixes:
        prop, verdict = "prefixes", prefixes(g, word)
    elif args.suffixes:
        _check_limit("suffixes", g.n, settings.exhaustive_limit)
        prop, verdict = "suffixes", suffixes(g, word)
    else:
        _check_limit("fixes", g.n, settings.exhaustive_limit)
        prop, verdict = "fixes", fixes(g, word, workers=config.workers)
    revalidate_word_witness(g, word, verdict)
    payload = {
        "property": prop,
        "answer": verdict.answer,
        "witness": _witness_payload(verdict.witness, g.n),
    }
    text = ["yes" if verdict.answer else "no", *_witness_text(verdict.witness, g.n)]
    _emit(config, payload, text)
    return EXIT_YES if verdict.answer else EXIT_NO


@command_log("check-split")
@command_error_handler
def cmd_check_split(args: argparse.Namespace) -> int:
    config = _run_config(args)
    g = _graph(config)
    word = parse_word(args.word, g.n)
    holds = check_prefix_suffix_split(g, word, args.a, args.b)
    _emit(config, {"a": args.a, "b": args.b, "answer": holds}, ["yes" if holds else "no"])
    return EXIT_YES if holds else EXIT_NO


@command_log("check-set")
@command_error_handler
def cmd_check_set(args: argparse.Namespace) -> int:
    config = _run_config(args)
    g = _graph(config)
    s = _parse_set(args.set, g.n)
    _check_limit("check-set", g.n, _settings().exhaustive_limit)
    witness_payload: dict[str, Any] | None = None
    text: list[str]
    if args.cover:
        prop = "cover"
        edge = uncovered_edge(g, s)
        answer = edge is None
        if edge is not None:
            witness_payload = {"kind": "edge", "edge": list(edge)}
        text = ["yes" if answer else "no"]
        if edge is not None:
            text.append(f"uncovered edge: {vertex_name(edge[0], g.n)}{vertex_name(edge[1], g.n)}")
    elif args.colony:
        prop = "colony"
        colony = is_colony(g, s)
        answer = colony is not None
        text = ["yes" if answer else "no"]
        if colony is not None:
            validate_colony_witness(g, s, colony)
            witness_payload = colony.to_json()
            text.append(f"I={_names(vertices_of(colony.independent), g.n)}")
    elif args.dominion:
        prop = "dominion"
        dominion = is_dominion(g, s)
        answer = dominion is not None
        text = ["yes" if answer else "no"]
        if dominion is not None:
            validate_dominion_witness(g, s, dominion)
            witness_payload = dominion.to_json()
            text.extend(_witness_text(dominion, g.n))
    else:
        prop = "fixing-set"
        verdict = fixing_set(g, s)
        answer = verdict.answer
        if isinstance(verdict.witness, DominionWitness):
            validate_dominion_witness(g, s, verdict.witness)
        witness_payload = _witness_payload(verdict.witness, g.n)
        text = ["yes" if answer else "no", *_witness_text(verdict.witness, g.n)]
    payload = {
        "property": prop,
        "set": vertices_of(s),
        "answer": answer,
        "witness": witness_payload,
    }
    _emit(config, payload, text)
    return EXIT_YES if answer else EXIT_NO


@command_log("shortest-word")
@command_error_handler
def cmd_shortest_word(args: argparse.Namespace) -> int:
    config = _run_config(args)
    g = _graph(config)
    settings = _settings()
    _check_limit("shortest-word", g.n, settings.shortest_word_limit)
    result = shortest_fixing_word(g, args.max_len, budget=settings.shortest_word_budget)
    if result.word is not None and not fixes(g, result.word):
        raise WitnessError("Search returned a word that does not fix K(G)")
    text = [result.status.value]
    if result.word is not None:
        text.append(" ".join(vertex_name(v, g.n) for v in result.word))
    _emit(config, result.to_json(), text)
    return EXIT_YES if result.status is SearchStatus.FOUND else EXIT_NO


@command_log("permis find")
@command_error_handler
def cmd_permis_find(args: argparse.Namespace) -> int:
    config = _run_config(args)
    g = _graph(config)
    _check_limit("permis find", g.n, _settings().permis_limit)
    verdict = find_permis(g, limit=g.n)
    if verdict.word is not None and not is_permis(g, verdict.word):
        raise WitnessError("Search returned a word that is not a permis")
    text = [verdict.status.value]
    if verdict.word is not None:
        text.append(" ".join(vertex_name(v, g.n) for v in verdict.word))
    _emit(config, verdict.to_json(), text)
    return EXIT_YES if verdict.status is PermisStatus.EXISTS else EXIT_NO


def _permis_of(g: Graph, limit: int) -> tuple[int, ...] | None:
    built = construct_permis(g)
    if built is not None:
        return built[1]
    _check_limit("permis construct", g.n, limit)
    return find_permis(g, limit=limit).word


@command_log("permis construct")
@command_error_handler
def cmd_permis_construct(args: argparse.Namespace) -> int:
    config = _run_config(args, requires_graph=args.route != "composition")
    settings = _settings()
    route = args.route
    word: tuple[int, ...] | None
    if route == "composition":
        if not args.outer or not args.part:
            raise ValueError("composition needs --outer and at least one --part")
        outer = load_graph(args.outer)
        parts = [load_graph(text) for text in args.part]
        outer_word = _permis_of(outer, settings.permis_limit)
        part_words = [_permis_of(part, settings.permis_limit) for part in parts]
        if outer_word is None or any(w is None for w in part_words):
            _emit(config, {"route": route, "permis": None}, ["none"])
            return EXIT_NO
        word = composition_permis(outer, parts, [w for w in part_words if w is not None], outer_word)
        n = sum(part.n for part in parts)
    else:
        g = _graph(config)
        n = g.n
        _check_limit("permis construct", g.n, settings.exhaustive_limit)
        if route == "comparability":
            word = comparability_permis(g)
        elif route == "simplicial":
            word = simplicial_permis(g)
        else:
            built = construct_permis(g)
            route, word = built if built is not None else (route, None)
    payload = {"route": route, "permis": list(word) if word is not None else None}
    text = ["none"] if word is None else [" ".join(vertex_name(v, n) for v in word)]
    _emit(config, payload, text)
    return EXIT_YES if word is not None else EXIT_NO


@command_log("permis certify-none")
@command_error_handler
def cmd_permis_certify(args: argparse.Namespace) -> int:
    config = _run_config(args)
    g = _graph(config)
    settings = _settings()
    certificate = certify_no_permis_tethered(
        g, limit=settings.tethered_limit, permis_limit=settings.permis_limit
    )
    if certificate is None:
        _emit(config, {"certificate": None}, ["none"])
        return EXIT_NO
    inner = certificate.inner
    if not is_tethered(g, certificate.subset) or inner is None:
        raise WitnessError("Certificate set is not tethered")
    if inner.status is not PermisStatus.NOT_EXISTS:
        raise WitnessError("Certificate subgraph has a permis")
    text = [f"tethered S={_names(vertices_of(certificate.subset), g.n)}"]
    _emit(config, {"certificate": certificate.to_json()}, text)
    return EXIT_YES


def _read_jsonl(path: Path) -> list[dict[str, Any]]:
    if not path.exists():
        return []
    return [json.loads(line) for line in path.read_text().splitlines() if line.strip()]


@command_log("permis census")
@command_error_handler
def cmd_permis_census(args: argparse.Namespace) -> int:
    config = _run_config(args, requires_graph=False)
    _check_limit("permis census", args.max_n, _settings().census_limit)
    out_path = Path(args.out) if args.out else None
    resume_path = Path(args.resume) if args.resume else None
    after = None
    if resume_path is not None and resume_path.exists():
        after = resume_path.read_text().strip() or None
    records: list[dict[str, Any]] = []
    if out_path is not None:
        if after is not None:
            records = _read_jsonl(out_path)
        else:
            out_path.write_text("")

    entries = iter_census(args.max_n, workers=config.workers, after=after)
    for entry in tqdm(entries, desc="census", unit="class", file=sys.stderr, disable=None):
        record = entry.to_json()
        records.append(record)
        if out_path is not None:
            with open(out_path, "a") as f:
                f.write(json.dumps(record, sort_keys=True) + "\n")
        if resume_path is not None:
            resume_path.write_text(entry.graph6 + "\n")

    counts: dict[str, int] = {}
    for record in records:
        counts[str(record["n"])] = counts.get(str(record["n"]), 0) + 1
    without = [r["graph6"] for r in records if r["permis"] is None]
    payload = {
        "max_n": args.max_n,
        "classes": len(records),
        "counts": counts,
        "without_permis": without,
    }
    text = [f"n={k}: {v} classes" for k, v in counts.items()]
    text.append(f"without permis: {', '.join(without) if without else 'none'}")
    _emit(config, payload, text)
    return EXIT_YES


@command_log("reduce")
@command_error_handler
def cmd_reduce(args: argparse.Namespace) -> int:
    config = _run_config(args, requires_graph=False)
    kind = ReductionKind(args.kind)
    with open(args.input) as f:
        obj = json.load(f)
    instance = load_instance(kind, obj)
    reduced = reduce_instance(kind, instance)
    Path(args.output).write_text(json.dumps(reduced, sort_keys=True) + "\n")
    payload: dict[str, Any] = {"kind": kind.value, "out": args.output, "n": reduced["n"]}
    text = [f"wrote {args.output} ({reduced['n']} vertices)"]
    if not args.verify:
        _emit(config, payload, text)
        return EXIT_YES
    report = verify_preservation(kind, instance)
    payload["report"] = report.to_json()
    text.append(
        f"source={'yes' if report.source_answer else 'no'} "
        f"target={'yes' if report.target_answer else 'no'} "
        f"preserved={'yes' if report.preserved else 'no'}"
    )
    _emit(config, payload, text)
    return EXIT_YES if report.preserved else EXIT_NO


@command_log("sweep")
@command_error_handler
def cmd_sweep(args: argparse.Namespace) -> int:
    config = _run_config(args, requires_graph=False)
    kind = ReductionKind(args.kind)
    if kind is ReductionKind.SETCOVER_COLONY:
        instances: Any = setcover_instances(args.max_n, args.max_m, args.max_k)
    else:
        instances = graph_set_instances(args.max_n)
    report = sweep_preservation(kind, instances, workers=config.workers)
    text = [f"{report.preserved}/{report.total} preserved"]
    _emit(config, report.to_json(), text)
    return EXIT_YES if not report.failures else EXIT_NO


# parser


def _add_graph_args(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--graph", help="graph6 string, JSON edge list or shorthand such as P3")
    source.add_argument("--graph-file", help="file holding the graph")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kernelfix",
        description="Fixing words, permises and reductions for kernel networks",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--format", choices=["json", "text"], default="json")
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--deterministic", action="store_true")
    parser.add_argument("--log-level", default=None)
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("enumerate", help="list non-isomorphic graphs as graph6")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(handler=cmd_enumerate)

    p = commands.add_parser("trajectory", help="apply a word to a configuration")
    _add_graph_args(p)
    p.add_argument("--word", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--full", action="store_true", help="print every intermediate state")
    p.set_defaults(handler=cmd_trajectory)

    p = commands.add_parser("check-word", help="decide prefixes/suffixes/fixes for a word")
    _add_graph_args(p)
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--prefixes", action="store_true")
    mode.add_argument("--suffixes", action="store_true")
    mode.add_argument("--fixes", action="store_true")
    p.add_argument("--word", required=True)
    p.set_defaults(handler=cmd_check_word)

    p = commands.add_parser("check-split", help="prefix/suffix split test for a word")
    _add_graph_args(p)
    p.add_argument("--word", required=True)
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p.set_defaults(handler=cmd_check_split)

    p = commands.add_parser("check-set", help="decide cover/colony/dominion/fixing set")
    _add_graph_args(p)
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--cover", action="store_true")
    mode.add_argument("--colony", action="store_true")
    mode.add_argument("--dominion", action="store_true")
    mode.add_argument("--fixing-set", action="store_true")
    p.add_argument("--set", default="")
    p.set_defaults(handler=cmd_check_set)

    p = commands.add_parser("shortest-word", help="bounded search for a shortest fixing word")
    _add_graph_args(p)
    p.add_argument("--max-len", type=int, required=True)
    p.set_defaults(handler=cmd_shortest_word)

    permis = commands.add_parser("permis", help="permis search, construction and census")
    permis_commands = permis.add_subparsers(dest="permis_command", required=True)

    p = permis_commands.add_parser("find")
    _add_graph_args(p)
    p.set_defaults(handler=cmd_permis_find)

    p = permis_commands.add_parser("construct")
    _add_graph_args(p)
    p.add_argument(
        "--route",
        choices=["auto", "comparability", "simplicial", "composition"],
        default="auto",
    )
    p.add_argument("--outer", help="outer graph H of a composition")
    p.add_argument("--part", action="append", help="part graph, once per vertex of H")
    p.set_defaults(handler=cmd_permis_construct)

    p = permis_commands.add_parser("certify-none")
    _add_graph_args(p)
    p.set_defaults(handler=cmd_permis_certify)

    p = permis_commands.add_parser("census")
    p.add_argument("--max-n", type=int, required=True)
    p.add_argument("--out", help="JSON-lines report")
    p.add_argument("--resume", help="file recording the last completed class")
    p.set_defaults(handler=cmd_permis_census)

    kinds = [kind.value for kind in ReductionKind]
    p = commands.add_parser("reduce", help="build a reduction gadget")
    p.add_argument("kind", choices=kinds)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--verify", action="store_true")
    p.set_defaults(handler=cmd_reduce)

    p = commands.add_parser("sweep", help="exhaustive answer-preservation sweep")
    p.add_argument("kind", choices=kinds)
    p.add_argument("--max-n", type=int, required=True)
    p.add_argument("--max-m", type=int, default=3)
    p.add_argument("--max-k", type=int, default=2)
    p.set_defaults(handler=cmd_sweep)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Main entry point for the CLI."""
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)
    code: int = args.handler(args)
    return code


if __name__ == "__main__":
    sys.exit(main())
