"""Command-line interface for batch validation, querying, scoring, and export.

Numbers are kept at full precision internally; rounding happens only here,
with decimal half-up rounding (the convention used by the printed tables
this tool is meant to reproduce).  Exit codes: 0 success, 2 usage error,
3 parse error, 4 impossible evidence, 5 internal failure.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from decimal import ROUND_HALF_UP, Decimal

from . import netdef, scoring, simulate
from .errors import EvidenceError, ImpossibleEvidenceError, ScoringError
from .inference import compile_network, query, query_joint
from .model import Evidence, Network, Role, build_network


class UsageError(ValueError):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):  # keep run() in charge of exit codes
        raise UsageError(message)


def format_number(x: float, decimals: int) -> str:
    """Fixed-point decimal string, rounding halves up.

    The value is first snapped to ``decimals + 9`` places so that binary
    representation noise (e.g. 0.165 stored as 0.16499...) does not flip a
    half-way case the wrong way.
    """
    snapped = Decimal(float(x)).quantize(
        Decimal(1).scaleb(-(decimals + 9)), rounding=ROUND_HALF_UP
    )
    return str(snapped.quantize(Decimal(1).scaleb(-decimals), rounding=ROUND_HALF_UP))


def _distribution_block(name: str, dist: dict[str, float], decimals: int) -> str:
    states = list(dist)
    values = [format_number(dist[s], decimals) for s in states]
    widths = [max(len(s), len(v)) for s, v in zip(states, values)]
    header = " ".join(s.ljust(w) for s, w in zip(states, widths)).rstrip()
    body = " ".join(v.ljust(w) for v, w in zip(values, widths)).rstrip()
    return f"{name}\n{header}\n{body}"


def _parse_evidence(chunks: list[str]) -> Evidence:
    pairs: list[str] = []
    for chunk in chunks:
        pairs.extend(p for p in chunk.split(",") if p)
    return Evidence.from_pairs(pairs)


def _parse_nodes(chunks: list[str]) -> list[str]:
    nodes: list[str] = []
    for chunk in chunks:
        nodes.extend(n for n in chunk.split(",") if n)
    return nodes


def _parse_threshold(text: str) -> tuple[str, float]:
    for comparator in (">=", "<=", "==", ">", "<", "="):
        if text.startswith(comparator):
            level_text = text[len(comparator):].strip()
            try:
                return comparator, float(level_text)
            except ValueError:
                break
    raise UsageError(f"malformed threshold {text!r}; expected e.g. '>=3'")


def _load(path: str) -> Network:
    try:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    return netdef.parse_network(text)


def _build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(
        prog="traitnet",
        description="Exact inference and trait scoring for discrete Bayesian networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: _ArgumentParser, evidence: bool = True) -> None:
        if evidence:
            p.add_argument("--evidence", action="append", default=[], metavar="V=S,...",
                           help="observed states, comma separated, flag repeatable")
        p.add_argument("--format", choices=("table", "json"), default="table")
        p.add_argument("--decimals", type=int, default=2,
                       help="display precision in table mode (default 2)")

    p = sub.add_parser("validate", help="check a network file")
    p.add_argument("network")

    p = sub.add_parser("marginals", help="posterior marginals of nodes")
    p.add_argument("network")
    p.add_argument("--nodes", action="append", default=[], metavar="A,B")
    common(p)

    p = sub.add_parser("posterior", help="score one trait variable")
    p.add_argument("network")
    p.add_argument("--trait", required=True)
    p.add_argument("--threshold", action="append", default=[], metavar="'>=3'")
    common(p)

    p = sub.add_parser("joint", help="joint posterior over several nodes")
    p.add_argument("network")
    p.add_argument("--nodes", action="append", required=True, metavar="A,B")
    common(p)

    p = sub.add_parser("sample", help="draw synthetic respondents")
    p.add_argument("network")
    p.add_argument("-n", "--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--evidence", action="append", default=[], metavar="V=S,...")

    p = sub.add_parser("dot", help="export the DAG in DOT format")
    p.add_argument("network")

    p = sub.add_parser("noise", help="mix slip/guess noise into question tables")
    p.add_argument("network")
    p.add_argument("--epsilon", type=float, required=True)

    return parser


def _check_decimals(args: argparse.Namespace) -> None:
    decimals = getattr(args, "decimals", 2)
    if not (0 <= decimals <= 17):
        raise UsageError(f"--decimals must be in [0, 17], got {decimals}")


def _cmd_validate(args: argparse.Namespace, out) -> None:
    network = _load(args.network)
    print(f"OK: {network.n_variables} variables, {network.n_edges} edges", file=out)


def _cmd_marginals(args: argparse.Namespace, out) -> None:
    evidence = _parse_evidence(args.evidence)
    network = _load(args.network)
    engine = compile_network(network)
    nodes = _parse_nodes(args.nodes) or list(network.order)
    result = query(engine, evidence, nodes)
    if args.format == "json":
        out.write(netdef.export_result_json(result))
        return
    blocks = []
    if evidence:
        blocks.append(f"P(evidence) = {format_number(result.evidence_probability, args.decimals)}")
    blocks.extend(
        _distribution_block(name, dist, args.decimals)
        for name, dist in result.marginals.items()
    )
    print("\n\n".join(blocks), file=out)


def _cmd_posterior(args: argparse.Namespace, out) -> None:
    evidence = _parse_evidence(args.evidence)
    thresholds = [_parse_threshold(t) for t in args.threshold]
    network = _load(args.network)
    engine = compile_network(network)
    score = scoring.score_trait(engine, args.trait, evidence, thresholds)
    if args.format == "json":
        payload = {
            "trait": score.variable,
            "posterior": score.posterior,
            "map_state": score.map_state,
            "expected_level": score.expected_level,
            "thresholds": [
                {"comparator": c, "level": l, "probability": p}
                for c, l, p in score.threshold_probs
            ],
        }
        out.write(json.dumps(payload, indent=2) + "\n")
        return
    lines = [_distribution_block(score.variable, score.posterior, args.decimals), ""]
    lines.append(f"map state: {score.map_state}")
    expected = (
        "n/a" if score.expected_level is None
        else format_number(score.expected_level, args.decimals)
    )
    lines.append(f"expected level: {expected}")
    for comparator, level, prob in score.threshold_probs:
        level_text = format_number(level, 0) if level == int(level) else repr(level)
        lines.append(
            f"P({score.variable} {comparator} {level_text}) = "
            f"{format_number(prob, args.decimals)}"
        )
    print("\n".join(lines), file=out)


def _cmd_joint(args: argparse.Namespace, out) -> None:
    evidence = _parse_evidence(args.evidence)
    network = _load(args.network)
    engine = compile_network(network)
    nodes = _parse_nodes(args.nodes)
    joint = query_joint(engine, evidence, nodes)
    if args.format == "json":
        payload = {
            "nodes": list(joint.names),
            "states": {v.name: list(v.states) for v in joint.variables},
            "values": joint.values.ravel().tolist(),
        }
        out.write(json.dumps(payload, indent=2) + "\n")
        return
    spaces = [v.states for v in joint.variables]
    flat = joint.values.ravel().tolist()
    rows = [list(joint.names) + ["p"]]
    for combo, value in zip(itertools.product(*spaces), flat):
        rows.append(list(combo) + [format_number(value, args.decimals)])
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    for row in rows:
        print(" ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip(), file=out)


def _cmd_sample(args: argparse.Namespace, out) -> None:
    evidence = _parse_evidence(args.evidence)
    network = _load(args.network)
    if evidence:
        samples = simulate.likelihood_weighted_sample(network, evidence, args.samples, args.seed)
    else:
        samples = simulate.ancestral_sample(network, args.samples, args.seed)
    out.write(netdef.export_samples(samples))


def _cmd_dot(args: argparse.Namespace, out) -> None:
    out.write(netdef.export_dot(_load(args.network)))


def _cmd_noise(args: argparse.Namespace, out) -> None:
    network = _load(args.network)
    spec = scoring.NoiseSpec(slip=args.epsilon)
    cpts = [
        scoring.apply_slip_noise(cpt, spec)
        if network.variable(name).role is Role.QUESTION
        else cpt
        for name, cpt in network.cpts.items()
    ]
    noised = build_network(network.variables, cpts)
    out.write(netdef.serialize_network(noised))


_COMMANDS = {
    "validate": _cmd_validate,
    "marginals": _cmd_marginals,
    "posterior": _cmd_posterior,
    "joint": _cmd_joint,
    "sample": _cmd_sample,
    "dot": _cmd_dot,
    "noise": _cmd_noise,
}


def run(argv: list[str] | None = None, out=None, err=None) -> int:
    """Execute one command; returns the process exit code."""
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    parser = _build_parser()
    try:
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:  # --help
            return int(exc.code or 0)
        _check_decimals(args)
        _COMMANDS[args.command](args, out)
        return 0
    except UsageError as exc:
        print(f"usage error: {exc}", file=err)
        return 2
    except netdef.ParseError as exc:
        print(f"parse error: {exc}", file=err)
        return 3
    except (EvidenceError, ScoringError) as exc:
        print(f"usage error: {exc}", file=err)
        return 2
    except ImpossibleEvidenceError as exc:
        print(f"impossible evidence: {exc}", file=err)
        return 4
    except Exception as exc:  # noqa: BLE001 - last-resort boundary
        print(f"internal error: {exc}", file=err)
        return 5


def main() -> None:
    sys.exit(run())
