"""Exact query answering via variable elimination, plus a brute-force oracle.

The pipeline mirrors the usual workflow: compile a network into an engine,
apply evidence, query posteriors.  Elimination uses an iterated min-fill
order on the moralized interaction graph; every tie-break is deterministic,
so identical inputs produce bit-identical outputs.

:func:`brute_force_joint` answers the same questions by direct enumeration
of the full joint.  It shares no arithmetic with the elimination path and
exists as an independent cross-check for tests.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from . import factor as fa
from .errors import EvidenceError, ImpossibleEvidenceError
from .model import Evidence, Network


@dataclass(frozen=True, eq=False)
class Engine:
    """A compiled network: one factor per CPT plus the moral graph."""

    network: Network
    factors: tuple[fa.Factor, ...]
    neighbors: Mapping[str, frozenset[str]]


@dataclass(frozen=True, eq=False)
class QueryResult:
    """Posterior marginals plus the probability of the applied evidence.

    ``marginals`` maps each requested variable to a distribution over its
    full, ordered state space.  ``evidence_probability`` is the
    pre-normalization mass of the evidence under the model (1 when no
    evidence was given).
    """

    marginals: dict[str, dict[str, float]]
    evidence_probability: float


def compile_network(network: Network) -> Engine:
    """Build the factor set and interaction graph for repeated queries."""
    factors = tuple(
        fa.factor_from_cpt(network.cpts[name], network) for name in network.order
    )
    adjacency: dict[str, set[str]] = {name: set() for name in network.order}
    for name in network.order:
        clique = (name,) + network.cpts[name].parents
        for u, v in itertools.combinations(clique, 2):
            adjacency[u].add(v)
            adjacency[v].add(u)
    neighbors = {name: frozenset(adj) for name, adj in adjacency.items()}
    return Engine(network=network, factors=factors, neighbors=neighbors)


def elimination_order(engine: Engine, keep: Iterable[str]) -> tuple[str, ...]:
    """Order in which to sum out every variable not in ``keep``.

    Iterated min-fill on the (progressively updated) moral graph.  Ties are
    broken by the size of the factor the elimination would create, then by
    name, so the result is fully deterministic.
    """
    keep = frozenset(keep)
    for name in keep:
        if name not in engine.network:
            raise EvidenceError(f"unknown variable {name!r} in keep set")

    cards = {v.name: v.n_states for v in engine.network.variables}
    adj: dict[str, set[str]] = {n: set(ns) for n, ns in engine.neighbors.items()}
    candidates = set(adj) - keep
    order: list[str] = []

    def fill_in(name: str) -> int:
        ns = sorted(adj[name])
        return sum(
            1
            for i, u in enumerate(ns)
            for v in ns[i + 1:]
            if v not in adj[u]
        )

    def result_size(name: str) -> int:
        size = 1
        for u in adj[name]:
            size *= cards[u]
        return size

    while candidates:
        chosen = min(candidates, key=lambda n: (fill_in(n), result_size(n), n))
        order.append(chosen)
        candidates.remove(chosen)
        around = adj.pop(chosen)
        for u in around:
            adj[u].discard(chosen)
        for u, v in itertools.combinations(sorted(around), 2):
            adj[u].add(v)
            adj[v].add(u)
    return tuple(order)


def _reduce_all(factors: Iterable[fa.Factor], evidence: Evidence) -> list[fa.Factor]:
    """Slice every factor at the observed states."""
    reduced = []
    for f in factors:
        for name in f.names:
            if name in evidence:
                f = fa.reduce(f, name, evidence[name])
        reduced.append(f)
    return reduced


def _eliminate(factors: list[fa.Factor], order: Iterable[str]) -> list[fa.Factor]:
    """Sum out variables in ``order``; factor list order is preserved."""
    work = list(factors)
    for name in order:
        related = [f for f in work if name in f.names]
        if not related:
            continue
        prod = related[0]
        for f in related[1:]:
            prod = fa.product(prod, f)
        kept = [f for f in work if name not in f.names]
        kept.append(fa.marginalize(prod, name))
        work = kept
    return work


def _multiply_all(factors: list[fa.Factor]) -> fa.Factor:
    if not factors:
        return fa.Factor((), np.asarray(1.0))
    prod = factors[0]
    for f in factors[1:]:
        prod = fa.product(prod, f)
    return prod


def _evidence_mass(engine: Engine, reduced: list[fa.Factor]) -> float:
    """Pre-normalization mass of the evidence: eliminate everything."""
    remaining = _eliminate(reduced, elimination_order(engine, keep=()))
    mass = float(_multiply_all(remaining).values)
    return min(max(mass, 0.0), 1.0)


def _point_mass(engine: Engine, name: str, state: str) -> dict[str, float]:
    var = engine.network.variable(name)
    return {s: (1.0 if s == state else 0.0) for s in var.states}


def query(engine: Engine, evidence: Evidence | None, nodes: Iterable[str]) -> QueryResult:
    """Exact posterior marginals of ``nodes`` given ``evidence``.

    Evidence reduction is shared; each node then gets its own elimination
    pass.  A node that is itself observed comes back as a point mass on the
    observed state.  Raises :class:`ImpossibleEvidenceError` when the
    evidence has zero probability.
    """
    evidence = evidence if evidence is not None else Evidence()
    evidence.validate(engine.network)
    requested = list(dict.fromkeys(nodes))
    if not requested:
        raise EvidenceError("query needs at least one node")
    for name in requested:
        engine.network.variable(name)
    position = {name: i for i, name in enumerate(engine.network.order)}
    requested.sort(key=position.__getitem__)

    reduced = _reduce_all(engine.factors, evidence)
    mass = _evidence_mass(engine, reduced)
    if mass == 0.0:
        raise ImpossibleEvidenceError(
            f"evidence {dict(evidence.items())} has zero probability under the model"
        )

    marginals: dict[str, dict[str, float]] = {}
    for name in requested:
        if name in evidence:
            marginals[name] = _point_mass(engine, name, evidence[name])
            continue
        remaining = _eliminate(reduced, elimination_order(engine, keep={name}))
        posterior = fa.normalize(_multiply_all(remaining))
        var = engine.network.variable(name)
        marginals[name] = dict(zip(var.states, posterior.values.tolist()))
    return QueryResult(marginals=marginals, evidence_probability=mass)


def query_joint(engine: Engine, evidence: Evidence | None, nodes: Iterable[str]) -> fa.Factor:
    """Normalized joint posterior factor over ``nodes``, in the given order."""
    evidence = evidence if evidence is not None else Evidence()
    evidence.validate(engine.network)
    requested = tuple(nodes)
    if not requested:
        raise EvidenceError("query_joint needs at least one node")
    if len(set(requested)) != len(requested):
        raise EvidenceError(f"query_joint nodes repeat a variable: {list(requested)}")
    for name in requested:
        engine.network.variable(name)

    work = _reduce_all(engine.factors, evidence)
    for name in requested:
        if name in evidence:
            var = engine.network.variable(name)
            indicator = np.zeros(var.n_states)
            indicator[var.state_index(evidence[name])] = 1.0
            work.append(fa.Factor((var,), indicator))

    remaining = _eliminate(work, elimination_order(engine, keep=requested))
    joint = fa.transpose(_multiply_all(remaining), requested)
    return fa.normalize(joint)


def brute_force_joint(
    network: Network,
    evidence: Evidence | None = None,
    max_size: int = 10_000_000,
) -> fa.Factor:
    """Unnormalized joint over the unobserved variables, by enumeration.

    Every configuration's probability is a plain left-to-right product of
    CPT entries -- no factor algebra is involved, which makes this a slow but
    independent oracle for the elimination path.  The scope follows the
    topological order.  Refuses joints larger than ``max_size``.
    """
    evidence = evidence if evidence is not None else Evidence()
    evidence.validate(network)

    full_size = 1
    for var in network.variables:
        full_size *= var.n_states
    if full_size > max_size:
        raise ValueError(
            f"joint has {full_size} entries, above the cap of {max_size}"
        )

    order = network.order
    index_of = {name: i for i, name in enumerate(order)}
    # Per-variable strides into its CPT rows: last parent varies fastest.
    row_layout = []
    for name in order:
        cpt = network.cpts[name]
        strides = []
        step = 1
        for parent in reversed(cpt.parents):
            strides.append((index_of[parent], step))
            step *= network.variable(parent).n_states
        row_layout.append((index_of[name], tuple(reversed(strides)), cpt.rows))

    free = [name for name in order if name not in evidence]
    fixed = {
        index_of[name]: network.variable(name).state_index(state)
        for name, state in evidence.items()
    }

    scope = tuple(network.variable(name) for name in free)
    shape = tuple(v.n_states for v in scope)
    values = np.empty(shape, dtype=np.float64)
    flat = values.reshape(-1)

    assignment = [0] * len(order)
    for pos, state_index in fixed.items():
        assignment[pos] = state_index
    free_positions = [index_of[name] for name in free]

    for flat_index, combo in enumerate(itertools.product(*(range(k) for k in shape))):
        for pos, state_index in zip(free_positions, combo):
            assignment[pos] = state_index
        p = 1.0
        for child_pos, strides, rows in row_layout:
            row = 0
            for parent_pos, step in strides:
                row += assignment[parent_pos] * step
            p *= rows[row, assignment[child_pos]]
        flat[flat_index] = p

    return fa.Factor(scope, values)
