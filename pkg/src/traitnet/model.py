"""Core data model: discrete variables, conditional probability tables, networks.

A :class:`Network` is a directed acyclic graph of named discrete variables,
with exactly one :class:`Cpt` per variable (an empty parent list makes the
table a prior).  All validation and row normalization happens in
:func:`build_network`; the resulting objects are immutable and safe to share
between threads.

Table layout convention (fixed for the whole package, including the file
format): a CPT has one row per parent configuration and one column per child
state.  Parent configurations are enumerated row-major with the *last* listed
parent varying fastest.
"""

from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

import numpy as np

from .errors import CycleError, EvidenceError, ModelError

#: Tolerance for the "rows sum to one" invariant on built networks.
ROW_SUM_TOL = 1e-9


class Role(enum.Enum):
    """What a variable represents in a questionnaire; metadata only."""

    TRAIT = "trait"
    QUESTION = "question"
    UNSPECIFIED = "unspecified"


@dataclass(frozen=True)
class Variable:
    """A named discrete variable with an ordered state space.

    State order is significant: it defines table layout and, for numeric
    labels, the grade mapping used by scoring.
    """

    name: str
    states: tuple[str, ...]
    role: Role = Role.UNSPECIFIED

    def __post_init__(self) -> None:
        object.__setattr__(self, "states", tuple(str(s) for s in self.states))
        if not self.name or not isinstance(self.name, str):
            raise ModelError("variable name must be a nonempty string")
        if len(self.states) < 2:
            raise ModelError(
                f"variable {self.name!r} needs at least 2 states, got {len(self.states)}"
            )
        if len(set(self.states)) != len(self.states):
            raise ModelError(f"variable {self.name!r} has duplicate state labels")
        if not isinstance(self.role, Role):
            raise ModelError(f"variable {self.name!r}: role must be a Role")

    @property
    def n_states(self) -> int:
        return len(self.states)

    def state_index(self, label: str) -> int:
        """Index of ``label`` in the ordered state space."""
        try:
            return self.states.index(label)
        except ValueError:
            raise EvidenceError(
                f"variable {self.name!r} has no state {label!r}; "
                f"states are {list(self.states)}"
            ) from None


@dataclass(frozen=True, eq=False)
class Cpt:
    """Table of P(child | parents): one row per parent configuration.

    ``rows`` may be given as nonnegative weights (e.g. percentages); they are
    normalized per row by :func:`build_network`.  A 1-D array is accepted for
    parentless tables and treated as a single row.
    """

    child: str
    parents: tuple[str, ...]
    rows: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "parents", tuple(self.parents))
        if len(set(self.parents)) != len(self.parents):
            raise ModelError(f"cpt for {self.child!r} lists a parent twice")
        rows = np.asarray(self.rows, dtype=np.float64)
        if rows.ndim == 1:
            rows = rows.reshape(1, -1)
        if rows.ndim != 2 or rows.size == 0:
            raise ModelError(f"cpt for {self.child!r}: rows must form a nonempty 2-D table")
        if not np.all(np.isfinite(rows)):
            raise ModelError(f"cpt for {self.child!r} contains non-finite entries")
        if np.any(rows < 0.0):
            raise ModelError(f"cpt for {self.child!r} contains negative entries")
        rows = np.ascontiguousarray(rows)
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]

    @property
    def n_columns(self) -> int:
        return self.rows.shape[1]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Cpt):
            return NotImplemented
        return (
            self.child == other.child
            and self.parents == other.parents
            and self.rows.shape == other.rows.shape
            and bool(np.array_equal(self.rows, other.rows))
        )

    __hash__ = None  # type: ignore[assignment]


class Network:
    """A validated acyclic network; construct via :func:`build_network`.

    ``variables`` and ``cpts`` are stored in topological order, which makes
    equality and serialization canonical.  Instances are immutable.
    """

    __slots__ = ("variables", "cpts", "order", "_by_name")

    def __init__(self, variables: tuple[Variable, ...], cpts: dict[str, Cpt],
                 order: tuple[str, ...]):
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "cpts", cpts)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "_by_name", {v.name: v for v in variables})

    def __setattr__(self, name: str, value) -> None:
        raise AttributeError("Network is immutable")

    def variable(self, name: str) -> Variable:
        try:
            return self._by_name[name]
        except KeyError:
            raise EvidenceError(f"unknown variable {name!r}") from None

    def cpt(self, name: str) -> Cpt:
        self.variable(name)
        return self.cpts[name]

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    @property
    def n_variables(self) -> int:
        return len(self.variables)

    def edges(self) -> Iterator[tuple[str, str]]:
        """All parent -> child edges, children in topological order."""
        for name in self.order:
            for parent in self.cpts[name].parents:
                yield parent, name

    @property
    def n_edges(self) -> int:
        return sum(len(c.parents) for c in self.cpts.values())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Network):
            return NotImplemented
        return self.variables == other.variables and self.cpts == other.cpts

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"Network({self.n_variables} variables, {self.n_edges} edges)"


@dataclass(frozen=True, eq=False)
class Evidence:
    """Observed state labels for a subset of variables."""

    assignments: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "assignments", dict(self.assignments))

    @classmethod
    def from_pairs(cls, pairs: Iterable[str]) -> "Evidence":
        """Build evidence from ``VAR=STATE`` strings; duplicates are an error."""
        assignments: dict[str, str] = {}
        for pair in pairs:
            name, sep, state = pair.partition("=")
            if not sep or not name or not state:
                raise EvidenceError(f"malformed evidence pair {pair!r}; expected VAR=STATE")
            if name in assignments:
                raise EvidenceError(f"variable {name!r} appears twice in evidence")
            assignments[name] = state
        return cls(assignments)

    def validate(self, network: Network) -> None:
        """Raise :class:`EvidenceError` unless every assignment fits ``network``."""
        for name, state in self.assignments.items():
            network.variable(name).state_index(state)

    def __contains__(self, name: str) -> bool:
        return name in self.assignments

    def __getitem__(self, name: str) -> str:
        return self.assignments[name]

    def __len__(self) -> int:
        return len(self.assignments)

    def __bool__(self) -> bool:
        return bool(self.assignments)

    def items(self) -> Iterator[tuple[str, str]]:
        return iter(self.assignments.items())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Evidence):
            return NotImplemented
        return self.assignments == other.assignments

    __hash__ = None  # type: ignore[assignment]


def _normalize_row(row: np.ndarray) -> np.ndarray:
    """Scale a row of nonnegative weights so its float sum is exactly 1.0.

    After dividing by the exact (fsum) total, the largest entry absorbs the
    remaining rounding residual.  This keeps rebuild and serialization
    round-trips bit-stable.
    """
    total = math.fsum(row.tolist())
    if total == 0.0:
        raise ModelError("row of zeros cannot be normalized")
    if total != 1.0:
        row = row / total
    for _ in range(10):
        residual = math.fsum(row.tolist()) - 1.0
        if residual == 0.0:
            return row
        row = row.copy()
        row[int(np.argmax(row))] -= residual
    raise ModelError("row normalization failed to converge")  # pragma: no cover


def _toposort(names: list[str], parents_of: Mapping[str, tuple[str, ...]]) -> tuple[str, ...]:
    """Kahn's algorithm; ties broken by lexicographic name."""
    children: dict[str, list[str]] = {n: [] for n in names}
    pending = {n: len(parents_of[n]) for n in names}
    for name in names:
        for p in parents_of[name]:
            children[p].append(name)
    ready = [n for n in sorted(names) if pending[n] == 0]
    heapq.heapify(ready)
    order: list[str] = []
    while ready:
        name = heapq.heappop(ready)
        order.append(name)
        for child in children[name]:
            pending[child] -= 1
            if pending[child] == 0:
                heapq.heappush(ready, child)
    if len(order) < len(names):
        raise CycleError(_find_cycle(set(names) - set(order), parents_of))
    return tuple(order)


def _find_cycle(stuck: set[str], parents_of: Mapping[str, tuple[str, ...]]) -> list[str]:
    """Extract one cycle's vertices from the unplaceable remainder.

    Every vertex in ``stuck`` has at least one parent in ``stuck``; walking
    parent links must therefore revisit a vertex.
    """
    start = min(stuck)
    trail = [start]
    seen = {start: 0}
    current = start
    while True:
        current = min(p for p in parents_of[current] if p in stuck)
        if current in seen:
            cycle = trail[seen[current]:]
            cycle.reverse()  # report in edge (parent -> child) direction
            pivot = cycle.index(min(cycle))
            return cycle[pivot:] + cycle[:pivot]
        seen[current] = len(trail)
        trail.append(current)


def build_network(variables: Iterable[Variable], cpts: Iterable[Cpt]) -> Network:
    """Assemble and validate a network from variables and tables.

    Checks name uniqueness, table shapes against the declared state spaces,
    acyclicity of the parent relation, and normalizes every row.  Raises
    :class:`ModelError` (or :class:`CycleError`) describing the first
    violation found.
    """
    variables = list(variables)
    cpts = list(cpts)

    by_name: dict[str, Variable] = {}
    for var in variables:
        if var.name in by_name:
            raise ModelError(f"duplicate variable name {var.name!r}")
        by_name[var.name] = var

    table_for: dict[str, Cpt] = {}
    for cpt in cpts:
        if cpt.child not in by_name:
            raise ModelError(f"cpt for undeclared variable {cpt.child!r}")
        if cpt.child in table_for:
            raise ModelError(f"duplicate cpt for variable {cpt.child!r}")
        for parent in cpt.parents:
            if parent not in by_name:
                raise ModelError(
                    f"cpt for {cpt.child!r} references undeclared parent {parent!r}"
                )
        table_for[cpt.child] = cpt
    missing = [name for name in by_name if name not in table_for]
    if missing:
        raise ModelError(f"variable {missing[0]!r} has no cpt")

    for name, cpt in table_for.items():
        expected_rows = 1
        for parent in cpt.parents:
            expected_rows *= by_name[parent].n_states
        expected_cols = by_name[name].n_states
        if cpt.rows.shape != (expected_rows, expected_cols):
            raise ModelError(
                f"cpt for {name!r} has shape {cpt.rows.shape}, expected "
                f"({expected_rows}, {expected_cols}) from parents {list(cpt.parents)}"
            )

    parents_of = {name: table_for[name].parents for name in by_name}
    order = _toposort(list(by_name), parents_of)

    normalized: dict[str, Cpt] = {}
    for name in order:
        cpt = table_for[name]
        try:
            rows = np.vstack([_normalize_row(cpt.rows[r]) for r in range(cpt.n_rows)])
        except ModelError as exc:
            raise ModelError(f"cpt for {name!r}: {exc}") from None
        normalized[name] = Cpt(child=name, parents=cpt.parents, rows=rows)

    ordered_vars = tuple(by_name[name] for name in order)
    return Network(ordered_vars, normalized, order)


def topological_order(network: Network) -> tuple[str, ...]:
    """Variable names with every parent before its children.

    Deterministic: among simultaneously ready variables the lexicographically
    smallest name comes first.
    """
    return network.order
