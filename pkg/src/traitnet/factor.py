"""Dense factor algebra: the arithmetic core of exact inference.

A factor is an unnormalized nonnegative table over an ordered scope of
discrete variables.  Values are stored as a C-ordered ``numpy`` array whose
shape is the tuple of state counts, so the flattened layout is row-major with
the last scope variable varying fastest -- the same convention as CPT rows.

All operations are pure functions returning new factors.  Summations run in
a fixed order (ascending state index for axis sums, exact ``math.fsum`` for
scalar totals) so results are bit-identical across runs.  Arithmetic is IEEE
double precision; at this package's table sizes there is no underflow risk,
so no log-space variants are provided.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ImpossibleEvidenceError, ModelError
from .model import Cpt, Network, Variable


@dataclass(frozen=True, eq=False)
class Factor:
    """Nonnegative table over an ordered variable scope."""

    variables: tuple[Variable, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "variables", tuple(self.variables))
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ValueError(f"factor scope repeats a variable: {names}")
        values = np.asarray(self.values, dtype=np.float64)
        shape = tuple(v.n_states for v in self.variables)
        if values.shape != shape:
            raise ValueError(
                f"factor values have shape {values.shape}, scope requires {shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("factor values must be finite")
        if np.any(values < 0.0):
            raise ValueError("factor values must be nonnegative")
        # own copy in C order; keeps 0-dim scalars 0-dim and callers' arrays
        # untouched when marking read-only
        values = np.array(values, dtype=np.float64, order="C")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def cards(self) -> tuple[int, ...]:
        return tuple(v.n_states for v in self.variables)

    def axis(self, name: str) -> int:
        for i, v in enumerate(self.variables):
            if v.name == name:
                return i
        raise ValueError(f"variable {name!r} is not in factor scope {self.names}")

    def total(self) -> float:
        """Exact sum of all entries (the factor's mass)."""
        return math.fsum(self.values.ravel().tolist())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Factor):
            return NotImplemented
        return self.variables == other.variables and bool(
            np.array_equal(self.values, other.values)
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"Factor({list(self.names)}, {self.values.size} values)"


def factor_from_cpt(cpt: Cpt, network: Network) -> Factor:
    """View a CPT as a factor over (parents..., child).

    The CPT row layout (last parent fastest, child states as columns) is
    exactly the C-order flattening of that scope, so this is a reshape.
    """
    scope = tuple(network.variable(p) for p in cpt.parents) + (
        network.variable(cpt.child),
    )
    shape = tuple(v.n_states for v in scope)
    return Factor(scope, cpt.rows.reshape(shape))


def product(a: Factor, b: Factor) -> Factor:
    """Pointwise product; scope is a's scope followed by b's new variables."""
    a_names = set(a.names)
    for v in b.variables:
        if v.name in a_names:
            other = a.variables[a.axis(v.name)]
            if other.n_states != v.n_states:
                raise ModelError(
                    f"state-count mismatch for shared variable {v.name!r}: "
                    f"{other.n_states} vs {v.n_states}"
                )
    extra = tuple(v for v in b.variables if v.name not in a_names)
    out_vars = a.variables + extra

    a_view = a.values.reshape(a.values.shape + (1,) * len(extra))

    b_axis = {v.name: i for i, v in enumerate(b.variables)}
    b_order = [b_axis[v.name] for v in out_vars if v.name in b_axis]
    b_shape = tuple(v.n_states if v.name in b_axis else 1 for v in out_vars)
    b_view = np.transpose(b.values, b_order).reshape(b_shape)

    return Factor(out_vars, a_view * b_view)


def marginalize(f: Factor, var: str) -> Factor:
    """Sum ``var`` out of the scope, accumulating in ascending state index."""
    axis = f.axis(var)
    out = f.values.take(0, axis=axis)
    for k in range(1, f.variables[axis].n_states):
        out = out + f.values.take(k, axis=axis)
    scope = f.variables[:axis] + f.variables[axis + 1:]
    return Factor(scope, out)


def reduce(f: Factor, var: str, state: str) -> Factor:
    """Slice the factor at ``var = state``; the scope shrinks by ``var``."""
    axis = f.axis(var)
    index = f.variables[axis].state_index(state)
    scope = f.variables[:axis] + f.variables[axis + 1:]
    return Factor(scope, f.values.take(index, axis=axis))


def normalize(f: Factor) -> Factor:
    """Scale so the entries sum to 1; proportions are preserved."""
    total = f.total()
    if total == 0.0:
        raise ImpossibleEvidenceError(
            "cannot normalize a factor with zero total mass (impossible evidence)"
        )
    if total == 1.0:
        return f
    return Factor(f.variables, f.values / total)


def transpose(f: Factor, names: Iterable[str]) -> Factor:
    """Reorder the scope to ``names`` (a permutation of the current scope)."""
    names = tuple(names)
    if sorted(names) != sorted(f.names):
        raise ValueError(
            f"{names} is not a permutation of factor scope {f.names}"
        )
    axes = [f.axis(n) for n in names]
    scope = tuple(f.variables[i] for i in axes)
    return Factor(scope, np.transpose(f.values, axes))
