"""Forward sampling and likelihood weighting.

These estimators converge to the exact answers at the usual O(1/sqrt(n))
rate and serve as a statistical cross-check of the elimination engine.

Randomness comes from numpy's PCG64 bit generator seeded through
``np.random.default_rng(seed)``; one vector of n uniforms is consumed per
unobserved variable, in topological order.  That makes sample sets
byte-identical for identical (network, evidence, n, seed) across runs and
platforms.  To shard work across processes, split n and derive per-shard
seeds with ``np.random.SeedSequence(seed).spawn(shards)``, then concatenate
rows in shard order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Evidence, Network


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Sampled respondents: one row per draw, columns in topological order.

    ``indices`` stores integer state indices; :attr:`rows` materializes the
    corresponding labels.  Ancestral samples carry unit weights; likelihood
    weighting stores each row's evidence likelihood.
    """

    columns: tuple[str, ...]
    state_spaces: tuple[tuple[str, ...], ...]
    indices: np.ndarray
    weights: np.ndarray
    seed: int

    def __post_init__(self) -> None:
        indices = np.ascontiguousarray(self.indices, dtype=np.int64)
        weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        if indices.ndim != 2 or indices.shape[1] != len(self.columns):
            raise ValueError("indices must be (n, len(columns))")
        if weights.shape != (indices.shape[0],):
            raise ValueError("weights must have one entry per row")
        if np.any(weights < 0.0):
            raise ValueError("weights must be nonnegative")
        indices.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return self.indices.shape[0]

    @property
    def rows(self) -> list[tuple[str, ...]]:
        """Rows as state-label tuples (built on demand)."""
        return [
            tuple(space[i] for space, i in zip(self.state_spaces, row))
            for row in self.indices
        ]

    def column(self, name: str) -> np.ndarray:
        return self.indices[:, self.columns.index(name)]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SampleSet):
            return NotImplemented
        return (
            self.columns == other.columns
            and self.state_spaces == other.state_spaces
            and self.seed == other.seed
            and bool(np.array_equal(self.indices, other.indices))
            and bool(np.array_equal(self.weights, other.weights))
        )

    __hash__ = None  # type: ignore[assignment]


def _row_indices(network: Network, name: str, drawn: dict[str, np.ndarray], n: int) -> np.ndarray:
    """CPT row index per sample, from the parents drawn so far."""
    rows = np.zeros(n, dtype=np.int64)
    step = 1
    for parent in reversed(network.cpts[name].parents):
        rows += drawn[parent] * step
        step *= network.variable(parent).n_states
    return rows


def _draw_states(rows: np.ndarray, table: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Map uniforms to state indices via each row's cumulative distribution."""
    cum = np.cumsum(table, axis=1)
    bounds = cum[rows, :-1]
    return (u[:, None] >= bounds).sum(axis=1)


def ancestral_sample(network: Network, n: int, seed: int) -> SampleSet:
    """Draw n independent joint samples, each variable after its parents."""
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    drawn: dict[str, np.ndarray] = {}
    for name in network.order:
        rows = _row_indices(network, name, drawn, n)
        drawn[name] = _draw_states(rows, network.cpts[name].rows, rng.random(n))
    indices = np.column_stack([drawn[name] for name in network.order])
    return SampleSet(
        columns=network.order,
        state_spaces=tuple(network.variable(c).states for c in network.order),
        indices=indices,
        weights=np.ones(n),
        seed=seed,
    )


def likelihood_weighted_sample(
    network: Network, evidence: Evidence | None, n: int, seed: int
) -> SampleSet:
    """Sample with evidence variables clamped to their observed states.

    Each row's weight is the product of the clamped variables' conditional
    probabilities given that row's sampled parents.  With empty evidence
    this degenerates to ancestral sampling with unit weights.  Weights may
    all come out zero when the evidence is (near-)impossible; callers should
    check before normalizing.
    """
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    evidence = evidence if evidence is not None else Evidence()
    evidence.validate(network)
    rng = np.random.default_rng(seed)
    drawn: dict[str, np.ndarray] = {}
    weights = np.ones(n)
    for name in network.order:
        rows = _row_indices(network, name, drawn, n)
        table = network.cpts[name].rows
        if name in evidence:
            observed = network.variable(name).state_index(evidence[name])
            drawn[name] = np.full(n, observed, dtype=np.int64)
            weights = weights * table[rows, observed]
        else:
            drawn[name] = _draw_states(rows, table, rng.random(n))
    indices = np.column_stack([drawn[name] for name in network.order])
    return SampleSet(
        columns=network.order,
        state_spaces=tuple(network.variable(c).states for c in network.order),
        indices=indices,
        weights=weights,
        seed=seed,
    )


def empirical_marginals(samples: SampleSet, nodes) -> dict[str, dict[str, float]]:
    """Weight-normalized state frequencies for the requested variables."""
    nodes = set(nodes)
    unknown = nodes - set(samples.columns)
    if unknown:
        raise ValueError(f"nodes {sorted(unknown)} are not sample columns")
    total = float(np.sum(samples.weights))
    if total == 0.0:
        raise ValueError("total sample weight is zero; evidence may be impossible")
    out: dict[str, dict[str, float]] = {}
    for position, name in enumerate(samples.columns):
        if name not in nodes:
            continue
        space = samples.state_spaces[position]
        counts = np.bincount(
            samples.indices[:, position], weights=samples.weights, minlength=len(space)
        )
        out[name] = dict(zip(space, (counts / total).tolist()))
    return out
