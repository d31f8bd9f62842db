"""Turn posterior trait distributions into overall estimates.

Two summary styles are provided because questionnaire scales vary: the
most-probable level (always defined) and the expected level (defined only
when every state label is numeric).  Threshold probabilities answer
questions like "grade not less than 3".

Respondents sometimes answer off-target by accident, or hit a high grade by
luck.  :func:`apply_slip_noise` folds both effects into one symmetric
uniform mixture on CPT rows, controlled by a single rate.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ScoringError
from .inference import Engine, query
from .model import Cpt, Evidence

_COMPARATORS = {
    ">=": operator.ge,
    ">": operator.gt,
    "<=": operator.le,
    "<": operator.lt,
    "==": operator.eq,
    "=": operator.eq,
}


@dataclass(frozen=True, eq=False)
class TraitScore:
    """Posterior summary for one trait variable.

    ``expected_level`` is ``None`` when the state labels are not all
    numeric.  ``threshold_probs`` echoes each requested (comparator, level)
    pair together with its probability.
    """

    variable: str
    posterior: dict[str, float]
    map_state: str
    expected_level: float | None
    threshold_probs: tuple[tuple[str, float, float], ...] = ()


@dataclass(frozen=True)
class NoiseSpec:
    """Rate of accidental answers; 0 = none, 1 = answers carry no signal."""

    slip: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.slip <= 1.0):
            raise ScoringError(f"slip rate must be in [0, 1], got {self.slip}")


def _numeric_levels(states: Sequence[str]) -> list[float] | None:
    levels = []
    for label in states:
        try:
            levels.append(float(label))
        except ValueError:
            return None
    return levels


def score_trait(
    engine: Engine,
    trait: str,
    evidence: Evidence | None = None,
    thresholds: Iterable[tuple[str, float]] = (),
) -> TraitScore:
    """Posterior, MAP state, expected level, and threshold probabilities.

    MAP ties break toward the lowest state index.  Threshold entries are
    computed by comparing each state label numerically against the level;
    requesting one on a non-numeric scale raises :class:`ScoringError`.
    """
    result = query(engine, evidence, [trait])
    posterior = result.marginals[trait]
    states = engine.network.variable(trait).states
    probs = [posterior[s] for s in states]

    best = 0
    for i, p in enumerate(probs):
        if p > probs[best]:
            best = i
    map_state = states[best]

    levels = _numeric_levels(states)
    expected = math.fsum(l * p for l, p in zip(levels, probs)) if levels else None

    threshold_probs = []
    for comparator, level in thresholds:
        if comparator not in _COMPARATORS:
            raise ScoringError(
                f"unknown comparator {comparator!r}; use one of {sorted(_COMPARATORS)}"
            )
        if levels is None:
            raise ScoringError(
                f"threshold on {trait!r} needs numeric state labels, got {list(states)}"
            )
        level = float(level)
        op = _COMPARATORS[comparator]
        prob = math.fsum(p for l, p in zip(levels, probs) if op(l, level))
        threshold_probs.append((comparator, level, prob))

    return TraitScore(
        variable=trait,
        posterior=posterior,
        map_state=map_state,
        expected_level=expected,
        threshold_probs=tuple(threshold_probs),
    )


def apply_slip_noise(cpt: Cpt, noise: NoiseSpec) -> Cpt:
    """Mix every row with the uniform distribution at the slip rate.

    Each row becomes ``(1 - slip) * row + slip / K`` where K is the child
    cardinality.  This symmetric form covers both accidental wrong answers
    and lucky correct ones; rows stay normalized.
    """
    eps = noise.slip
    k = cpt.n_columns
    rows = (1.0 - eps) * cpt.rows + eps / k
    return Cpt(child=cpt.child, parents=cpt.parents, rows=rows)
