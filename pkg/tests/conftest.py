"""Shared fixtures: the example networks, file paths, and test-side oracles."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from traitnet import (
    Cpt,
    Evidence,
    Network,
    Role,
    Variable,
    brute_force_joint,
    build_network,
    compile_network,
)

settings.register_profile("ci", derandomize=True, max_examples=100)
settings.load_profile("ci")

FIXTURES = Path(__file__).parent / "fixtures"


# --------------------------------------------------------------------------
# Example networks (the same tables as the fixture files, built in code)
# --------------------------------------------------------------------------

def make_one_question_network() -> Network:
    """One five-level trait scored by a single five-point question."""
    return build_network(
        [
            Variable("F", ("0", "1", "2", "3", "4"), Role.TRAIT),
            Variable("Q11", ("1", "2", "3", "4", "5"), Role.QUESTION),
        ],
        [
            Cpt("F", (), [20, 20, 20, 20, 20]),
            Cpt("Q11", ("F",), [
                [70, 15, 8, 5, 2],
                [45, 25, 15, 10, 5],
                [25, 25, 25, 15, 10],
                [10, 15, 25, 30, 20],
                [5, 10, 15, 30, 40],
            ]),
        ],
    )


def make_two_question_network() -> Network:
    """A binary trait scored by two five-point questions."""
    return build_network(
        [
            Variable("F", ("0", "1"), Role.TRAIT),
            Variable("Q11", ("1", "2", "3", "4", "5"), Role.QUESTION),
            Variable("Q12", ("1", "2", "3", "4", "5"), Role.QUESTION),
        ],
        [
            Cpt("F", (), [50, 50]),
            Cpt("Q11", ("F",), [[50, 30, 10, 5, 5], [2, 3, 5, 40, 50]]),
            Cpt("Q12", ("F",), [[60, 20, 10, 5, 5], [5, 5, 10, 40, 40]]),
        ],
    )


def make_five_question_network() -> Network:
    """A five-level trait scored by five five-point questions."""
    return build_network(
        [Variable("F", ("0", "1", "2", "3", "4"), Role.TRAIT)]
        + [
            Variable(f"Q1{k}", ("1", "2", "3", "4", "5"), Role.QUESTION)
            for k in range(1, 6)
        ],
        [
            Cpt("F", (), [20, 20, 20, 20, 20]),
            Cpt("Q11", ("F",), [
                [30, 20, 15, 15, 20],
                [30, 15, 15, 20, 20],
                [10, 20, 10, 30, 30],
                [0, 10, 20, 25, 45],
                [0, 0, 10, 30, 60],
            ]),
            Cpt("Q12", ("F",), [
                [35, 25, 10, 25, 5],
                [25, 20, 25, 15, 15],
                [15, 20, 20, 20, 25],
                [10, 10, 10, 30, 40],
                [0, 10, 10, 30, 50],
            ]),
            Cpt("Q13", ("F",), [
                [40, 20, 20, 20, 0],
                [30, 20, 20, 20, 10],
                [20, 25, 20, 20, 15],
                [15, 10, 15, 40, 20],
                [0, 15, 15, 30, 40],
            ]),
            Cpt("Q14", ("F",), [
                [50, 30, 20, 0, 0],
                [40, 40, 10, 10, 0],
                [35, 30, 25, 10, 0],
                [20, 15, 35, 20, 10],
                [5, 10, 30, 30, 25],
            ]),
            Cpt("Q15", ("F",), [
                [80, 10, 10, 0, 0],
                [50, 20, 20, 10, 0],
                [30, 40, 20, 10, 0],
                [20, 25, 25, 20, 10],
                [10, 15, 35, 20, 20],
            ]),
        ],
    )


@pytest.fixture(scope="session")
def one_question():
    return make_one_question_network()


@pytest.fixture(scope="session")
def two_question():
    return make_two_question_network()


@pytest.fixture(scope="session")
def five_question():
    return make_five_question_network()


@pytest.fixture(scope="session")
def two_question_engine(two_question):
    return compile_network(two_question)


@pytest.fixture(scope="session")
def five_question_engine(five_question):
    return compile_network(five_question)


# --------------------------------------------------------------------------
# Test-side oracle: marginals straight from the enumerated joint
# --------------------------------------------------------------------------

def oracle_marginals(network: Network, evidence: Evidence | None, nodes) -> dict[str, np.ndarray]:
    """Posterior marginals by exhaustive enumeration, bypassing elimination."""
    evidence = evidence if evidence is not None else Evidence()
    joint = brute_force_joint(network, evidence)
    total = math.fsum(joint.values.ravel().tolist())
    out: dict[str, np.ndarray] = {}
    for name in nodes:
        var = network.variable(name)
        if name in evidence:
            dist = np.zeros(var.n_states)
            dist[var.state_index(evidence[name])] = 1.0
            out[name] = dist
            continue
        axis = joint.names.index(name)
        other = tuple(i for i in range(len(joint.names)) if i != axis)
        dist = joint.values.sum(axis=other) if other else joint.values.copy()
        out[name] = dist / total
    return out


def oracle_mass(network: Network, evidence: Evidence | None) -> float:
    evidence = evidence if evidence is not None else Evidence()
    joint = brute_force_joint(network, evidence)
    return math.fsum(joint.values.ravel().tolist())


# --------------------------------------------------------------------------
# Random model generator for the randomized suites
# --------------------------------------------------------------------------

def random_network(rng: np.random.Generator, max_vars: int = 6, max_states: int = 5,
                   zero_fraction: float = 0.0) -> Network:
    """A random DAG with random (optionally sparse) normalized tables."""
    n = int(rng.integers(2, max_vars + 1))
    names = [f"V{i}" for i in range(n)]
    topo = [names[i] for i in rng.permutation(n)]
    variables = []
    cards = {}
    for name in names:
        k = int(rng.integers(2, max_states + 1))
        cards[name] = k
        variables.append(Variable(name, tuple(str(s) for s in range(k))))
    cpts = []
    for pos, name in enumerate(topo):
        max_parents = min(pos, 3)
        n_parents = int(rng.integers(0, max_parents + 1))
        parents = tuple(
            topo[i] for i in sorted(rng.choice(pos, size=n_parents, replace=False))
        ) if n_parents else ()
        n_rows = int(np.prod([cards[p] for p in parents])) if parents else 1
        rows = rng.random((n_rows, cards[name])) + 1e-3
        if zero_fraction > 0.0:
            rows[rng.random(rows.shape) < zero_fraction] = 0.0
            dead = rows.sum(axis=1) == 0.0
            rows[dead, rng.integers(0, cards[name])] = 1.0
        cpts.append(Cpt(name, parents, rows))
    return build_network(variables, cpts)


def random_evidence(rng: np.random.Generator, network: Network) -> Evidence:
    """Random evidence: empty roughly a third of the time."""
    names = list(network.order)
    if rng.random() < 0.35:
        return Evidence()
    count = int(rng.integers(1, len(names) + 1))
    picked = [names[i] for i in rng.choice(len(names), size=count, replace=False)]
    return Evidence({
        name: network.variable(name).states[rng.integers(0, network.variable(name).n_states)]
        for name in picked
    })
