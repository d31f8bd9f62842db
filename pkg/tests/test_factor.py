"""Factor algebra: construction, product, marginalize, reduce, normalize."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from traitnet import (
    Factor,
    ImpossibleEvidenceError,
    ModelError,
    Variable,
    factor_from_cpt,
    marginalize,
    normalize,
    product,
    reduce,
    transpose,
)

A = Variable("A", ("0", "1"))
B = Variable("B", ("x", "y", "z"))
C = Variable("C", ("0", "1"))
D = Variable("D", ("p", "q", "r", "s"))
_POOL = (A, B, C, D)


def nonneg_values(shape):
    # zeros are intentionally common; positive entries stay well clear of the
    # subnormal range so reassociated products do not underflow
    positive = st.floats(1e-6, 10.0, allow_nan=False, allow_infinity=False)
    return arrays(np.float64, shape, elements=st.one_of(st.just(0.0), positive))


@st.composite
def factors(draw, pool=_POOL, max_scope=3):
    count = draw(st.integers(0, min(max_scope, len(pool))))
    picked = draw(st.permutations(pool))[:count]
    shape = tuple(v.n_states for v in picked)
    return Factor(tuple(picked), draw(nonneg_values(shape)))


class TestFactorType:
    def test_shape_must_match_scope(self):
        with pytest.raises(ValueError, match="shape"):
            Factor((A, B), np.ones((2, 2)))

    def test_empty_scope_is_a_scalar(self):
        f = Factor((), np.asarray(2.5))
        assert f.values.shape == ()
        assert f.total() == 2.5

    def test_negative_values_rejected(self):
        with pytest.raises(ValueError, match="nonnegative"):
            Factor((A,), np.array([1.0, -1.0]))

    def test_duplicate_scope_rejected(self):
        with pytest.raises(ValueError, match="repeats"):
            Factor((A, A), np.ones((2, 2)))


class TestFactorFromCpt:
    def test_question_table_layout(self, two_question):
        f = factor_from_cpt(two_question.cpts["Q11"], two_question)
        assert f.names == ("F", "Q11")
        np.testing.assert_allclose(
            f.values.ravel(),
            [0.50, 0.30, 0.10, 0.05, 0.05, 0.02, 0.03, 0.05, 0.40, 0.50],
        )

    def test_prior_is_one_dimensional(self, two_question):
        f = factor_from_cpt(two_question.cpts["F"], two_question)
        assert f.names == ("F",)
        np.testing.assert_array_equal(f.values, [0.5, 0.5])

    def test_deterministic_rows_stay_exact(self):
        from traitnet import Cpt, build_network

        net = build_network([Variable("X", ("a", "b"))], [Cpt("X", (), [1, 0])])
        f = factor_from_cpt(net.cpts["X"], net)
        assert f.values.tolist() == [1.0, 0.0]


class TestProduct:
    def test_prior_times_cpt_gives_joint(self, two_question):
        prior = factor_from_cpt(two_question.cpts["F"], two_question)
        q11 = factor_from_cpt(two_question.cpts["Q11"], two_question)
        joint = product(prior, q11)
        marginal = marginalize(joint, "F")
        np.testing.assert_allclose(marginal.values, [0.26, 0.165, 0.075, 0.225, 0.275])

    def test_unit_factor_is_identity(self):
        f = Factor((A, B), np.arange(6, dtype=float).reshape(2, 3))
        unit = Factor((), np.asarray(1.0))
        assert product(f, unit) == f
        out = product(unit, f)
        np.testing.assert_array_equal(out.values, f.values)

    def test_state_count_mismatch(self):
        other_a = Variable("A", ("0", "1", "2"))
        with pytest.raises(ModelError, match="state-count mismatch"):
            product(Factor((A,), np.ones(2)), Factor((other_a,), np.ones(3)))

    @given(factors(), factors())
    def test_commutative_up_to_scope_order(self, f, g):
        ab = product(f, g)
        ba = product(g, f)
        assert sorted(ab.names) == sorted(ba.names)
        realigned = transpose(ba, ab.names)
        np.testing.assert_allclose(realigned.values, ab.values, rtol=1e-12, atol=0)

    @given(factors(), factors(), factors())
    def test_associative(self, f, g, h):
        left = product(product(f, g), h)
        right = product(f, product(g, h))
        realigned = transpose(right, left.names)
        np.testing.assert_allclose(realigned.values, left.values, rtol=1e-12, atol=0)


class TestMarginalize:
    def test_question_marginal(self, two_question):
        prior = factor_from_cpt(two_question.cpts["F"], two_question)
        q11 = factor_from_cpt(two_question.cpts["Q11"], two_question)
        out = marginalize(product(prior, q11), "F")
        assert out.names == ("Q11",)
        np.testing.assert_allclose(out.values, [0.26, 0.165, 0.075, 0.225, 0.275])

    def test_full_contraction_gives_total_mass(self):
        f = Factor((A, B), np.arange(6, dtype=float).reshape(2, 3))
        out = marginalize(marginalize(f, "A"), "B")
        assert out.values.shape == ()
        assert float(out.values) == 15.0

    def test_unknown_variable(self):
        with pytest.raises(ValueError, match="not in factor scope"):
            marginalize(Factor((A,), np.ones(2)), "B")

    @given(factors())
    def test_mass_preserved(self, f):
        for name in f.names:
            out = marginalize(f, name)
            assert out.total() == pytest.approx(f.total(), rel=1e-12, abs=1e-300)

    @given(factors())
    def test_order_independent(self, f):
        if len(f.names) < 2:
            return
        x, y = f.names[0], f.names[1]
        xy = marginalize(marginalize(f, x), y)
        yx = marginalize(marginalize(f, y), x)
        np.testing.assert_allclose(yx.values, xy.values, rtol=1e-12, atol=0)

    def test_cpt_child_marginal_is_all_ones(self, five_question):
        for name, cpt in five_question.cpts.items():
            f = factor_from_cpt(cpt, five_question)
            out = marginalize(f, name)
            np.testing.assert_allclose(out.values, 1.0, atol=1e-9)


class TestReduce:
    def test_slice_is_unnormalized_likelihood(self, two_question):
        prior = factor_from_cpt(two_question.cpts["F"], two_question)
        q11 = factor_from_cpt(two_question.cpts["Q11"], two_question)
        sliced = reduce(product(prior, q11), "Q11", "2")
        assert sliced.names == ("F",)
        np.testing.assert_allclose(sliced.values, [0.15, 0.015])

    def test_zero_slice_is_valid(self, five_question):
        q14 = factor_from_cpt(five_question.cpts["Q14"], five_question)
        sliced = reduce(reduce(q14, "Q14", "5"), "F", "0")
        assert float(sliced.values) == 0.0

    def test_unknown_state(self):
        with pytest.raises(Exception, match="no state"):
            reduce(Factor((A,), np.ones(2)), "A", "9")

    @given(factors(pool=(A, B)), factors(pool=(C, D)))
    def test_commutes_with_product_on_disjoint_scope(self, f, g):
        # v only in f's scope: reduce(product(f, g), v, s) == product(reduce(f, v, s), g)
        for name in f.names:
            var = f.variables[f.axis(name)]
            state = var.states[0]
            lhs = reduce(product(f, g), name, state)
            rhs = product(reduce(f, name, state), g)
            realigned = transpose(rhs, lhs.names) if lhs.names else rhs
            np.testing.assert_allclose(realigned.values, lhs.values, rtol=1e-12, atol=0)


class TestNormalize:
    def test_posterior_example(self):
        f = Factor((A,), np.array([0.15, 0.015]))
        out = normalize(f)
        np.testing.assert_allclose(out.values, [10 / 11, 1 / 11], rtol=1e-15)

    def test_idempotent(self):
        f = normalize(Factor((B,), np.array([1.0, 2.0, 5.0])))
        again = normalize(f)
        np.testing.assert_allclose(again.values, f.values, rtol=1e-12, atol=0)
        assert math.fsum(again.values.tolist()) == pytest.approx(1.0, abs=1e-12)

    def test_zero_mass_is_impossible_evidence(self):
        with pytest.raises(ImpossibleEvidenceError):
            normalize(Factor((A,), np.zeros(2)))

    def test_proportions_preserved(self):
        f = Factor((A,), np.array([3.0, 1.0]))
        out = normalize(f)
        np.testing.assert_allclose(out.values, [0.75, 0.25])
