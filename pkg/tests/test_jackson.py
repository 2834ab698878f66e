import cmath

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmckit.errors import InvalidParameters, TruncationFailure, ZeroBase
from qmckit.harness import DEFAULT_QPARAMS
from qmckit.jackson import (
    BilateralTruncation,
    QParams,
    jackson_integral,
    lattice_exponent,
    weight_y,
    weight_y_divided,
    yhat1_bilateral,
)
from qmckit.qseries import Truncation
from qmckit.solutions import SolutionFamily, Tag, eval_solution

# Direct 40-digit mpmath sum of the one-sided Jackson series for y1_hat at
# x = 3, xi = 1/alpha1 with the default parameter pack.
YHAT1_AT_INV_ALPHA1 = 12.02670981039224


@pytest.fixture
def p():
    return QParams(**DEFAULT_QPARAMS)


@settings(max_examples=40, deadline=None)
@given(q=st.floats(0.2, 0.8), k=st.integers(0, 6), r=st.floats(0.2, 3.0), a=st.floats(-3, 3))
def test_jackson_integral_of_monomial(q, k, r, a):
    # int_0^xi s^k d_q s = (1 - q) xi^{k+1} / (1 - q^{k+1})
    xi = r * cmath.exp(1j * a)
    got = jackson_integral(lambda s: s**k, xi, q, n_min=0)
    want = (1 - q) * xi ** (k + 1) / (1 - q ** (k + 1))
    assert abs(got - want) <= 1e-13 * abs(want)


def test_bilateral_sum_of_two_sided_decaying_function():
    # both tails decay geometrically; compare with a generous direct sum
    q = 0.5
    got = jackson_integral(lambda s: 1 / (1 + s) ** 2, 1.0, q, BilateralTruncation(max_neg=2000, max_pos=2000))
    direct = (1 - q) * sum(q**n / (1 + q**n) ** 2 for n in range(-200, 200))
    assert abs(got - direct) < 1e-13


def test_jackson_requires_nonzero_scale():
    with pytest.raises(ZeroBase):
        jackson_integral(lambda s: s, 0, 0.5)


def test_jackson_reports_slow_tail():
    with pytest.raises(TruncationFailure):
        jackson_integral(lambda s: 1 / s, 1.0, 0.5, BilateralTruncation(max_neg=50, max_pos=50))


def test_yhat1_at_lattice_start_matches_reference(p):
    got = yhat1_bilateral(3.0, 1 / p.alpha1, p)
    assert abs(got - YHAT1_AT_INV_ALPHA1) / abs(YHAT1_AT_INV_ALPHA1) < 1e-12


@pytest.mark.parametrize(
    "tag, xi",
    [
        (Tag.Y_ALPHA1, lambda p, x: 1 / p.alpha1),
        (Tag.Y_ALPHA2, lambda p, x: 1 / p.alpha2),
        (Tag.Y_LAMBDA, lambda p, x: x / p.ql),
    ],
)
def test_specialised_scales_give_closed_forms(p, tag, xi):
    for x in (1.7, 3.0, 2.2 + 0.8j):
        got = yhat1_bilateral(x, xi(p, x), p)
        want = eval_solution(SolutionFamily(tag, p), x)
        assert abs(got - want) <= 1e-10 * abs(want)


def test_lattice_exponent():
    assert lattice_exponent(0.3**4, 0.3) == 4
    assert lattice_exponent(0.3**-2, 0.3) == -2
    assert lattice_exponent(0.7, 0.3) is None


def test_divided_weight_cancels_the_pole(p):
    s = 1 / p.alpha1 * (1 + 1e-9)
    direct = weight_y(s, p) / (s - 1 / p.alpha1)
    assert abs(weight_y_divided(1, s, p) - direct) < 1e-5 * abs(direct)
    assert cmath.isfinite(weight_y_divided(1, 1 / p.alpha1, p))


class TestQParams:
    def test_constraint_holds(self, p):
        gap = cmath.exp(p.mu_prime * cmath.log(p.q)) * p.alpha1 * p.alpha2 / (p.beta1 * p.beta2)
        assert abs(gap - 1) < 1e-14

    def test_swapped(self, p):
        s = p.swapped()
        assert (s.beta1, s.beta2) == (p.beta2, p.beta1)

    @pytest.mark.parametrize(
        "change",
        [{"alpha1": 0}, {"alpha2": DEFAULT_QPARAMS["alpha1"]}, {"beta2": DEFAULT_QPARAMS["beta1"]}],
    )
    def test_rejects_degenerate(self, change):
        with pytest.raises(InvalidParameters):
            QParams(**{**DEFAULT_QPARAMS, **change})

    def test_truncation_is_configurable(self):
        with pytest.raises(ValueError):
            BilateralTruncation(Truncation(), max_neg=0)
