import cmath

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from qmckit.errors import DivergentSeries, ModulusOfQOutOfRange, PoleInDenominator, ZeroArgument, ZeroBase
from qmckit.qseries import (
    PhiSpec,
    Truncation,
    cpow,
    min_factor_modulus,
    poch_ratio,
    qappell_phi1,
    qpoch_finite,
    qpoch_infinite,
    rphi,
    terminating_index,
    theta_q,
)

# Reference values computed with mpmath at 40 digits (explicit products,
# mpmath.qhyper, brute-force double sums).
QPOCH_FINITE_7 = 0.2161697155749117 - 0.4972350901642577j
QPOCH_INF = 0.1979032532564844 - 0.4926892885720369j
QPOCH_INF_LARGE_A = 8.712147710907225 - 6.187107144486345j
QPOCH_INF_COMPLEX_Q = 0.19995170956599317 - 0.008801569261270318j
THETA = -0.022021146822889286 - 0.013993821950490226j
PHI21 = 2.2849048621368024 + 0.2766743063380916j
PHI32 = 3.113329431859783 + 0.4299665140998359j
PHI10 = 0.2761239960499724 - 0.23506344563828518j
PHI32_TERMINATING = -573.3463292077042 - 5277.76397715442j
QAPPELL = 2.7522443111625767 - 0.706749309884325j


def rel(a, b):
    return abs(a - b) / abs(b)


class TestReferenceValues:
    def test_qpoch_finite(self):
        assert rel(qpoch_finite(0.3 + 0.4j, 0.6, 7), QPOCH_FINITE_7) < 1e-14

    def test_qpoch_finite_empty_product(self):
        assert qpoch_finite(5.0, 0.3, 0) == 1

    def test_qpoch_infinite(self):
        assert rel(qpoch_infinite(0.3 + 0.4j, 0.6), QPOCH_INF) < 1e-13
        assert rel(qpoch_infinite(-2.5 + 1j, 0.35), QPOCH_INF_LARGE_A) < 1e-13

    def test_qpoch_infinite_complex_base(self):
        assert rel(qpoch_infinite(0.7 - 0.2j, 0.5 + 0.3j), QPOCH_INF_COMPLEX_Q) < 1e-13

    def test_theta(self):
        assert rel(theta_q(1.3 + 0.4j, 0.45), THETA) < 1e-13

    def test_rphi(self):
        assert rel(rphi([0.3 + 0.1j, -0.7], [1.9j], 0.55, 0.4 - 0.3j), PHI21) < 1e-13
        assert rel(rphi([0.2, 1.4 + 0.3j, -0.5j], [2.1, -1.3 + 0.2j], 0.7, 0.6), PHI32) < 1e-13
        assert rel(rphi([2.2 - 0.5j], [], 0.4, 0.3 + 0.2j), PHI10) < 1e-13

    def test_rphi_accepts_spec(self):
        spec = PhiSpec((0.3 + 0.1j, -0.7), (1.9j,), 0.55, 0.4 - 0.3j)
        assert rel(rphi(spec), PHI21) < 1e-13

    def test_terminating_series_allows_large_argument(self):
        assert rel(rphi([0.5**-4, 3.0, 0.2 + 1j], [0.7, -1.5], 0.5, 2.5), PHI32_TERMINATING) < 1e-13

    def test_qappell(self):
        got = qappell_phi1(0.4 + 0.2j, -0.6, 1.3j, 2.2, 0.5, 0.3 - 0.2j, -0.45 + 0.1j)
        assert rel(got, QAPPELL) < 1e-13


class TestErrors:
    @pytest.mark.parametrize("q", [1.0, 1.5, -1.0, 0.0, 0.6 + 0.9j])
    def test_q_outside_unit_disc(self, q):
        with pytest.raises(ModulusOfQOutOfRange):
            qpoch_infinite(0.5, q)

    def test_divergent_argument(self):
        with pytest.raises(DivergentSeries):
            rphi([0.2, 0.3], [0.4], 0.5, 1.2)

    def test_lower_parameter_on_lattice(self):
        with pytest.raises(PoleInDenominator):
            rphi([0.2, 0.3], [0.5**-3], 0.5, 0.4)

    def test_pole_in_ratio(self):
        with pytest.raises(PoleInDenominator):
            poch_ratio([0.3], [0.5**-2], 0.5)

    def test_theta_at_zero(self):
        with pytest.raises(ZeroArgument):
            theta_q(0, 0.5)

    def test_qappell_needs_small_arguments(self):
        with pytest.raises(DivergentSeries):
            qappell_phi1(0.4, 0.2, 0.3, 1.5, 0.5, 1.1, 0.2)

    def test_truncation_validation(self):
        with pytest.raises(ValueError):
            Truncation(rel_tol=0)
        with pytest.raises(ValueError):
            Truncation(max_terms=3, tail_window=5)


def test_terminating_index():
    assert terminating_index(0.3**-5, 0.3) == 5
    assert terminating_index(1.0, 0.3) == 0
    assert terminating_index(0.7, 0.3) is None


def test_min_factor_modulus_detects_lattice_hit():
    assert min_factor_modulus(0.5**-3, 0.5) < 1e-12
    assert min_factor_modulus(0.9j, 0.5) > 0.1


def test_cpow_principal_branch():
    assert cmath.isclose(cpow(-1, 0.5), 1j)
    with pytest.raises(ZeroBase):
        cpow(0, 0.5)


def test_log_space_ratio_stays_finite():
    # both products alone overflow a double
    big = 1e200
    val = poch_ratio([big], [big * 1.0000001], 0.5)
    assert cmath.isfinite(val)


# --------------------------------------------------------------------------
# properties

qs = st.floats(0.2, 0.8)
moduli = st.floats(0.05, 3.0)
args = st.floats(-3.1, 3.1)


def cplx(r, a):
    return r * cmath.exp(1j * a)


@settings(max_examples=60, deadline=None)
@given(q=qs, r=moduli, a=args)
def test_qpoch_functional_equation(q, r, a):
    x = cplx(r, a)
    lhs = qpoch_infinite(x, q)
    rhs = (1 - x) * qpoch_infinite(q * x, q)
    assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), abs(rhs), 1e-300) + 1e-300


@settings(max_examples=60, deadline=None)
@given(q=qs, r=moduli, a=args, n=st.integers(0, 30))
def test_finite_times_tail_is_infinite(q, r, a, n):
    x = cplx(r, a)
    lhs = qpoch_infinite(x, q)
    rhs = qpoch_finite(x, q, n) * qpoch_infinite(x * q**n, q)
    assert abs(lhs - rhs) <= 1e-11 * max(abs(lhs), abs(rhs)) + 1e-300


@settings(max_examples=60, deadline=None)
@given(q=qs, r=st.floats(0.1, 5.0), a=args)
def test_theta_quasi_periodicity(q, r, a):
    t = cplx(r, a)
    assume(min_factor_modulus(t, q) > 1e-6 and min_factor_modulus(q / t, q) > 1e-6)
    lhs = theta_q(q * t, q)
    rhs = -theta_q(t, q) / t
    assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), abs(rhs))


@settings(max_examples=60, deadline=None)
@given(q=qs, ra=moduli, aa=args, rz=st.floats(0.0, 0.9), az=args)
def test_q_binomial(q, ra, aa, rz, az):
    a, z = cplx(ra, aa), cplx(rz, az)
    lhs = rphi([a], [], q, z)
    rhs = qpoch_infinite(a * z, q) / qpoch_infinite(z, q)
    assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), abs(rhs))


param = st.tuples(st.floats(0.1, 2.5), args).map(lambda p: cplx(*p))


@settings(max_examples=40, deadline=None)
@given(q=qs, ups=st.lists(param, min_size=3, max_size=3), lows=st.lists(param, min_size=2, max_size=2),
       rz=st.floats(0.0, 0.9), az=args, perm=st.permutations(range(3)))
def test_rphi_parameter_permutation(q, ups, lows, rz, az, perm):
    assume(all(min_factor_modulus(b, q) > 1e-3 for b in lows))
    z = cplx(rz, az)
    base = rphi(ups, lows, q, z)
    swapped = rphi([ups[i] for i in perm], lows[::-1], q, z)
    assert abs(base - swapped) <= 1e-11 * abs(base) + 1e-300


@settings(max_examples=40, deadline=None)
@given(q=qs, n=st.integers(0, 8), b=param, c=param, d=param, e=param, rz=st.floats(0.1, 4.0), az=args)
def test_terminating_series_matches_brute_force(q, n, b, c, d, e, rz, az):
    assume(min_factor_modulus(d, q) > 1e-3 and min_factor_modulus(e, q) > 1e-3)
    z = cplx(rz, az)
    a = q ** (-n)
    brute = sum(
        qpoch_finite(a, q, k) * qpoch_finite(b, q, k) * qpoch_finite(c, q, k)
        / (qpoch_finite(q, q, k) * qpoch_finite(d, q, k) * qpoch_finite(e, q, k)) * z**k
        for k in range(n + 1)
    )
    mass = sum(
        abs(qpoch_finite(a, q, k) * qpoch_finite(b, q, k) * qpoch_finite(c, q, k)
            / (qpoch_finite(q, q, k) * qpoch_finite(d, q, k) * qpoch_finite(e, q, k)) * z**k)
        for k in range(n + 1)
    )
    got = rphi([a, b, c], [d, e], q, z)
    assert abs(got - brute) <= 1e-12 * mass


@settings(max_examples=30, deadline=None)
@given(q=qs, a=param, b=param, c=param, ry=st.floats(0.0, 0.8), ay=args)
def test_qappell_reduces_to_2phi1(q, a, b, c, ry, ay):
    # with z = 0 the double series collapses to 2phi1(a, b; c; q, y)
    assume(min_factor_modulus(c, q) > 1e-3)
    y = cplx(ry, ay)
    got = qappell_phi1(a, b, 0.7, c, q, y, 0)
    want = rphi([a, b], [c], q, y)
    assert abs(got - want) <= 1e-11 * max(abs(want), 1.0)
