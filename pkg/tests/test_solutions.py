import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from qmckit.errors import OutOfConvergenceDomain, PoleInDenominator, UnknownFamily
from qmckit.harness import DEFAULT_QPARAMS, DEFAULT_VARIANT, RunConfig, Sampler, families_usable
from qmckit.jackson import QParams
from qmckit.solutions import (
    SERIES_FAMILIES,
    HOMOGENEOUS,
    NONHOMOGENEOUS,
    UNDETERMINED,
    SolutionFamily,
    Tag,
    closed_form,
    domain_violation,
    eval_qappell_solution,
    eval_solution,
    evaluator,
    in_domain,
    qappell_constant,
)
from qmckit.variant import VariantParams, qparams_from_variant, special_equation, variant_equation

# Values at x = 3 for the default parameter pack, each product and 3phi2
# evaluated independently with mpmath (40 digits, mpmath.qhyper).
REFERENCE_AT_3 = {
    "y_alpha1": 12.026709810392227,
    "y_alpha2": -5.17230879053462,
    "y_lambda": -7.7255129633196615,
    "y_beta1": -167.43792756998715,
    "y_beta2": -23.04111865739359,
    "y_x": 0.007737833917477557,
    "a1_1": -167.435540516641,
    "a1_5": -167.50144000507535,
    "a1_9": -167.44405587253476,
    "f33": 0.40224358060153625,
    "f34": 0.3996289071703598,
    "f35": -1.956345360716154e-05,
    "f36": 0.013468320990504651,
    "f37": 1.1532051475311647,
    "f33_check": -1.6350150568014175,
    "f34_check": -1.598300269393822,
    "f35_check": -1.956345360716154e-05,
    "f36_check": -0.003433285010859906,
    "f37_check": 1.1532051475311647,
}


@pytest.fixture
def p():
    return QParams(**DEFAULT_QPARAMS)


@pytest.mark.parametrize("name, want", sorted(REFERENCE_AT_3.items()))
def test_reference_values(p, name, want):
    got = eval_solution(SolutionFamily(name, p), 3.0)
    assert abs(got - want) <= 1e-12 * abs(want)


@pytest.mark.parametrize("name", ["a2_2", "a2_6", "a2_10", "f32", "f32_check"])
def test_outside_domain_at_reference_point(p, name):
    fam = SolutionFamily(name, p)
    assert not in_domain(fam, 3.0)
    with pytest.raises(OutOfConvergenceDomain):
        eval_solution(fam, 3.0)


def test_domain_message_names_the_condition(p):
    msg = domain_violation(SolutionFamily(Tag.A2_2, p), 3.0)
    assert "b1/a1" in msg and ">= 1" in msg


def test_pole_is_reported(p):
    # b1 x / q^lam on the lattice q^{-n} puts a zero in the denominator of y_beta1
    x = p.ql / p.beta1
    with pytest.raises(PoleInDenominator):
        eval_solution(SolutionFamily(Tag.Y_BETA1, p), x)


def test_unknown_family():
    with pytest.raises(UnknownFamily):
        Tag.from_name("y_gamma")


def test_family_checks_parameter_type(p):
    with pytest.raises(TypeError):
        SolutionFamily(Tag.G_QAPPELL, p)


def test_family_sets_partition_the_tags():
    named = HOMOGENEOUS | NONHOMOGENEOUS | UNDETERMINED | {Tag.G_QAPPELL}
    assert named == set(Tag)
    assert not (HOMOGENEOUS & NONHOMOGENEOUS) and not (HOMOGENEOUS & UNDETERMINED)
    assert set(SERIES_FAMILIES) <= HOMOGENEOUS


def test_swapped_families_use_swapped_parameters(p):
    assert eval_solution(SolutionFamily(Tag.Y_BETA2, p), 3.0) == eval_solution(
        SolutionFamily(Tag.Y_BETA1, p.swapped()), 3.0
    )


def test_closed_form_records_its_argument(p):
    cf = closed_form(SolutionFamily(Tag.Y_X, p), 3.0)
    assert cf.z == p.z


def test_evaluator_is_eval_solution(p):
    assert evaluator("y_x", p)(3.0) == eval_solution(SolutionFamily(Tag.Y_X, p), 3.0)


def test_qappell_gauge_constant():
    vp = VariantParams(**DEFAULT_VARIANT)
    p = qparams_from_variant(vp)
    c = qappell_constant(p)
    for x in (3.0, 4.5, 3.0 + 1.0j):
        yx = eval_solution(SolutionFamily(Tag.Y_X, p), x)
        g = eval_qappell_solution(vp, x)
        assert abs(x ** (-vp.k2) * yx - c * g) <= 1e-10 * abs(yx * x ** (-vp.k2))


def test_qappell_solves_variant_equation():
    vp = VariantParams(**DEFAULT_VARIANT)
    for x in (3.0, 5.0):
        assert variant_equation(vp).relative_residual(lambda s: eval_qappell_solution(vp, s), x) < 1e-8


# --------------------------------------------------------------------------
# residual properties on random admissible samples


def _sample(seed, tags):
    s = Sampler(RunConfig(seed=seed), "solutions-property")
    p = s.qparams()
    if p is None:
        return None
    x = s.x()
    if not families_usable(tags, p, [x, x * p.q, x / p.q]):
        return None
    return p, x


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), tag=st.sampled_from(sorted(HOMOGENEOUS, key=lambda t: t.value)))
def test_homogeneous_residual(seed, tag):
    got = _sample(seed, (tag,))
    assume(got is not None)
    p, x = got
    eq = special_equation(p)
    assert eq.relative_residual(lambda s: eval_solution(SolutionFamily(tag, p), s), x) < 1e-8


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), tag=st.sampled_from(sorted(NONHOMOGENEOUS, key=lambda t: t.value)))
def test_nonhomogeneous_residual(seed, tag):
    got = _sample(seed, (tag,))
    assume(got is not None)
    p, x = got
    eq = special_equation(p, nonhomogeneous=True)
    assert eq.relative_residual(lambda s: eval_solution(SolutionFamily(tag, p), s), x) < 1e-8
