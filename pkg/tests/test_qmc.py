import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from qmckit.errors import EliminationSingular, InvalidParameters, ParseError
from qmckit.harness import DEFAULT_QPARAMS, RunConfig, Sampler
from qmckit.jackson import BilateralTruncation, QParams, weight_y, weight_y_divided
from qmckit.qmc import (
    MatrixTuple,
    coefficients_close,
    nullspace,
    qconvolve,
    qmiddle_convolve,
    qmiddle_convolve_detailed,
    read_tuple,
    reduce_to_scalar,
    special_tuple,
    verify_integral_transform,
    write_tuple,
)
from qmckit.qseries import cpow
from qmckit.variant import special_equation


@pytest.fixture
def p():
    return QParams(**DEFAULT_QPARAMS)


def identity_only(m=2):
    # B_1 = B_2 = 0 and B_0 = I - B_inf invertible
    return MatrixTuple(np.diag([0.3, 0.7][:m]), (np.zeros((m, m)), np.zeros((m, m))), (1.5, -2.0))


class TestMatrixTuple:
    def test_b0_closes_the_sum(self, p):
        t = special_tuple(p)
        assert np.allclose(t.b0 + t.b_inf + sum(t.blocks), np.eye(1))

    def test_at_matches_partial_fractions(self, p):
        t = special_tuple(p)
        x = 0.8 + 0.3j
        a1, a2, b1, b2 = p.alpha1, p.alpha2, p.beta1, p.beta2
        # scalar equation y(qx) = (1 - b1 x)(1 - b2 x) / ((1 - a1 x)(1 - a2 x)) y(x)
        want = (1 - b1 * x) * (1 - b2 * x) / ((1 - a1 * x) * (1 - a2 * x))
        assert abs(t.at(x)[0, 0] - want) < 1e-13 * abs(want)

    @pytest.mark.parametrize(
        "args",
        [
            ([[1.0]], (), ()),
            ([[1.0]], ([[1.0]],), (0.0,)),
            ([[1.0]], ([[1.0]], [[2.0]]), (1.0, 1.0)),
            ([[1.0]], ([[1.0]],), (1.0, 2.0)),
            ([[1.0, 2.0]], ([[1.0]],), (1.0,)),
        ],
    )
    def test_invalid(self, args):
        with pytest.raises(InvalidParameters):
            MatrixTuple(*args)


def test_convolution_size_and_rows(p):
    t = identity_only()
    F = qconvolve(t, 0.4, 0.5)
    assert F.m == (t.n_poles + 1) * t.m
    row = np.hstack(t.all_blocks())
    f_hat = np.eye(F.m) - F.b_inf
    for i in range(t.n_poles + 1):
        assert np.allclose(f_hat[i * t.m:(i + 1) * t.m], row)


def test_section2_dimensions(p):
    mc = qmiddle_convolve_detailed(special_tuple(p), p.lam, p.q)
    assert (mc.K.dim, mc.L.dim, mc.result.m) == (1, 0, 2)


def test_identity_only_tuple_dimensions():
    # ker B_1 = ker B_2 = C^2, ker B_0 = 0, and 1 - q^lam avoids the spectrum of B_0
    mc = qmiddle_convolve_detailed(identity_only(), 0.4, 0.5)
    assert (mc.K.dim, mc.L.dim, mc.result.m) == (4, 0, 2)


def test_identity_only_tuple_with_resonant_lambda():
    # 1 - q^lam = 0.7 is an eigenvalue of B_0; its eigenvector repeated per block spans L
    q = 0.5
    lam = math.log(0.3) / math.log(q)
    mc = qmiddle_convolve_detailed(identity_only(), lam, q)
    assert (mc.K.dim, mc.L.dim, mc.result.m) == (4, 1, 1)


def test_nullspace_against_known_rank():
    M = np.array([[1, 2, 3], [2, 4, 6], [1, 0, 1]], dtype=complex)
    ns = nullspace(M)
    assert ns.dim == 1
    assert np.allclose(M @ ns.vectors, 0)


def test_nullspace_of_zero_matrix():
    assert nullspace(np.zeros((2, 3))).dim == 3


def test_quotient_is_compression(p):
    mc = qmiddle_convolve_detailed(special_tuple(p), p.lam, p.q)
    V = mc.complement
    assert np.allclose(V.conj().T @ V, np.eye(V.shape[1]))
    assert qmiddle_convolve(special_tuple(p), p.lam, p.q).same_as(mc.result, 1e-12)


def test_reduce_to_scalar_matches_direct_equation(p):
    mc = qmiddle_convolve_detailed(special_tuple(p), p.lam, p.q)
    eq = reduce_to_scalar(mc.result, p.q, mc.ambient_functional(1))
    assert coefficients_close(eq, special_equation(p)) < 1e-12


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_reduce_to_scalar_random_packs(seed):
    p = Sampler(RunConfig(seed=seed), "reduce").qparams()
    assume(p is not None and abs(1 - p.ql) >= 1e-3)
    mc = qmiddle_convolve_detailed(special_tuple(p), p.lam, p.q)
    assert (mc.K.dim, mc.L.dim) == (1, 0)
    eq = reduce_to_scalar(mc.result, p.q, mc.ambient_functional(1))
    assert coefficients_close(eq, special_equation(p)) < 1e-12


def test_reduce_needs_two_by_two(p):
    with pytest.raises(EliminationSingular):
        reduce_to_scalar(special_tuple(p), p.q)


def test_integral_transform_on_gauged_tuple(p):
    mu = 1.0
    assert 0 < mu < (p.lam - p.mu_prime).real
    bt = BilateralTruncation(max_neg=2000, max_pos=2000)
    for xi in (1 / p.alpha1, 0.9 + 0.4j):
        res = verify_integral_transform(
            special_tuple(p, mu), p.lam, p.q, [1.7, 2.5 + 0.5j], xi,
            lambda u: np.array([cpow(u, mu) * weight_y(u, p)]),
            bt,
            divided=lambda i, u: np.array([weight_y_divided(i, u, p, mu)]),
        )
        assert res < 1e-8


class TestTupleFiles:
    def test_round_trip_is_exact(self, tmp_path, p):
        t = special_tuple(p, 0.3)
        path = tmp_path / "t.txt"
        write_tuple(path, t, p.q, p.lam)
        back, q, lam = read_tuple(path)
        assert back.same_as(t) and q == p.q and lam == p.lam

    def test_comments_and_blank_lines(self, tmp_path):
        path = tmp_path / "t.txt"
        path.write_text("# scalar tuple\n1 1 0.5 0 0.3 0\n\n2 0\n1 0\n4 0\n")
        t, q, lam = read_tuple(path)
        assert t.m == 1 and t.poles == (4,) and q == 0.5

    @pytest.mark.parametrize(
        "text",
        [
            "",
            "1 1 0.5 0\n",
            "x 1 0.5 0 0.3 0\n2 0\n1 0\n4 0\n",
            "1 1 0.5 0 0.3 0\n2 0\n1 0\n",
            "1 1 0.5 0 0.3 0\n2\n1 0\n4 0\n",
            "1 1 0.5 0 0.3 0\n2 0\n1 0\n0 0\n",
            "1 2 0.5 0 0.3 0\n2 0\n1 0\n1 0\n4 0\n",
            "1 1 0.5 0 0.3 0\n2 0\n1 0 7 0\n4 0\n",
            "1 1 0.5 0 0.3 0\n2 0\nnan? 0\n4 0\n",
        ],
    )
    def test_malformed(self, tmp_path, text):
        path = tmp_path / "bad.txt"
        path.write_text(text)
        with pytest.raises(ParseError):
            read_tuple(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError):
            read_tuple(tmp_path / "nope.txt")
