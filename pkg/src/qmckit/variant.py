"""Three-term scalar q-difference equations: the degree-2 variant of the
q-hypergeometric equation, its specialisation satisfied by ``y1_hat``, the
inhomogeneous version, and the parameter maps between these forms."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import InvalidParameters
from .jackson import QParams
from .qseries import Number, check_q, cpow

Func = Callable[[complex], complex]


def _poly(c) -> np.ndarray:
    c = np.atleast_1d(np.asarray(c, dtype=complex))
    return npoly.polytrim(c, 0) if c.size else np.zeros(1, complex)


@dataclass(frozen=True)
class ScalarQDiffEq:
    """``down(x) g(x/q) + up(x) g(qx) + mid(x) g(x) = nonhom(x)``.

    Polynomials are coefficient arrays in ascending powers of ``x``.
    """

    coeff_down: np.ndarray
    coeff_up: np.ndarray
    coeff_mid: np.ndarray
    q: complex
    nonhom: np.ndarray = field(default_factory=lambda: np.zeros(1, complex))

    def __post_init__(self):
        for name in ("coeff_down", "coeff_up", "coeff_mid", "nonhom"):
            object.__setattr__(self, name, _poly(getattr(self, name)))
        object.__setattr__(self, "q", complex(self.q))
        if not any(np.any(c != 0) for c in (self.coeff_down, self.coeff_up, self.coeff_mid)):
            raise InvalidParameters("all coefficient polynomials vanish")

    def terms(self, g: Func, x: Number) -> tuple[complex, complex, complex]:
        x = complex(x)
        q = self.q
        return (
            npoly.polyval(x, self.coeff_down) * g(x / q),
            npoly.polyval(x, self.coeff_up) * g(q * x),
            npoly.polyval(x, self.coeff_mid) * g(x),
        )

    def lhs(self, g: Func, x: Number) -> complex:
        """Left-hand side minus the inhomogeneous term."""
        return complex(sum(self.terms(g, x)) - npoly.polyval(complex(x), self.nonhom))

    def relative_residual(self, g: Func, x: Number) -> float:
        """``|lhs| / (1 + max |term|)``."""
        terms = self.terms(g, x)
        r = sum(terms) - npoly.polyval(complex(x), self.nonhom)
        return abs(r) / (1 + max(abs(v) for v in terms))

    def homogeneous(self) -> "ScalarQDiffEq":
        return ScalarQDiffEq(self.coeff_down, self.coeff_up, self.coeff_mid, self.q)

    def normalized(self) -> "ScalarQDiffEq":
        """Rescaled so the ``g(x/q)`` coefficient is monic."""
        lead = self.coeff_down[-1]
        if lead == 0:
            raise InvalidParameters("g(x/q) coefficient vanishes; cannot normalise")
        return ScalarQDiffEq(
            self.coeff_down / lead, self.coeff_up / lead, self.coeff_mid / lead, self.q, self.nonhom / lead
        )

    def coefficient_matrix(self, degree: int = 2) -> np.ndarray:
        """Rows ``down, up, mid`` padded to ``degree + 1`` ascending coefficients."""
        out = np.zeros((3, degree + 1), complex)
        for i, c in enumerate((self.coeff_down, self.coeff_up, self.coeff_mid)):
            if c.size > degree + 1:
                raise ValueError(f"coefficient degree exceeds {degree}")
            out[i, : c.size] = c
        return out


@dataclass(frozen=True)
class VariantParams:
    """Exponents ``h_i, l_i, k_i`` and singular parameters ``t_i``."""

    q: complex
    h1: complex
    h2: complex
    l1: complex
    l2: complex
    k1: complex
    k2: complex
    t1: complex
    t2: complex

    def __post_init__(self):
        for name in ("q", "h1", "h2", "l1", "l2", "k1", "k2", "t1", "t2"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        check_q(self.q)
        if self.t1 == 0 or self.t2 == 0:
            raise InvalidParameters("t1 and t2 must be nonzero")

    def qp(self, e: Number) -> complex:
        return cpow(self.q, e)

    @property
    def p(self) -> complex:
        return self.qp((self.h1 + self.h2 + self.l1 + self.l2 + self.k1 + self.k2) / 2)

    @property
    def E(self) -> complex:
        qp = self.qp
        return -self.p * ((qp(-self.h2) + qp(-self.l2)) * self.t1 + (qp(-self.h1) + qp(-self.l1)) * self.t2)

    @property
    def lambda0(self) -> complex:
        return (self.h1 + self.h2 - self.l1 - self.l2 - self.k1 - self.k2 + 1) / 2


@dataclass(frozen=True)
class FNParams:
    """Parameters ``A, B, a_i, b_i, alpha`` with ``A a1 a2 = q^{alpha+1} B b1 b2``."""

    q: complex
    A: complex
    B: complex
    a1: complex
    a2: complex
    b1: complex
    b2: complex
    alpha_exp: complex
    lambda0: complex | None = None

    def __post_init__(self):
        for name in ("q", "A", "B", "a1", "a2", "b1", "b2", "alpha_exp"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        check_q(self.q)

    @property
    def q_alpha(self) -> complex:
        return cpow(self.q, self.alpha_exp)

    def constraint_gap(self) -> float:
        """Relative gap in ``A a1 a2 = q^{alpha+1} B b1 b2``."""
        lhs = self.A * self.a1 * self.a2
        rhs = self.q_alpha * self.q * self.B * self.b1 * self.b2
        return abs(lhs - rhs) / max(abs(lhs), abs(rhs))

    def swapped_a(self) -> "FNParams":
        return FNParams(self.q, self.A, self.B, self.a2, self.a1, self.b1, self.b2, self.alpha_exp, self.lambda0)

    def swapped_b(self) -> "FNParams":
        return FNParams(self.q, self.A, self.B, self.a1, self.a2, self.b2, self.b1, self.alpha_exp, self.lambda0)


def variant_equation(vp: VariantParams) -> ScalarQDiffEq:
    qp, t1, t2 = vp.qp, vp.t1, vp.t2
    down = npoly.polyfromroots([qp(vp.h1 + 0.5) * t1, qp(vp.h2 + 0.5) * t2])
    up = qp(vp.k1 + vp.k2) * npoly.polyfromroots([qp(vp.l1 - 0.5) * t1, qp(vp.l2 - 0.5) * t2])
    mid = -np.array([vp.p * (qp(0.5) + qp(-0.5)) * t1 * t2, vp.E, qp(vp.k1) + qp(vp.k2)])
    return ScalarQDiffEq(down, up, mid, vp.q)


def special_equation(p: QParams, nonhomogeneous: bool = False) -> ScalarQDiffEq:
    """The second-order equation for ``y1_hat`` (optionally with its inhomogeneous term)."""
    q, ql = p.q, p.ql
    a1, a2, b1, b2 = p.alpha1, p.alpha2, p.beta1, p.beta2
    r = a1 * a2 / (b1 * b2)
    down = npoly.polyfromroots([ql * q / b1, ql * q / b2])
    up = r * npoly.polyfromroots([1 / a1, q / a2])
    mid = -np.array(
        [ql * q * (1 + q) / (b1 * b2), -(q * (1 / b1 + 1 / b2) + ql * (q * a1 + a2) / (b1 * b2)), r + 1]
    )
    nonhom = np.array([0, q * (1 - q) * (1 - ql) * a1 / (b1 * b2)]) if nonhomogeneous else np.zeros(1)
    return ScalarQDiffEq(down, up, mid, q, nonhom)


def residual_variant(g: Func, x: Number, vp: VariantParams) -> complex:
    return variant_equation(vp).lhs(g, x)


def residual_special(yhat: Func, x: Number, p: QParams, nonhomogeneous: bool = False) -> complex:
    return special_equation(p, nonhomogeneous).lhs(yhat, x)


def qparams_from_variant(vp: VariantParams) -> QParams:
    """``alpha_i, beta_i, lambda`` for which ``x^{-k2} y1_hat`` solves the variant equation."""
    qp = vp.qp
    lam = (vp.h1 + vp.h2 - vp.l1 - vp.l2 - vp.k1 + vp.k2 + 1) / 2
    return QParams(
        q=vp.q,
        lam=lam,
        alpha1=qp(-vp.l1 + 0.5) / vp.t1,
        alpha2=qp(-vp.l2 + 1.5) / vp.t2,
        beta1=qp(lam - vp.h1 + 0.5) / vp.t1,
        beta2=qp(lam - vp.h2 + 0.5) / vp.t2,
    )


def fnparams_from_qparams(p: QParams) -> FNParams:
    """Gauge ``B = 1``; then ``f(x) = x^{-lambda} y1_hat(x)`` solves the FN form."""
    q, ql = p.q, p.ql
    A = ql
    return FNParams(
        q=q,
        A=A,
        B=1,
        a1=ql * q / p.beta1,
        a2=ql * q / p.beta2,
        b1=A / p.alpha1,
        b2=A * q / p.alpha2,
        alpha_exp=p.lam - p.mu_prime,
    )


def fnparams_from_variant(vp: VariantParams) -> FNParams:
    """Gauge ``B = 1``; then ``f(x) = x^{-lambda0} g(x)`` solves the FN form."""
    qp = vp.qp
    lam0 = vp.lambda0
    A = qp(vp.k2 + lam0)
    return FNParams(
        q=vp.q,
        A=A,
        B=1,
        a1=qp(vp.h1 + 0.5) * vp.t1,
        a2=qp(vp.h2 + 0.5) * vp.t2,
        b1=A * qp(vp.l1 - 0.5) * vp.t1,
        b2=A * qp(vp.l2 - 0.5) * vp.t2,
        alpha_exp=lam0 + vp.k1,
        lambda0=lam0,
    )


def e2_equation(fp: FNParams) -> ScalarQDiffEq:
    A, B, a1, a2, b1, b2, q = fp.A, fp.B, fp.a1, fp.a2, fp.b1, fp.b2, fp.q
    qa = fp.q_alpha
    down = npoly.polyfromroots([a1 / B, a2 / B])
    up = qa * A / B * npoly.polyfromroots([b1 / A, b2 / A])
    mid = -np.array([a1 * a2 * (1 + q) / (q * B * B), -((a1 + a2) / B + qa * (b1 + b2) / B), A / B + qa])
    return ScalarQDiffEq(down, up, mid, q)


def residual_e2(f: Func, x: Number, fp: FNParams) -> complex:
    return e2_equation(fp).lhs(f, x)


def gauge(fn: Func, exponent: Number) -> Func:
    """``x -> x^exponent fn(x)`` on the principal branch."""
    exponent = complex(exponent)
    return lambda x: cpow(x, exponent) * fn(x)
