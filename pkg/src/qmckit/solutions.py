"""Closed-form solution families of the second-order equation for ``y1_hat``.

Each family is ``prefactor * (num; q)_inf / (den; q)_inf * 3phi2(upper; lower; q, z)``.
Families are built from a table so that the convergence predicate reads the
stored ``3phi2`` argument instead of re-deriving it.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Union

from .errors import OutOfConvergenceDomain, PoleInDenominator, UnknownFamily, ZeroBase
from .jackson import QParams
from .qseries import (
    DEFAULT_TRUNCATION,
    Number,
    Truncation,
    cpow,
    min_factor_modulus,
    poch_ratio,
    qappell_phi1,
    rphi,
    terminating_index,
)
from .variant import VariantParams

# Denominator factors closer to zero than this are treated as poles.
POLE_BAND = 1e-8


class Tag(enum.Enum):
    Y_ALPHA1 = "y_alpha1"
    Y_ALPHA2 = "y_alpha2"
    Y_LAMBDA = "y_lambda"
    Y_BETA1 = "y_beta1"
    Y_BETA2 = "y_beta2"
    Y_X = "y_x"
    A1_1 = "a1_1"
    A1_5 = "a1_5"
    A1_9 = "a1_9"
    A2_2 = "a2_2"
    A2_6 = "a2_6"
    A2_10 = "a2_10"
    F32 = "f32"
    F33 = "f33"
    F34 = "f34"
    F35 = "f35"
    F36 = "f36"
    F37 = "f37"
    F32_CHECK = "f32_check"
    F33_CHECK = "f33_check"
    F34_CHECK = "f34_check"
    F35_CHECK = "f35_check"
    F36_CHECK = "f36_check"
    F37_CHECK = "f37_check"
    G_QAPPELL = "g_qappell"

    @classmethod
    def from_name(cls, name: str) -> "Tag":
        try:
            return cls(name.lower())
        except ValueError:
            raise UnknownFamily(f"unknown solution family {name!r}") from None


# What each family is known to satisfy.
NONHOMOGENEOUS = frozenset({Tag.Y_ALPHA1, Tag.Y_ALPHA2, Tag.Y_LAMBDA})
UNDETERMINED = frozenset({Tag.F34, Tag.F36, Tag.F37, Tag.F34_CHECK, Tag.F36_CHECK, Tag.F37_CHECK})
HOMOGENEOUS = frozenset(set(Tag) - NONHOMOGENEOUS - UNDETERMINED - {Tag.G_QAPPELL})
SERIES_FAMILIES = (Tag.A1_1, Tag.A1_5, Tag.A1_9, Tag.A2_2, Tag.A2_6, Tag.A2_10)

_SWAPPED = {
    Tag.F32_CHECK: Tag.F32,
    Tag.F33_CHECK: Tag.F33,
    Tag.F34_CHECK: Tag.F34,
    Tag.F35_CHECK: Tag.F35,
    Tag.F36_CHECK: Tag.F36,
    Tag.F37_CHECK: Tag.F37,
    Tag.Y_BETA2: Tag.Y_BETA1,
}


@dataclass(frozen=True)
class SolutionFamily:
    tag: Tag
    params: Union[QParams, VariantParams]

    def __post_init__(self):
        if isinstance(self.tag, str):
            object.__setattr__(self, "tag", Tag.from_name(self.tag))
        want = VariantParams if self.tag is Tag.G_QAPPELL else QParams
        if not isinstance(self.params, want):
            raise TypeError(f"{self.tag.value} needs {want.__name__}")

    @property
    def name(self) -> str:
        return self.tag.value


@dataclass(frozen=True)
class ClosedForm:
    prefactor: complex
    num: tuple
    den: tuple
    upper: tuple
    lower: tuple
    z: complex
    arg_label: str


def _forms() -> dict[Tag, Callable[[QParams, complex], ClosedForm]]:
    def ctx(p: QParams):
        return p.q, p.ql, p.alpha1, p.alpha2, p.beta1, p.beta2, p.z

    def pre_b(p: QParams, x: complex, b: complex) -> complex:
        return (1 - p.q) * cpow(b, p.lam - p.mu_prime) * cpow(x, p.lam)

    def y_alpha1(p, x):
        q, ql, a1, a2, b1, b2, _ = ctx(p)
        return ClosedForm(
            q - 1,
            (ql * q / (a1 * x), q, a2 / a1), (q / (a1 * x), b1 / a1, b2 / a1),
            (q / (a1 * x), b1 / a1, b2 / a1), (ql * q / (a1 * x), a2 / a1), q, "q",
        )

    def y_alpha2(p, x):
        q, ql, a1, a2, b1, b2, _ = ctx(p)
        return ClosedForm(
            (q - 1) * q * a1 / a2,
            (ql * q * q / (a2 * x), q * q * a1 / a2, q), (q * q / (a2 * x), q * b1 / a2, q * b2 / a2),
            (q * q / (a2 * x), q * b1 / a2, q * b2 / a2), (ql * q * q / (a2 * x), q * q * a1 / a2), q, "q",
        )

    def y_lambda(p, x):
        q, ql, a1, a2, b1, b2, _ = ctx(p)
        return ClosedForm(
            (q - 1) / ql * a1 * x,
            (q, q * a1 * x / ql, a2 * x / ql), (q / ql, b1 * x / ql, b2 * x / ql),
            (q / ql, b1 * x / ql, b2 * x / ql), (q * a1 * x / ql, a2 * x / ql), q, "q",
        )

    def y_beta1(p, x):
        q, ql, a1, a2, b1, b2, z = ctx(p)
        return ClosedForm(
            pre_b(p, x, b1),
            (b1 * x, q, q * b1 / b2), (b1 * x / ql, b1 / a1, q * b1 / a2),
            (b1 * x / ql, b1 / a1, q * b1 / a2), (b1 * x, q * b1 / b2), z, "q^lam a1 a2/(b1 b2)",
        )

    def y_x(p, x):
        q, ql, a1, a2, b1, b2, z = ctx(p)
        return ClosedForm(
            (1 - q) * ql * cpow(q, -p.mu_prime) * cpow(x, p.mu_prime),
            (q * q / (b1 * x), q * q / (b2 * x), q), (q / (a1 * x), q * q / (a2 * x), q / ql),
            (q / ql, q / (a1 * x), q * q / (a2 * x)), (q * q / (b1 * x), q * q / (b2 * x)), z,
            "q^lam a1 a2/(b1 b2)",
        )

    def a1_1(p, x):
        q, ql, a1, a2, b1, b2, _ = ctx(p)
        return ClosedForm(
            pre_b(p, x, b1),
            (b1 * x, q, q * a1 / b2, a2 / b2, ql * q * q / (a2 * x), q / (b1 * x)),
            (b1 * x / ql, b1 / a1, q * b1 / a2, q * q / (a2 * x), ql * q / (b1 * x), a1 * a2 / (b1 * b2)),
            (q * b1 / a2, ql, q * b2 / a2), (ql * q * q / (a2 * x), q * b1 * b2 / (a1 * a2)),
            q / (a1 * x), "q/(a1 x)",
        )

    def a1_5(p, x):
        q, ql, a1, a2, b1, b2, _ = ctx(p)
        return ClosedForm(
            pre_b(p, x, b1),
            (b1 * x, q, ql * q / (b2 * x), a2 / b2, q * q * a1 / a2, q / (b1 * x)),
            (b1 * x / ql, b1 / a1, q * b1 / a2, q * q / (a2 * x), q * a1 / b1, ql * a2 / (b1 * b2 * x)),
            (q * b1 / a2, a1 * x, q * b2 / a2), (q * q * a1 / a2, q * b1 * b2 * x / (ql * a2)),
            q / ql, "q^(1-lam)",
        )

    def a1_9(p, x):
        q, ql, a1, a2, b1, b2, _ = ctx(p)
        return ClosedForm(
            pre_b(p, x, b1),
            (b1 * x, q, ql * q / (b2 * x), q * a1 / b2, a2 / a1, q / (b1 * x)),
            (b1 * x / ql, b1 / a1, q * b1 / a2, q / (a1 * x), a2 / b1, ql * q * a1 / (b1 * b2 * x)),
            (b1 / a1, a2 * x / q, b2 / a1), (a2 / a1, b1 * b2 * x / (ql * a1)),
            q / ql, "q^(1-lam)",
        )

    def a2_2(p, x):
        q, ql, a1, a2, b1, b2, _ = ctx(p)
        return ClosedForm(
            pre_b(p, x, b2),
            (q, q * b2 / b1, a1 * x, a2 * x / q, ql * q * q / (a2 * x), b1 / b2),
            (b2 * x / ql, b2 / a1, q * b2 / a2, q * b1 / a2, ql * q / (b2 * x), a1 * a2 * x / (q * b2)),
            (q * b2 / a2, ql * q / (b1 * x), q * q / (a2 * x)), (ql * q * q / (a2 * x), q * q * b2 / (a1 * a2 * x)),
            b1 / a1, "b1/a1",
        )

    def a2_6(p, x):
        q, ql, a1, a2, b1, b2, _ = ctx(p)
        return ClosedForm(
            pre_b(p, x, b2),
            (q, q * b2 / b1, ql, a2 * x / q, q * q * a1 / a2, b1 / b2),
            (b2 * x / ql, b2 / a1, q * b2 / a2, q * b1 / a2, q * a1 / b2, ql * a2 / (q * b2)),
            (q * b2 / a2, q * a1 / b1, q * q / (a2 * x)), (q * q * a1 / a2, q * q * b2 / (ql * a2)),
            b1 * x / ql, "q^-lam b1 x",
        )

    def a2_10(p, x):
        q, ql, a1, a2, b1, b2, _ = ctx(p)
        return ClosedForm(
            pre_b(p, x, b2),
            (q, q * b2 / b1, ql, a1 * x, a2 / a1, b1 / b2),
            (b2 * x / ql, b2 / a1, q * b2 / a2, b1 / a1, a2 / b2, ql * a1 / b2),
            (b2 / a1, a2 / b1, q / (a1 * x)), (a2 / a1, q * b2 / (ql * a1)),
            b1 * x / ql, "q^-lam b1 x",
        )

    def f32(p, x):
        q, ql, a1, a2, b1, b2, z = ctx(p)
        return ClosedForm(
            cpow(x, p.lam), (), (),
            (z, ql, ql * q / (b1 * x)), (ql * q * a1 / b1, ql * a2 / b1), b2 * x / ql, "q^-lam b2 x",
        )

    def f33(p, x):
        q, ql, a1, a2, b1, b2, _ = ctx(p)
        return ClosedForm(
            cpow(x, p.lam), (b2 * x,), (b2 * x / ql,),
            (q * b2 / a2, ql, a1 * x), (ql * q * a1 / b1, b2 * x), a2 / b1, "a2/b1",
        )

    def f34(p, x):
        q, ql, a1, a2, b1, b2, _ = ctx(p)
        return ClosedForm(
            cpow(x, p.lam), (b2 * x,), (b2 * x / ql,),
            (b2 / a1, q * b2 / a2, ql), (q * b1 * b2 / (a1 * a2), b2 * x), q, "q",
        )

    def f35(p, x):
        q, ql, a1, a2, b1, b2, z = ctx(p)
        return ClosedForm(
            cpow(x, p.lam), (a2 * x / q,), (b1 * b2 * x / (ql * q * a1),),
            (z, q * a1 / b1, q * a1 / b2), (ql * q * q * a1 / (b1 * b2 * x), q * a1 * a2 / (b1 * b2)),
            q / (a1 * x), "q/(a1 x)",
        )

    def f36(p, x):
        q, ql, a1, a2, b1, b2, _ = ctx(p)
        return ClosedForm(
            cpow(x, p.lam), (a1 * x, a2 * x / q), (b2 * x / q, b1 * x / ql),
            (q / ql, a2 / b2, q / (a1 * x)), (q * b1 / (ql * a1), q * q / (b2 * x)), q, "q",
        )

    def f37(p, x):
        q, ql, a1, a2, b1, b2, z = ctx(p)
        return ClosedForm(
            cpow(x, p.lam), (), (),
            (z, ql, a1 * x), (ql * q * a1 / b1, ql * q * a1 / b2), q, "q",
        )

    return {
        Tag.Y_ALPHA1: y_alpha1, Tag.Y_ALPHA2: y_alpha2, Tag.Y_LAMBDA: y_lambda,
        Tag.Y_BETA1: y_beta1, Tag.Y_X: y_x,
        Tag.A1_1: a1_1, Tag.A1_5: a1_5, Tag.A1_9: a1_9,
        Tag.A2_2: a2_2, Tag.A2_6: a2_6, Tag.A2_10: a2_10,
        Tag.F32: f32, Tag.F33: f33, Tag.F34: f34, Tag.F35: f35, Tag.F36: f36, Tag.F37: f37,
    }


_FORMS = _forms()


def closed_form(fam: SolutionFamily, x: Number) -> ClosedForm:
    x = complex(x)
    if x == 0:
        raise ZeroBase("solutions are evaluated at x != 0")
    tag, p = fam.tag, fam.params
    if tag in _SWAPPED:
        tag, p = _SWAPPED[tag], p.swapped()
    if tag not in _FORMS:
        raise UnknownFamily(f"{fam.tag.value} has no 3phi2 closed form")
    return _FORMS[tag](p, x)


def closed_form_violation(cf: ClosedForm, q: Number, guard: float = POLE_BAND) -> str | None:
    """Why ``cf`` cannot be summed, or None if it can."""
    terminating = any(terminating_index(a, q) is not None for a in cf.upper)
    if not terminating and abs(cf.z) >= 1:
        return f"|{cf.arg_label}| = {abs(cf.z):.6g} >= 1"
    for b in (*cf.den, *cf.lower):
        if min_factor_modulus(b, q) < guard:
            return f"denominator parameter {b:.6g} is within {guard:g} of a pole"
    return None


def eval_closed_form(cf: ClosedForm, q: Number, t: Truncation = DEFAULT_TRUNCATION) -> complex:
    ratio = poch_ratio(cf.num, cf.den, q, t, POLE_BAND) if cf.num or cf.den else 1 + 0j
    return cf.prefactor * ratio * rphi(cf.upper, cf.lower, q, cf.z, t, POLE_BAND)


def qappell_args(vp: VariantParams, x: complex):
    qp = vp.qp
    a_exp = (vp.h1 + vp.h2 - vp.l1 - vp.l2 + vp.k1 - vp.k2 + 1) / 2  # lambda~ + k1
    return (
        qp(a_exp),
        qp(a_exp - vp.h2 + vp.l2),
        qp(a_exp - vp.h1 + vp.l1),
        qp(vp.k1 - vp.k2 + 1),
        qp(vp.l1 + 0.5) * vp.t1 / x,
        qp(vp.l2 + 0.5) * vp.t2 / x,
    )


def domain_violation(fam: SolutionFamily, x: Number, guard: float = POLE_BAND) -> str | None:
    """Why ``fam`` cannot be evaluated at ``x``, or None if it can."""
    x = complex(x)
    if x == 0:
        return "x = 0"
    if fam.tag is Tag.G_QAPPELL:
        vp = fam.params
        a, b, bp, c, y, z = qappell_args(vp, x)
        if abs(y) >= 1:
            return f"|q^(l1+1/2) t1/x| = {abs(y):.6g} >= 1"
        if abs(z) >= 1:
            return f"|q^(l2+1/2) t2/x| = {abs(z):.6g} >= 1"
        if min_factor_modulus(c, vp.q) < guard:
            return f"q^(k1-k2+1) = {c} lies on the lattice q^(-n)"
        return None
    return closed_form_violation(closed_form(fam, x), fam.params.q, guard)


def in_domain(fam: SolutionFamily, x: Number, guard: float = POLE_BAND) -> bool:
    return domain_violation(fam, x, guard) is None


def eval_solution(fam: SolutionFamily, x: Number, t: Truncation = DEFAULT_TRUNCATION) -> complex:
    x = complex(x)
    if fam.tag is Tag.G_QAPPELL:
        return eval_qappell_solution(fam.params, x, t)
    why = domain_violation(fam, x)
    if why is not None:
        if "pole" in why:
            raise PoleInDenominator(f"{fam.name} at x={x}: {why}")
        raise OutOfConvergenceDomain(f"{fam.name} at x={x}: {why}")
    return eval_closed_form(closed_form(fam, x), fam.params.q, t)


def eval_qappell_solution(vp: VariantParams, x: Number, t: Truncation = DEFAULT_TRUNCATION) -> complex:
    """``x^{-k1} Phi^(1)(...)``, the q-Appell solution of the variant equation."""
    x = complex(x)
    why = domain_violation(SolutionFamily(Tag.G_QAPPELL, vp), x)
    if why is not None:
        if "lattice" in why:
            raise PoleInDenominator(f"g_qappell at x={x}: {why}")
        raise OutOfConvergenceDomain(f"g_qappell at x={x}: {why}")
    a, b, bp, c, y, z = qappell_args(vp, x)
    return cpow(x, -vp.k1) * qappell_phi1(a, b, bp, c, vp.q, y, z, t)


def evaluator(tag: Tag | str, params, t: Truncation = DEFAULT_TRUNCATION) -> Callable[[complex], complex]:
    """``x -> eval_solution(SolutionFamily(tag, params), x)``."""
    fam = SolutionFamily(Tag.from_name(tag) if isinstance(tag, str) else tag, params)
    return lambda x: eval_solution(fam, x, t)


def qappell_constant(p: QParams, t: Truncation = DEFAULT_TRUNCATION) -> complex:
    """``C`` with ``y_x(x) = C x^{k2} g(x)`` when ``p = qparams_from_variant(vp)``."""
    q, ql = p.q, p.ql
    return (1 - q) * ql * cpow(q, -p.mu_prime) * poch_ratio([q, q * p.z / ql], [q / ql, p.z], q, t)
