"""Numerical verification of the identities linking the solution families.

Coefficients are stored as theta/Pochhammer products so that pole proximity can
be checked before evaluation. Every relation is a pair ``(lhs, terms)``.
Its residual is ``|lhs - sum(terms)|`` divided by the largest participating
magnitude.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import mpmath

from .errors import (
    DivergentSeries,
    OutOfConvergenceDomain,
    PoleInDenominator,
    QMCError,
    TruncationFailure,
)
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
    theta_q,
)
from .solutions import (
    POLE_BAND,
    ClosedForm,
    SolutionFamily,
    Tag,
    closed_form_violation,
    domain_violation,
    eval_closed_form,
    eval_qappell_solution,
    eval_solution,
    qappell_constant,
)
from .variant import VariantParams, qparams_from_variant, special_equation

IDENTITY_TOL = 1e-10
RELATION_TOL = 1e-8
PSEUDO_CONSTANT_TOL = 1e-10


# --------------------------------------------------------------------------
# coefficient catalog


@dataclass(frozen=True)
class ProductForm:
    """``prefactor * prod theta(num)/prod theta(den) * (pnum)_inf/(pden)_inf``."""

    prefactor: complex
    theta_num: tuple = ()
    theta_den: tuple = ()
    poch_num: tuple = ()
    poch_den: tuple = ()


def theta_gap(t: Number, q: Number) -> float:
    """Distance-like measure of ``t`` from the zero set ``q^Z`` of ``theta_q``."""
    t = complex(t)
    if t == 0:
        return 0.0
    return min(min_factor_modulus(t, q), min_factor_modulus(q / t, q))


def form_violation(f: ProductForm, q: Number, guard: float = POLE_BAND) -> str | None:
    for t in f.theta_den:
        if theta_gap(t, q) < guard:
            return f"theta({t:.6g}) in a denominator is within {guard:g} of zero"
    for b in f.poch_den:
        if min_factor_modulus(b, q) < guard:
            return f"({b:.6g}; q)_inf in a denominator is within {guard:g} of zero"
    return None


def form_degenerate(f: ProductForm, q: Number, guard: float = POLE_BAND) -> str | None:
    """The coefficient vanishes (numerator theta near a zero), so ratios against it are meaningless."""
    for t in f.theta_num:
        if theta_gap(t, q) < guard:
            return f"theta({t:.6g}) in a numerator is within {guard:g} of zero"
    return None


def eval_form(f: ProductForm, q: Number, t: Truncation = DEFAULT_TRUNCATION) -> complex:
    why = form_violation(f, q)
    if why is not None:
        raise PoleInDenominator(why)
    val = complex(f.prefactor)
    for a in f.theta_num:
        val *= theta_q(a, q, t)
    for b in f.theta_den:
        val /= theta_q(b, q, t)
    if f.poch_num or f.poch_den:
        val *= poch_ratio(f.poch_num, f.poch_den, q, t, POLE_BAND)
    return val


def _catalog() -> dict[str, Callable[[QParams, complex], ProductForm]]:
    def v(p: QParams):
        return p.q, p.ql, p.alpha1, p.alpha2, p.beta1, p.beta2, p.lam - p.mu_prime

    def bl(p):
        return cpow(p.beta1, p.lam - p.mu_prime)

    def j11(p, x):
        q, ql, a1, a2, b1, b2, e = v(p)
        return ProductForm(
            -bl(p) * cpow(x, p.lam),
            (b1 * x, a2 / b2, b2 / a1), (b1 * x / ql, a1 * a2 / (b1 * b2), a2 / a1),
        )

    def j12(p, x):
        q, ql, a1, a2, b1, b2, e = v(p)
        return ProductForm(
            -a2 / (q * a1) * bl(p) * cpow(x, p.lam),
            (b1 * x, a2 / b2, b2 / a1), (b1 * x / ql, a1 * a2 / (b1 * b2), a2 / (q * a1)),
        )

    def j13(p, x):
        q, ql, a1, a2, b1, b2, e = v(p)
        return ProductForm(
            -cpow(q, -e) * bl(p) * cpow(x, e),
            (b1 * x, ql, a1 * a2 * x / (q * b2)), (b1 * x / ql, b1 * x / q, a1 * a2 / (b1 * b2)),
        )

    def j21(p, x):
        q, ql, a1, a2, b1, b2, e = v(p)
        return ProductForm(
            -bl(p) * cpow(x, p.lam),
            (a1 * x, a2 * x / q, b2 / b1), (b1 * x / ql, a1 * a2 * x / (q * b1), a2 / a1),
        )

    def j23(p, x):
        q, ql, a1, a2, b1, b2, e = v(p)
        return ProductForm(
            -cpow(b1 / b2, e),
            (b2 / b1, a1 * a2 * x / (q * b2), b2 * x / ql), (b1 * x / ql, b1 / b2, a1 * a2 * x / (q * b1)),
        )

    def j31(p, x):
        q, ql, a1, a2, b1, b2, e = v(p)
        return ProductForm(
            -a2 / (q * a1) * bl(p) * cpow(x, p.lam),
            (b1 * x, a2 / b2, b2 * x / ql), (b1 / a1, q * b1 * b2 * x / (ql * a2), a2 * x / (ql * q)),
        )

    def j33(p, x):
        q, ql, a1, a2, b1, b2, e = v(p)
        return ProductForm(
            -cpow(b1 / q, e) * cpow(x, e),
            (b1 * x, a1 * x, ql * a2 / (q * b2)), (b1 / a1, b1 * x / q, q * b1 * b2 * x / (ql * a2)),
        )

    def j41(p, x):
        q, ql, a1, a2, b1, b2, e = v(p)
        return ProductForm(
            -a2 / (q * a1) * bl(p) * cpow(x, p.lam),
            (ql, a2 * x / q, b2 / b1), (b1 / a1, ql * a2 / (q * b1), a2 * x / (ql * q)),
        )

    def j43(p, x):
        q, ql, a1, a2, b1, b2, e = v(p)
        return ProductForm(
            -cpow(b1 / b2, e),
            (b2 / b1, ql * a2 / (q * b2), b2 / a1), (b1 / a1, b1 / b2, ql * a2 / (q * b1)),
        )

    def j51(p, x):
        q, ql, a1, a2, b1, b2, e = v(p)
        return ProductForm(
            -bl(p) * cpow(x, p.lam),
            (b1 * x, b2 * x / ql, b2 / a1), (a2 / b1, b1 * b2 * x / (ql * a1), a1 * x / ql),
        )

    def j53(p, x):
        q, ql, a1, a2, b1, b2, e = v(p)
        return ProductForm(
            -cpow(q / b1, -e) * cpow(x, e),
            (b1 * x, a2 * x / q, ql * a1 / b2), (b1 * x / q, a2 / b1, b1 * b2 * x / (ql * a1)),
        )

    def j61(p, x):
        q, ql, a1, a2, b1, b2, e = v(p)
        return ProductForm(
            -bl(p) * cpow(x, p.lam),
            (ql, a1 * x, b2 / b1), (a2 / b1, ql * a1 / b1, a1 * x / ql),
        )

    def j63(p, x):
        q, ql, a1, a2, b1, b2, e = v(p)
        return ProductForm(
            -cpow(b1 / b2, e),
            (b2 / b1, a2 / b2, ql * a1 / b2), (b1 / b2, a2 / b1, ql * a1 / b1),
        )

    def k63(p, x):
        # typed from its own display; equals j63 with beta1 <-> beta2
        q, ql, a1, a2, b1, b2, e = v(p)
        return ProductForm(
            -cpow(b2 / b1, e),
            (b1 / b2, a2 / b1, ql * a1 / b1), (b2 / b1, a2 / b2, ql * a1 / b2),
        )

    def s1(p, x):
        q, ql, a1, a2, b1, b2, e = v(p)
        return ProductForm(
            cpow(b2, -e) / (1 - q),
            poch_num=(p.z, b2 / a1, q * b2 / a2), poch_den=(ql * q * a1 / b1, ql * a2 / b1, q),
        )

    def s2(p, x):
        q, ql, a1, a2, b1, b2, e = v(p)
        return ProductForm(
            cpow(q, -e) / (1 - q) * cpow(x, e),
            (a2 * x / q,), (b1 * b2 * x / (ql * q * a1),),
            (p.z, q / ql), (q * a1 * a2 / (b1 * b2), q),
        )

    def s3(p, x):
        q, ql, a1, a2, b1, b2, e = v(p)
        return ProductForm(-1, poch_num=(p.z, q * a1 / b1), poch_den=(ql * q * a1 / b1, a1 * a2 / (b1 * b2)))

    def s4(p, x):
        q, ql, a1, a2, b1, b2, e = v(p)
        return ProductForm(-1, poch_num=(b2 / a1, a2 / b1), poch_den=(ql * a2 / b1, b2 / (ql * a1)))

    def s5(p, x):
        q, ql, a1, a2, b1, b2, e = v(p)
        return ProductForm(
            -1,
            (b1 * x / ql, b2 * x / q), (b1 * b2 * x / (ql * q * a1), a1 * x),
            (p.z, q * a1 / b1), (q * a1 * a2 / (b1 * b2), ql * a1 / b1),
        )

    def a11(p, x):
        q, ql, a1, a2, b1, b2, e = v(p)
        return ProductForm(
            1, poch_num=(b1 / a1, a2 / b2, b2 / (ql * a1)), poch_den=(ql * a2 / b2, b2 / a1, b1 / (ql * a1))
        )

    def a12(p, x):
        q, ql, a1, a2, b1, b2, e = v(p)
        return ProductForm(
            -cpow(b2, -e) / (1 - q),
            poch_num=(b2 / (ql * a1), p.z, q * b2 / a2, b1 / a1, a2 / b2),
            poch_den=(ql * a2 / b2, a2 / b1, b1 / (ql * a1), ql * q * a1 / b1, q),
        )

    table = {
        "J11": j11, "J12": j12, "J13": j13, "J21": j21, "J23": j23, "J31": j31, "J33": j33,
        "J41": j41, "J43": j43, "J51": j51, "J53": j53, "J61": j61, "J63": j63,
        "S1": s1, "S2": s2, "S3": s3, "S4": s4, "S5": s5, "A11": a11, "A12": a12, "K63": k63,
    }
    for m in ("1", "3", "5"):
        for n in ("1", "3"):
            j = table["J" + m + n]
            table["K" + m + n] = lambda p, x, j=j: j(p.swapped(), x)
    return table


_CATALOG = _catalog()

COEFFICIENTS = tuple(sorted(_CATALOG))
X_FREE = frozenset({"S1", "S3", "S4", "A11", "A12", "K63", "J43", "J63"})
J_NAMES = tuple(f"J{m}{n}" for m in range(1, 7) for n in (1, 3))
K_NAMES = tuple(f"K{m}{n}" for m in (1, 3, 5) for n in (1, 3))


@dataclass(frozen=True)
class PseudoCoefficient:
    name: str
    params: QParams

    def __post_init__(self):
        if self.name not in _CATALOG:
            raise KeyError(f"unknown coefficient {self.name!r}")

    @property
    def x_free(self) -> bool:
        return self.name in X_FREE

    def form(self, x: Number) -> ProductForm:
        return _CATALOG[self.name](self.params, complex(x))


def eval_coeff(c: PseudoCoefficient, x: Number = 1.0, t: Truncation = DEFAULT_TRUNCATION) -> complex:
    return eval_form(c.form(x), c.params.q, t)


def check_pseudo_constant(f: Callable[[complex], complex], x: Number, q: Number, tol: float = PSEUDO_CONSTANT_TOL) -> bool:
    """``|f(qx) - f(x)| <= tol (|f(x)| + eps)``."""
    x, q = complex(x), complex(q)
    fx = f(x)
    return abs(f(q * x) - fx) <= tol * (abs(fx) + 1e-300)


def pseudo_constant_gap(f: Callable[[complex], complex], x: Number, q: Number) -> float:
    x, q = complex(x), complex(q)
    fx = f(x)
    return abs(f(q * x) - fx) / (abs(fx) + 1e-300)


def _correction_forms() -> dict[str, Callable[[QParams, complex], ClosedForm]]:
    def c1(p, x):
        q, ql, a1, a2, b1, b2, z = p.q, p.ql, p.alpha1, p.alpha2, p.beta1, p.beta2, p.z
        return ClosedForm(
            cpow(x, p.lam),
            (b2 / a1, q * b2 / a2, ql, a1 * a2 * x / b1),
            (ql * q * a1 / b1, b1 * b2 / (a1 * a2), a2 / b1, b2 * x / ql),
            (z, q * a1 / b1, a2 / b1), (a1 * a2 * x / b1, q * a1 * a2 / (b1 * b2)), q, "q",
        )

    def c2(p, x):
        q, ql, a1, a2, b1, b2, z = p.q, p.ql, p.alpha1, p.alpha2, p.beta1, p.beta2, p.z
        return ClosedForm(
            cpow(x, p.lam),
            (a1 * x, z, ql, q * b2 / b1),
            (ql * q * a1 / b1, ql * a2 / b1, ql * a1 / b2, b2 * x / ql),
            (b2 / a1, a2 / b1, b2 * x / ql), (q * b2 / b1, q * b2 / (ql * a1)), q, "q",
        )

    def c3(p, x):
        q, ql, a1, a2, b1, b2, z = p.q, p.ql, p.alpha1, p.alpha2, p.beta1, p.beta2, p.z
        return ClosedForm(
            cpow(x, p.lam),
            (a2 * x / q, q / ql, a2 / b2),
            (b1 * b2 * x / (ql * q * a1), q * a1 * a2 / (b1 * b2), b1 / (ql * a1)),
            (ql * q / (b1 * x), z, q * a1 / b1), (ql * q * q * a1 / (b1 * b2 * x), ql * q * a1 / b1), q, "q",
        )

    return {"C1": c1, "C2": c2, "C3": c3}


_CORRECTIONS = _correction_forms()


def eval_correction(name: str, p: QParams, x: Number, t: Truncation = DEFAULT_TRUNCATION) -> complex:
    """Correction terms ``C1, C2, C3`` in the three-term relations for f34, f37, f36."""
    cf = _CORRECTIONS[name](p, complex(x))
    why = closed_form_violation(cf, p.q)
    if why is not None:
        raise OutOfConvergenceDomain(f"{name}: {why}")
    return eval_closed_form(cf, p.q, t)


# --------------------------------------------------------------------------
# transformation formulas


def _rel_err(lhs: complex, rhs: complex) -> float:
    den = abs(lhs) + abs(rhs)
    return 0.0 if den == 0 else abs(lhs - rhs) / den


def _converges(upper: Sequence[complex], z: complex, q: complex) -> bool:
    return abs(z) < 1 or any(terminating_index(a, q) is not None for a in upper)


def _require(ok: bool, msg: str) -> None:
    if not ok:
        raise DivergentSeries(msg)


def gr_iii10_sides(a, b, c, d, e, q, t: Truncation = DEFAULT_TRUNCATION) -> tuple[complex, complex]:
    w = d * e / (a * b * c)
    _require(_converges((a, b, c), w, q), f"|de/(abc)| = {abs(w):.6g} >= 1")
    _require(abs(b) < 1, f"|b| = {abs(b):.6g} >= 1")
    lhs = rphi((a, b, c), (d, e), q, w, t)
    rhs = poch_ratio((b, d * e / (a * b), d * e / (b * c)), (d, e, w), q, t) * rphi(
        (d / b, e / b, w), (d * e / (a * b), d * e / (b * c)), q, b, t
    )
    return lhs, rhs


# A right-hand piece: sign * (num; q)_inf / (den; q)_inf * r phi r-1(upper; lower; q, z).
# Builders take the raw parameters so that the arguments can also be formed in
# extended precision; under heavy cancellation a rounded argument is not enough.
_Piece = tuple[int, tuple, tuple, tuple, tuple, complex]
_Builder = Callable[..., list[_Piece]]

# Cancellation factor beyond which a sum of pieces is redone in extended precision.
CANCELLATION_LIMIT = 1e3


def _sum_pieces(build: _Builder, args: Sequence[complex], t: Truncation) -> complex:
    q = args[-1]
    values = [sign * poch_ratio(num, den, q, t) * rphi(up, lo, q, z, t) for sign, num, den, up, lo, z in build(*args)]
    total = sum(values, 0j)
    mass = sum(abs(v) for v in values)
    if total != 0 and mass <= CANCELLATION_LIMIT * abs(total):
        return total
    cond = mass / abs(total) if total != 0 else 1e30
    digits = 20 + int(math.log10(cond)) + 1
    with mpmath.workdps(digits):
        pieces = build(*(mpmath.mpc(v) for v in args))
        return complex(sum(
            (sign * _poch_ratio_mp(num, den, q, t) * _rphi_mp(up, lo, q, z, t) for sign, num, den, up, lo, z in pieces),
            mpmath.mpc(0),
        ))


def _poch_ratio_mp(num, den, q, t: Truncation):
    tol = mpmath.mpf(10) ** (-mpmath.mp.dps)
    value = mpmath.mpc(1)
    for a in num:
        value *= _qpoch_mp(a, q, tol, t)
    for b in den:
        value /= _qpoch_mp(b, q, tol, t)
    return value


def _qpoch_mp(a, q, tol, t: Truncation):
    prod = mpmath.mpc(1)
    for _ in range(t.max_terms):
        prod *= 1 - a
        if abs(a) < tol:
            return prod
        a *= q
    raise TruncationFailure(f"(a;q)_inf did not converge in {t.max_terms} factors")


def _rphi_mp(upper, lower, q, z, t: Truncation):
    # arguments here are the ones already checked in double precision
    tol = mpmath.mpf(10) ** (3 - mpmath.mp.dps)
    total = term = mpmath.mpc(1)
    qk = mpmath.mpc(1)
    small = 0
    for _ in range(t.max_terms):
        num = mpmath.mpc(1)
        for a in upper:
            num *= 1 - a * qk
        if num == 0:
            return total
        den = 1 - q * qk
        for b in lower:
            den *= 1 - b * qk
        term = term * num / den * z
        total += term
        qk *= q
        if abs(term) <= tol * abs(total):
            small += 1
            if small >= t.tail_window:
                return total
        else:
            small = 0
    raise TruncationFailure(f"r phi r-1 did not converge in {t.max_terms} terms")


def _gr_333_pieces(a, b, c, d, e, q) -> list[_Piece]:
    w = d * e / (a * b * c)
    return [
        (1, (e / b, e / c, c * q / a, q / d), (e, c * q / d, q / a, e / (b * c)),
         (c, d / a, c * q / e), (c * q / a, b * c * q / e), b * q / d),
        (-1, (q / d, e * q / d, b, c, d / a, d * e / (b * c * q), b * c * q * q / (d * e)),
         (d / q, e, b * q / d, c * q / d, q / a, e / (b * c), b * c * q / e),
         (a * q / d, b * q / d, c * q / d), (q * q / d, e * q / d), w),
    ]


def _gr_331_pieces(a, b, c, d, e, q) -> list[_Piece]:
    w = d * e / (a * b * c)
    return [
        (1, (e / b, e / c), (e, e / (b * c)), (d / a, b, c), (d, b * c * q / e), q),
        (1, (d / a, b, c, d * e / (b * c)), (d, e, b * c / e, w), (e / b, e / c, w), (d * e / (b * c), e * q / (b * c)), q),
    ]


def gr_333_sides(a, b, c, d, e, q, t: Truncation = DEFAULT_TRUNCATION) -> tuple[complex, complex]:
    w = d * e / (a * b * c)
    _require(_converges((a, b, c), w, q), f"|de/(abc)| = {abs(w):.6g} >= 1")
    _require(abs(b * q / d) < 1, f"|bq/d| = {abs(b * q / d):.6g} >= 1")
    lhs = rphi((a, b, c), (d, e), q, w, t)
    return lhs, _sum_pieces(_gr_333_pieces, (a, b, c, d, e, q), t)


def gr_331_sides(a, b, c, d, e, q, t: Truncation = DEFAULT_TRUNCATION) -> tuple[complex, complex]:
    w = d * e / (a * b * c)
    _require(_converges((a, b, c), w, q), f"|de/(abc)| = {abs(w):.6g} >= 1")
    lhs = rphi((a, b, c), (d, e), q, w, t)
    return lhs, _sum_pieces(_gr_331_pieces, (a, b, c, d, e, q), t)


def andrews_sides(a, b, bp, c, q, y, z, t: Truncation = DEFAULT_TRUNCATION) -> tuple[complex, complex]:
    _require(abs(y) < 1 and abs(z) < 1, f"|y| = {abs(y):.6g}, |z| = {abs(z):.6g}; both must be < 1")
    _require(_converges((c / a, y, z), a, q), f"|a| = {abs(a):.6g} >= 1")
    lhs = qappell_phi1(a, b, bp, c, q, y, z, t)
    rhs = poch_ratio((a, b * y, bp * z), (c, y, z), q, t) * rphi((c / a, y, z), (b * y, bp * z), q, a, t)
    return lhs, rhs


def gr_iii10_check(a, b, c, d, e, q, t: Truncation = DEFAULT_TRUNCATION) -> float:
    return _rel_err(*gr_iii10_sides(*map(complex, (a, b, c, d, e, q)), t))


def gr_333_check(a, b, c, d, e, q, t: Truncation = DEFAULT_TRUNCATION) -> float:
    return _rel_err(*gr_333_sides(*map(complex, (a, b, c, d, e, q)), t))


def gr_331_check(a, b, c, d, e, q, t: Truncation = DEFAULT_TRUNCATION) -> float:
    return _rel_err(*gr_331_sides(*map(complex, (a, b, c, d, e, q)), t))


def andrews_check(a, b, bp, c, q, y, z, t: Truncation = DEFAULT_TRUNCATION) -> float:
    return _rel_err(*andrews_sides(*map(complex, (a, b, bp, c, q, y, z)), t))


# --------------------------------------------------------------------------
# reports


@dataclass
class RelationReport:
    relation_id: str
    tolerance: float | None = RELATION_TOL
    samples: int = 0
    max_rel_residual: float = 0.0
    failures: list = field(default_factory=list)
    excluded: list = field(default_factory=list)

    def record(self, residual: float, params, x, extra_tol: float | None = None) -> None:
        self.samples += 1
        self.max_rel_residual = max(self.max_rel_residual, residual)
        tol = self.tolerance if extra_tol is None else extra_tol
        if tol is not None and not residual <= tol:
            self.failures.append((_params_repr(params), _num_repr(x), f"residual {residual:.3e} > {tol:g}"))

    def fail(self, params, x, reason: str) -> None:
        self.failures.append((_params_repr(params), _num_repr(x), reason))

    def exclude(self, params, x, reason: str) -> None:
        self.excluded.append((_params_repr(params), _num_repr(x), reason))

    @property
    def status(self) -> str:
        if self.tolerance is None:
            return "info"
        return "pass" if self.samples > 0 and not self.failures else "fail"

    @property
    def passed(self) -> bool:
        return self.status != "fail"

    def merge(self, other: "RelationReport") -> "RelationReport":
        if other.relation_id != self.relation_id:
            raise ValueError("cannot merge reports of different relations")
        return RelationReport(
            self.relation_id,
            self.tolerance,
            self.samples + other.samples,
            max(self.max_rel_residual, other.max_rel_residual),
            self.failures + other.failures,
            self.excluded + other.excluded,
        )

    def to_dict(self) -> dict:
        return {
            "relation_id": self.relation_id,
            "samples": self.samples,
            "max_rel_residual": self.max_rel_residual,
            "tolerance": self.tolerance,
            "status": self.status,
            "failures": [list(f) for f in self.failures],
            "excluded": len(self.excluded),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RelationReport":
        """Inverse of :meth:`to_dict`; excluded points come back as a count only."""
        return cls(
            d["relation_id"],
            d["tolerance"],
            int(d["samples"]),
            float(d["max_rel_residual"]),
            [tuple(f) for f in d.get("failures", [])],
            [(None, None, "")] * int(d.get("excluded", 0)),
        )


def _num_repr(x) -> str | None:
    if x is None:
        return None
    x = complex(x)
    return f"{x.real:.17g}{x.imag:+.17g}j"


def _params_repr(params) -> dict | None:
    if params is None:
        return None
    if hasattr(params, "as_dict"):
        params = params.as_dict()
    elif hasattr(params, "__dataclass_fields__"):
        params = {k: getattr(params, k) for k in params.__dataclass_fields__}
    return {k: _num_repr(v) if isinstance(v, (complex, float, int)) else v for k, v in dict(params).items()}


def merge_reports(reports: Iterable[RelationReport]) -> list[RelationReport]:
    """Merge by ``relation_id``; output sorted by id."""
    out: dict[str, RelationReport] = {}
    for r in reports:
        out[r.relation_id] = out[r.relation_id].merge(r) if r.relation_id in out else r
    return [out[k] for k in sorted(out)]


CSV_HEADER = ("relation_id", "samples", "max_rel_residual", "status")


def reports_to_csv(reports: Iterable[RelationReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in sorted(reports, key=lambda r: r.relation_id):
        w.writerow((r.relation_id, r.samples, f"{r.max_rel_residual:.6e}", r.status))
    return buf.getvalue()


def reports_to_json(reports: Iterable[RelationReport]) -> str:
    return json.dumps([r.to_dict() for r in sorted(reports, key=lambda r: r.relation_id)], indent=2, sort_keys=True)


# --------------------------------------------------------------------------
# relations between families at a single point


class Point:
    """Cached family and coefficient values at ``(p, x)``.

    ``guard`` is the pole band used when deciding whether the point is usable.
    """

    def __init__(self, p: QParams, x: Number, t: Truncation = DEFAULT_TRUNCATION, guard: float = POLE_BAND):
        self.p, self.x, self.t, self.guard = p, complex(x), t, guard
        self._cache: dict = {}

    def check_family(self, tag: Tag) -> None:
        fam = SolutionFamily(tag, self.p)
        why = domain_violation(fam, self.x, self.guard)
        if why is not None:
            raise OutOfConvergenceDomain(f"{tag.value}: {why}")

    def check_coeff(self, name: str) -> None:
        if name in _CORRECTIONS:
            why = closed_form_violation(_CORRECTIONS[name](self.p, self.x), self.p.q, self.guard)
        else:
            form = _CATALOG[name](self.p, self.x)
            why = form_violation(form, self.p.q, self.guard) or form_degenerate(form, self.p.q, self.guard)
        if why is not None:
            raise PoleInDenominator(f"{name}: {why}")

    def y(self, tag: Tag) -> complex:
        key = ("y", tag)
        if key not in self._cache:
            self.check_family(tag)
            self._cache[key] = eval_solution(SolutionFamily(tag, self.p), self.x, self.t)
        return self._cache[key]

    def c(self, name: str) -> complex:
        key = ("c", name)
        if key not in self._cache:
            self.check_coeff(name)
            if name in _CORRECTIONS:
                self._cache[key] = eval_correction(name, self.p, self.x, self.t)
            else:
                self._cache[key] = eval_coeff(PseudoCoefficient(name, self.p), self.x, self.t)
        return self._cache[key]

    def swapped(self) -> "Point":
        return Point(self.p.swapped(), self.x, self.t, self.guard)


def relation_residual(lhs: complex, terms: Sequence[complex]) -> float:
    scale = max([abs(lhs), *map(abs, terms)])
    return 0.0 if scale == 0 else abs(lhs - sum(terms)) / scale


@dataclass(frozen=True)
class Relation:
    relation_id: str
    families: tuple
    coefficients: tuple
    sides: Callable[[Point], tuple[complex, list[complex]]]
    swapped_coefficients: tuple = ()

    def prepare(self, pt: Point) -> None:
        """Raise if any participating quantity is outside the usable domain."""
        for tag in self.families:
            pt.check_family(tag)
        for name in self.coefficients:
            pt.check_coeff(name)
        sw = pt.swapped()
        for name in self.swapped_coefficients:
            sw.check_coeff(name)

    def residual(self, pt: Point) -> float:
        lhs, terms = self.sides(pt)
        return relation_residual(lhs, terms)


Y = Tag


def _prop32() -> list[Relation]:
    return [
        Relation("prop32_f32_S1_ybeta2", (Y.F32, Y.Y_BETA2), ("S1",),
                 lambda P: (P.y(Y.F32), [P.c("S1") * P.y(Y.Y_BETA2)])),
        Relation("prop32_f32check_S1_ybeta1", (Y.F32_CHECK, Y.Y_BETA1), (),
                 lambda P: (P.y(Y.F32_CHECK), [P.swapped().c("S1") * P.y(Y.Y_BETA1)]), ("S1",)),
        Relation("prop32_f35_S2_yx", (Y.F35, Y.Y_X), ("S2",),
                 lambda P: (P.y(Y.F35), [P.c("S2") * P.y(Y.Y_X)])),
    ]


def _f33_terms(P: Point) -> list[complex]:
    a11, a12, k63 = P.c("A11"), P.c("A12"), P.c("K63")
    s1c = P.swapped().c("S1")
    return [(s1c + a12 * k63) / a11 * P.y(Y.Y_BETA1), -a12 / a11 * P.y(Y.Y_BETA2)]


def _prop33() -> list[Relation]:
    return [
        Relation("prop33_f33_ybeta1_ybeta2", (Y.F33, Y.Y_BETA1, Y.Y_BETA2), ("A11", "A12", "K63"),
                 lambda P: (P.y(Y.F33), _f33_terms(P)), ("S1",)),
        Relation("prop33_f32check_f33_a2_10", (Y.F32_CHECK, Y.F33, Y.A2_10), ("A11", "A12"),
                 lambda P: (P.y(Y.F32_CHECK), [P.c("A11") * P.y(Y.F33), P.c("A12") * P.y(Y.A2_10)])),
        Relation("prop33_ybeta2_a2_10_ybeta1", (Y.Y_BETA2, Y.A2_10, Y.Y_BETA1), ("K63",),
                 lambda P: (P.y(Y.Y_BETA2), [P.y(Y.A2_10), P.c("K63") * P.y(Y.Y_BETA1)])),
    ]


def _prop34() -> list[Relation]:
    return [
        Relation("prop34_f33_S3_f34_C1", (Y.F33, Y.F34), ("S3", "C1"),
                 lambda P: (P.y(Y.F33), [-P.c("S3") * P.y(Y.F34), P.c("C1")])),
        Relation("prop34_f32_S4_f37_C2", (Y.F32, Y.F37), ("S4", "C2"),
                 lambda P: (P.y(Y.F32), [-P.c("S4") * P.y(Y.F37), P.c("C2")])),
        Relation("prop34_f35_S5_f36_C3", (Y.F35, Y.F36), ("S5", "C3"),
                 lambda P: (P.y(Y.F35), [-P.c("S5") * P.y(Y.F36), P.c("C3")])),
        Relation("prop34_f34", (Y.F34, Y.F33, Y.Y_BETA1, Y.Y_BETA2), ("S3", "C1", "A11", "A12", "K63"),
                 lambda P: (P.y(Y.F34), [P.c("C1") / P.c("S3"), *(-v / P.c("S3") for v in _f33_terms(P))]),
                 ("S1",)),
        Relation("prop34_f37", (Y.F37, Y.Y_BETA2), ("S1", "S4", "C2"),
                 lambda P: (P.y(Y.F37), [P.c("C2") / P.c("S4"), -P.c("S1") / P.c("S4") * P.y(Y.Y_BETA2)])),
        Relation("prop34_f36", (Y.F36, Y.Y_X), ("S2", "S5", "C3"),
                 lambda P: (P.y(Y.F36), [P.c("C3") / P.c("S5"), -P.c("S2") / P.c("S5") * P.y(Y.Y_X)])),
    ]


_DIFFS = {
    "a1-a2": (Y.Y_ALPHA1, Y.Y_ALPHA2),
    "a2-lam": (Y.Y_ALPHA2, Y.Y_LAMBDA),
    "a1-lam": (Y.Y_ALPHA1, Y.Y_LAMBDA),
}


def _thm_relation(rid: str, lhs: Tag, diff: str, j1: str, j3: str, other: Tag, swap: bool) -> Relation:
    u, w = _DIFFS[diff]

    def sides(P: Point):
        C = P.swapped() if swap else P
        return P.y(lhs), [C.c(j1) * (P.y(u) - P.y(w)), C.c(j3) * P.y(other)]

    coeffs = () if swap else (j1, j3)
    return Relation(rid, (lhs, u, w, other), coeffs, sides, (j1, j3) if swap else ())


def _theorem41() -> list[Relation]:
    rows = [
        ("thm41_r1_ybeta1", Y.Y_BETA1, "a1-a2", "J11", "J13", Y.Y_X, False),
        ("thm41_r2_ybeta1", Y.Y_BETA1, "a1-a2", "J21", "J23", Y.Y_BETA2, False),
        ("thm41_r3_ybeta1", Y.Y_BETA1, "a2-lam", "J31", "J33", Y.Y_X, False),
        ("thm41_r4_ybeta1", Y.Y_BETA1, "a2-lam", "J41", "J43", Y.Y_BETA2, False),
        ("thm41_r5_ybeta1", Y.Y_BETA1, "a1-lam", "J51", "J53", Y.Y_X, False),
        ("thm41_r6_ybeta1", Y.Y_BETA1, "a1-lam", "J61", "J63", Y.Y_BETA2, False),
        ("thm41_r7_ybeta2", Y.Y_BETA2, "a1-a2", "J11", "J13", Y.Y_X, True),
        ("thm41_r8_ybeta2", Y.Y_BETA2, "a2-lam", "J31", "J33", Y.Y_X, True),
        ("thm41_r9_ybeta2", Y.Y_BETA2, "a1-lam", "J51", "J53", Y.Y_X, True),
    ]
    return [_thm_relation(*r) for r in rows]


def _corollary42() -> list[Relation]:
    def sides(P: Point):
        j11, j13, j21, j23 = (P.c(n) for n in ("J11", "J13", "J21", "J23"))
        return P.y(Y.Y_X), [
            (j21 - j11) / (j13 * j21) * P.y(Y.Y_BETA1),
            j11 * j23 / (j13 * j21) * P.y(Y.Y_BETA2),
        ]

    return [Relation("cor42_yx_ybeta1_ybeta2", (Y.Y_X, Y.Y_BETA1, Y.Y_BETA2), ("J11", "J13", "J21", "J23"), sides)]


def _extras() -> list[Relation]:
    return [
        Relation("j11_plus_j12", (), ("J11", "J12"), lambda P: (P.c("J11"), [-P.c("J12")])),
        Relation("b1333_ybeta1_a1_1_yx", (Y.Y_BETA1, Y.A1_1, Y.Y_X), ("J13",),
                 lambda P: (P.y(Y.Y_BETA1), [P.y(Y.A1_1), P.c("J13") * P.y(Y.Y_X)])),
        Relation("k63_is_swapped_j63", (), ("K63",), lambda P: (P.c("K63"), [P.swapped().c("J63")]), ("J63",)),
    ]


PROP32 = _prop32()
PROP33 = _prop33()
PROP34 = _prop34()
THEOREM41 = _theorem41()
COROLLARY42 = _corollary42()
EXTRAS = _extras()
RELATIONS = {r.relation_id: r for r in (*PROP32, *PROP33, *PROP34, *THEOREM41, *COROLLARY42, *EXTRAS)}


def relation_admissible(rels: Sequence[Relation], p: QParams, x: Number, guard: float) -> str | None:
    """Reason the point is unusable for any of ``rels``, or None.

    x-dependent coefficients must also be usable at ``qx`` for the
    pseudo-constancy check.
    """
    pt = Point(p, x, guard=guard)
    shifted = Point(p, p.q * complex(x), guard=guard)
    try:
        for r in rels:
            r.prepare(pt)
            for name, sw in _pseudo_names(r):
                (shifted.swapped() if sw else shifted).check_coeff(name)
    except (QMCError, ZeroDivisionError) as e:
        return str(e)
    return None


def _pseudo_names(r: Relation) -> list[tuple[str, bool]]:
    """x-dependent coefficients of ``r`` as ``(name, on swapped params)``."""
    return [(n, False) for n in r.coefficients if n in _CATALOG and n not in X_FREE] + [
        (n, True) for n in r.swapped_coefficients if n in _CATALOG and n not in X_FREE
    ]


def verify_relations(
    rels: Sequence[Relation],
    p: QParams,
    xs: Iterable[Number],
    t: Truncation = DEFAULT_TRUNCATION,
    tol: float = RELATION_TOL,
    pseudo_tol: float = PSEUDO_CONSTANT_TOL,
    guard: float = POLE_BAND,
) -> list[RelationReport]:
    """One report per relation; x-dependent coefficients are also checked for pseudo-constancy."""
    xs = [complex(x) for x in xs]
    reports = []
    for r in rels:
        rep = RelationReport(r.relation_id, tol)
        for x in xs:
            pt = Point(p, x, t, guard)
            try:
                r.prepare(pt)
                res = r.residual(pt)
            except (OutOfConvergenceDomain, PoleInDenominator, DivergentSeries) as e:
                rep.exclude(p, x, str(e))
                continue
            except TruncationFailure as e:
                rep.fail(p, x, f"truncation: {e}")
                continue
            rep.record(res, p, x)
            for name, sw in _pseudo_names(r):
                q_ = p.swapped() if sw else p
                c = PseudoCoefficient(name, q_)
                try:
                    gap = pseudo_constant_gap(lambda s: eval_coeff(c, s, t), x, p.q)
                except (PoleInDenominator, OutOfConvergenceDomain) as e:
                    rep.exclude(p, x, f"pseudo-constancy of {name}: {e}")
                    continue
                if not gap <= pseudo_tol:
                    rep.fail(p, x, f"{'swapped ' if sw else ''}{name}(qx)/{name}(x) - 1 = {gap:.3e}")
        reports.append(rep)
    return reports


def verify_prop32(p: QParams, xs, t: Truncation = DEFAULT_TRUNCATION) -> list[RelationReport]:
    return verify_relations(PROP32, p, xs, t)


def verify_prop33(p: QParams, xs, t: Truncation = DEFAULT_TRUNCATION) -> list[RelationReport]:
    return verify_relations(PROP33, p, xs, t)


def verify_prop34(p: QParams, xs, t: Truncation = DEFAULT_TRUNCATION) -> list[RelationReport]:
    return verify_relations(PROP34, p, xs, t)


def verify_theorem41(p: QParams, xs, t: Truncation = DEFAULT_TRUNCATION) -> list[RelationReport]:
    return verify_relations(THEOREM41, p, xs, t)


def verify_corollary42(p: QParams, xs, t: Truncation = DEFAULT_TRUNCATION) -> list[RelationReport]:
    return verify_relations(COROLLARY42, p, xs, t)


def verify_extras(p: QParams, xs, t: Truncation = DEFAULT_TRUNCATION) -> list[RelationReport]:
    return verify_relations(EXTRAS, p, xs, t, tol=IDENTITY_TOL)


def verify_prop31(vp: VariantParams, xs, t: Truncation = DEFAULT_TRUNCATION, tol: float = RELATION_TOL) -> list[RelationReport]:
    """``x^{-k2} y_x(x) = C g(x)`` with the explicit constant ``C``."""
    p = qparams_from_variant(vp)
    rep = RelationReport("prop31_yx_qappell", tol)
    try:
        const = qappell_constant(p, t)
    except PoleInDenominator as e:
        rep.exclude(vp, None, str(e))
        return [rep]
    for x in map(complex, xs):
        try:
            yx = eval_solution(SolutionFamily(Tag.Y_X, p), x, t)
            g = eval_qappell_solution(vp, x, t)
        except (OutOfConvergenceDomain, PoleInDenominator) as e:
            rep.exclude(vp, x, str(e))
            continue
        rep.record(relation_residual(cpow(x, -vp.k2) * yx, [const * g]), vp, x)
    return [rep]


def _residual_at(eq, fn, x) -> float:
    return eq.relative_residual(fn, x)


def verify_remark41(
    p: QParams, xs, t: Truncation = DEFAULT_TRUNCATION, tol: float = RELATION_TOL, only: set[str] | None = None
) -> list[RelationReport]:
    """``J13 y_x`` and the six series families solve the homogeneous equation.

    ``only`` restricts the run to the named relation ids.
    """
    eq = special_equation(p)
    j13 = PseudoCoefficient("J13", p)
    yx = SolutionFamily(Tag.Y_X, p)
    cases = {"remark41_j13_yx": lambda s: eval_coeff(j13, s, t) * eval_solution(yx, s, t)}
    for tag in (Y.A1_1, Y.A1_5, Y.A1_9, Y.A2_2, Y.A2_6, Y.A2_10):
        fam = SolutionFamily(tag, p)
        cases[f"remark41_{tag.value}"] = lambda s, fam=fam: eval_solution(fam, s, t)
    reports = []
    for rid, fn in cases.items():
        if only is not None and rid not in only:
            continue
        rep = RelationReport(rid, tol)
        for x in map(complex, xs):
            try:
                res = _residual_at(eq, fn, x)
            except (OutOfConvergenceDomain, PoleInDenominator) as e:
                rep.exclude(p, x, str(e))
                continue
            except QMCError as e:
                rep.fail(p, x, str(e))
                continue
            rep.record(res, p, x)
        reports.append(rep)
    return reports


def undetermined_residuals(p: QParams, xs, t: Truncation = DEFAULT_TRUNCATION) -> list[RelationReport]:
    """Measured (never asserted) residuals of f34, f36, f37 against both equations."""
    reports = []
    for tag in (Y.F34, Y.F36, Y.F37):
        fam = SolutionFamily(tag, p)
        for label, nonhom in (("homogeneous", False), ("nonhomogeneous", True)):
            eq = special_equation(p, nonhom)
            rep = RelationReport(f"info_{tag.value}_{label}", None)
            for x in map(complex, xs):
                try:
                    res = eq.relative_residual(lambda s: eval_solution(fam, s, t), x)
                except (OutOfConvergenceDomain, PoleInDenominator) as e:
                    rep.exclude(p, x, str(e))
                    continue
                rep.record(res, p, x)
            reports.append(rep)
    return reports
