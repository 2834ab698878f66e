"""Jackson integrals on the lattice ``q^n xi`` and the kernels and weights
used to build integral solutions of the degree-2 variant equation."""
from __future__ import annotations

import cmath
from dataclasses import dataclass, replace
from typing import Callable

from .errors import DivergentSeries, InvalidParameters, TruncationFailure, ZeroBase
from .qseries import DEFAULT_TRUNCATION, Number, Truncation, check_q, cpow, poch_ratio

# Relative tolerance for the constraint q^mu' a1 a2 / (b1 b2) = 1.
CONSTRAINT_TOL = 1e-12


@dataclass(frozen=True)
class QParams:
    """Parameters ``(q, lambda, alpha1, alpha2, beta1, beta2)``.

    ``mu_prime`` is derived as ``Log(b1 b2/(a1 a2)) / Log q`` so that
    ``q^mu' a1 a2/(b1 b2) = 1`` up to rounding.
    """

    q: complex
    lam: complex
    alpha1: complex
    alpha2: complex
    beta1: complex
    beta2: complex

    def __post_init__(self):
        for name in ("q", "lam", "alpha1", "alpha2", "beta1", "beta2"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        check_q(self.q)
        if 0 in (self.alpha1, self.alpha2, self.beta1, self.beta2):
            raise InvalidParameters("alpha_i and beta_i must be nonzero")
        if self.alpha1 == self.alpha2:
            raise InvalidParameters("alpha1 == alpha2 makes the partial-fraction blocks singular")
        if self.beta1 == self.beta2:
            raise InvalidParameters("beta1 == beta2 is outside the generic setting")
        gap = abs(cpow(self.q, self.mu_prime) * self.alpha1 * self.alpha2 / (self.beta1 * self.beta2) - 1)
        if gap > CONSTRAINT_TOL:
            raise InvalidParameters(f"q^mu' a1 a2/(b1 b2) deviates from 1 by {gap:.3g}")

    @property
    def mu_prime(self) -> complex:
        return cmath.log(self.beta1 * self.beta2 / (self.alpha1 * self.alpha2)) / cmath.log(self.q)

    @property
    def ql(self) -> complex:
        """``q^lambda`` on the principal branch."""
        return cpow(self.q, self.lam)

    @property
    def z(self) -> complex:
        """``q^lambda a1 a2 / (b1 b2)``, the argument of the beta/x families."""
        return self.ql * self.alpha1 * self.alpha2 / (self.beta1 * self.beta2)

    def swapped(self) -> "QParams":
        """The same pack with ``beta1`` and ``beta2`` exchanged."""
        return replace(self, beta1=self.beta2, beta2=self.beta1)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("q", "lam", "alpha1", "alpha2", "beta1", "beta2")}


@dataclass(frozen=True)
class BilateralTruncation:
    base: Truncation = DEFAULT_TRUNCATION
    max_neg: int = 400
    max_pos: int = 400

    def __post_init__(self):
        if self.max_neg < 1 or self.max_pos < 1:
            raise ValueError("max_neg and max_pos must be >= 1")


DEFAULT_BILATERAL = BilateralTruncation()


def b_of_x(x: Number, p: QParams) -> complex:
    """Coefficient of the first-order equation ``y(qx) = B(x) y(x)``."""
    x = complex(x)
    return (1 - p.beta1 * x) * (1 - p.beta2 * x) / ((1 - p.alpha1 * x) * (1 - p.alpha2 * x))


def p_lambda(x: Number, s: Number, p: QParams, t: Truncation = DEFAULT_TRUNCATION) -> complex:
    """``(q^{lambda+1} s/x; q)_inf / (q s/x; q)_inf``."""
    x, s = complex(x), complex(s)
    if x == 0:
        raise ZeroBase("p_lambda needs x != 0")
    u = p.q * s / x
    return poch_ratio([p.ql * u], [u], p.q, t)


def p_tilde_lambda(x: Number, s: Number, p: QParams, t: Truncation = DEFAULT_TRUNCATION) -> complex:
    """``(x/s)^lambda (x/s; q)_inf / (q^{-lambda} x/s; q)_inf``, principal branch."""
    x, s = complex(x), complex(s)
    if x == 0 or s == 0:
        raise ZeroBase("p_tilde_lambda needs x, s != 0")
    r = x / s
    return cpow(r, p.lam) * poch_ratio([r], [r / p.ql], p.q, t)


def weight_y(s: Number, p: QParams, t: Truncation = DEFAULT_TRUNCATION) -> complex:
    """``(a1 s, a2 s; q)_inf / (b1 s, b2 s; q)_inf``."""
    s = complex(s)
    return poch_ratio([p.alpha1 * s, p.alpha2 * s], [p.beta1 * s, p.beta2 * s], p.q, t)


def weight_y_tilde(s: Number, p: QParams, t: Truncation = DEFAULT_TRUNCATION) -> complex:
    """``s^mu' (q/(b1 s), q/(b2 s); q)_inf / (q/(a1 s), q/(a2 s); q)_inf``."""
    s = complex(s)
    if s == 0:
        raise ZeroBase("weight_y_tilde needs s != 0")
    q = p.q
    return cpow(s, p.mu_prime) * poch_ratio(
        [q / (p.beta1 * s), q / (p.beta2 * s)], [q / (p.alpha1 * s), q / (p.alpha2 * s)], q, t
    )


def _one_side(f, xi, q, start, step, limit, t: Truncation) -> complex:
    total = 0j
    small = 0
    n = start
    for _ in range(limit):
        s = q**n * xi
        term = s * f(s)
        if not cmath.isfinite(term):
            raise DivergentSeries(f"Jackson sum term at q^{n} xi is not finite (xi={xi})")
        total += term
        if abs(term) <= t.rel_tol * abs(total):
            small += 1
            if small >= t.tail_window:
                return total
        else:
            small = 0
        n += step
    raise TruncationFailure(
        f"Jackson sum tail did not decay within {limit} lattice points "
        f"({'n -> +inf' if step > 0 else 'n -> -inf'}, xi={xi})"
    )


def jackson_integral(
    f: Callable[[complex], complex],
    xi: Number,
    q: Number,
    bt: BilateralTruncation = DEFAULT_BILATERAL,
    n_min: int | None = None,
) -> complex:
    """``(1-q) sum_n q^n xi f(q^n xi)`` over ``n >= n_min`` (all n if None).

    Each direction is extended until ``tail_window`` consecutive terms fall
    below ``rel_tol`` relative to the running sum of that side.
    """
    q = check_q(q)
    xi = complex(xi)
    if xi == 0:
        raise ZeroBase("Jackson integral needs xi != 0")
    t = bt.base
    if n_min is None:
        upper = _one_side(f, xi, q, 0, 1, bt.max_pos, t)
        lower = _one_side(f, xi, q, -1, -1, bt.max_neg, t)
        return (1 - q) * (upper + lower)
    return (1 - q) * _one_side(f, xi, q, n_min, 1, bt.max_pos + max(0, -n_min), t)


def lattice_exponent(w: Number, q: Number, tol: float = 1e-12) -> int | None:
    """Integer ``k`` with ``w = q^k`` (to ``tol``), or None."""
    w, q = complex(w), complex(q)
    if w == 0:
        return None
    k = round((cmath.log(w) / cmath.log(q)).real)
    if abs(w * q ** (-k) - 1) < tol:
        return k
    return None


def yhat1_bilateral(
    x: Number,
    xi: Number,
    p: QParams,
    bt: BilateralTruncation = DEFAULT_BILATERAL,
) -> complex:
    """Bilateral sum for the first component ``y1_hat(x)`` at lattice scale ``xi``.

    Summand: ``(q^{lam+n+1} xi/x, q^{n+1} xi a1, q^n xi a2)_inf /
    (q^{n+1} xi/x, q^n xi b1, q^n xi b2)_inf``.  When ``xi`` makes one of the
    numerator products vanish for all ``n`` below some index (the cases
    ``xi = 1/a1, 1/a2, q^{-lam} x``) the sum is taken one-sided from there.
    """
    x, xi = complex(x), complex(xi)
    if x == 0:
        raise ZeroBase("yhat1_bilateral needs x != 0")
    q, a1, a2, b1, b2 = p.q, p.alpha1, p.alpha2, p.beta1, p.beta2
    t = bt.base
    coeffs = (p.ql * q / x, q * a1, a2)

    def f(s: complex) -> complex:
        return -a1 * poch_ratio(
            [coeffs[0] * s, coeffs[1] * s, coeffs[2] * s], [q * s / x, b1 * s, b2 * s], q, t
        )

    # (c q^n xi; q)_inf = 0 for every n <= -m when c xi = q^m.
    starts = [1 - m for c in coeffs if (m := lattice_exponent(c * xi, q)) is not None]
    n_min = max(starts) if starts else None
    return jackson_integral(f, xi, q, bt, n_min=n_min)


def weight_y_divided(i: int, s: Number, p: QParams, mu: Number = 0, t: Truncation = DEFAULT_TRUNCATION) -> complex:
    """``s^mu y(s) / (s - b_i)`` with ``b_0 = 0, b_1 = 1/a1, b_2 = 1/a2``.

    For ``i = 1, 2`` the vanishing factor ``1 - a_i s`` is cancelled
    analytically, so the value stays finite at ``s = b_i``.
    """
    s = complex(s)
    q, a1, a2, b1, b2 = p.q, p.alpha1, p.alpha2, p.beta1, p.beta2
    pw = cpow(s, mu) if mu != 0 else 1 + 0j
    if i == 0:
        if s == 0:
            raise ZeroBase("weight_y_divided(0, s) needs s != 0")
        return pw * weight_y(s, p, t) / s
    if i == 1:
        return -a1 * pw * poch_ratio([q * a1 * s, a2 * s], [b1 * s, b2 * s], q, t)
    if i == 2:
        return -a2 * pw * poch_ratio([a1 * s, q * a2 * s], [b1 * s, b2 * s], q, t)
    raise ValueError("i must be 0, 1 or 2")
