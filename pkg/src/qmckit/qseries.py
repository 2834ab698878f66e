"""Complex q-series primitives.

q-Pochhammer symbols (finite and infinite), the basic hypergeometric series
``r phi r-1``, the theta function ``(x, q/x, q; q)_inf``, the q-Appell double
series ``Phi^(1)`` and the principal-branch complex power.  Every scalar is a
Python ``complex``; real inputs are promoted.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import mpmath
import numpy as np

from .errors import (
    DivergentSeries,
    ModulusOfQOutOfRange,
    PoleInDenominator,
    TruncationFailure,
    ZeroArgument,
    ZeroBase,
)

Number = complex | float | int


@dataclass(frozen=True)
class Truncation:
    """When to stop an infinite sum or product.

    A sum/product stops after ``tail_window`` consecutive terms are each below
    ``rel_tol`` relative to the running value (scaled by the asymptotic
    geometric ratio, so the neglected tail is also below ``rel_tol``).
    """

    rel_tol: float = 1e-14
    max_terms: int = 5000
    tail_window: int = 5

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.tail_window < 1 or self.max_terms < self.tail_window:
            raise ValueError("need max_terms >= tail_window >= 1")


DEFAULT_TRUNCATION = Truncation()

# Denominator factors smaller than this are treated as exact poles.
POLE_GUARD = 1e-12
# |1 - a q^n| below this marks ``a`` as q^{-n} (terminating series).
TERMINATING_TOL = 1e-12


@dataclass(frozen=True)
class PhiSpec:
    upper: tuple[complex, ...]
    lower: tuple[complex, ...]
    q: complex
    z: complex

    def __post_init__(self):
        if len(self.lower) != len(self.upper) - 1:
            raise ValueError("r phi r-1 needs len(lower) == len(upper) - 1")


def check_q(q: Number) -> complex:
    q = complex(q)
    if not 0 < abs(q) < 1:
        raise ModulusOfQOutOfRange(f"need 0 < |q| < 1, got q = {q}")
    return q


def cpow(x: Number, e: Number) -> complex:
    """Principal-branch power ``exp(e * Log x)``."""
    x = complex(x)
    e = complex(e)
    if x == 0:
        raise ZeroBase("cpow: zero base")
    if e == 0:
        return 1 + 0j
    if e == 1:
        return x
    return cmath.exp(e * cmath.log(x))


def qpoch_finite(a: Number, q: Number, n: int) -> complex:
    """``(a; q)_n``; the empty product for ``n = 0``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    a = complex(a)
    q = complex(q)
    out = 1 + 0j
    qj = 1 + 0j
    for _ in range(n):
        out *= 1 - qj * a
        qj *= q
    return out


def qpoch_infinite(a: Number, q: Number, t: Truncation = DEFAULT_TRUNCATION) -> complex:
    """``(a; q)_inf`` truncated once ``|q^j a|`` is negligible."""
    q = check_q(q)
    a = complex(a)
    if a == 0:
        return 1 + 0j
    # tail product differs from 1 by at most sum_{k>=j} |q^k a| = |q^j a|/(1-|q|)
    thresh = t.rel_tol * (1 - abs(q))
    out = 1 + 0j
    term = a
    small = 0
    for _ in range(t.max_terms):
        out *= 1 - term
        if out == 0:
            return out
        if abs(term) < thresh:
            small += 1
            if small >= t.tail_window:
                return out
        else:
            small = 0
        term *= q
    raise TruncationFailure(f"(a;q)_inf did not converge in {t.max_terms} factors (a={a}, q={q})")


def qpoch_multi(
    params: Sequence[Number],
    q: Number,
    n: int | None = None,
    t: Truncation = DEFAULT_TRUNCATION,
) -> complex:
    """``(a_1, ..., a_N; q)_n``; ``n=None`` means the infinite product."""
    if len(params) == 0:
        raise ValueError("need at least one parameter")
    out = 1 + 0j
    for a in params:
        out *= qpoch_infinite(a, q, t) if n is None else qpoch_finite(a, q, n)
    return out


def min_factor_modulus(b: Number, q: Number, n: int | None = None) -> float:
    """Smallest ``|1 - q^j b|`` over ``0 <= j < n`` (all j if ``n`` is None).

    Factors only come close to zero while ``|q^j b|`` is near 1, so the scan
    stops once ``|q^j b| < 1/2``.
    """
    b = complex(b)
    q = complex(q)
    best = math.inf
    qj_b = b
    j = 0
    while n is None or j < n:
        best = min(best, abs(1 - qj_b))
        if abs(qj_b) < 0.5:
            break
        qj_b *= q
        j += 1
    return best


def log_qpoch_infinite(a: Number, q: Number, t: Truncation = DEFAULT_TRUNCATION) -> complex:
    """``sum_j Log(1 - q^j a)``; a logarithm of ``(a;q)_inf`` that cannot overflow.

    Returns ``-inf`` when a factor vanishes exactly.
    """
    q = check_q(q)
    a = complex(a)
    thresh = t.rel_tol * (1 - abs(q))
    out = 0j
    term = a
    small = 0
    for _ in range(t.max_terms):
        f = 1 - term
        if f == 0:
            return complex(-math.inf, 0)
        out += cmath.log(f)
        if abs(term) < thresh:
            small += 1
            if small >= t.tail_window:
                return out
        else:
            small = 0
        term *= q
    raise TruncationFailure(f"log (a;q)_inf did not converge in {t.max_terms} factors (a={a}, q={q})")


# Above this argument modulus the infinite products may overflow a double.
_LOG_SPACE_THRESHOLD = 1e3


def poch_ratio(
    num: Iterable[Number],
    den: Iterable[Number],
    q: Number,
    t: Truncation = DEFAULT_TRUNCATION,
    guard: float = POLE_GUARD,
) -> complex:
    """``(num...; q)_inf / (den...; q)_inf`` with a pole check on ``den``.

    Large arguments are handled in log space so that balanced ratios stay
    finite even when each product alone would overflow.
    """
    num = [complex(a) for a in num]
    den = [complex(b) for b in den]
    for b in den:
        if min_factor_modulus(b, q) < guard:
            raise PoleInDenominator(f"(b;q)_inf vanishes (b={b}, q={complex(q)})")
    if max((abs(v) for v in num + den), default=0.0) > _LOG_SPACE_THRESHOLD:
        log_val = sum((log_qpoch_infinite(a, q, t) for a in num), 0j)
        if log_val.real == -math.inf:
            return 0j
        log_val -= sum((log_qpoch_infinite(b, q, t) for b in den), 0j)
        return cmath.exp(log_val)
    value = 1 + 0j
    for b in den:
        value /= qpoch_infinite(b, q, t)
    for a in num:
        value *= qpoch_infinite(a, q, t)
    return value


def terminating_index(a: Number, q: Number, tol: float = TERMINATING_TOL) -> int | None:
    """Return ``n >= 0`` if ``a`` equals ``q^{-n}`` to within ``tol``."""
    a = complex(a)
    q = complex(q)
    if a == 0:
        return None
    est = -(cmath.log(a) / cmath.log(q)).real
    n = round(est)
    if n < 0:
        return None
    if abs(1 - a * q**n) < tol:
        return n
    return None


def rphi(
    spec_or_upper,
    lower: Sequence[Number] | None = None,
    q: Number | None = None,
    z: Number | None = None,
    t: Truncation = DEFAULT_TRUNCATION,
    guard: float = POLE_GUARD,
) -> complex:
    """Basic hypergeometric series ``r phi r-1(upper; lower; q, z)``.

    Accepts either a :class:`PhiSpec` or ``(upper, lower, q, z)``.  A
    terminating series (an upper parameter equal to ``q^{-n}``) is summed
    exactly through index ``n``; otherwise ``|z| < 1`` is required.
    """
    if isinstance(spec_or_upper, PhiSpec):
        spec = spec_or_upper
    else:
        spec = PhiSpec(
            tuple(complex(a) for a in spec_or_upper),
            tuple(complex(b) for b in lower),
            complex(q),
            complex(z),
        )
    q = check_q(spec.q)
    z = spec.z
    upper, lower_ = spec.upper, spec.lower
    if z == 0:
        return 1 + 0j

    stops = [n for n in (terminating_index(a, q) for a in upper) if n is not None]
    stop = min(stops) if stops else None
    if stop is None and abs(z) >= 1:
        raise DivergentSeries(f"non-terminating r phi r-1 with |z| = {abs(z):.6g} >= 1")

    total = 1 + 0j
    term = 1 + 0j
    mass = 1.0  # sum of |term|, to detect cancellation
    qk = 1 + 0j
    thresh = t.rel_tol * (1 - abs(z)) if abs(z) < 1 else t.rel_tol
    small = 0
    k = 0
    while True:
        if stop is not None and k >= stop:
            return _maybe_resum(total, mass, upper, lower_, q, z, stop, t)
        if k >= t.max_terms:
            raise TruncationFailure(f"r phi r-1 did not converge in {t.max_terms} terms")
        num = 1 + 0j
        for a in upper:
            num *= 1 - a * qk
        den = 1 - q * qk
        for b in lower_:
            f = 1 - b * qk
            if abs(f) < guard:
                raise PoleInDenominator(f"lower parameter {b} hits q^(-{k})")
            den *= f
        term = term * num / den * z
        total += term
        mass += abs(term)
        k += 1
        qk *= q
        if stop is not None:
            continue
        if abs(term) <= thresh * abs(total):
            small += 1
            if small >= t.tail_window:
                return _maybe_resum(total, mass, upper, lower_, q, z, None, t)
        else:
            small = 0


# Cancellation factor beyond which a double-precision sum is redone in
# extended precision.
RESUM_CONDITION = 1e3


def _maybe_resum(total, mass, upper, lower, q, z, stop, t: Truncation) -> complex:
    if total != 0 and mass <= RESUM_CONDITION * abs(total):
        return total
    cond = mass / abs(total) if total != 0 else 1e30
    digits = 20 + int(math.log10(max(cond, 1.0))) + 1
    return _rphi_extended(upper, lower, q, z, stop, t, digits)


def _rphi_extended(upper, lower, q, z, stop, t: Truncation, digits: int) -> complex:
    """The same series summed with ``digits`` significant digits."""
    with mpmath.workdps(digits):
        mpc = mpmath.mpc
        up = [mpc(a) for a in upper]
        lo = [mpc(b) for b in lower]
        qq, zz = mpc(q), mpc(z)
        total = term = mpc(1)
        qk = mpc(1)
        tol = mpmath.mpf(10) ** (3 - digits)
        small = 0
        for k in range(stop if stop is not None else t.max_terms):
            num = mpc(1)
            for a in up:
                num *= 1 - a * qk
            den = 1 - qq * qk
            for b in lo:
                den *= 1 - b * qk
            term = term * num / den * zz
            total += term
            qk *= qq
            if stop is None:
                if abs(term) <= tol * abs(total):
                    small += 1
                    if small >= t.tail_window:
                        break
                else:
                    small = 0
        else:
            if stop is None:
                raise TruncationFailure(f"r phi r-1 did not converge in {t.max_terms} terms")
        return complex(total)


def phi32(a1, a2, a3, b1, b2, q, z, t: Truncation = DEFAULT_TRUNCATION, guard: float = POLE_GUARD) -> complex:
    return rphi((a1, a2, a3), (b1, b2), q, z, t, guard)


def theta_q(x: Number, q: Number, t: Truncation = DEFAULT_TRUNCATION) -> complex:
    """``theta_q(x) = (x, q/x, q; q)_inf``."""
    x = complex(x)
    q = check_q(q)
    if x == 0:
        raise ZeroArgument("theta_q(0) is undefined")
    return qpoch_infinite(x, q, t) * qpoch_infinite(q / x, q, t) * qpoch_infinite(q, q, t)


def _single_factors(b: complex, q: complex, w: complex, n_max: int, guard: float) -> np.ndarray:
    """Coefficients ``(b;q)_m w^m / (q;q)_m`` for ``m = 0..n_max``."""
    out = np.empty(n_max + 1, dtype=complex)
    out[0] = 1
    stop = terminating_index(b, q)
    qm = 1 + 0j
    for m in range(n_max):
        out[m + 1] = out[m] * (1 - b * qm) * w / (1 - q * qm)
        qm *= q
    if stop is not None:
        out[stop + 1:] = 0
    return out


def qappell_phi1(
    a: Number,
    b: Number,
    bp: Number,
    c: Number,
    q: Number,
    y: Number,
    z: Number,
    t: Truncation = DEFAULT_TRUNCATION,
    guard: float = POLE_GUARD,
) -> complex:
    """q-Appell series ``Phi^(1)(a; b, b'; c; q; y, z)``.

    Summed along anti-diagonals ``m + n = N``; stops once ``tail_window``
    consecutive diagonal sums (in absolute value) are negligible.
    """
    a, b, bp, c, y, z = (complex(v) for v in (a, b, bp, c, y, z))
    q = check_q(q)
    if (abs(y) >= 1 and terminating_index(b, q) is None) or (
        abs(z) >= 1 and terminating_index(bp, q) is None
    ):
        raise DivergentSeries(f"q-Appell series needs |y|, |z| < 1 (y={y}, z={z})")
    rho = max(abs(y) if abs(y) < 1 else 0.0, abs(z) if abs(z) < 1 else 0.0)
    thresh = t.rel_tol * (1 - rho)

    chunk = 64
    size = chunk
    left = _single_factors(b, q, y, size, guard)
    right = _single_factors(bp, q, z, size, guard)
    total = 1 + 0j
    mass = 1.0
    outer = 1 + 0j  # (a;q)_N / (c;q)_N
    qn = 1 + 0j
    small = 0
    for n_diag in range(1, t.max_terms):
        f = 1 - c * qn
        if abs(f) < guard:
            raise PoleInDenominator(f"c = {c} hits q^(-{n_diag - 1})")
        outer *= (1 - a * qn) / f
        qn *= q
        if n_diag > size:
            size *= 2
            left = _single_factors(b, q, y, size, guard)
            right = _single_factors(bp, q, z, size, guard)
        prods = left[: n_diag + 1] * right[n_diag::-1]
        diag = outer * prods.sum()
        total += diag
        diag_mass = abs(outer) * np.abs(prods).sum()
        mass += diag_mass
        if diag_mass <= thresh * abs(total):
            small += 1
            if small >= t.tail_window:
                if total != 0 and mass <= RESUM_CONDITION * abs(total):
                    return total
                cond = mass / abs(total) if total != 0 else 1e30
                digits = 20 + int(math.log10(max(cond, 1.0))) + 1
                return _qappell_extended(a, b, bp, c, q, y, z, n_diag, digits)
        else:
            small = 0
    raise TruncationFailure(f"q-Appell series did not converge in {t.max_terms} diagonals")


def _qappell_extended(a, b, bp, c, q, y, z, n_diags: int, digits: int) -> complex:
    """Diagonals ``0..n_diags`` of the q-Appell series in extended precision."""
    stop_b, stop_bp = terminating_index(b, q), terminating_index(bp, q)
    with mpmath.workdps(digits):
        a, b, bp, c, q, y, z = (mpmath.mpc(v) for v in (a, b, bp, c, q, y, z))

        def singles(p, w, stop):
            out = [mpmath.mpc(1)]
            qm = mpmath.mpc(1)
            for m in range(n_diags):
                out.append(0 if stop is not None and m >= stop else out[-1] * (1 - p * qm) * w / (1 - q * qm))
                qm *= q
            return out

        left, right = singles(b, y, stop_b), singles(bp, z, stop_bp)
        total = mpmath.mpc(1)
        outer = mpmath.mpc(1)
        qn = mpmath.mpc(1)
        for n in range(1, n_diags + 1):
            outer *= (1 - a * qn) / (1 - c * qn)
            qn *= q
            total += outer * mpmath.fsum(left[m] * right[n - m] for m in range(n + 1))
        return complex(total)
