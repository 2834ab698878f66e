"""q-convolution and q-middle convolution of matrix tuples.

A tuple ``(B_inf; B_1, ..., B_N)`` with poles ``b_1..b_N`` encodes the system
``Y(qx) = B(x) Y(x)`` with ``B(x) = B_inf + sum_i B_i / (1 - x/b_i)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import (
    EliminationSingular,
    InvalidParameters,
    ParseError,
    QuotientNotInvariant,
)
from .jackson import DEFAULT_BILATERAL, BilateralTruncation, QParams, jackson_integral
from .qseries import Number, check_q, cpow, poch_ratio
from .variant import ScalarQDiffEq

DEFAULT_TOL = 1e-9


def _mat(a, m: int) -> np.ndarray:
    a = np.array(a, dtype=complex).reshape(m, m)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MatrixTuple:
    b_inf: np.ndarray
    blocks: tuple[np.ndarray, ...]
    poles: tuple[complex, ...]

    def __post_init__(self):
        b_inf = np.atleast_2d(np.asarray(self.b_inf, dtype=complex))
        m = b_inf.shape[0]
        if b_inf.shape != (m, m):
            raise InvalidParameters("B_inf must be square")
        blocks = tuple(_mat(b, m) for b in self.blocks)
        poles = tuple(complex(b) for b in self.poles)
        if not blocks:
            raise InvalidParameters("need at least one pole")
        if len(blocks) != len(poles):
            raise InvalidParameters("one block per pole")
        if any(b == 0 for b in poles):
            raise InvalidParameters("poles must be nonzero")
        if len(set(poles)) != len(poles):
            raise InvalidParameters("poles must be pairwise distinct")
        object.__setattr__(self, "b_inf", _mat(b_inf, m))
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "poles", poles)

    @property
    def m(self) -> int:
        return self.b_inf.shape[0]

    @property
    def n_poles(self) -> int:
        return len(self.blocks)

    @property
    def b0(self) -> np.ndarray:
        return np.eye(self.m) - self.b_inf - sum(self.blocks)

    def all_blocks(self) -> list[np.ndarray]:
        """``[B_0, B_1, ..., B_N]``."""
        return [self.b0, *self.blocks]

    def at(self, x: Number) -> np.ndarray:
        """``B(x)``."""
        x = complex(x)
        return self.b_inf + sum(B / (1 - x / b) for B, b in zip(self.blocks, self.poles))

    def compress(self, V: np.ndarray) -> "MatrixTuple":
        """Matrices ``V^H M V`` for every member of the tuple."""
        Vh = V.conj().T
        return MatrixTuple(Vh @ self.b_inf @ V, tuple(Vh @ B @ V for B in self.blocks), self.poles)

    def same_as(self, other: "MatrixTuple", tol: float = 0.0) -> bool:
        if self.m != other.m or self.poles != other.poles:
            return False
        pairs = zip([self.b_inf, *self.blocks], [other.b_inf, *other.blocks])
        return all(np.max(np.abs(a - b), initial=0.0) <= tol for a, b in pairs)


@dataclass(frozen=True, eq=False)
class SubspaceBasis:
    """Orthonormal columns spanning a subspace of ``C^dim_ambient``."""

    dim_ambient: int
    vectors: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=complex).reshape(self.dim_ambient, -1)
        object.__setattr__(self, "vectors", v)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


def qconvolve(t: MatrixTuple, lam: Number, q: Number) -> MatrixTuple:
    """The q-convolution ``c_lambda``: a tuple of ``(N+1) m``-square matrices."""
    q = check_q(q)
    ql = cpow(q, lam)
    m, N = t.m, t.n_poles
    size = (N + 1) * m
    row = np.hstack(t.all_blocks())
    f_hat = np.vstack([row] * (N + 1))
    blocks = []
    for i in range(1, N + 1):
        F = np.zeros((size, size), complex)
        F[i * m:(i + 1) * m, :] = row
        F[i * m:(i + 1) * m, i * m:(i + 1) * m] -= (1 - ql) * np.eye(m)
        blocks.append(F)
    return MatrixTuple(np.eye(size) - f_hat, tuple(blocks), t.poles)


def nullspace(M, tol: float = DEFAULT_TOL, scale: float | None = None) -> SubspaceBasis:
    """Right singular vectors with singular value below ``tol * scale``.

    ``scale`` defaults to the largest singular value (1 for the zero matrix).
    """
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    n = M.shape[1]
    _, s, vh = np.linalg.svd(M)
    if scale is None:
        scale = s[0] if s.size and s[0] > 0 else 1.0
    rank = int(np.sum(s > tol * scale))
    return SubspaceBasis(n, vh[rank:].conj().T)


def _orthonormal_span(cols: np.ndarray, n: int, tol: float) -> np.ndarray:
    if cols.size == 0:
        return np.zeros((n, 0), complex)
    u, s, _ = np.linalg.svd(cols, full_matrices=False)
    rank = int(np.sum(s > tol * max(s[0], 1.0)))
    return u[:, :rank]


def subspace_K(t: MatrixTuple, tol: float = DEFAULT_TOL) -> SubspaceBasis:
    """``ker B_0 + ker B_1 + ... + ker B_N`` embedded block-wise.

    Singular values are judged against the largest block norm (at least 1):
    ``B_0`` is formed by cancellation, so its rounding noise scales with the
    whole tuple rather than with itself.
    """
    m, N = t.m, t.n_poles
    size = (N + 1) * m
    scale = max([1.0] + [np.linalg.norm(B, 2) for B in [t.b_inf, *t.blocks]])
    cols = []
    for j, B in enumerate(t.all_blocks()):
        ker = nullspace(B, tol, scale).vectors
        emb = np.zeros((size, ker.shape[1]), complex)
        emb[j * m:(j + 1) * m, :] = ker
        cols.append(emb)
    return SubspaceBasis(size, np.hstack(cols))


def subspace_L(F: MatrixTuple, lam: Number, q: Number, tol: float = DEFAULT_TOL) -> SubspaceBasis:
    """``ker(F_hat - (1 - q^lambda) I)`` with ``F_hat = I - F_inf``."""
    size = F.m
    f_hat = np.eye(size) - F.b_inf
    scale = max(1.0, np.linalg.norm(f_hat, 2))
    return nullspace(f_hat - (1 - cpow(q, lam)) * np.eye(size), tol, scale)


@dataclass(frozen=True, eq=False)
class MiddleConvolution:
    convolved: MatrixTuple
    K: SubspaceBasis
    L: SubspaceBasis
    complement: np.ndarray  # orthonormal basis of (K + L)^perp, ambient columns
    result: MatrixTuple

    def ambient_functional(self, k: int) -> np.ndarray:
        """Row vector reading ambient coordinate ``k`` from quotient coordinates."""
        return self.complement[k, :].copy()


def qmiddle_convolve_detailed(
    t: MatrixTuple, lam: Number, q: Number, tol: float = DEFAULT_TOL
) -> MiddleConvolution:
    F = qconvolve(t, lam, q)
    K = subspace_K(t, tol)
    L = subspace_L(F, lam, q, tol)
    size = F.m
    W = _orthonormal_span(np.hstack([K.vectors, L.vectors]), size, tol)
    P = W @ W.conj().T
    Q = np.eye(size) - P
    for name, M in zip(["F_inf", *[f"F_{i + 1}" for i in range(F.n_poles)]], [F.b_inf, *F.blocks]):
        leak = np.linalg.norm(Q @ M @ P, 2)
        if leak > tol * max(1.0, np.linalg.norm(M, 2)):
            raise QuotientNotInvariant(f"K + L is not invariant under {name} (leak {leak:.3g})")
    if W.shape[1] == 0:
        V = np.eye(size, dtype=complex)
        result = F
    else:
        V = nullspace(W.conj().T, tol).vectors
        result = F.compress(V)
    return MiddleConvolution(F, K, L, V, result)


def qmiddle_convolve(t: MatrixTuple, lam: Number, q: Number, tol: float = DEFAULT_TOL) -> MatrixTuple:
    """The q-middle convolution ``mc_lambda``: the action of ``c_lambda(t)`` on ``C^n/(K+L)``."""
    return qmiddle_convolve_detailed(t, lam, q, tol).result


def special_tuple(p: QParams, mu: Number = 0) -> MatrixTuple:
    """Scalar tuple of ``y(qx) = q^mu B(x) y(x)``, i.e. the equation of ``x^mu y(x)``."""
    a1, a2, b1, b2 = p.alpha1, p.alpha2, p.beta1, p.beta2
    s = cpow(p.q, mu)
    b_inf = s * b1 * b2 / (a1 * a2)
    B1 = s * (a1 - b1) * (a1 - b2) / (a1 * (a1 - a2))
    B2 = s * (a2 - b1) * (a2 - b2) / (a2 * (a2 - a1))
    return MatrixTuple([[b_inf]], ([[B1]], [[B2]]), (1 / a1, 1 / a2))


def verify_integral_transform(
    t: MatrixTuple,
    lam: Number,
    q: Number,
    sample_x: Sequence[Number],
    xi: Number,
    solution: Callable[[complex], np.ndarray],
    bt: BilateralTruncation = DEFAULT_BILATERAL,
    kernel: Callable[[complex, complex], complex] | None = None,
    divided: Callable[[int, complex], np.ndarray] | None = None,
) -> float:
    """Max over samples of ``||Y(qx) - F(x) Y(x)|| / ||Y(x)||``.

    ``Y_i(x) = int_0^{xi inf} P_lambda(x, s) Y(s) / (s - b_i) d_q s`` with
    ``b_0 = 0``.  ``solution(s)`` returns the length-``m`` vector ``Y(s)``;
    ``divided(i, s)`` may supply ``Y(s)/(s - b_i)`` directly where the
    solution vanishes on a pole.  When ``||Y(x)|| = 0`` the absolute
    residual is reported.
    """
    q = check_q(q)
    F = qconvolve(t, lam, q)
    bs = [0j, *t.poles]
    m = t.m
    if kernel is None:
        ql1 = cpow(q, lam) * q

        def kernel(x, s):
            return poch_ratio([ql1 * s / x], [q * s / x], q, bt.base)

    def over(i: int, s: complex) -> np.ndarray:
        if divided is not None:
            return np.asarray(divided(i, s), dtype=complex)
        return np.asarray(solution(s), dtype=complex) / (s - bs[i])

    def yhat(x: complex) -> np.ndarray:
        out = np.zeros((len(bs), m), complex)
        for i in range(len(bs)):
            for r in range(m):
                out[i, r] = jackson_integral(lambda s: kernel(x, s) * over(i, s)[r], xi, q, bt)
        return out.reshape(-1)

    worst = 0.0
    for x in sample_x:
        x = complex(x)
        y0 = yhat(x)
        y1 = yhat(q * x)
        res = np.linalg.norm(y1 - F.at(x) @ y0)
        norm = np.linalg.norm(y0)
        worst = max(worst, res / norm if norm > 0 else res)
    return worst


def _poly_matrix(t: MatrixTuple) -> tuple[list[list[np.ndarray]], np.ndarray]:
    """``A(x) = M(x) / D(x)`` with ``D = prod (1 - x/b_i)`` and polynomial ``M``."""
    factors = [np.array([1, -1 / b]) for b in t.poles]
    D = np.array([1 + 0j])
    for f in factors:
        D = npoly.polymul(D, f)
    m = t.m
    M = [[npoly.polymul(D, [t.b_inf[r, c]]) for c in range(m)] for r in range(m)]
    for i, B in enumerate(t.blocks):
        rest = np.array([1 + 0j])
        for j, f in enumerate(factors):
            if j != i:
                rest = npoly.polymul(rest, f)
        for r in range(m):
            for c in range(m):
                M[r][c] = npoly.polyadd(M[r][c], npoly.polymul(rest, [B[r, c]]))
    return M, D


def _scale_arg(c: np.ndarray, s: complex) -> np.ndarray:
    """Coefficients of ``p(s x)`` from those of ``p(x)``."""
    return c * s ** np.arange(c.size)


def _row_times(row: list[np.ndarray], M: list[list[np.ndarray]]) -> list[np.ndarray]:
    n = len(row)
    return [
        sum((npoly.polymul(row[k], M[k][c]) for k in range(n)), np.zeros(1, complex)) for c in range(n)
    ]


def _det2(r0: list[np.ndarray], r1: list[np.ndarray]) -> np.ndarray:
    return npoly.polysub(npoly.polymul(r0[0], r1[1]), npoly.polymul(r0[1], r1[0]))


def _conv_matrix(c: np.ndarray, cols: int) -> np.ndarray:
    """Matrix of ``p -> c * p`` acting on coefficient vectors of length ``cols``."""
    out = np.zeros((c.size + cols - 1, cols), complex)
    for j in range(cols):
        out[j:j + c.size, j] = c
    return out


def reduce_to_scalar(
    f_bar: MatrixTuple,
    q: Number,
    functional: Sequence[Number] | None = None,
    degree: int = 2,
    tol: float = DEFAULT_TOL,
) -> ScalarQDiffEq:
    """Eliminate one component of a 2x2 system ``Z(qx) = A(x) Z(x)``.

    ``u = functional . Z`` (default: the first coordinate) satisfies
    ``down(x) u(x/q) + up(x) u(qx) + mid(x) u(x) = 0``; the returned
    coefficients have the lowest degree (at most ``degree``) and the
    ``u(x/q)`` coefficient is monic.
    """
    q = check_q(q)
    if f_bar.m != 2:
        raise EliminationSingular("scalar reduction needs a 2x2 system")
    c = np.array([1, 0], complex) if functional is None else np.asarray(functional, complex)
    M, D = _poly_matrix(f_bar)
    r0 = [np.array([c[0]]), np.array([c[1]])]
    r1 = _row_times(r0, M)  # c M(x)
    Mq = [[_scale_arg(e, q) for e in row] for row in M]
    r2 = _row_times(_row_times(r0, Mq), M)  # c M(qx) M(x)
    Dq = _scale_arg(D, q)
    # alpha u(q^2 x) + beta u(qx) + gamma u(x) = 0 after clearing D(x)^2 D(qx).
    alpha = npoly.polymul(_det2(r0, r1), npoly.polymul(D, Dq))
    beta = -npoly.polymul(_det2(r0, r2), D)
    gamma = npoly.polymul(_det2(r0, _row_times(r0, Mq)), _det2(M[0], M[1]))
    if not np.any(np.abs(alpha) > 0):
        raise EliminationSingular("the chosen component decouples; nothing to eliminate")
    # Shift x -> x/q: coefficients of u(x/q), u(qx), u(x) up to a common factor.
    down, up, mid = (_scale_arg(p, 1 / q) for p in (gamma, alpha, beta))
    # Minimal-degree representative: (d, u, m) with d*up - u*down = 0, d*mid - m*down = 0.
    k = degree + 1
    z = np.zeros
    rows_up = np.hstack([_conv_matrix(up, k), -_conv_matrix(down, k), z((up.size + k - 1, k))])
    rows_mid = np.hstack([_conv_matrix(mid, k), z((mid.size + k - 1, k)), -_conv_matrix(down, k)])
    n_rows = max(rows_up.shape[0], rows_mid.shape[0])
    A = np.vstack([np.pad(rows_up, ((0, n_rows - rows_up.shape[0]), (0, 0))),
                   np.pad(rows_mid, ((0, n_rows - rows_mid.shape[0]), (0, 0)))])
    A /= np.max(np.abs(A))
    ns = nullspace(A, tol)
    if ns.dim != 1:
        raise EliminationSingular(f"expected a one-dimensional family of degree-{degree} equations, got {ns.dim}")
    v = ns.vectors[:, 0]
    return ScalarQDiffEq(v[:k], v[k:2 * k], v[2 * k:], q).normalized()


def coefficients_close(a: ScalarQDiffEq, b: ScalarQDiffEq, degree: int = 2) -> float:
    """Max relative entrywise gap between two normalised coefficient sets."""
    A = a.normalized().coefficient_matrix(degree)
    B = b.normalized().coefficient_matrix(degree)
    return float(np.max(np.abs(A - B)) / max(1.0, np.max(np.abs(B))))


def write_tuple(path: str | Path, t: MatrixTuple, q: Number, lam: Number) -> None:
    """Plain-text tuple format.

    Line 1: ``m N q_re q_im lam_re lam_im``; then ``N + 1`` matrices
    (``B_inf`` first), each as ``m`` lines of ``re im`` pairs; the last line
    holds the poles as ``re im`` pairs.  Values use ``repr`` so a round trip
    is bit-exact.
    """
    q, lam = complex(q), complex(lam)
    lines = [f"{t.m} {t.n_poles} {q.real!r} {q.imag!r} {lam.real!r} {lam.imag!r}"]
    for B in [t.b_inf, *t.blocks]:
        for row in B:
            lines.append(" ".join(f"{complex(v).real!r} {complex(v).imag!r}" for v in row))
    lines.append(" ".join(f"{b.real!r} {b.imag!r}" for b in t.poles))
    Path(path).write_text("\n".join(lines) + "\n")


def _pairs(tokens: list[str], where: str) -> list[complex]:
    if len(tokens) % 2:
        raise ParseError(f"{where}: expected 're im' pairs")
    try:
        vals = [float(v) for v in tokens]
    except ValueError as exc:
        raise ParseError(f"{where}: {exc}") from None
    return [complex(vals[i], vals[i + 1]) for i in range(0, len(vals), 2)]


def read_tuple(path: str | Path) -> tuple[MatrixTuple, complex, complex]:
    """Inverse of :func:`write_tuple`; returns ``(tuple, q, lambda)``."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(str(exc)) from None
    lines = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines or len(lines[0]) != 6:
        raise ParseError("header must be 'm N q_re q_im lam_re lam_im'")
    try:
        m, N = int(lines[0][0]), int(lines[0][1])
    except ValueError:
        raise ParseError("m and N must be integers") from None
    if m < 1 or N < 1:
        raise ParseError("m and N must be positive")
    q, lam = _pairs(lines[0][2:], "header")
    body = lines[1:]
    if len(body) != (N + 1) * m + 1:
        raise ParseError(f"expected {(N + 1) * m} matrix rows and one pole line, got {len(body)} lines")
    mats = []
    for k in range(N + 1):
        rows = []
        for r in range(m):
            row = _pairs(body[k * m + r], f"matrix {k} row {r}")
            if len(row) != m:
                raise ParseError(f"matrix {k} row {r}: expected {m} entries")
            rows.append(row)
        mats.append(rows)
    poles = _pairs(body[-1], "poles")
    if len(poles) != N:
        raise ParseError(f"expected {N} poles")
    try:
        t = MatrixTuple(mats[0], tuple(mats[1:]), tuple(poles))
    except InvalidParameters as exc:
        raise ParseError(str(exc)) from None
    return t, q, lam
