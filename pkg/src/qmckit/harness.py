"""Seeded verification suites producing :class:`RelationReport` rows.

Each row draws its own sample stream from ``seed`` and a CRC of its id. Rows
are therefore independent of evaluation order and can run in parallel without
affecting the output.
"""
from __future__ import annotations

import json
import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import ConfigError, InvalidParameters, QMCError
from .jackson import BilateralTruncation, QParams, weight_y, weight_y_divided, yhat1_bilateral
from .qmc import (
    coefficients_close,
    qmiddle_convolve_detailed,
    reduce_to_scalar,
    special_tuple,
    verify_integral_transform,
)
from .qseries import (
    DEFAULT_TRUNCATION,
    Truncation,
    cpow,
    qpoch_finite,
    qpoch_infinite,
    rphi,
    terminating_index,
    theta_q,
)
from .relations import (
    COROLLARY42,
    EXTRAS,
    IDENTITY_TOL,
    PROP32,
    PROP33,
    PROP34,
    RELATION_TOL,
    THEOREM41,
    Relation,
    RelationReport,
    andrews_sides,
    gr_331_sides,
    gr_333_sides,
    gr_iii10_sides,
    relation_admissible,
    relation_residual,
    undetermined_residuals,
    verify_relations,
    verify_remark41,
    _rel_err,
)
from .solutions import (
    SERIES_FAMILIES,
    SolutionFamily,
    Tag,
    closed_form,
    domain_violation,
    eval_qappell_solution,
    eval_solution,
    qappell_args,
    qappell_constant,
)
from .variant import (
    VariantParams,
    e2_equation,
    fnparams_from_qparams,
    fnparams_from_variant,
    gauge,
    qparams_from_variant,
    special_equation,
    variant_equation,
)

SERIES_TOL = 1e-12
SUITES = ("series", "qmc", "solutions", "props", "theorem41")
# Points closer than this to a pole, a theta zero or the edge of a
# convergence disc are rejected by the samplers.
SAMPLER_GUARD = 1e-3
ARG_LIMIT = 0.95


# Parameter names accepted in a config's "params" block.
QPARAM_NAMES = ("q", "lam", "alpha1", "alpha2", "beta1", "beta2")
VARIANT_NAMES = ("q", "h1", "h2", "l1", "l2", "k1", "k2", "t1", "t2")
DEFAULT_QPARAMS = {"q": 0.5, "lam": 0.3, "alpha1": 0.6, "alpha2": 1.7, "beta1": 2.3, "beta2": 3.1}
DEFAULT_VARIANT = {"q": 0.5, "h1": 0.1, "h2": -0.1, "l1": -0.2, "l2": 0.3, "k1": 0.15, "k2": 0.1, "t1": 0.8, "t2": 1.9}


def parse_complex(value) -> complex:
    """A number, a ``[re, im]`` pair or a string such as ``"1.5-0.2j"``."""
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ConfigError(f"complex pair must have two entries, got {value!r}")
        return complex(float(value[0]), float(value[1]))
    try:
        return complex(value.replace(" ", "") if isinstance(value, str) else value)
    except (TypeError, ValueError):
        raise ConfigError(f"cannot read {value!r} as a complex number") from None


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    q_range: tuple[float, float] = (0.2, 0.8)
    exponent_range: tuple[float, float] = (-0.8, 0.8)
    samples_per_relation: int = 20
    truncation: Truncation = DEFAULT_TRUNCATION
    output_dir: str = "qmckit-reports"
    threads: int = 1
    # (name, value) pairs overriding DEFAULT_QPARAMS / DEFAULT_VARIANT
    params: tuple[tuple[str, complex], ...] = ()

    def __post_init__(self):
        lo, hi = self.q_range
        if not 0 < lo <= hi < 1:
            raise ConfigError(f"q_range {self.q_range} must lie inside (0, 1)")
        if self.exponent_range[0] > self.exponent_range[1]:
            raise ConfigError("exponent_range must be increasing")
        if self.samples_per_relation < 1:
            raise ConfigError("samples_per_relation must be >= 1")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        known = set(QPARAM_NAMES) | set(VARIANT_NAMES)
        params = tuple(sorted((str(k), parse_complex(v)) for k, v in dict(self.params).items()))
        unknown = sorted(k for k, _ in params if k not in known)
        if unknown:
            raise ConfigError(f"unknown parameters: {unknown}")
        object.__setattr__(self, "params", params)

    @classmethod
    def from_mapping(cls, data: dict) -> "RunConfig":
        data = dict(data)
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            if "truncation" in data:
                data["truncation"] = Truncation(**data["truncation"])
            for key in ("q_range", "exponent_range"):
                if key in data:
                    lo, hi = data[key]
                    data[key] = (float(lo), float(hi))
            if "params" in data:
                if not isinstance(data["params"], dict):
                    raise ConfigError("params must be a JSON object")
                data["params"] = tuple(data["params"].items())
            return cls(**data)
        except (TypeError, ValueError) as e:
            raise ConfigError(str(e)) from None

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_mapping(data)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["q_range"] = list(self.q_range)
        d["exponent_range"] = list(self.exponent_range)
        d["params"] = {k: [v.real, v.imag] for k, v in self.params}
        return d

    def qparams(self) -> QParams:
        """The configured ``QParams`` pack (defaults filled in)."""
        vals = {**DEFAULT_QPARAMS, **{k: v for k, v in self.params if k in QPARAM_NAMES}}
        return QParams(**vals)

    def variant_params(self) -> VariantParams:
        vals = {**DEFAULT_VARIANT, **{k: v for k, v in self.params if k in VARIANT_NAMES}}
        return VariantParams(**vals)


def threads_from_env(default: int = 1) -> int:
    raw = os.environ.get("QMCKIT_THREADS")
    if not raw:
        return default
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"QMCKIT_THREADS={raw!r} is not an integer") from None
    if n < 1:
        raise ConfigError("QMCKIT_THREADS must be >= 1")
    return n


# --------------------------------------------------------------------------
# samplers


class Sampler:
    """Random parameter packs and evaluation points for one report row."""

    def __init__(self, cfg: RunConfig, stream: str):
        self.cfg = cfg
        self.rng = np.random.default_rng([cfg.seed, zlib.crc32(stream.encode())])

    def uniform(self, lo: float, hi: float) -> float:
        return float(self.rng.uniform(lo, hi))

    def q(self) -> float:
        return self.uniform(*self.cfg.q_range)

    def qparams(self) -> QParams | None:
        q = self.q()
        lam = self.uniform(*self.cfg.exponent_range)
        a1, a2 = self.uniform(0.3, 1.8), self.uniform(0.3, 1.8)
        b1, b2 = self.uniform(0.4, 3.5), self.uniform(0.4, 3.5)
        if min(abs(a1 - a2), abs(b1 - b2)) < 0.05:
            return None
        try:
            return QParams(q, lam, a1, a2, b1, b2)
        except InvalidParameters:
            return None

    def variant(self) -> VariantParams:
        lo, hi = self.cfg.exponent_range
        h1, h2, l1, l2, k1, k2 = (self.uniform(lo / 2, hi / 2) for _ in range(6))
        return VariantParams(self.q(), h1, h2, l1, l2, k1, k2, self.uniform(0.5, 2.0), self.uniform(0.5, 2.0))

    def x(self, rmin: float = 0.1, rmax: float = 6.0, arg: float = 0.5) -> complex:
        r = float(np.exp(self.rng.uniform(np.log(rmin), np.log(rmax))))
        return complex(r * np.exp(1j * self.rng.uniform(-arg, arg)))

    def cplx(self, rmin: float, rmax: float) -> complex:
        r = self.uniform(rmin, rmax)
        return complex(r * np.exp(1j * self.rng.uniform(-np.pi, np.pi)))


def _draw(n: int, draw: Callable[[], object | None], max_tries: int | None = None) -> tuple[list, int]:
    """``n`` accepted draws (``None`` means rejected) and the rejection count."""
    out, rejected = [], 0
    limit = max_tries if max_tries is not None else 400 * n + 400
    for _ in range(limit):
        if len(out) == n:
            break
        v = draw()
        if v is None:
            rejected += 1
        else:
            out.append(v)
    return out, rejected


def families_usable(tags, p: QParams, xs, guard: float = SAMPLER_GUARD, arg_limit: float = ARG_LIMIT) -> bool:
    """Every family is in its domain at every point in ``xs`` with margins."""
    for x in xs:
        for tag in tags:
            fam = SolutionFamily(tag, p)
            try:
                if domain_violation(fam, x, guard) is not None:
                    return False
                cf = closed_form(fam, x)
            except QMCError:
                return False
            if abs(cf.z) > arg_limit and not any(terminating_index(a, p.q) is not None for a in cf.upper):
                return False
    return True


# --------------------------------------------------------------------------
# series suite


def _series_rows(cfg: RunConfig) -> dict[str, Callable[[], RelationReport]]:
    n = max(cfg.samples_per_relation, 1)
    t = cfg.truncation

    def row(rid: str, tol: float, point: Callable[[Sampler], tuple | None], value: Callable[..., float]):
        def run() -> RelationReport:
            s = Sampler(cfg, rid)
            rep = RelationReport(rid, tol)
            pts, rejected = _draw(n, lambda: point(s))
            for args in pts:
                try:
                    rep.record(value(*args), {"args": [complex(a) for a in args]}, None)
                except QMCError as e:
                    rep.fail({"args": [complex(a) for a in args]}, None, str(e))
            if len(pts) < n:
                rep.fail(None, None, f"only {len(pts)} of {n} admissible points after {rejected} rejections")
            return rep

        return run

    def qpoch_point(s):
        return s.q(), s.cplx(0.05, 3.0)

    def qpoch_value(q, a):
        return _rel_err(qpoch_infinite(a, q, t), (1 - a) * qpoch_infinite(q * a, q, t))

    def perm_point(s):
        q = s.q()
        up = [s.cplx(0.1, 1.5) for _ in range(3)]
        lo = [s.cplx(0.1, 1.5) for _ in range(2)]
        z = s.cplx(0.05, 0.9)
        return (q, *up, *lo, z)

    def perm_value(q, a, b, c, d, e, z):
        ref = rphi((a, b, c), (d, e), q, z, t)
        return max(_rel_err(ref, rphi(u, l, q, z, t)) for u in ((c, a, b), (b, c, a)) for l in ((e, d),))

    def term_point(s):
        q = s.q()
        nterm = int(s.rng.integers(0, 12))
        return (q, cpow(q, -nterm), s.cplx(0.1, 1.5), s.cplx(0.1, 1.5), s.cplx(0.1, 1.5), s.cplx(0.1, 1.5), s.cplx(0.1, 3.0))

    def term_value(q, a, b, c, d, e, z):
        nterm = terminating_index(a, q)
        brute = sum(
            qpoch_finite(a, q, k) * qpoch_finite(b, q, k) * qpoch_finite(c, q, k)
            / (qpoch_finite(d, q, k) * qpoch_finite(e, q, k) * qpoch_finite(q, q, k)) * z**k
            for k in range(nterm + 1)
        )
        return _rel_err(rphi((a, b, c), (d, e), q, z, t), brute)

    def theta_point(s):
        return s.q(), s.cplx(0.1, 5.0)

    def theta_value(q, x):
        return _rel_err(theta_q(q * x, q, t), -theta_q(x, q, t) / x)

    def binom_point(s):
        return s.q(), s.cplx(0.05, 3.0), s.cplx(0.01, 0.9)

    def binom_value(q, a, z):
        return _rel_err(rphi((a,), (), q, z, t), qpoch_infinite(a * z, q, t) / qpoch_infinite(z, q, t))

    def gr_point(kind):
        def point(s):
            q = s.q()
            a, c, d, e = (s.cplx(0.2, 2.5) for _ in range(4))
            b = s.cplx(0.1, 0.95)
            w = d * e / (a * b * c)
            if abs(w) > ARG_LIMIT:
                return None
            if kind == "333" and abs(b * q / d) > ARG_LIMIT:
                return None
            if kind == "331" and abs(q) > ARG_LIMIT:
                return None
            return q, a, b, c, d, e
        return point

    def gr_value(sides):
        def value(q, a, b, c, d, e):
            return _rel_err(*sides(a, b, c, d, e, q, t))
        return value

    def andrews_point(s):
        q = s.q()
        a = s.cplx(0.05, ARG_LIMIT)
        return q, a, s.cplx(0.1, 2.0), s.cplx(0.1, 2.0), s.cplx(0.1, 2.0), s.cplx(0.0, 0.8), s.cplx(0.0, 0.8)

    def andrews_value(q, a, b, bp, c, y, z):
        return _rel_err(*andrews_sides(a, b, bp, c, q, y, z, t))

    return {
        "series_qpoch_functional": row("series_qpoch_functional", SERIES_TOL, qpoch_point, qpoch_value),
        "series_rphi_permutation": row("series_rphi_permutation", SERIES_TOL, perm_point, perm_value),
        "series_terminating_bruteforce": row("series_terminating_bruteforce", SERIES_TOL, term_point, term_value),
        "series_theta_quasiperiod": row("series_theta_quasiperiod", SERIES_TOL, theta_point, theta_value),
        "series_qbinomial": row("series_qbinomial", SERIES_TOL, binom_point, binom_value),
        "transform_gr_iii10": row("transform_gr_iii10", IDENTITY_TOL, gr_point("iii10"), gr_value(gr_iii10_sides)),
        "transform_gr_333": row("transform_gr_333", IDENTITY_TOL, gr_point("333"), gr_value(gr_333_sides)),
        "transform_gr_331": row("transform_gr_331", IDENTITY_TOL, gr_point("331"), gr_value(gr_331_sides)),
        "transform_andrews": row("transform_andrews", IDENTITY_TOL, andrews_point, andrews_value),
    }


# --------------------------------------------------------------------------
# relation-backed suites


def _relation_row(cfg: RunConfig, rel: Relation, tol: float = RELATION_TOL) -> Callable[[], RelationReport]:
    def run() -> RelationReport:
        s = Sampler(cfg, rel.relation_id)

        def draw():
            p = s.qparams()
            if p is None:
                return None
            x = s.x()
            if not families_usable(rel.families, p, [x]):
                return None
            if relation_admissible([rel], p, x, SAMPLER_GUARD) is not None:
                return None
            return p, x

        pts, rejected = _draw(cfg.samples_per_relation, draw)
        rep = RelationReport(rel.relation_id, tol)
        for p, x in pts:
            (r,) = verify_relations([rel], p, [x], cfg.truncation, tol)
            rep = rep.merge(r)
        if len(pts) < cfg.samples_per_relation:
            rep.fail(None, None, f"only {len(pts)} admissible points after {rejected} rejections")
        return rep

    return run


def _residual_row(
    cfg: RunConfig,
    rid: str,
    tags,
    fn_of: Callable[[QParams], Callable[[complex], complex]],
    nonhom: bool,
    tol: float = RELATION_TOL,
) -> Callable[[], RelationReport]:
    """Residual of ``fn_of(p)`` in the equation for ``y1_hat`` (optionally inhomogeneous)."""

    def run() -> RelationReport:
        s = Sampler(cfg, rid)

        def draw():
            p = s.qparams()
            if p is None:
                return None
            x = s.x()
            if not families_usable(tags, p, [x, x / p.q, x * p.q]):
                return None
            return p, x

        pts, rejected = _draw(cfg.samples_per_relation, draw)
        rep = RelationReport(rid, tol)
        for p, x in pts:
            eq = special_equation(p, nonhom)
            try:
                rep.record(eq.relative_residual(fn_of(p), x), p, x)
            except QMCError as e:
                rep.fail(p, x, str(e))
        if len(pts) < cfg.samples_per_relation:
            rep.fail(None, None, f"only {len(pts)} admissible points after {rejected} rejections")
        return rep

    return run


def _family_fn(tag: Tag, t: Truncation):
    return lambda p: (lambda x: eval_solution(SolutionFamily(tag, p), x, t))


def _diff_fn(u: Tag, w: Tag, t: Truncation):
    return lambda p: (
        lambda x: eval_solution(SolutionFamily(u, p), x, t) - eval_solution(SolutionFamily(w, p), x, t)
    )


def _variant_point(s: Sampler, shifted: bool, rmin=2.0, rmax=8.0):
    vp = s.variant()
    try:
        p = qparams_from_variant(vp)
    except InvalidParameters:
        return None
    x = s.x(rmin, rmax, 0.4)
    for f in ((1.0, vp.q, 1 / vp.q) if shifted else (1.0,)):
        if domain_violation(SolutionFamily(Tag.G_QAPPELL, vp), x * f, SAMPLER_GUARD) is not None:
            return None
        if max(abs(v) for v in qappell_args(vp, x * f)[4:]) > ARG_LIMIT:
            return None
        if not families_usable((Tag.Y_X, Tag.Y_BETA1, Tag.Y_BETA2), p, [x * f]):
            return None
    return vp, p, x


def _variant_row(cfg: RunConfig, rid: str, value: Callable, tol: float = RELATION_TOL, shifted: bool = False) -> Callable:
    def run() -> RelationReport:
        s = Sampler(cfg, rid)
        pts, rejected = _draw(cfg.samples_per_relation, lambda: _variant_point(s, shifted))
        rep = RelationReport(rid, tol)
        for vp, p, x in pts:
            try:
                rep.record(value(vp, p, x), vp, x)
            except QMCError as e:
                rep.fail(vp, x, str(e))
        if len(pts) < cfg.samples_per_relation:
            rep.fail(None, None, f"only {len(pts)} admissible points after {rejected} rejections")
        return rep

    return run


def _solutions_rows(cfg: RunConfig) -> dict[str, Callable[[], RelationReport]]:
    t = cfg.truncation
    rows: dict[str, Callable[[], RelationReport]] = {}
    for tag in (Tag.Y_BETA1, Tag.Y_BETA2, Tag.Y_X, *SERIES_FAMILIES):
        rid = f"residual_{tag.value}_homogeneous"
        rows[rid] = _residual_row(cfg, rid, (tag,), _family_fn(tag, t), False)
    for tag in (Tag.Y_ALPHA1, Tag.Y_ALPHA2, Tag.Y_LAMBDA):
        rid = f"residual_{tag.value}_nonhomogeneous"
        rows[rid] = _residual_row(cfg, rid, (tag,), _family_fn(tag, t), True)
    for u, w in ((Tag.Y_ALPHA1, Tag.Y_ALPHA2), (Tag.Y_ALPHA1, Tag.Y_LAMBDA), (Tag.Y_ALPHA2, Tag.Y_LAMBDA)):
        rid = f"residual_{u.value}_minus_{w.value}_homogeneous"
        rows[rid] = _residual_row(cfg, rid, (u, w), _diff_fn(u, w, t), False)
    rid = "remark41_j13_yx_homogeneous"
    rows[rid] = _remark_row(cfg, rid)

    def qappell_residual(vp, p, x):
        return variant_equation(vp).relative_residual(lambda s: eval_qappell_solution(vp, s, t), x)

    rows["residual_g_qappell_variant"] = _variant_row(
        cfg, "residual_g_qappell_variant", qappell_residual, shifted=True
    )

    def gauge_residual(tag):
        def value(vp, p, x):
            fn = gauge(lambda s: eval_solution(SolutionFamily(tag, p), s, t), -vp.k2)
            return variant_equation(vp).relative_residual(fn, x)
        return value

    for tag in (Tag.Y_BETA1, Tag.Y_BETA2, Tag.Y_X):
        rid = f"map_variant_gauge_{tag.value}"
        rows[rid] = _variant_row(cfg, rid, gauge_residual(tag), shifted=True)

    def fn_from_variant(vp, p, x):
        fp = fnparams_from_variant(vp)
        fn = gauge(lambda s: eval_qappell_solution(vp, s, t), -vp.lambda0)
        return e2_equation(fp).relative_residual(fn, x)

    rows["map_fn_from_variant_qappell"] = _variant_row(
        cfg, "map_fn_from_variant_qappell", fn_from_variant, shifted=True
    )

    def fn_constraint(vp, p, x):
        return max(fnparams_from_variant(vp).constraint_gap(), fnparams_from_qparams(p).constraint_gap())

    rows["map_fn_constraint"] = _variant_row(cfg, "map_fn_constraint", fn_constraint, tol=SERIES_TOL)
    for tag in (Tag.Y_BETA1, Tag.Y_X, Tag.A1_1):
        rid = f"map_fn_from_qparams_{tag.value}"
        rows[rid] = _fn_row(cfg, rid, tag)
    for rel in (*COROLLARY42, *EXTRAS):
        rows[rel.relation_id] = _relation_row(cfg, rel, RELATION_TOL if rel in COROLLARY42 else IDENTITY_TOL)
    rows.update(_info_rows(cfg))
    return rows


def _fn_row(cfg: RunConfig, rid: str, tag: Tag) -> Callable[[], RelationReport]:
    t = cfg.truncation

    def run() -> RelationReport:
        s = Sampler(cfg, rid)

        def draw():
            p = s.qparams()
            if p is None:
                return None
            x = s.x()
            if not families_usable((tag,), p, [x, x / p.q, x * p.q]):
                return None
            return p, x

        pts, rejected = _draw(cfg.samples_per_relation, draw)
        rep = RelationReport(rid, RELATION_TOL)
        for p, x in pts:
            fn = gauge(lambda s_: eval_solution(SolutionFamily(tag, p), s_, t), -p.lam)
            for fp in (fnparams_from_qparams(p),):
                for variant in (fp, fp.swapped_a(), fp.swapped_b()):
                    rep.record(e2_equation(variant).relative_residual(fn, x), p, x)
        if len(pts) < cfg.samples_per_relation:
            rep.fail(None, None, f"only {len(pts)} admissible points after {rejected} rejections")
        return rep

    return run


def _remark_row(cfg: RunConfig, rid: str) -> Callable[[], RelationReport]:
    def run() -> RelationReport:
        s = Sampler(cfg, rid)

        def draw():
            p = s.qparams()
            if p is None:
                return None
            x = s.x()
            xs = [x, x / p.q, x * p.q]
            if not families_usable((Tag.Y_X,), p, xs):
                return None
            if any(relation_admissible([_J13_PROBE], p, y, SAMPLER_GUARD) for y in xs):
                return None
            return p, x

        pts, rejected = _draw(cfg.samples_per_relation, draw)
        rep = RelationReport(rid, RELATION_TOL)
        for p, x in pts:
            (r,) = verify_remark41(p, [x], cfg.truncation, only={"remark41_j13_yx"})
            r.relation_id = rid
            rep = rep.merge(r)
        if len(pts) < cfg.samples_per_relation:
            rep.fail(None, None, f"only {len(pts)} admissible points after {rejected} rejections")
        return rep

    return run


_J13_PROBE = Relation("probe_j13", (), ("J13",), lambda P: (P.c("J13"), [P.c("J13")]))


def _info_rows(cfg: RunConfig) -> dict[str, Callable[[], RelationReport]]:
    """Measured residuals of f34, f36, f37; every row replays the same sample stream."""

    def row(rid: str) -> Callable[[], RelationReport]:
        def run() -> RelationReport:
            s = Sampler(cfg, "info_undetermined")
            tags = (Tag.F34, Tag.F36, Tag.F37)

            def draw():
                p = s.qparams()
                if p is None:
                    return None
                x = s.x()
                if not families_usable(tags, p, [x, x / p.q, x * p.q]):
                    return None
                return p, x

            pts, _ = _draw(cfg.samples_per_relation, draw)
            rep = RelationReport(rid, None)
            for p, x in pts:
                for r in undetermined_residuals(p, [x], cfg.truncation):
                    if r.relation_id == rid:
                        rep = rep.merge(r)
            return rep

        return run

    ids = [f"info_{n}_{k}" for n in ("f34", "f36", "f37") for k in ("homogeneous", "nonhomogeneous")]
    return {rid: row(rid) for rid in ids}


def _props_rows(cfg: RunConfig) -> dict[str, Callable[[], RelationReport]]:
    t = cfg.truncation
    rows = {r.relation_id: _relation_row(cfg, r) for r in (*PROP32, *PROP33, *PROP34)}

    def prop31(vp, p, x):
        const = qappell_constant(p, t)
        lhs = cpow(x, -vp.k2) * eval_solution(SolutionFamily(Tag.Y_X, p), x, t)
        return relation_residual(lhs, [const * eval_qappell_solution(vp, x, t)])

    rows["prop31_yx_qappell"] = _variant_row(cfg, "prop31_yx_qappell", prop31)
    return rows


def _theorem_rows(cfg: RunConfig) -> dict[str, Callable[[], RelationReport]]:
    return {r.relation_id: _relation_row(cfg, r) for r in THEOREM41}


# --------------------------------------------------------------------------
# qmc suite


def _qmc_rows(cfg: RunConfig) -> dict[str, Callable[[], RelationReport]]:
    n = cfg.samples_per_relation
    t = cfg.truncation

    def mc_draw(s: Sampler):
        p = s.qparams()
        if p is None or abs(1 - p.ql) < 1e-3:
            return None
        return p

    def dims() -> RelationReport:
        s = Sampler(cfg, "qmc_section2_dims")
        rep = RelationReport("qmc_section2_dims", 0.0)
        pts, _ = _draw(n, lambda: mc_draw(s))
        for p in pts:
            try:
                mc = qmiddle_convolve_detailed(special_tuple(p), p.lam, p.q)
            except QMCError as e:
                rep.fail(p, None, str(e))
                continue
            ok = (mc.K.dim, mc.L.dim, mc.result.m) == (1, 0, 2)
            rep.record(0.0 if ok else 1.0, p, None)
        return rep

    def reduce() -> RelationReport:
        s = Sampler(cfg, "qmc_reduce_to_scalar")
        rep = RelationReport("qmc_reduce_to_scalar", SERIES_TOL)
        pts, _ = _draw(n, lambda: mc_draw(s))
        for p in pts:
            try:
                mc = qmiddle_convolve_detailed(special_tuple(p), p.lam, p.q)
                eq = reduce_to_scalar(mc.result, p.q, mc.ambient_functional(1))
            except QMCError as e:
                rep.fail(p, None, str(e))
                continue
            rep.record(coefficients_close(eq, special_equation(p)), p, None)
        return rep

    def specialised(rid: str, target: Tag, xi_of: Callable[[QParams, complex], complex]) -> Callable:
        def run() -> RelationReport:
            s = Sampler(cfg, rid)

            def draw():
                p = s.qparams()
                if p is None:
                    return None
                x = s.x(0.5, 5.0)
                if not families_usable((target,), p, [x]):
                    return None
                return p, x

            pts, rejected = _draw(n, draw)
            rep = RelationReport(rid, RELATION_TOL)
            for p, x in pts:
                try:
                    got = yhat1_bilateral(x, xi_of(p, x), p)
                    want = eval_solution(SolutionFamily(target, p), x, t)
                except QMCError as e:
                    rep.fail(p, x, str(e))
                    continue
                rep.record(relation_residual(got, [want]), p, x)
            if len(pts) < n:
                rep.fail(None, None, f"only {len(pts)} admissible points after {rejected} rejections")
            return rep

        return run

    def transform() -> RelationReport:
        # Convergence of the lattice sum for x^mu y(x) needs 0 < mu < lambda - mu';
        # mu is drawn with a margin on both sides.
        rid = "qmc_integral_transform_gauged"
        s = Sampler(cfg, rid)
        margin = 0.25

        def draw():
            p = mc_draw(s)
            if p is None or (p.lam - p.mu_prime).real < 3 * margin:
                return None
            return p

        pts, rejected = _draw(n, draw)
        rep = RelationReport(rid, RELATION_TOL)
        bt = BilateralTruncation(t, 2000, 2000)
        for p in pts:
            mu = s.uniform(margin, min((p.lam - p.mu_prime).real - margin, 1.5))
            x = s.x(1.0, 4.0, 0.3)
            xi = [1 / p.alpha1, 1 / p.alpha2, s.cplx(0.5, 2.0)][int(s.rng.integers(0, 3))]
            try:
                res = verify_integral_transform(
                    special_tuple(p, mu), p.lam, p.q, [x], xi,
                    lambda u: np.array([cpow(u, mu) * weight_y(u, p, t)]),
                    bt,
                    divided=lambda i, u: np.array([weight_y_divided(i, u, p, mu, t)]),
                )
            except QMCError as e:
                rep.fail(p, x, str(e))
                continue
            rep.record(res, p, x)
        if len(pts) < n:
            rep.fail(None, None, f"only {len(pts)} admissible points after {rejected} rejections")
        return rep

    return {
        "qmc_section2_dims": dims,
        "qmc_reduce_to_scalar": reduce,
        "qmc_yhat1_xi_inv_alpha1": specialised("qmc_yhat1_xi_inv_alpha1", Tag.Y_ALPHA1, lambda p, x: 1 / p.alpha1),
        "qmc_yhat1_xi_inv_alpha2": specialised("qmc_yhat1_xi_inv_alpha2", Tag.Y_ALPHA2, lambda p, x: 1 / p.alpha2),
        "qmc_yhat1_xi_lambda_x": specialised("qmc_yhat1_xi_lambda_x", Tag.Y_LAMBDA, lambda p, x: x / p.ql),
        "qmc_integral_transform_gauged": transform,
    }


# --------------------------------------------------------------------------


_BUILDERS = {
    "series": _series_rows,
    "qmc": _qmc_rows,
    "solutions": _solutions_rows,
    "props": _props_rows,
    "theorem41": _theorem_rows,
}


def suite_rows(suite: str, cfg: RunConfig) -> dict[str, Callable[[], RelationReport]]:
    if suite == "all":
        rows = {}
        for name in SUITES:
            rows.update(_BUILDERS[name](cfg))
        return rows
    if suite not in _BUILDERS:
        raise ConfigError(f"unknown suite {suite!r}; choose from {', '.join((*SUITES, 'all'))}")
    return _BUILDERS[suite](cfg)


def run_suite(suite: str, cfg: RunConfig, only: set[str] | None = None) -> list[RelationReport]:
    """Run every row of ``suite``; the result is sorted by ``relation_id``."""
    rows = suite_rows(suite, cfg)
    if only is not None:
        rows = {k: v for k, v in rows.items() if k in only}
    names = sorted(rows)
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            reports = list(pool.map(lambda k: rows[k](), names))
    else:
        reports = [rows[k]() for k in names]
    return reports
