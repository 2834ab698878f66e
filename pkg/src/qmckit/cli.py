"""Command-line front end.

Exit codes:

==  =====================================================
0   success
1   a verification row failed
2   parameters or argument outside the convergence domain
3   a series failed to converge within its truncation
4   unknown solution family
5   invalid configuration or command line
6   malformed tuple file
7   K + L is not invariant under the convolved tuple
==  =====================================================
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import (
    ConfigError,
    ParseError,
    QMCError,
    QuotientNotInvariant,
    TruncationFailure,
    UnknownFamily,
)
from .harness import (
    QPARAM_NAMES,
    SUITES,
    VARIANT_NAMES,
    RunConfig,
    parse_complex,
    run_suite,
    threads_from_env,
)
from .qmc import qmiddle_convolve_detailed, read_tuple, reduce_to_scalar, special_tuple, write_tuple
from .relations import RelationReport, reports_to_csv, reports_to_json
from .solutions import SolutionFamily, Tag, domain_violation, evaluator

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_DOMAIN = 2
EXIT_TRUNCATION = 3
EXIT_UNKNOWN_FAMILY = 4
EXIT_CONFIG = 5
EXIT_PARSE = 6
EXIT_QUOTIENT = 7


class _Parser(argparse.ArgumentParser):
    # argparse would exit with 2, which is reserved for domain errors
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qmckit", description="q-middle convolution and q-series verification toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--seed", type=int)
        p.add_argument("--samples", type=int, dest="samples_per_relation")
        p.add_argument("--q-range", type=float, nargs=2, metavar=("LO", "HI"))
        p.add_argument("--output-dir")
        p.add_argument("--threads", type=int)

    def param_flags(p: argparse.ArgumentParser) -> None:
        for name in dict.fromkeys(QPARAM_NAMES + VARIANT_NAMES):
            p.add_argument(f"--{name}", type=parse_complex, metavar="Z")

    ev = sub.add_parser("eval", help="evaluate a solution family at x")
    ev.add_argument("family")
    ev.add_argument("--x", type=parse_complex, required=True, metavar="Z")
    common(ev)
    param_flags(ev)

    ver = sub.add_parser("verify", help="run a verification suite and write reports")
    ver.add_argument("suite", choices=(*SUITES, "all"))
    ver.add_argument("--only", nargs="+", metavar="ID", help="restrict to these relation ids")
    common(ver)

    mc = sub.add_parser("qmc", help="q-middle convolution of a tuple file")
    src = mc.add_mutually_exclusive_group(required=True)
    src.add_argument("tuple_file", nargs="?")
    src.add_argument("--special", action="store_true", help="use the scalar degree-2 tuple of the configured parameters")
    mc.add_argument("--mu", type=parse_complex, default=0j, metavar="Z", help="gauge exponent for --special")
    mc.add_argument("--output", help="path of the convolved tuple (default: OUTPUT_DIR/qmc_tuple.txt)")
    common(mc)
    param_flags(mc)

    rep = sub.add_parser("report", help="summarise JSON reports found in the output directory")
    common(rep)
    return parser


def _config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    data = cfg.to_dict()
    for key in ("seed", "samples_per_relation", "output_dir", "threads"):
        if getattr(args, key, None) is not None:
            data[key] = getattr(args, key)
    if getattr(args, "q_range", None) is not None:
        data["q_range"] = list(args.q_range)
    overrides = {k: getattr(args, k) for k in dict.fromkeys(QPARAM_NAMES + VARIANT_NAMES) if getattr(args, k, None) is not None}
    params = {**data["params"], **{k: [v.real, v.imag] for k, v in overrides.items()}}
    data["params"] = params
    cfg = RunConfig.from_mapping(data)
    cap = threads_from_env(cfg.threads)
    if cap < cfg.threads:
        cfg = RunConfig.from_mapping({**cfg.to_dict(), "threads": cap})
    return cfg


def _fmt(z: complex) -> str:
    return f"{z.real!r} {z.imag!r}"


def cmd_eval(args, cfg: RunConfig) -> int:
    tag = Tag.from_name(args.family)
    params = cfg.variant_params() if tag is Tag.G_QAPPELL else cfg.qparams()
    why = domain_violation(SolutionFamily(tag, params), args.x)
    if why is not None:
        print(f"{tag.value}: x = {args.x} is outside the domain: {why}", file=sys.stderr)
        return EXIT_DOMAIN
    value = evaluator(tag, params, cfg.truncation)(args.x)
    print(_fmt(complex(value)))
    return EXIT_OK


def _write_reports(out: Path, stem: str, reports: list[RelationReport]) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{stem}.csv").write_text(reports_to_csv(reports))
    (out / f"{stem}.json").write_text(reports_to_json(reports) + "\n")


def _print_table(reports: list[RelationReport]) -> None:
    width = max((len(r.relation_id) for r in reports), default=10)
    for r in reports:
        print(f"{r.relation_id:<{width}}  {r.samples:>5}  {r.max_rel_residual:.3e}  {r.status}")


def cmd_verify(args, cfg: RunConfig) -> int:
    only = set(args.only) if args.only else None
    reports = run_suite(args.suite, cfg, only)
    if only is not None and len(reports) != len(only):
        known = {r.relation_id for r in reports}
        raise ConfigError(f"unknown relation ids: {sorted(only - known)}")
    out = Path(cfg.output_dir)
    _write_reports(out, args.suite, reports)
    _print_table(reports)
    failed = [r.relation_id for r in reports if not r.passed]
    print(f"{len(reports) - len(failed)}/{len(reports)} rows passed; reports in {out}")
    return EXIT_VERIFY if failed else EXIT_OK


def cmd_qmc(args, cfg: RunConfig) -> int:
    if args.special:
        p = cfg.qparams()
        t, q, lam = special_tuple(p, args.mu), p.q, p.lam
    else:
        t, q, lam = read_tuple(args.tuple_file)
        overrides = dict(cfg.params)
        q, lam = overrides.get("q", q), overrides.get("lam", lam)
    mc = qmiddle_convolve_detailed(t, lam, q)
    print(f"dim K = {mc.K.dim}, dim L = {mc.L.dim}, size {mc.result.m}")
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    tuple_path = Path(args.output) if args.output else out / "qmc_tuple.txt"
    write_tuple(tuple_path, mc.result, q, lam)
    print(f"convolved tuple written to {tuple_path}")
    if t.m == 1 and t.n_poles == 2 and mc.result.m == 2:
        eq = reduce_to_scalar(mc.result, q, mc.ambient_functional(1))
        coeffs = {
            name: [[c.real, c.imag] for c in poly]
            for name, poly in (("down", eq.coeff_down), ("up", eq.coeff_up), ("mid", eq.coeff_mid))
        }
        scalar_path = out / "qmc_scalar.json"
        scalar_path.write_text(json.dumps({"q": [q.real, q.imag], "coefficients": coeffs}, indent=2) + "\n")
        print(f"scalar equation coefficients written to {scalar_path}")
    return EXIT_OK


def cmd_report(args, cfg: RunConfig) -> int:
    out = Path(cfg.output_dir)
    stems = [s for s in (*SUITES, "all") if (out / f"{s}.json").exists()]
    if not stems:
        raise ConfigError(f"no reports found in {out}")
    reports: dict[str, RelationReport] = {}
    for stem in stems:
        try:
            rows = json.loads((out / f"{stem}.json").read_text())
            for d in rows:
                reports[d["relation_id"]] = RelationReport.from_dict(d)
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            raise ParseError(f"{out / f'{stem}.json'}: {e}") from None
    merged = [reports[k] for k in sorted(reports)]
    (out / "summary.csv").write_text(reports_to_csv(merged))
    _print_table(merged)
    failed = sum(not r.passed for r in merged)
    print(f"{len(merged) - failed}/{len(merged)} rows passed across {', '.join(stems)}")
    return EXIT_VERIFY if failed else EXIT_OK


_COMMANDS = {"eval": cmd_eval, "verify": cmd_verify, "qmc": cmd_qmc, "report": cmd_report}


def _exit_code(e: QMCError) -> int:
    if isinstance(e, UnknownFamily):
        return EXIT_UNKNOWN_FAMILY
    if isinstance(e, ConfigError):
        return EXIT_CONFIG
    if isinstance(e, ParseError):
        return EXIT_PARSE
    if isinstance(e, QuotientNotInvariant):
        return EXIT_QUOTIENT
    if isinstance(e, TruncationFailure):
        return EXIT_TRUNCATION
    return EXIT_DOMAIN


def main(argv: list[str] | None = None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        cfg = _config(args)
        return _COMMANDS[args.command](args, cfg)
    except QMCError as e:
        print(f"qmckit: {type(e).__name__}: {e}", file=sys.stderr)
        return _exit_code(e)


if __name__ == "__main__":
    sys.exit(main())
