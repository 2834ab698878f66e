import csv
import json

import pytest

from qmckit import cli
from qmckit.errors import QuotientNotInvariant


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_eval_prints_real_and_imaginary_parts(capsys):
    code, out, _ = run(capsys, "eval", "y_beta1", "--x", "3.0")
    assert code == 0
    re, im = map(float, out.split())
    assert abs(re - -167.43792756998715) < 1e-10 and im == 0.0


def test_eval_parameter_override_changes_value(capsys):
    _, base, _ = run(capsys, "eval", "y_x", "--x", "3")
    code, moved, _ = run(capsys, "eval", "y_x", "--x", "3", "--beta1", "1.1")
    assert code == 0 and base != moved


def test_eval_qappell_family(capsys):
    code, out, _ = run(capsys, "eval", "g_qappell", "--x", "3.0")
    assert code == 0 and len(out.split()) == 2


@pytest.mark.parametrize(
    "argv, code",
    [
        (("eval", "y_gamma", "--x", "3"), cli.EXIT_UNKNOWN_FAMILY),
        (("eval", "a2_2", "--x", "3"), cli.EXIT_DOMAIN),
        (("eval", "y_x", "--x", "three"), cli.EXIT_CONFIG),
        (("eval", "y_x", "--x", "3", "--samples", "0"), cli.EXIT_CONFIG),
        (("verify", "nothing"), cli.EXIT_CONFIG),
        (("frobnicate",), cli.EXIT_CONFIG),
    ],
)
def test_exit_codes(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


def test_truncation_failure_exit(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"truncation": {"max_terms": 3, "tail_window": 1}}))
    code, _, err = run(capsys, "eval", "y_x", "--x", "3", "--config", str(cfg))
    assert code == cli.EXIT_TRUNCATION and "TruncationFailure" in err


def test_threads_env_must_be_positive(capsys, monkeypatch):
    monkeypatch.setenv("QMCKIT_THREADS", "0")
    assert run(capsys, "eval", "y_x", "--x", "3")[0] == cli.EXIT_CONFIG


def test_verify_writes_reports(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", "theorem41", "--samples", "3", "--output-dir", str(tmp_path))
    assert code == 0 and "9/9 rows passed" in out
    rows = list(csv.DictReader((tmp_path / "theorem41.csv").open()))
    assert len(rows) == 9 and {r["status"] for r in rows} == {"pass"}
    assert len(json.loads((tmp_path / "theorem41.json").read_text())) == 9


def test_verify_only_rejects_unknown_ids(capsys, tmp_path):
    code, _, _ = run(capsys, "verify", "props", "--only", "no_such_row", "--output-dir", str(tmp_path))
    assert code == cli.EXIT_CONFIG


def test_report_merges_suites(capsys, tmp_path):
    d = str(tmp_path)
    run(capsys, "verify", "theorem41", "--samples", "2", "--output-dir", d)
    run(capsys, "verify", "qmc", "--samples", "2", "--output-dir", d, "--only", "qmc_section2_dims")
    code, out, _ = run(capsys, "report", "--output-dir", d)
    assert code == 0
    rows = list(csv.DictReader((tmp_path / "summary.csv").open()))
    assert len(rows) == 10
    assert "across qmc, theorem41" in out


def test_report_without_inputs(capsys, tmp_path):
    assert run(capsys, "report", "--output-dir", str(tmp_path))[0] == cli.EXIT_CONFIG


def test_qmc_special_tuple(capsys, tmp_path):
    code, out, _ = run(capsys, "qmc", "--special", "--output-dir", str(tmp_path))
    assert code == 0
    assert "dim K = 1, dim L = 0, size 2" in out
    assert (tmp_path / "qmc_tuple.txt").exists()
    scalar = json.loads((tmp_path / "qmc_scalar.json").read_text())
    assert set(scalar["coefficients"]) == {"down", "up", "mid"}


def test_qmc_tuple_file(capsys, tmp_path):
    src = tmp_path / "t.txt"
    src.write_text("2 2 0.5 0 0.4 0\n0.3 0 0 0\n0 0 0.7 0\n0 0 0 0\n0 0 0 0\n0 0 0 0\n0 0 0 0\n1.5 0 -2 0\n")
    code, out, _ = run(capsys, "qmc", str(src), "--output-dir", str(tmp_path))
    assert code == 0 and "dim K = 4, dim L = 0, size 2" in out


def test_qmc_malformed_file(capsys, tmp_path):
    src = tmp_path / "bad.txt"
    src.write_text("1 1 0.5\n")
    assert run(capsys, "qmc", str(src), "--output-dir", str(tmp_path))[0] == cli.EXIT_PARSE


def test_qmc_non_invariant_quotient(capsys, tmp_path, monkeypatch):
    def boom(*_):
        raise QuotientNotInvariant("K + L not invariant")

    monkeypatch.setattr(cli, "qmiddle_convolve_detailed", boom)
    assert run(capsys, "qmc", "--special", "--output-dir", str(tmp_path))[0] == cli.EXIT_QUOTIENT
