import csv
import logging

import pytest

from lsfm import cli

SMALL = ["--N", "33", "--no-timing"]


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def read_summary(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.mark.parametrize("cmd, files", [
    ("phantom", ["mu.csv", "lambda.csv", "a.csv", "psi.csv", "mask.pgm", "mu.pgm"]),
    ("forward", ["clean_left.csv", "clean_right.csv"]),
    ("noise", ["noisy_left.csv", "noisy_right.csv", "noise.csv"]),
    ("fuse", ["fused.csv", "fused.pgm"]),
])
def test_stage_commands_write_artifacts(tmp_path, capsys, cmd, files):
    code, _, _ = run(capsys, cmd, "-o", str(tmp_path), *SMALL)
    assert code == 0
    for name in files:
        assert (tmp_path / name).is_file(), name


def test_reconstruct_prints_each_solver(tmp_path, capsys):
    code, out, _ = run(capsys, "reconstruct", "-o", str(tmp_path), "--solvers", "sart,mrnsd", *SMALL)
    assert code == 0
    assert out.startswith("sart:") and "\nmrnsd:" in out
    assert (tmp_path / "recon_sart.csv").is_file()
    assert (tmp_path / "log_mrnsd.csv").is_file()


def test_report_writes_summary(tmp_path, capsys):
    code, out, _ = run(capsys, "report", "-o", str(tmp_path), *SMALL)
    assert code == 0
    rows = read_summary(tmp_path / "summary.csv")
    assert rows[0] == ["algorithm", "iterations", "time_s", "nre", "ssim"]
    assert [r[0] for r in rows[1:]] == ["fused", "mrnsd", "sart", "fista", "nnfcgls", "htv"]
    assert all(r[2] == "nan" for r in rows[1:])
    assert (tmp_path / "profile_x1.csv").is_file()
    assert "artifacts written to" in out


def test_report_is_reproducible(tmp_path, capsys):
    for d in ("a", "b"):
        assert run(capsys, "report", "-o", str(tmp_path / d), "--solvers", "fista,htv", *SMALL)[0] == 0
    assert (tmp_path / "a" / "summary.csv").read_bytes() == (tmp_path / "b" / "summary.csv").read_bytes()


def test_verify_heat(tmp_path, capsys):
    code, out, _ = run(capsys, "verify-heat", "-o", str(tmp_path), "--N", "65")
    assert code == 0
    assert "max relative mismatch" in out
    assert list(tmp_path.glob("heat_column_*.csv"))
    # an impossible tolerance fails with status 1
    code, _, _ = run(capsys, "verify-heat", "-o", str(tmp_path), "--N", "65", "--tol", "0")
    assert code == 1


def test_output_dir_from_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(cli.ENV_OUTPUT, str(tmp_path / "env"))
    assert run(capsys, "phantom", *SMALL)[0] == 0
    assert (tmp_path / "env" / "mu.csv").is_file()
    # the command line flag wins over the environment
    assert run(capsys, "phantom", "-o", str(tmp_path / "flag"), *SMALL)[0] == 0
    assert (tmp_path / "flag" / "mu.csv").is_file()


def test_config_file_is_used(tmp_path, capsys):
    cfg = tmp_path / "x.cfg"
    cfg.write_text(f"N = 33\nbeta = 0.05\nseed = 3\noutput_dir = {tmp_path / 'cfgout'}\n")
    code, out, _ = run(capsys, "noise", "-c", str(cfg))
    assert code == 0
    rows = read_summary(tmp_path / "cfgout" / "noise.csv")
    assert rows[1][:2] == ["0.05", "3"]
    assert out.startswith("noise_level")


def test_bad_config_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("N = 33\nN = 65\n")
    code, _, err = run(capsys, "phantom", "-c", str(cfg), "-o", str(tmp_path))
    assert code == 2
    assert "duplicate key" in err and "bad.cfg:2" in err


def test_missing_config_and_bad_solver(tmp_path, capsys):
    assert run(capsys, "phantom", "-c", str(tmp_path / "none.cfg"))[0] == 2
    code, _, err = run(capsys, "reconstruct", "-o", str(tmp_path), "--solvers", "cg", *SMALL)
    assert code == 2 and "unknown solver" in err


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main([])
    assert info.value.code == 2
    with pytest.raises(SystemExit):
        cli.main(["nope"])


def test_zero_density_gives_nan_metrics(tmp_path, capsys, caplog):
    cfg = tmp_path / "empty.cfg"
    cfg.write_text("N = 33\nphantom = empty_disk\nsolvers = sart,fista\ntiming = false\n")
    with caplog.at_level(logging.WARNING):
        code, _, _ = run(capsys, "report", "-c", str(cfg), "-o", str(tmp_path))
    assert code == 0
    rows = read_summary(tmp_path / "summary.csv")
    assert all(r[3] == "nan" and r[4] == "nan" for r in rows[1:])
    assert any("identically zero" in rec.getMessage() for rec in caplog.records)
