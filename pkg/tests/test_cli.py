"""Config parsing strictness, subcommands, exit codes, and CSV stability."""

import subprocess
import sys

from qrdro.cli import run
from qrdro.conic_export import parse

BASE_MODEL = """\
[model]
p = 0.6
c = 0.1
c_m = 0.15
delta = 0.1
"""


def write(tmp_path, text, name="config.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestSolve:
    def test_mad_from_moments(self, tmp_path, capsys):
        cfg = write(
            tmp_path,
            BASE_MODEL
            + """
[support]
lo = 0
hi = 1
[moments]
mean = 0.5
mad = 0.25
[methods]
names = mad
""",
        )
        assert run(["solve", "--config", cfg]) == 0
        out = capsys.readouterr().out
        assert "x=0.200000" in out and "q=0.200000" in out and "case=2b" in out

    def test_benchmark(self, tmp_path, capsys):
        cfg = write(tmp_path, BASE_MODEL + "[methods]\nnames = benchmark\n")
        assert run(["solve", "--config", cfg]) == 0
        out = capsys.readouterr().out
        assert "x=0.25" in out and "q=0.19" in out or "q=0.20" in out

    def test_wasserstein_from_inline_samples(self, tmp_path, capsys):
        cfg = write(
            tmp_path,
            BASE_MODEL
            + """
[support]
lo = 0
hi = 1
[samples]
values = 0.5
[wasserstein]
epsilon = 0.05
[methods]
names = wasserstein
""",
        )
        assert run(["solve", "--config", cfg]) == 0
        assert "method=wasserstein" in capsys.readouterr().out


class TestConfigErrors:
    def test_missing_price_names_the_key(self, tmp_path, capsys):
        cfg = write(tmp_path, "[model]\nc = 0.1\nc_m = 0.15\ndelta = 0.1\n[methods]\nnames = benchmark\n")
        assert run(["solve", "--config", cfg]) == 2
        assert "[model] p" in capsys.readouterr().err

    def test_unknown_key_rejected_with_location(self, tmp_path, capsys):
        cfg = write(tmp_path, BASE_MODEL + "[wasserstein]\nradius_constant = 0.1\n")
        assert run(["solve", "--config", cfg]) == 2
        assert "[wasserstein] radius_constant" in capsys.readouterr().err

    def test_unknown_section_rejected(self, tmp_path, capsys):
        cfg = write(tmp_path, BASE_MODEL + "[extras]\nfoo = 1\n")
        assert run(["solve", "--config", cfg]) == 2
        assert "[extras]" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path, capsys):
        assert run(["solve", "--config", str(tmp_path / "nope.ini")]) == 2


EXPERIMENT_CFG = """\
[model]
p = 0.6
c = 0.1
c_m = 0.15
delta_grid = 0.0,0.1
[distribution]
kind = uniform
lo = 0
hi = 1
[methods]
names = mad, saa
[experiment]
n_in = 5
n_eval = 100
n_trials = 2
base_seed = 3
"""


class TestExperiment:
    def test_csv_schema_and_rows(self, tmp_path, capsys):
        cfg = write(tmp_path, EXPERIMENT_CFG + f"[output]\ndir = {tmp_path / 'out'}\n")
        assert run(["experiment", "--config", cfg]) == 0
        csv_path = tmp_path / "out" / "experiment.csv"
        lines = csv_path.read_text().splitlines()
        assert lines[0] == (
            "distribution,method,delta,tau,mean_x,mean_q,mean_profit,"
            "std_profit,wtc_ratio,n_trials"
        )
        assert len(lines) == 1 + 2 * 2
        assert all(ln.startswith("uniform(0;1),") for ln in lines[1:])

    def test_byte_identical_rerun(self, tmp_path):
        cfg = write(tmp_path, EXPERIMENT_CFG)
        run(["experiment", "--config", cfg, "--out", str(tmp_path / "a")])
        run(["experiment", "--config", cfg, "--out", str(tmp_path / "b")])
        a = (tmp_path / "a" / "experiment.csv").read_bytes()
        b = (tmp_path / "b" / "experiment.csv").read_bytes()
        assert a == b

    def test_seed_override_changes_output(self, tmp_path):
        cfg = write(tmp_path, EXPERIMENT_CFG)
        run(["experiment", "--config", cfg, "--out", str(tmp_path / "a")])
        run(["experiment", "--config", cfg, "--out", str(tmp_path / "b"), "--seed", "99"])
        a = (tmp_path / "a" / "experiment.csv").read_bytes()
        b = (tmp_path / "b" / "experiment.csv").read_bytes()
        assert a != b


class TestExportConic:
    def test_writes_parseable_program(self, tmp_path, capsys):
        cfg = write(
            tmp_path,
            BASE_MODEL
            + """
[support]
lo = 0
hi = 1
[samples]
values = 0.5, 0.25
[wasserstein]
C = 0.1
[output]
dir = {out}
""".format(out=tmp_path / "out"),
        )
        assert run(["export-conic", "--config", cfg]) == 0
        path = tmp_path / "out" / "conic_n2.qrcp"
        assert path.exists()
        prog = parse(path.read_text())
        assert len(prog.socs) == 4

    def test_tau_variant(self, tmp_path):
        cfg = write(
            tmp_path,
            BASE_MODEL
            + "[support]\nlo = 0\nhi = 1\n[samples]\nvalues = 0.5\n"
            + "[wasserstein]\nepsilon = 0.05\n",
        )
        assert run(["export-conic", "--config", cfg, "--out", str(tmp_path), "--tau", "0.3"]) == 0
        prog = parse((tmp_path / "conic_n1_tau0.3.qrcp").read_text())
        assert len(prog.socs) == 3


class TestEval:
    def test_scores_policy_file(self, tmp_path, capsys):
        cfg = write(
            tmp_path,
            BASE_MODEL
            + "[distribution]\nkind = uniform\nlo = 0\nhi = 1\n"
            + "[experiment]\nn_eval = 5000\nbase_seed = 7\n",
        )
        policy = tmp_path / "policy.txt"
        policy.write_text("0.25 0.2\n")
        assert run(["eval", "--config", cfg, "--policy", str(policy)]) == 0
        out = capsys.readouterr().out
        assert "profit=" in out and "wtc_ratio=" in out

    def test_malformed_policy_file(self, tmp_path, capsys):
        cfg = write(tmp_path, BASE_MODEL + "[distribution]\nkind = uniform\nlo = 0\nhi = 1\n")
        bad = tmp_path / "policy.txt"
        bad.write_text("0.25\n")
        assert run(["eval", "--config", cfg, "--policy", str(bad)]) == 2


def test_console_entry_point(tmp_path):
    cfg = tmp_path / "config.ini"
    cfg.write_text(BASE_MODEL + "[methods]\nnames = benchmark\n")
    proc = subprocess.run(
        [sys.executable, "-m", "qrdro.cli", "solve", "--config", str(cfg)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "method=benchmark" in proc.stdout
