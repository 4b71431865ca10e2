"""Exit-code contract and output checks for the irgtail command line."""

import hashlib
import subprocess
import sys

import pytest

from irgtail.cli import main

ALIGN_HEADER = "n,seed,K,aligned_k,eventS,eventC,eventM"


def run_cli(args, cwd):
    return subprocess.run([sys.executable, "-m", "irgtail.cli", *args],
                          cwd=cwd, capture_output=True, text=True)


# ----------------------------------------------------------------- generate


def test_generate_deterministic(tmp_path):
    args = ["generate", "--model", "nr", "--dist", "pareto:scale=2,alpha=1",
            "--n", "1024", "--seed", "7"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    for name in ("degrees.csv",):
        assert (tmp_path / "a" / name).read_bytes() == \
               (tmp_path / "b" / name).read_bytes()


def test_generate_manifest_hashes_outputs(tmp_path):
    out = tmp_path / "g"
    assert main(["generate", "--model", "cl", "--dist", "burr:alpha=3",
                 "--n", "256", "--seed", "9", "--out", str(out),
                 "--mode", "edges"]) == 0
    manifest = (out / "manifest.txt").read_text()
    assert "# command=generate" in manifest
    assert "# model=chung-lu" in manifest
    hashed = {}
    for line in manifest.splitlines():
        if not line.startswith("#"):
            name, size, digest = line.split(",")
            hashed[name] = (int(size), digest)
    assert set(hashed) == {"degrees.csv", "edges.csv"}
    for name, (size, digest) in hashed.items():
        blob = (out / name).read_bytes()
        assert len(blob) == size
        assert hashlib.sha256(blob).hexdigest() == digest


def test_generate_cl_alpha_warning(tmp_path):
    res = run_cli(["generate", "--model", "cl",
                   "--dist", "pareto:scale=2,alpha=1", "--n", "64",
                   "--seed", "3", "--out", str(tmp_path / "w")], tmp_path)
    assert res.returncode == 0
    assert "alpha" in res.stderr.lower()


def test_generate_n_zero_exits_2(tmp_path):
    assert main(["generate", "--model", "nr", "--dist", "pareto:alpha=1",
                 "--n", "0", "--seed", "3", "--out", str(tmp_path / "z")]) == 2


def test_generate_bad_dist_exits_2(tmp_path):
    assert main(["generate", "--model", "nr", "--dist", "pareto:alpha=",
                 "--n", "8", "--seed", "3", "--out", str(tmp_path / "z")]) == 2


def test_generate_unwritable_out_exits_3(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("not a directory\n")
    assert main(["generate", "--model", "nr", "--dist", "pareto:alpha=1",
                 "--n", "8", "--seed", "3", "--out", str(blocker)]) == 3


# ----------------------------------------------------------------- estimate


def test_estimate_hill_row(tmp_path, capsys):
    degrees = tmp_path / "deg.csv"
    degrees.write_text("degree\n8\n4\n2\n")
    assert main(["estimate", "--degrees", str(degrees),
                 "--estimator", "hill", "--k", "3"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "estimator,k,gamma_hat,tau,z"
    name, k, gamma_hat, tau, z = out[1].split(",")
    assert (name, k, z) == ("hill", "3", "")
    assert abs(float(gamma_hat) - 1.03972) < 5e-6
    assert abs(float(tau) - float(gamma_hat) ** 2) < 1e-12


def test_estimate_constant_degrees_pwm_exits_4(tmp_path):
    degrees = tmp_path / "const.csv"
    degrees.write_text("degree\n" + "5\n" * 8)
    assert main(["estimate", "--degrees", str(degrees),
                 "--estimator", "pwm", "--k", "4"]) == 4


def test_estimate_missing_file_exits_3(tmp_path):
    assert main(["estimate", "--degrees", str(tmp_path / "nope.csv"),
                 "--estimator", "hill", "--k", "3"]) == 3


def test_estimate_malformed_csv_exits_2(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("degree\nenormous\n")
    assert main(["estimate", "--degrees", str(bad),
                 "--estimator", "hill", "--k", "2"]) == 2


def test_estimate_gamma_true_fills_z(tmp_path, capsys):
    degrees = tmp_path / "deg.csv"
    degrees.write_text("degree\n8\n4\n2\n")
    assert main(["estimate", "--degrees", str(degrees), "--estimator", "hill",
                 "--k", "3", "--gamma-true", "1.0"]) == 0
    row = capsys.readouterr().out.splitlines()[1]
    z = float(row.split(",")[4])
    # z = sqrt(3) (gamma_hat - 1) / sqrt(tau(1)) with tau(1) = 1
    assert abs(z - 3 ** 0.5 * (1.0397207708399179 - 1.0)) < 1e-12


def test_estimate_manifest_file(tmp_path):
    degrees = tmp_path / "deg.csv"
    degrees.write_text("degree\n8\n4\n2\n")
    manifest = tmp_path / "m.txt"
    assert main(["estimate", "--degrees", str(degrees), "--estimator", "hill",
                 "--k", "3", "--manifest", str(manifest)]) == 0
    text = manifest.read_text()
    assert "# command=estimate" in text
    assert "# k=3" in text


# -------------------------------------------------------------------- align


def test_align_prints_record(capsys):
    assert main(["align", "--model", "nr", "--dist", "pareto:scale=2,alpha=1",
                 "--n", str(2 ** 14), "--seed", "42"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == ALIGN_HEADER
    n, seed, big_k, aligned, es, ec, em = out[1].split(",")
    assert (n, seed) == (str(2 ** 14), "42")
    assert int(big_k) >= 1
    assert {aligned, es, ec, em} <= {"0", "1"}


def test_align_repeated_seed_identical(capsys):
    args = ["align", "--model", "cl", "--dist", "burr:alpha=3",
            "--n", "4096", "--seed", "1234", "--k", "2"]
    assert main(args) == 0
    first = capsys.readouterr().out
    assert main(args) == 0
    assert capsys.readouterr().out == first


def test_align_k_at_least_n_exits_2():
    assert main(["align", "--model", "nr", "--dist", "pareto:alpha=1",
                 "--n", "100", "--k", "100", "--seed", "1"]) == 2


# --------------------------------------------------------------- experiment


ALIGN_SECTION = """\
[tiny_align]
experiment = alignment
model = nr
dist = pareto:scale=2,alpha=1
n = 64, 128
replicates = 4
master_seed = 11
"""

NORM_SECTION = """\
[tiny_norm]
experiment = normality
model = nr
dist = burr:alpha=2.5
n = 512
replicates = 3
master_seed = 12
estimators = hill
k_hill = 8
gamma_true = 0.4
"""


def test_experiment_alignment_outputs(tmp_path):
    cfg = tmp_path / "exp.ini"
    cfg.write_text(ALIGN_SECTION)
    out = tmp_path / "run"
    assert main(["experiment", "--config", str(cfg), "--out", str(out)]) == 0
    cell = out / "tiny_align"
    fit = (cell / "fit.csv").read_text().splitlines()
    assert fit[0] == "coefficient,exponent,r2,points_used,points_filtered"
    assert (cell / "replicates.csv").read_text().splitlines()[0] == \
        "n,seed,K,aligned_k,eventS,eventC,eventM"
    manifest = (cell / "manifest.txt").read_text()
    assert "# section=tiny_align" in manifest
    assert "# master_seed=11" in manifest


def test_experiment_workers_byte_identical(tmp_path):
    cfg = tmp_path / "exp.ini"
    cfg.write_text(ALIGN_SECTION + "\n" + NORM_SECTION)
    out1, out8 = tmp_path / "w1", tmp_path / "w8"
    assert main(["experiment", "--config", str(cfg), "--out", str(out1),
                 "--workers", "1"]) == 0
    assert main(["experiment", "--config", str(cfg), "--out", str(out8),
                 "--workers", "8"]) == 0
    for section in ("tiny_align", "tiny_norm"):
        a = (out1 / section / "replicates.csv").read_bytes()
        b = (out8 / section / "replicates.csv").read_bytes()
        assert a == b


def test_experiment_normality_without_gamma_exits_2(tmp_path):
    cfg = tmp_path / "exp.ini"
    cfg.write_text(NORM_SECTION.replace("gamma_true = 0.4\n", ""))
    out = tmp_path / "run"
    assert main(["experiment", "--config", str(cfg), "--out", str(out)]) == 2
    assert not out.exists()


def test_experiment_config_error_runs_nothing(tmp_path):
    # second section is invalid: the first must not have produced output
    cfg = tmp_path / "exp.ini"
    cfg.write_text(ALIGN_SECTION + "\n" + NORM_SECTION.replace(
        "gamma_true = 0.4", "gamma_true = -1"))
    out = tmp_path / "run"
    assert main(["experiment", "--config", str(cfg), "--out", str(out)]) == 2
    assert not out.exists()


def test_experiment_missing_config_exits_3(tmp_path):
    assert main(["experiment", "--config", str(tmp_path / "none.ini"),
                 "--out", str(tmp_path / "run")]) == 3


def test_experiment_section_filter_and_overrides(tmp_path):
    cfg = tmp_path / "exp.ini"
    cfg.write_text(ALIGN_SECTION + "\n" + NORM_SECTION)
    out = tmp_path / "run"
    assert main(["experiment", "--config", str(cfg), "--out", str(out),
                 "--section", "tiny_align", "--replicates", "2",
                 "--master-seed", "99"]) == 0
    assert not (out / "tiny_norm").exists()
    lines = (out / "tiny_align" / "replicates.csv").read_text().splitlines()
    assert len(lines) == 1 + 2 * 2  # header + 2 replicates x 2 sizes
    assert "# master_seed=99" in (out / "tiny_align" / "manifest.txt").read_text()


def test_experiment_unknown_section_exits_2(tmp_path):
    cfg = tmp_path / "exp.ini"
    cfg.write_text(ALIGN_SECTION)
    assert main(["experiment", "--config", str(cfg), "--out",
                 str(tmp_path / "run"), "--section", "missing"]) == 2


def test_experiment_no_output_dir_exits_2(tmp_path):
    cfg = tmp_path / "exp.ini"
    cfg.write_text(ALIGN_SECTION)
    assert main(["experiment", "--config", str(cfg)]) == 2


def test_experiment_output_key_used_without_out_flag(tmp_path):
    cfg = tmp_path / "exp.ini"
    target = tmp_path / "fromkey"
    cfg.write_text(ALIGN_SECTION + f"output = {target}\n")
    assert main(["experiment", "--config", str(cfg)]) == 0
    assert (target / "replicates.csv").exists()


# ---------------------------------------------------------------- crossover


def test_crossover_value_and_repeatability(capsys):
    assert main(["crossover"]) == 0
    first = capsys.readouterr().out.strip()
    assert main(["crossover"]) == 0
    assert capsys.readouterr().out.strip() == first
    value = float(first)
    assert 0.40 <= value <= 0.43
    assert len(first.split(".")[1]) == 6


# ------------------------------------------------------------ parser basics


def test_help_exits_0(tmp_path):
    res = run_cli(["--help"], tmp_path)
    assert res.returncode == 0
    assert "usage" in res.stdout.lower()


@pytest.mark.parametrize("args", [
    ["--frobnicate"],
    ["generate", "--model", "nr"],                       # missing required
    ["estimate", "--degrees", "x.csv", "--estimator", "median", "--k", "3"],
    ["no-such-command"],
])
def test_usage_errors_exit_2(args, tmp_path):
    res = run_cli(args, tmp_path)
    assert res.returncode == 2


def test_version_flag(tmp_path):
    res = run_cli(["--version"], tmp_path)
    assert res.returncode == 0
    assert res.stdout.startswith("irgtail ")
