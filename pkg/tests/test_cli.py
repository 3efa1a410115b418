"""CLI: outputs, exit codes, cache behavior, determinism."""

import json
import subprocess
import sys


def run_cli(*args, cache=None):
    cmd = [sys.executable, "-m", "klext.cli"]
    if cache is not None:
        cmd += ["--cache-dir", str(cache)]
    cmd += list(args)
    return subprocess.run(cmd, capture_output=True, text=True)


def test_info_json():
    res = run_cli("--format", "json", "info", "A", "2")
    assert res.returncode == 0
    data = json.loads(res.stdout)
    assert data["h"] == 3
    assert data["weyl_order"] == 6
    assert data["num_roots"] == 6
    assert data["torsion_exponent"] == 3


def test_info_invalid_exits_2():
    res = run_cli("info", "Z", "4")
    assert res.returncode == 2
    assert "type" in res.stderr
    res = run_cli("info", "E", "5")
    assert res.returncode == 2
    assert "rank" in res.stderr


def test_bounds_values():
    res = run_cli("--format", "json", "bounds", "A", "1", "--p", "2", "--n", "1")
    assert res.returncode == 0
    data = json.loads(res.stdout)
    vals = {r["constant"]: r["formula_value"] for r in data["reports"]}
    assert vals["mu_bound"] == 4
    assert vals["ext1_bound"] == 4
    assert vals["fixed_prime_ext1_bound"] == 4
    assert vals["frobenius_shift"] == 2


def test_generic_shift_and_isogeny():
    res = run_cli("--format", "json", "generic-shift", "A", "2", "--p", "3", "--n", "2")
    assert json.loads(res.stdout)["shift"] == 3
    res = run_cli("--format", "json", "isogeny-map", "C", "3", "--weight", "2,0,1")
    assert json.loads(res.stdout)["image"] == [1, 0, 1]
    res = run_cli("isogeny-map", "B", "3", "--weight", "0,0,0")
    assert res.returncode == 2


def test_char_and_tensor():
    res = run_cli("--format", "json", "char", "A", "2", "--weight", "1,0")
    data = json.loads(res.stdout)
    assert data["dimension"] == 3
    res = run_cli("--format", "json", "tensor", "A", "1", "--left", "1", "--right", "1")
    data = json.loads(res.stdout)
    assert data["components"] == {"0": 1, "2": 1}
    assert data["total_length"] == 2


def test_kl_and_sums(tmp_path):
    res = run_cli(
        "--format", "json", "kl", "A", "1", "--cutoff", "12", "--x", "0", "--y", "5",
        cache=tmp_path,
    )
    data = json.loads(res.stdout)
    assert data["polynomial_coeffs"] == {"0": 1}
    res = run_cli(
        "--format", "json", "mu-sum", "A", "1", "--cutoff", "12", "--l", "3",
        "--x", "4", cache=tmp_path,
    )
    data = json.loads(res.stdout)
    assert data["sum"] == 2 and data["status"] == "exact"
    res = run_cli(
        "--format", "json", "klsum", "A", "1", "--cutoff", "12", "--y", "8",
        "--m", "0", cache=tmp_path,
    )
    data = json.loads(res.stdout)
    assert data["status"] == "exact"


def test_ext_and_pim(tmp_path):
    res = run_cli(
        "--format", "json", "ext1", "A", "1", "--cutoff", "16", "--l", "3",
        "--lam", "4", "--nu", "0", cache=tmp_path,
    )
    assert json.loads(res.stdout)["value"] == 1
    res = run_cli(
        "--format", "json", "ext1", "A", "1", "--cutoff", "16", "--l", "3",
        "--lam", "2", "--nu", "0", cache=tmp_path,
    )
    data = json.loads(res.stdout)
    assert data["singular"] and data["stabilizer_order"] == 2
    res = run_cli(
        "--format", "json", "pim", "A", "1", "--cutoff", "16", "--l", "5",
        "--lambda0", "2", cache=tmp_path,
    )
    data = json.loads(res.stdout)
    assert data["total_length"] == 3 and data["highest_weight_check"]


def test_decomp_csv(tmp_path):
    res = run_cli(
        "--format", "csv", "decomp", "A", "1", "--cutoff", "16", "--l", "3",
        "--seed", "0", "--bound", "6", cache=tmp_path,
    )
    lines = res.stdout.strip().splitlines()
    assert lines[0].startswith("weyl\\simple")
    assert len(lines) == 4  # header + 3 block members


def test_verify_exit_codes(tmp_path):
    res = run_cli(
        "--format", "json", "verify", "--type", "A", "--rank", "1",
        "--cutoff", "14", "--l", "3", cache=tmp_path,
    )
    assert res.returncode == 0
    data = json.loads(res.stdout)
    assert data["all_passed"]
    assert all(c["result"] == "PASS" for c in data["checks"])


def test_cold_warm_determinism(tmp_path):
    args = ("--format", "json", "kl", "A", "2", "--cutoff", "8", "--all")
    cold = run_cli(*args, cache=tmp_path)
    warm = run_cli(*args, cache=tmp_path)
    assert cold.returncode == warm.returncode == 0
    assert cold.stdout == warm.stdout
    # and equal to a cache-free run
    free = run_cli(*args)
    assert free.stdout == cold.stdout


def test_corrupted_cache_detected(tmp_path):
    args = ("--format", "json", "mu", "A", "1", "--cutoff", "10", "--x", "1", "--y", "2")
    first = run_cli(*args, cache=tmp_path)
    assert first.returncode == 0
    table_file = next(tmp_path.glob("kl_*.klt"))
    blob = bytearray(table_file.read_bytes())
    blob[40] ^= 0xFF
    table_file.write_bytes(bytes(blob))
    res = run_cli(*args, cache=tmp_path)
    assert res.returncode == 1
    assert "corrupt" in res.stderr or "checksum" in res.stderr


def test_resource_cap_exit_3():
    res = run_cli("--max-elements", "30", "enumerate", "A", "2", "--cutoff", "10")
    assert res.returncode == 3


def test_config_file(tmp_path):
    conf = tmp_path / "conf.json"
    conf.write_text(json.dumps({"cutoff": 12, "l": 3}))
    res = run_cli(
        "--config", str(conf), "--format", "json", "mu-sum", "A", "1", "--x", "4"
    )
    assert res.returncode == 0
    assert json.loads(res.stdout)["status"] == "exact"
    # flags still win over the file
    res = run_cli(
        "--config", str(conf), "--format", "json", "mu-sum", "A", "1", "--x", "4",
        "--cutoff", "14",
    )
    assert res.returncode == 0


def test_truncated_flag_rendering(tmp_path):
    # a dominant element too close to the cutoff for the support window
    res = run_cli(
        "--format", "json", "mu-sum", "A", "1", "--cutoff", "10", "--l", "3",
        "--x", "20", cache=tmp_path,
    )
    data = json.loads(res.stdout)
    assert data["status"].startswith("truncated@")
    # non-dominant input is an invalid-argument error
    res = run_cli(
        "--format", "json", "mu-sum", "A", "1", "--cutoff", "10", "--l", "3",
        "--x", "19", cache=tmp_path,
    )
    assert res.returncode == 2
