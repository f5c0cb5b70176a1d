"""Command-line surface: dispatch, formats, exit codes, reproducibility."""
import json
import subprocess
import sys

import numpy as np
import pytest

from gstab.cli import cli_dispatch
from gstab.partitions import Halfspace, equal_slabs, partition_to_json
from gstab.product_space import binary_symmetric


@pytest.fixture
def halfspace_file(tmp_path):
    path = tmp_path / "halfspace.json"
    path.write_text(partition_to_json(Halfspace([0.0], [1.0])))
    return str(path)


@pytest.fixture
def slabs_file(tmp_path):
    path = tmp_path / "slabs.json"
    path.write_text(partition_to_json(equal_slabs(3)))
    return str(path)


@pytest.fixture
def dist_file(tmp_path):
    path = tmp_path / "bss.json"
    path.write_text(binary_symmetric(0.6).to_json())
    return str(path)


def run_cli(args, capsys):
    code = cli_dispatch(args)
    out = capsys.readouterr().out
    return code, out


class TestStabilityCommand:
    def test_sheppard_value(self, halfspace_file, capsys):
        code, out = run_cli(
            ["stability", "--partition", halfspace_file, "--rho", "0.5",
             "--samples", "200000", "--seed", "7", "--cell", "1"],
            capsys,
        )
        assert code == 0
        doc = json.loads(out)
        res = doc["result"]
        assert res["cell_stability"] == pytest.approx(1 / 3, abs=5 * res["cell_std_error"])
        assert res["agreement"] == pytest.approx(2 / 3, abs=5 * res["std_error"])
        assert doc["manifest"]["seed"] == 7
        assert doc["manifest"]["command"].startswith("stability --partition")

    def test_byte_identical_reruns(self, halfspace_file, capsys):
        args = ["stability", "--partition", halfspace_file, "--rho", "0.5",
                "--samples", "20000", "--seed", "3"]
        _, out1 = run_cli(args, capsys)
        _, out2 = run_cli(args, capsys)
        assert out1 == out2

    def test_csv_format(self, halfspace_file, capsys):
        code, out = run_cli(
            ["stability", "--partition", halfspace_file, "--rho", "0.5",
             "--samples", "5000", "--format", "csv"],
            capsys,
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "key,value"
        keys = {line.split(",")[0] for line in lines[1:]}
        assert "result.agreement" in keys

    def test_output_file(self, halfspace_file, tmp_path, capsys):
        out_path = tmp_path / "res.json"
        code, _ = run_cli(
            ["stability", "--partition", halfspace_file, "--rho", "0.5",
             "--samples", "5000", "--out", str(out_path)],
            capsys,
        )
        assert code == 0
        doc = json.loads(out_path.read_text())
        assert doc["manifest"]["outputs"] == [str(out_path)]


class TestOtherCommands:
    def test_basis(self, dist_file, capsys):
        code, out = run_cli(["basis", "--dist", dist_file], capsys)
        assert code == 0
        rho = json.loads(out)["result"]["rho"]
        assert rho[0] == pytest.approx(1.0)
        assert rho[1] == pytest.approx(0.6, abs=1e-10)

    def test_cube_majority(self, capsys):
        code, out = run_cli(
            ["cube", "--rule", "majority", "--n", "3", "--rho", "0.5"], capsys
        )
        assert code == 0
        res = json.loads(out)["result"]
        assert res["stability"] == pytest.approx(0.703125)

    def test_round_pipeline(self, slabs_file, capsys):
        code, out = run_cli(
            ["round", "--partition", slabs_file, "--t", "0.7",
             "--samples", "50000", "--degree", "2"],
            capsys,
        )
        assert code == 0
        res = json.loads(out)["result"]
        assert res["stab_after"] >= res["stab_before"] - res["measure_slack"] - 6 * (
            res["se_before"] + res["se_after"]
        )
        assert "disagreement" in res and "bound" in res

    def test_hermite_command(self, halfspace_file, capsys):
        code, out = run_cli(
            ["hermite", "--partition", halfspace_file, "--max-degree", "3"], capsys
        )
        assert code == 0
        res = json.loads(out)["result"]
        assert res["by_degree"][0] == pytest.approx(0.5, abs=1e-6)
        assert res["tail"] >= 0

    def test_simulate(self, dist_file, slabs_file, tmp_path, capsys):
        part = tmp_path / "half.json"
        part.write_text(partition_to_json(Halfspace([0.0], [1.0])))
        code, out = run_cli(
            ["simulate", "--dist", dist_file, "--partition", str(part),
             "--ell", "16", "--samples", "20000"],
            capsys,
        )
        assert code == 0
        res = json.loads(out)["result"]
        assert res["agreement"] > 0.5

    def test_ncd(self, tmp_path, capsys):
        dist = tmp_path / "bss05.json"
        dist.write_text(binary_symmetric(0.5).to_json())
        code, out = run_cli(
            ["ncd", "--dist", str(dist), "--mu", "[0.5,0.5]", "--nu", "[0.5,0.5]",
             "--kappa", "0.75", "--delta", "0.02", "--oracle-n", "1"],
            capsys,
        )
        assert code == 0
        res = json.loads(out)["result"]
        assert res["verdict"] == "feasible"
        assert res["oracle"] == pytest.approx(0.75)

    def test_search_command(self, tmp_path, capsys):
        from gstab.search import SearchConfig

        cfg = SearchConfig(
            k=2, n0=1, d=1, t=0.7, target_mu=[0.5, 0.5], measure_tol=0.02,
            budget=30, mode="grid-cover", seed=5, samples=20_000,
        )
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(cfg.to_json())
        code, out = run_cli(["search", "--config", str(cfg_path)], capsys)
        assert code == 0
        res = json.loads(out)["result"]
        assert res["feasible"]


class TestExitCodes:
    def test_missing_file_is_usage_error(self, capsys):
        assert cli_dispatch(["stability", "--partition", "/no/such.json", "--rho", "0.5"]) == 2

    def test_unknown_command(self, capsys):
        assert cli_dispatch(["frobnicate"]) == 2

    def test_cube_missing_noise_flags(self, capsys):
        assert cli_dispatch(["cube", "--rule", "majority", "--n", "3"]) == 2

    def test_conflicting_noise_flags(self, halfspace_file, capsys):
        code = cli_dispatch(
            ["stability", "--partition", halfspace_file, "--rho", "0.5", "--t", "1.0"]
        )
        assert code == 2

    def test_numeric_failure_exit(self, tmp_path, capsys):
        # one iteration cannot match the measures of a skewed partition
        from scipy.special import ndtri
        from gstab.partitions import Slabs

        path = tmp_path / "skew.json"
        path.write_text(partition_to_json(Slabs(0, [ndtri(0.3)], [1, 2], n=1)))
        code = cli_dispatch(
            ["round", "--partition", str(path), "--t", "0.7",
             "--samples", "20000", "--tol", "1e-4", "--max-iter", "1"]
        )
        assert code == 3

    def test_module_entry_point(self, halfspace_file):
        proc = subprocess.run(
            [sys.executable, "-m", "gstab.cli", "stability", "--partition",
             halfspace_file, "--rho", "0.5", "--samples", "2000"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["result"]["samples"] == 2000
