"""Command-line runner: spec resolution, file outputs, exit codes."""

import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from vfedpca.cli import ExperimentSpec, SpecError, main, run_baseline, run_experiment
from vfedpca.dataio import write_csv

IMAGES = sorted(str(p) for p in (Path(__file__).parent / "data" / "pgm").glob("img??.pgm"))


def run_cli(args, env=None):
    cmd = [sys.executable, "-m", "vfedpca", *args]
    return subprocess.run(cmd, capture_output=True, text=True, env=env)


class TestFederatedCommand:
    def test_p1_final_distance_below_tolerance(self, tmp_path):
        X = np.random.default_rng(0).normal(size=(30, 10))
        csv = tmp_path / "x.csv"
        write_csv(csv, X)
        out = tmp_path / "run"
        spec = ExperimentSpec(
            data=(str(csv),), p=1, rounds=1, local_iters=3000, tol=1e-13, out=str(out)
        )
        summary = run_experiment(spec)
        assert summary["final"]["distance_error"] <= 1e-6
        assert (out / "trace.csv").exists()
        assert (out / "summary.json").exists()

    def test_paper_grid_row_count(self, tmp_path):
        # single-Gaussian n=200 m=1000, p=5, l=10, t=10 -> exactly 10 rows
        spec = ExperimentSpec(
            synth="single", n=200, m=1000, p=5, rounds=10, local_iters=10,
            seed=1, out=str(tmp_path / "grid"),
        )
        run_experiment(spec)
        lines = (tmp_path / "grid" / "trace.csv").read_text().strip().split("\n")
        assert len(lines) == 11  # header + T rows
        assert lines[0] == "round,distance_error,scalars_sent,elapsed_seconds," + ",".join(
            f"weight_{i}" for i in range(5)
        )

    def test_reproducible_bytes(self, tmp_path):
        base = dict(synth="mixture", n=30, m=20, p=3, rounds=3, local_iters=8, seed=4)
        run_experiment(ExperimentSpec(**base, out=str(tmp_path / "r1")))
        run_experiment(ExperimentSpec(**base, out=str(tmp_path / "r2")))
        t1 = (tmp_path / "r1" / "trace.csv").read_bytes()
        t2 = (tmp_path / "r2" / "trace.csv").read_bytes()
        assert t1 == t2

    def test_summary_echoes_resolved_spec(self, tmp_path):
        spec = ExperimentSpec(synth="single", n=10, m=8, p=2, rounds=2, out=str(tmp_path / "o"))
        summary = run_experiment(spec)
        echoed = summary["spec"]
        assert echoed["warm_start"] is False
        assert echoed["update_local_data"] is True
        assert echoed["tol"] == 1e-9
        assert echoed["topology"] == "server"
        assert "kind" not in echoed

    def test_akpca_gamma_resolved_and_echoed(self, tmp_path):
        spec = ExperimentSpec(
            synth="single", n=12, m=8, p=2, rounds=2, mode="akpca", kernel="rbf",
            out=str(tmp_path / "o"),
        )
        summary = run_experiment(spec)
        assert summary["spec"]["gamma"] is not None and summary["spec"]["gamma"] > 0

    def test_decentralized_topologies(self, tmp_path):
        for topo in ("complete", "ring", "star"):
            spec = ExperimentSpec(
                synth="single", n=12, m=9, p=3, rounds=2, topology=topo,
                out=str(tmp_path / topo),
            )
            summary = run_experiment(spec)
            assert summary["totals"]["rounds"] == 2

    def test_pgm_data_source(self, tmp_path):
        spec = ExperimentSpec(data=tuple(IMAGES), p=4, rounds=2, local_iters=10, out=str(tmp_path / "img"))
        summary = run_experiment(spec)
        assert summary["totals"]["rounds"] == 2

    def test_more_clients_than_features(self, tmp_path):
        spec = ExperimentSpec(synth="single", n=5, m=3, p=4, out=str(tmp_path / "o"))
        with pytest.raises(SpecError) as err:
            run_experiment(spec)
        assert err.value.field == "p"


class TestBaselineCommand:
    def test_pca_hand_eigenvalue(self, tmp_path):
        # X = diag(2,1): S = diag(2, 0.5), leading eigenvalue 2
        csv = tmp_path / "d.csv"
        csv.write_text("2,0\n0,1\n")
        spec = ExperimentSpec(data=(str(csv),), kind="pca", k=1, out=str(tmp_path / "b"))
        summary = run_baseline(spec)
        assert summary["eigenvalues"][0] == pytest.approx(2.0, abs=1e-9)
        rows = (tmp_path / "b" / "components.csv").read_text().strip().split("\n")
        assert len(rows) == 1

    def test_akpca_linear_full_rank_preserves_frobenius(self, tmp_path):
        X = np.random.default_rng(1).normal(size=(6, 4))
        csv = tmp_path / "x.csv"
        write_csv(csv, X)
        spec = ExperimentSpec(data=(str(csv),), kind="akpca", kernel="linear", k=6, out=str(tmp_path / "b"))
        run_baseline(spec)
        Z = np.array([
            [float(v) for v in line.split(",")]
            for line in (tmp_path / "b" / "components.csv").read_text().strip().split("\n")
        ])
        assert np.linalg.norm(Z) == pytest.approx(np.linalg.norm(X), rel=1e-8)

    def test_kpca_scores_shape(self, tmp_path):
        X = np.random.default_rng(2).normal(size=(7, 3))
        csv = tmp_path / "x.csv"
        write_csv(csv, X)
        spec = ExperimentSpec(data=(str(csv),), kind="kpca", kernel="rbf", gamma=0.5, k=2, out=str(tmp_path / "b"))
        summary = run_baseline(spec)
        assert summary["components_shape"] == [7, 2]


class TestMainExitCodes:
    def test_missing_data_source_exits_2(self, capsys):
        rc = main(["federated", "--p", "2"])
        assert rc == 2
        assert "field 'data'" in capsys.readouterr().err

    def test_two_data_sources_exit_2(self, tmp_path, capsys):
        csv = tmp_path / "x.csv"
        csv.write_text("1,2\n")
        rc = main(["federated", "--data", str(csv), "--synth", "single", "--n", "4", "--m", "4"])
        assert rc == 2

    def test_synth_without_m_exits_2(self, capsys):
        rc = main(["federated", "--synth", "single", "--n", "10"])
        assert rc == 2
        assert "field 'm'" in capsys.readouterr().err

    def test_hub_requires_star_topology(self, capsys):
        rc = main(["federated", "--synth", "single", "--n", "8", "--m", "6",
                   "--topology", "ring", "--hub", "1"])
        assert rc == 2
        assert "field 'hub'" in capsys.readouterr().err

    def test_star_hub_out_of_range(self, capsys):
        rc = main(["federated", "--synth", "single", "--n", "8", "--m", "6", "--p", "2",
                   "--topology", "star", "--hub", "5"])
        assert rc == 2
        assert "field 'hub'" in capsys.readouterr().err

    def test_unknown_config_key_exits_2(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text('{"bogus_field": 1}')
        rc = main(["federated", "--config", str(cfg)])
        assert rc == 2
        assert "bogus_field" in capsys.readouterr().err

    def test_kpca_indefinite_kernel_exits_1(self, tmp_path, capsys):
        csv = tmp_path / "ones.csv"
        csv.write_text("1\n1\n")
        rc = main(["baseline", "--data", str(csv), "--kind", "kpca", "--kernel", "sigmoid",
                   "--gamma", "1.0", "--k", "1", "--out", str(tmp_path / "o")])
        assert rc == 1
        assert "indefinite kernel for KPCA" in capsys.readouterr().err

    def test_runtime_failure_names_round_and_client(self, tmp_path, capsys):
        csv = tmp_path / "z.csv"
        csv.write_text("1,0\n0,0\n")  # second client's block is all zeros
        rc = main(["federated", "--data", str(csv), "--p", "2", "--rounds", "1",
                   "--out", str(tmp_path / "o")])
        assert rc == 1
        err = capsys.readouterr().err
        assert "round 0 client 1" in err

    def test_success_prints_json_to_stdout(self, tmp_path, capsys):
        rc = main(["federated", "--synth", "single", "--n", "10", "--m", "8", "--p", "2",
                   "--rounds", "2", "--out", str(tmp_path / "o")])
        assert rc == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["totals"]["rounds"] == 2


class TestConfigPrecedence:
    def test_flags_beat_file_beat_defaults(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"synth": "single", "n": 10, "m": 8, "rounds": 3, "seed": 9}))
        rc = main(["federated", "--config", str(cfg), "--rounds", "5", "--out", str(tmp_path / "o")])
        assert rc == 0
        summary = json.loads((tmp_path / "o" / "summary.json").read_text())
        assert summary["spec"]["rounds"] == 5   # flag wins
        assert summary["spec"]["seed"] == 9     # file wins over default
        assert summary["spec"]["local_iters"] == 10  # default

    def test_boolean_negation_flag(self, tmp_path):
        rc = main(["federated", "--synth", "single", "--n", "8", "--m", "6", "--p", "2",
                   "--rounds", "1", "--no-update-local-data", "--out", str(tmp_path / "o")])
        assert rc == 0
        summary = json.loads((tmp_path / "o" / "summary.json").read_text())
        assert summary["spec"]["update_local_data"] is False


class TestSynthCommand:
    def test_emits_loadable_csv(self, tmp_path):
        rc = main(["synth", "--synth", "mixture", "--n", "6", "--m", "4", "--seed", "3",
                   "--out", str(tmp_path / "s")])
        assert rc == 0
        from vfedpca.dataio import load_csv
        X = load_csv(tmp_path / "s" / "dataset.csv")
        assert X.shape == (6, 4)

    def test_requires_kind(self, capsys):
        rc = main(["synth", "--n", "6", "--m", "4"])
        assert rc == 2


class TestSubprocessInterface:
    def test_header_autodetect(self, tmp_path):
        csv = tmp_path / "h.csv"
        csv.write_text("colA,colB\n1,2\n3,4\n2,1\n")
        r = run_cli(["federated", "--data", str(csv), "--p", "2", "--rounds", "1",
                     "--out", str(tmp_path / "o")])
        assert r.returncode == 0, r.stderr

    def test_vfed_log_controls_stderr(self, tmp_path):
        import os

        env = dict(os.environ, VFED_LOG="info")
        args = ["federated", "--synth", "single", "--n", "8", "--m", "6", "--p", "2",
                "--rounds", "1", "--out", str(tmp_path / "o")]
        r = run_cli(args, env=env)
        assert r.returncode == 0
        assert "elapsed" in r.stderr  # per-round timing at info level
        json.loads(r.stdout)  # stdout stays machine-readable
