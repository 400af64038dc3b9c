"""Command-line surface: exit codes, artifacts, determinism, figures."""

import json

import pytest

from qosbroker.cli import main

from conftest import DATA_DIR

IS = str(DATA_DIR / "providers.json")
REQUEST = str(DATA_DIR / "request_effective.json")
LABELS = str(DATA_DIR / "labels.json")
REDUCT = str(DATA_DIR / "baseline_reduct.json")


def run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestRank:
    def test_golden_invocation(self, capsys, tmp_path):
        out_path = tmp_path / "ranked.json"
        code, out, err = run(
            [
                "rank", "--is", IS, "--request", REQUEST,
                "--labels", LABELS, "--reduct", REDUCT,
                "--alpha", "0.15", "--no-banner", "-o", str(out_path),
            ],
            capsys,
        )
        assert code == 0, err
        assert out.splitlines()[1].startswith("1")
        assert "Amazon EC2" in out.splitlines()[1]
        ranked = json.loads(out_path.read_text())
        assert ranked[0]["provider_id"] == "amazon-ec2"
        assert ranked[0]["score"] == pytest.approx(4.989, abs=0.005)

    def test_missing_request_file_is_io_error(self, capsys):
        code, _, err = run(["rank", "--is", IS, "--request", "absent.json"], capsys)
        assert code == 3
        assert err.startswith("error: io:")

    def test_alpha_out_of_range(self, capsys):
        code, _, err = run(
            ["rank", "--is", IS, "--request", REQUEST, "--alpha", "1.5"], capsys
        )
        assert code == 2
        assert "alpha out of [0,1]" in err
        assert err.startswith("error: validation:")

    def test_explain_emits_reduct_and_weights(self, capsys, tmp_path):
        out_path = tmp_path / "explain.json"
        code, out, _ = run(
            [
                "rank", "--is", IS, "--request", REQUEST,
                "--labels", LABELS, "--reduct", REDUCT,
                "--explain", "--no-banner", "-o", str(out_path),
            ],
            capsys,
        )
        assert code == 0
        assert "chosen reduct:" in out
        doc = json.loads(out_path.read_text())
        assert doc["reduction_pct"] == pytest.approx((1 - 11 / 17) * 100, abs=1e-4)
        assert doc["weights"]["Availability"]["combined"] == pytest.approx(0.067, abs=1e-4)
        assert "contributions" in doc

    def test_artifacts_byte_identical_across_runs(self, capsys, tmp_path):
        blobs = []
        for i in range(2):
            out_path = tmp_path / f"run{i}.json"
            code, _, _ = run(
                [
                    "rank", "--is", IS, "--request", REQUEST,
                    "--labels", LABELS, "--seed", "5",
                    "--no-banner", "-o", str(out_path),
                ],
                capsys,
            )
            assert code == 0
            blobs.append(out_path.read_bytes())
        assert blobs[0] == blobs[1]

    def test_banner_only_without_flag(self, capsys):
        _, with_banner, _ = run(
            ["rank", "--is", IS, "--request", REQUEST, "--labels", LABELS,
             "--reduct", REDUCT],
            capsys,
        )
        assert with_banner.splitlines()[0].startswith("# qosbroker rank")
        _, without, _ = run(
            ["rank", "--is", IS, "--request", REQUEST, "--labels", LABELS,
             "--reduct", REDUCT, "--no-banner"],
            capsys,
        )
        assert not without.splitlines()[0].startswith("#")


class TestValidate:
    def test_valid_system(self, capsys):
        code, out, _ = run(["validate", "--is", IS, "--no-banner"], capsys)
        assert code == 0
        assert out.startswith("ok:")

    def test_broken_system_exits_2(self, capsys, tmp_path):
        doc = json.loads(DATA_DIR.joinpath("providers.json").read_text())
        del doc["providers"][0]["values"]["Latency"]
        broken = tmp_path / "broken.json"
        broken.write_text(json.dumps(doc))
        code, out, _ = run(["validate", "--is", str(broken), "--no-banner"], capsys)
        assert code == 2
        assert "missing value" in out


class TestSweepAlpha:
    def test_default_grid_has_twenty_rows(self, capsys, tmp_path):
        out_path = tmp_path / "sweep.csv"
        code, _, _ = run(
            ["sweep-alpha", "--is", IS, "--labels", LABELS, "--no-banner",
             "--format", "csv", "-o", str(out_path)],
            capsys,
        )
        assert code == 0
        lines = out_path.read_text().splitlines()
        assert len(lines) == 21  # header + 20 grid points
        last = lines[-1].split(",")
        assert last[0] == "1.0"
        assert last[1] == "1"  # single reduct at alpha = 1
        assert last[2] == last[3] == "17"  # the full attribute set

    def test_custom_step(self, capsys, tmp_path):
        out_path = tmp_path / "sweep.csv"
        code, _, _ = run(
            ["sweep-alpha", "--is", IS, "--labels", LABELS, "--step", "0.5",
             "--no-banner", "--format", "csv", "-o", str(out_path)],
            capsys,
        )
        assert code == 0
        rows = out_path.read_text().splitlines()[1:]
        assert [r.split(",")[0] for r in rows] == ["0.5", "1.0"]

    def test_plot_written(self, capsys, tmp_path):
        png = tmp_path / "sweep.png"
        code, _, _ = run(
            ["sweep-alpha", "--is", IS, "--labels", LABELS, "--step", "0.5",
             "--no-banner", "--plot", str(png)],
            capsys,
        )
        assert code == 0
        assert png.stat().st_size > 0


class TestCluster:
    def test_fixed_k_labels_artifact(self, capsys, tmp_path):
        out_path = tmp_path / "labels.json"
        png = tmp_path / "sse.png"
        code, out, _ = run(
            ["cluster", "--is", IS, "--k", "3", "--seed", "0", "--no-banner",
             "-o", str(out_path), "--plot", str(png)],
            capsys,
        )
        assert code == 0
        doc = json.loads(out_path.read_text())
        assert doc["k"] == 3
        assert set(doc["labels"].values()) <= {1, 2, 3}
        assert len(doc["labels"]) == 10
        assert png.stat().st_size > 0


class TestReducts:
    def test_emits_metadata(self, capsys, tmp_path):
        out_path = tmp_path / "reducts.json"
        code, out, _ = run(
            ["reducts", "--is", IS, "--labels", LABELS, "--request", REQUEST,
             "--alpha", "0.15", "--no-banner", "-o", str(out_path)],
            capsys,
        )
        assert code == 0
        rows = json.loads(out_path.read_text())
        assert len(rows) > 1
        assert sum(r["chosen"] for r in rows) == 1
        first = rows[0]
        assert set(first) == {"attributes", "size", "overlap", "dynamic_count", "chosen"}
        assert first["chosen"]  # sorted with the chosen reduct first


class TestSimulateAndFeedback:
    def test_simulate_writes_artifacts(self, capsys, tmp_path):
        outdir = tmp_path / "sim"
        code, out, _ = run(
            [
                "simulate", "--is", IS, "--request", REQUEST,
                "--labels", LABELS, "--reduct", REDUCT,
                "--tasks", "50", "--seed", "7", "--feedback", "9",
                "--outdir", str(outdir), "--no-banner",
            ],
            capsys,
        )
        assert code == 0
        for name in (
            "ranked_first.json", "ranked_second.json", "performance.json",
            "monitoring.csv", "sla_records.jsonl", "store.json",
        ):
            assert (outdir / name).exists(), name
        assert "selected provider" in out

    def test_feedback_updates_store(self, capsys, tmp_path):
        outdir = tmp_path / "sim"
        run(
            [
                "simulate", "--is", IS, "--request", REQUEST,
                "--labels", LABELS, "--reduct", REDUCT,
                "--tasks", "10", "--outdir", str(outdir), "--no-banner",
            ],
            capsys,
        )
        store_path = outdir / "store.json"
        code, out, _ = run(
            ["feedback", "--store", str(store_path), "--provider", "linode",
             "--level", "8", "--no-banner"],
            capsys,
        )
        assert code == 0
        assert "level now 8" in out
        assert json.loads(store_path.read_text())["feedback"]["linode"] == {
            "count": 1, "total": 8,
        }

    def test_feedback_out_of_range(self, capsys, tmp_path):
        outdir = tmp_path / "sim"
        run(
            [
                "simulate", "--is", IS, "--request", REQUEST,
                "--labels", LABELS, "--reduct", REDUCT,
                "--tasks", "10", "--outdir", str(outdir), "--no-banner",
            ],
            capsys,
        )
        code, _, err = run(
            ["feedback", "--store", str(outdir / "store.json"),
             "--provider", "linode", "--level", "0", "--no-banner"],
            capsys,
        )
        assert code == 2
        assert err.startswith("error: validation:")


class TestBench:
    def test_small_grid_shape(self, capsys, tmp_path):
        out_path = tmp_path / "bench.csv"
        png = tmp_path / "bench.png"
        code, _, _ = run(
            [
                "bench", "--request-counts", "1,3", "--provider-counts", "15",
                "--fixed-providers", "15", "--fixed-requests", "3",
                "--seed", "1", "--no-banner", "--format", "csv",
                "-o", str(out_path), "--plot", str(png),
            ],
            capsys,
        )
        assert code == 0
        lines = out_path.read_text().splitlines()
        # header + (2 request points + 1 provider point) x 2 pipelines
        assert len(lines) == 1 + 3 * 2
        assert lines[0] == "sweep,x,pipeline,mean_ms,p95_ms"
        assert png.stat().st_size > 0
