"""CLI surface: subcommands, exit codes, reproducibility, config files."""
import json
from pathlib import Path

import pytest

from coldbench.cli import run_cli
from coldbench.config import capacity_to_gb, parse_size_bytes

CONFIG_DIR = Path(__file__).resolve().parents[1] / "src" / "coldbench" / "configs"


def write_config(tmp_path, text):
    path = tmp_path / "run.toml"
    path.write_text(text)
    return str(path)


class TestSizeParsing:
    def test_binary_and_decimal_suffixes(self):
        assert parse_size_bytes("1PiB") == 2**50
        assert parse_size_bytes("256MiB") == 2**28
        assert parse_size_bytes("1PB") == 10**15
        assert parse_size_bytes("1.5KiB") == 1536
        assert parse_size_bytes(4096) == 4096

    def test_capacity_gb_conventions(self):
        assert capacity_to_gb("1PiB") == 2**20
        assert capacity_to_gb("256MiB") == 0.25
        assert capacity_to_gb("1048576") == 2**20  # bare number is GB

    def test_garbage_rejected(self):
        with pytest.raises(ValueError):
            parse_size_bytes("fast")
        with pytest.raises(ValueError):
            parse_size_bytes("1parsec")


class TestGenerate:
    def test_generate_writes_manifest(self, tmp_path, capsys):
        rc = run_cli(["generate", "--preset", "dsda-main", "--files", "500",
                      "--seed", "7", "--out", str(tmp_path / "ds")])
        assert rc == 0
        assert (tmp_path / "ds" / "records.csv").exists()
        summary = json.loads((tmp_path / "ds" / "summary.json").read_text())
        assert summary["summary"]["file_count"] == 500
        # bucket proportions: most files in the smallest bucket
        counts = summary["summary"]["bucket_counts"]
        assert counts[0] > 0.7 * 500

    def test_zero_files_is_usage_error(self, tmp_path, capsys):
        rc = run_cli(["generate", "--files", "0", "--out", str(tmp_path)])
        assert rc == 2

    def test_unknown_preset_is_usage_error(self, tmp_path):
        rc = run_cli(["generate", "--preset", "nope", "--out", str(tmp_path)])
        assert rc == 2

    def test_missing_subcommand_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            run_cli([])
        assert exc.value.code == 2


class TestCost:
    def test_cool_year_one_read_total(self, capsys):
        rc = run_cli(["cost", "--tier", "cool", "--capacity", "1PiB",
                      "--months", "12", "--reads", "1", "--blob", "256MiB", "--json"])
        assert rc == 0
        data = json.loads(capsys.readouterr().out)
        assert abs(float(data["total"]) - 430_000) / 430_000 < 0.01

    def test_moveout_curve_row_at_10_percent(self, capsys):
        rc = run_cli(["cost", "--tier", "archive", "--moveout-curve"])
        assert rc == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "overhead_percent,months"
        row10 = dict(line.split(",") for line in lines[1:])["10"]
        assert float(row10) == pytest.approx(40.0, abs=0.001)

    def test_migrate_with_egress(self, capsys):
        rc = run_cli(["cost", "--tier", "archive", "--capacity", "1PiB",
                      "--blob", "256MiB", "--migrate", "--json"])
        assert rc == 0
        data = json.loads(capsys.readouterr().out)
        assert float(data["with_egress"]["cost"]) == pytest.approx(73_610.04)
        assert data["with_egress"]["equivalent_storage_months"] == pytest.approx(15.6, abs=0.01)
        assert float(data["without_egress"]["cost"]) == pytest.approx(21_181.24)

    def test_unknown_tier_is_usage_error(self, capsys):
        rc = run_cli(["cost", "--tier", "nearline"])
        assert rc == 2

    def test_cost_config_file(self, capsys):
        rc = run_cli(["cost", "--tier", "archive",
                      "--config", str(CONFIG_DIR / "cost-1pib-year.toml"), "--json"])
        assert rc == 0
        data = json.loads(capsys.readouterr().out)
        assert float(data["total"]) == pytest.approx(77_804.34)

    def test_custom_catalog_file(self, capsys):
        rc = run_cli(["cost", "--tier", "hot", "--capacity", "1000",
                      "--months", "1", "--reads", "0",
                      "--catalog", str(CONFIG_DIR / "azure-2019.toml"), "--json"])
        assert rc == 0
        data = json.loads(capsys.readouterr().out)
        assert float(data["total"]) == pytest.approx(42.20)


class TestAdvise:
    def test_ranking_for_reference_scenario(self, capsys):
        rc = run_cli(["advise", "--capacity", "1PiB", "--months", "12",
                      "--reads", "1", "--blob", "256MiB", "--json"])
        assert rc == 0
        data = json.loads(capsys.readouterr().out)
        assert [row["tier"] for row in data["ranking"]] == ["archive", "cool", "hot"]
        assert data["scenario"]["capacity_gb"] == 2**20  # echo for reproducibility

    def test_table_output(self, capsys):
        rc = run_cli(["advise", "--capacity", "1PiB"])
        assert rc == 0
        out = capsys.readouterr().out
        assert "archive" in out and "rank" in out


class TestRun:
    def test_run_emits_report_and_measurements(self, tmp_path, capsys):
        config = write_config(tmp_path, """
seed = 5
[dataset]
preset = "dsda-main"
total_files = 300
mission_count = 4
mission_skew_s = 1.0
[workload]
request_count = 100
[sessions]
count = 2
[backend]
kind = "tape"
""")
        rc = run_cli(["run", "--config", config, "--out", str(tmp_path / "out")])
        assert rc == 0
        assert (tmp_path / "out" / "report.json").exists()
        assert (tmp_path / "out" / "measurements.csv").exists()
        report = json.loads((tmp_path / "out" / "report.json").read_text())
        assert report["requests"]["count"] == 200
        assert report["schema"] == "coldbench-report/1"
        summary_line = capsys.readouterr().out
        assert "p99=" in summary_line and "cost=" in summary_line

    def test_repeat_run_is_byte_identical(self, tmp_path):
        config = write_config(tmp_path, """
seed = 11
[dataset]
preset = "dsda-main"
total_files = 200
static_fraction = 0.9
mission_count = 3
mission_skew_s = 1.1
[workload]
request_count = 150
read_fraction = 0.9
[backend]
kind = "cache+tape"
[backend.cache]
capacity = "1GiB"
""")
        rc1 = run_cli(["run", "--config", config, "--out", str(tmp_path / "a")])
        rc2 = run_cli(["run", "--config", config, "--out", str(tmp_path / "b")])
        assert rc1 == rc2 == 0
        assert (tmp_path / "a" / "report.json").read_bytes() == \
            (tmp_path / "b" / "report.json").read_bytes()
        assert (tmp_path / "a" / "measurements.csv").read_bytes() == \
            (tmp_path / "b" / "measurements.csv").read_bytes()

    def test_cloud_backend_flag_override(self, tmp_path, capsys):
        config = write_config(tmp_path, """
seed = 3
[dataset]
total_files = 50
[dataset.distribution]
kind = "fixed"
size = "1KiB"
[workload]
request_count = 30
[backend]
kind = "tape"
""")
        rc = run_cli(["run", "--config", config, "--backend", "cloud:hot",
                      "--out", str(tmp_path / "out")])
        assert rc == 0
        report = json.loads((tmp_path / "out" / "report.json").read_text())
        assert report["latency"]["overall"]["p50_us"] == pytest.approx(5_300, abs=100)
        assert report["cost"] is not None

    def test_shipped_choke_point_configs_parse_and_run(self, tmp_path):
        for name in ("cp2-batch", "cp4-smallfile"):
            rc = run_cli(["run", "--config", str(CONFIG_DIR / f"{name}.toml"),
                          "--requests", "20",
                          "--out", str(tmp_path / name)])
            assert rc == 0, name

    def test_invalid_backend_is_usage_error(self, tmp_path):
        config = write_config(tmp_path, """
[dataset]
total_files = 5
[workload]
request_count = 5
[backend]
kind = "floppy"
""")
        rc = run_cli(["run", "--config", config, "--out", str(tmp_path / "x")])
        assert rc == 2


class TestChokePointPairing:
    def test_cp4_bandwidth_strictly_below_cp1_on_same_backend(self, tmp_path):
        # Paired runs over one dataset: restricting reads to < 8 MiB files
        # must cut sustained bandwidth versus the unrestricted skew preset.
        base = """
seed = 19
[dataset]
preset = "dsda-main"
total_files = 3000
mission_count = 8
mission_skew_s = 1.0
[workload]
preset = "%s"
request_count = 120
[backend]
kind = "tape"
"""
        bandwidth = {}
        for preset_name in ("cp1-skew", "cp4-smallfile"):
            config = tmp_path / f"{preset_name}.toml"
            config.write_text(base % preset_name)
            out = tmp_path / preset_name
            rc = run_cli(["run", "--config", str(config), "--out", str(out)])
            assert rc == 0
            report = json.loads((out / "report.json").read_text())
            bandwidth[preset_name] = report["bandwidth"]["sustained_get_bytes_per_s"]
        assert bandwidth["cp4-smallfile"] < bandwidth["cp1-skew"]

    def test_trace_csv_emitted_when_enabled(self, tmp_path):
        config = tmp_path / "run.toml"
        config.write_text("""
seed = 6
[dataset]
total_files = 20
[dataset.distribution]
kind = "fixed"
size = "1MiB"
[workload]
request_count = 25
[backend]
kind = "tape"
trace = true
""")
        rc = run_cli(["run", "--config", str(config), "--out", str(tmp_path / "out")])
        assert rc == 0
        lines = (tmp_path / "out" / "trace.csv").read_text().splitlines()
        assert lines[0] == "time_us,backend,op,file_id,latency_us,cost_cents"
        assert len(lines) == 26  # header + one event per request


class TestInlineDistributionConfig:
    def test_histogram_distribution_in_config(self, tmp_path):
        config = write_config(tmp_path, """
seed = 9
[dataset]
total_files = 200
[dataset.distribution]
kind = "histogram"
top_cap = "64MiB"
buckets = [["1KiB", "1MiB", 80], ["1MiB", "16MiB", 15], ["16MiB", 0, 5]]
[workload]
request_count = 50
[backend]
kind = "tape"
""")
        # TOML has no null; a 0 upper bound would be falsy -- use explicit open bucket
        rc = run_cli(["run", "--config", config, "--out", str(tmp_path / "out")])
        assert rc == 0
        report = json.loads((tmp_path / "out" / "report.json").read_text())
        assert report["requests"]["count"] == 50
