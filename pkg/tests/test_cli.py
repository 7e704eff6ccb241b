"""Command-line driver: outputs, exit codes, manifest round-trips."""

from alignstat.cli import main


def run_cli(args):
    return main([str(a) for a in args])


class TestRenderStimulus:
    def test_null_stimulus_line_count(self, tmp_path):
        rc = run_cli(
            ["render-stimulus", "--n", 100, "--n1", 0, "--seed", 3, "--out-dir", tmp_path]
        )
        assert rc == 0
        svg = (tmp_path / "stimulus.svg").read_text()
        assert svg.count("<line") == 100
        assert 'viewBox="0 0 1000 1000"' in svg

    def test_planted_stimulus_same_style(self, tmp_path):
        rc = run_cli(
            ["render-stimulus", "--n", 100, "--n1", 40, "--seed", 4, "--out-dir", tmp_path]
        )
        assert rc == 0
        svg = (tmp_path / "stimulus.svg").read_text()
        assert svg.count("<line") == 100
        assert svg.count('stroke="black"') == 100  # planted indistinguishable

    def test_empty_canvas(self, tmp_path):
        rc = run_cli(["render-stimulus", "--n", 0, "--out-dir", tmp_path])
        assert rc == 0
        assert (tmp_path / "stimulus.svg").read_text().count("<line") == 0

    def test_unsupported_dims(self, tmp_path):
        rc = run_cli(["render-stimulus", "--d", 3, "--out-dir", tmp_path])
        assert rc == 2


class TestExponentSweep:
    def test_writes_csv_and_report(self, tmp_path):
        rc = run_cli(
            [
                "exponent-sweep",
                "--problem",
                "jets",
                "--n-grid",
                "300,600,1200",
                "--trials",
                8,
                "--seed",
                11,
                "--out-dir",
                tmp_path,
            ]
        )
        assert rc == 0
        lines = (tmp_path / "sweep.csv").read_text().strip().splitlines()
        assert len(lines) == 1 + 3 * 8
        report = (tmp_path / "report.txt").read_text()
        assert "target_rho = 0.25" in report
        assert "slope = " in report

    def test_degenerate_grid_exits_nonzero(self, tmp_path):
        rc = run_cli(
            ["exponent-sweep", "--n-grid", "1000", "--trials", 4, "--out-dir", tmp_path]
        )
        assert rc == 3

    def test_worker_counts_byte_identical(self, tmp_path):
        common = [
            "exponent-sweep",
            "--problem",
            "oriented",
            "--n-grid",
            "300,600,1200",
            "--trials",
            6,
            "--seed",
            21,
        ]
        assert run_cli(common + ["--workers", 1, "--out-dir", tmp_path / "w1"]) == 0
        assert run_cli(common + ["--workers", 4, "--out-dir", tmp_path / "w4"]) == 0
        a = (tmp_path / "w1" / "sweep.csv").read_bytes()
        b = (tmp_path / "w4" / "sweep.csv").read_bytes()
        assert a == b

    def test_manifest_round_trip(self, tmp_path):
        first = tmp_path / "first"
        second = tmp_path / "second"
        args = [
            "exponent-sweep",
            "--n-grid",
            "300,600,1200",
            "--trials",
            5,
            "--seed",
            31,
            "--out-dir",
            first,
        ]
        assert run_cli(args) == 0
        rc = run_cli(
            ["exponent-sweep", "--config", first / "manifest.txt", "--out-dir", second]
        )
        assert rc == 0
        assert (first / "sweep.csv").read_bytes() == (second / "sweep.csv").read_bytes()

    def test_flag_overrides_config(self, tmp_path):
        first = tmp_path / "first"
        assert (
            run_cli(
                [
                    "exponent-sweep",
                    "--n-grid",
                    "300,600,1200",
                    "--trials",
                    5,
                    "--seed",
                    31,
                    "--out-dir",
                    first,
                ]
            )
            == 0
        )
        second = tmp_path / "second"
        rc = run_cli(
            [
                "exponent-sweep",
                "--config",
                first / "manifest.txt",
                "--seed",
                32,
                "--out-dir",
                second,
            ]
        )
        assert rc == 0
        assert (first / "sweep.csv").read_bytes() != (second / "sweep.csv").read_bytes()

    def test_unknown_config_key_is_hard_error(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("mystery_knob = 7\n")
        rc = run_cli(["exponent-sweep", "--config", cfg, "--out-dir", tmp_path])
        assert rc == 2

    def test_wrong_command_in_config(self, tmp_path):
        cfg = tmp_path / "other.cfg"
        cfg.write_text("command = power\n")
        rc = run_cli(["exponent-sweep", "--config", cfg, "--out-dir", tmp_path])
        assert rc == 2


class TestVolumeScan:
    def test_writes_rows(self, tmp_path):
        rc = run_cli(
            [
                "volume-scan",
                "--k",
                1,
                "--d",
                2,
                "--eps-grid",
                "0.4,0.2",
                "--trials",
                2000,
                "--out-dir",
                tmp_path,
            ]
        )
        assert rc == 0
        lines = (tmp_path / "volume.csv").read_text().strip().splitlines()
        assert lines[0].startswith("kind,k,d,eps")
        assert len(lines) == 1 + 4  # ball x2 + cube x2


class TestNetsDemo:
    def test_writes_rows_and_members(self, tmp_path):
        rc = run_cli(
            [
                "nets-demo",
                "--k",
                1,
                "--d",
                2,
                "--eps-grid",
                "0.5",
                "--probes",
                50,
                "--export-members",
                "--out-dir",
                tmp_path,
            ]
        )
        assert rc == 0
        lines = (tmp_path / "nets.csv").read_text().strip().splitlines()
        assert len(lines) == 3  # header + packing + covering
        assert (tmp_path / "packing_0.5.csv").exists()


class TestPower:
    def test_power_csv(self, tmp_path):
        rc = run_cli(
            [
                "power",
                "--n",
                400,
                "--n1",
                400,
                "--trials",
                120,
                "--seed",
                5,
                "--out-dir",
                tmp_path,
            ]
        )
        assert rc == 0
        lines = (tmp_path / "power.csv").read_text().strip().splitlines()
        header, row = lines
        vals = dict(zip(header.split(","), row.split(",")))
        assert float(vals["power"]) >= 0.95
