import json

from vpatch.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestSpectrum:
    def test_mode_two_frequency_column(self, capsys, tmp_path):
        out = tmp_path / "spec.csv"
        code, _, _ = run_cli(capsys, "spectrum", "--gamma", "2", "--n-max", "8",
                             "--output", str(out))
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "n,mu_plus,mu_minus,omega_n,m_n,class"
        row2 = lines[2].split(",")
        assert int(row2[0]) == 2
        assert abs(float(row2[3])) <= 1e-15
        assert row2[5] == "degenerate"

    def test_stdout_mode(self, capsys):
        code, out, _ = run_cli(capsys, "spectrum", "--gamma", "4", "--n-max", "4")
        assert code == 0
        rows = out.strip().split("\n")
        assert rows[3].split(",")[5] == "hyperbolic"  # mode 3 at gamma = 4

    def test_sidecar_written(self, capsys, tmp_path):
        out = tmp_path / "spec.csv"
        run_cli(capsys, "spectrum", "--gamma", "2", "--n-max", "4", "--output", str(out))
        meta = json.loads((tmp_path / "spec.csv.meta.json").read_text())
        assert "created_utc" in meta and "argv" in meta

    def test_payload_deterministic(self, capsys, tmp_path):
        blobs = []
        for tag in ("a", "b"):
            out = tmp_path / f"{tag}.csv"
            run_cli(capsys, "spectrum", "--gamma", "2.3", "--n-max", "16",
                    "--output", str(out))
            blobs.append(out.read_bytes())
        assert blobs[0] == blobs[1]


class TestCriticalGammas:
    def test_mode_three_prints_exactly(self, capsys):
        code, out, _ = run_cli(capsys, "critical-gammas", "--n", "3")
        assert code == 0
        assert out.strip() == "3.0000000000"

    def test_table(self, capsys):
        code, out, _ = run_cli(capsys, "critical-gammas", "--n-max", "5")
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == "n,critical_gamma"
        values = [float(line.split(",")[1]) for line in lines[1:]]
        assert values == sorted(values)


class TestSimulate:
    def test_equilibrium_run(self, capsys):
        code, out, _ = run_cli(
            capsys, "simulate", "--gamma", "2", "--xi0", "zero",
            "--omega", "equilibrium", "--t-end", "0.2", "--n-points", "128",
            "--dt", "1e-2",
        )
        assert code == 0
        max_line = [l for l in out.split("\n") if l.startswith("max_abs_xi=")][0]
        assert float(max_line.split("=")[1]) <= 1e-9

    def test_csv_output(self, capsys, tmp_path):
        out = tmp_path / "run.csv"
        plot = tmp_path / "plot.dat"
        code, _, _ = run_cli(
            capsys, "simulate", "--gamma", "2", "--xi0", "cos:3:0.005",
            "--omega", "equilibrium", "--t-end", "0.1", "--dt", "1e-2",
            "--n-points", "64", "--record-stride", "2", "--output", str(out),
            "--plot-data", str(plot),
        )
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0].startswith("t,circulation")
        assert len(lines) > 2
        plot_lines = plot.read_text().strip().split("\n")
        assert plot_lines[0].startswith("#")
        assert all(len(l.split()) == 2 for l in plot_lines[1:])

    def test_bad_gamma_is_precondition_failure(self, capsys):
        code, _, err = run_cli(capsys, "simulate", "--gamma", "0.5", "--t-end", "1")
        assert code == 1
        assert "precondition" in err

    def test_bad_xi0_is_precondition_failure(self, capsys):
        code, _, err = run_cli(capsys, "simulate", "--gamma", "2", "--t-end", "1",
                               "--xi0", "wiggle:3")
        assert code == 1
        assert "precondition" in err

    def test_blowup_exit_code(self, capsys):
        # unstable step size trips the margin; partial record, exit 2
        code, out, err = run_cli(
            capsys, "simulate", "--gamma", "2", "--xi0", "cos:2:0.3",
            "--omega", "0.0", "--t-end", "20", "--dt", "0.5", "--n-points", "64",
        )
        assert code == 2
        assert "aborted" in err


class TestRectifyCheck:
    def test_report(self, capsys, tmp_path):
        out = tmp_path / "rect.json"
        code, _, _ = run_cli(
            capsys, "rectify-check", "--gamma", "2", "--n-points", "128",
            "--trials", "3", "--output", str(out),
        )
        assert code == 0
        report = json.loads(out.read_text())
        assert report["pass"] is True
        assert report["round_trip_max_err"] < 1e-9
        assert report["schema_version"] == 1

    def test_amplitude_scan(self, capsys):
        code, out, _ = run_cli(
            capsys, "rectify-check", "--gamma", "2", "--n-points", "128",
            "--trials", "2", "--scan-amplitude",
        )
        assert code == 0
        report = json.loads(out)
        assert report["largest_round_trip_amplitude"] >= 1e-3


class TestResonanceCommand:
    def test_small_run(self, capsys, tmp_path):
        csv_path = tmp_path / "margins.csv"
        json_path = tmp_path / "report.json"
        code, out, _ = run_cli(
            capsys, "resonance", "--sites", "4,5", "--n-bar", "2",
            "--upsilon", "1e-3,1e-6", "--tau", "2", "--l-max", "3",
            "--n-max", "10", "--gamma-min", "1.7", "--gamma-max", "2.0",
            "--d-gamma", "0.05", "--csv", str(csv_path), "--json", str(json_path),
        )
        assert code == 0
        assert "excluded_measure" in out
        assert csv_path.exists() and json_path.exists()

    def test_invalid_interval(self, capsys):
        code, _, err = run_cli(
            capsys, "resonance", "--gamma-min", "0.5", "--gamma-max", "2.0",
        )
        assert code == 1
        assert "precondition" in err


class TestVerifyCommand:
    def test_single_check(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "--only", "equilibrium")
        assert code == 0
        assert out.startswith("PASS equilibrium")


class TestResonanceTransversality:
    def test_flag_reports_minimum(self, capsys):
        code, out, _ = run_cli(
            capsys, "resonance", "--sites", "4,5", "--upsilon", "1e-3",
            "--tau", "2", "--l-max", "3", "--n-max", "10",
            "--gamma-min", "1.8", "--gamma-max", "2.0", "--d-gamma", "0.1",
            "--transversality", "--transversality-stride", "2",
        )
        assert code == 0
        line = [l for l in out.split("\n") if l.startswith("transversality_min=")][0]
        assert float(line.split("=")[1]) > 0


class TestVerifyFast:
    def test_fast_subset_passes(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "--fast")
        assert code == 0
        assert "conservation" not in out
        assert "measure-trend" not in out
