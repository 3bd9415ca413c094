import json

from weqlab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestGroupCommands:
    def test_info_prints_order(self, capsys, tmp_path):
        out_path = tmp_path / "g3.json"
        code, out, _ = run(
            capsys, "group", "info", "--d", "2", "--n", "3", "--out", str(out_path)
        )
        assert code == 0
        assert "order 24" in out
        payload = json.loads(out_path.read_text())
        assert payload["result"]["order"] == 24
        assert payload["version"]
        assert payload["config"]["n"] == 3

    def test_info_budget_exhaustion_partial(self, capsys, tmp_path):
        out_path = tmp_path / "partial.json"
        code, _, err = run(
            capsys,
            "group", "info", "--d", "2", "--n", "7",
            "--budget", "10", "--out", str(out_path),
        )
        assert code == 1
        assert "budget" in err.lower()
        payload = json.loads(out_path.read_text())
        assert payload["result"]["budget_exhausted"] is True

    def test_crt(self, capsys, tmp_path):
        out_path = tmp_path / "crt.json"
        code, out, _ = run(
            capsys, "group", "crt", "--d", "2", "--n", "6", "--out", str(out_path)
        )
        assert code == 0
        assert "144" in out
        payload = json.loads(out_path.read_text())
        assert payload["result"]["order_matches_product"] is True
        assert payload["result"]["reduction_injective"] is True

    def test_bad_dimension(self, capsys):
        code, _, err = run(capsys, "group", "info", "--d", "1", "--n", "3")
        assert code == 2
        assert "error" in err


class TestValidation:
    def test_mixing_divisibility(self, capsys):
        code, _, err = run(capsys, "mixing", "--n", "9", "--m", "3")
        assert code == 2
        assert "divide" in err

    def test_report_rejects_composite_prime(self, capsys):
        code, _, err = run(capsys, "steplab", "report", "--primes", "4,5", "--step-N", "1")
        assert code == 2
        assert "not prime" in err

    def test_unknown_flag_exits_2(self, capsys):
        code = main(["group", "info", "--nope"])
        assert code == 2

    def test_wstat_unknown_action(self, capsys):
        code, _, err = run(capsys, "wstat", "--action", "bogus")
        assert code == 2


class TestDeterminism:
    def test_mixing_byte_identical(self, capsys, tmp_path):
        path = tmp_path / "m.json"
        args = ["mixing", "--n", "3", "--m", "3", "--trials", "20", "--seed", "7",
                "--no-figures", "--out", str(path)]
        assert main(list(args)) == 0
        first = path.read_bytes()
        assert main(list(args)) == 0
        capsys.readouterr()
        assert path.read_bytes() == first

    def test_worker_count_does_not_change_bytes(self, capsys, tmp_path):
        path = tmp_path / "m.json"
        base = ["mixing", "--n", "3", "--m", "3", "--trials", "10", "--seed", "7",
                "--no-figures", "--out", str(path)]
        assert main(["--threads", "1"] + base) == 0
        first = path.read_bytes()
        assert main(["--threads", "4"] + base) == 0
        capsys.readouterr()
        assert path.read_bytes() == first

    def test_small_report_byte_identical(self, capsys, tmp_path):
        base = tmp_path / "r"
        args = [
            "steplab", "report", "--primes", "3", "--step-N", "1",
            "--seed", "7", "--out", f"{base}.json", "--csv", f"{base}.csv",
            "--no-figures",
        ]
        assert main(list(args)) == 0
        first_json = (tmp_path / "r.json").read_bytes()
        first_csv = (tmp_path / "r.csv").read_bytes()
        assert main(list(args)) == 0
        capsys.readouterr()
        assert (tmp_path / "r.json").read_bytes() == first_json
        assert (tmp_path / "r.csv").read_bytes() == first_csv


class TestWstatCommand:
    def test_toy_exhaustive_schema(self, capsys, tmp_path):
        out_path = tmp_path / "w.json"
        code, out, _ = run(
            capsys,
            "wstat", "--action", "toy:cycle3", "--k", "2",
            "--exhaustive", "--budget", "16", "--out", str(out_path),
        )
        assert code == 0
        payload = json.loads(out_path.read_text())
        result = payload["result"]
        assert result["exhaustive"] is True
        assert result["strategy"] == "exhaustive"
        assert result["vectors"]
        entry = result["vectors"][0]["entries"][0]
        assert set(entry) == {"symbol", "i", "j", "count"}

    def test_translation_action_spec(self, capsys):
        code, out, _ = run(capsys, "wstat", "--action", "a3", "--k", "2", "--budget", "64")
        assert code == 0
        assert "24 points" in out


class TestFigures:
    def test_report_renders_figures_alongside_csv(self, capsys, tmp_path):
        base = tmp_path / "disc"
        code, out, _ = run(
            capsys,
            "steplab", "report", "--primes", "3", "--step-N", "1",
            "--seed", "7", "--out", f"{base}.json", "--csv", f"{base}.csv",
        )
        assert code == 0
        for suffix in ("step_distance", "spectral", "floor_bound"):
            assert (tmp_path / f"disc_{suffix}.png").exists()

    def test_no_figures_flag(self, capsys, tmp_path):
        base = tmp_path / "disc"
        code, _, _ = run(
            capsys,
            "steplab", "report", "--primes", "3", "--step-N", "1",
            "--seed", "7", "--out", f"{base}.json", "--no-figures",
        )
        assert code == 0
        assert not list(tmp_path.glob("*.png"))

    def test_expansion_figure(self, capsys, tmp_path):
        out_path = tmp_path / "exp.json"
        code, _, _ = run(
            capsys, "expansion", "--moduli", "2,3", "--out", str(out_path)
        )
        assert code == 0
        assert (tmp_path / "exp_expansion.png").exists()


class TestConfigFile:
    def test_config_supplies_defaults(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"n": 5, "trials": 10, "seed": 3}))
        out_path = tmp_path / "m.json"
        code, out, _ = run(
            capsys,
            "--config", str(cfg), "mixing", "--m", "5",
            "--out", str(out_path), "--no-figures",
        )
        assert code == 0
        payload = json.loads(out_path.read_text())
        assert payload["config"]["n"] == 5
        assert payload["config"]["trials"] == 10

    def test_cli_overrides_config(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"trials": 10}))
        out_path = tmp_path / "m.json"
        code, _, _ = run(
            capsys,
            "--config", str(cfg), "mixing", "--n", "3", "--m", "3",
            "--trials", "5", "--out", str(out_path), "--no-figures",
        )
        assert code == 0
        payload = json.loads(out_path.read_text())
        assert payload["config"]["trials"] == 5

    def test_bad_config_file(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text("[1,2]")
        code, _, err = run(capsys, "--config", str(cfg), "group", "info")
        assert code == 2


class TestExpansionCommand:
    def test_csv_projection(self, capsys, tmp_path):
        csv_path = tmp_path / "exp.csv"
        code, _, _ = run(
            capsys, "expansion", "--moduli", "2,3", "--csv", str(csv_path),
            "--no-figures",
        )
        assert code == 0
        lines = csv_path.read_text().strip().splitlines()
        assert lines[0].startswith("n,order,generates")
        assert lines[1].startswith("2,6,false")
        assert lines[2].startswith("3,24,true")
