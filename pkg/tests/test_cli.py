import csv

import pytest

from tentdg.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestBasisInfo:
    def test_prints_dimension_table(self, capsys):
        code, out, err = run(capsys, "basis-info", "--p", "2")
        assert code == 0
        lines = out.splitlines()
        assert lines[0].split() == ["n", "p", "dim_scalar", "dim_wave"]
        assert lines[1].split() == ["1", "2", "7", "6"]

    def test_writes_csv(self, capsys, tmp_path):
        out_path = tmp_path / "dims.csv"
        code, _, _ = run(capsys, "basis-info", "--p", "4",
                         "--out", str(out_path))
        assert code == 0
        with open(out_path) as f:
            rows = list(csv.DictReader(f))
        assert rows[0]["dim_wave"] == "10"


class TestConvergenceCommand:
    def test_csv_matches_schema(self, capsys, tmp_path):
        out_path = tmp_path / "conv.csv"
        code, out, _ = run(capsys, "convergence", "--p", "1",
                           "--h", "0.25,0.125", "--T", "0.25",
                           "--out", str(out_path))
        assert code == 0
        header = out_path.read_text().splitlines()[0]
        assert header == "h,p,dofs,error,rate,seconds"
        with open(out_path) as f:
            rows = list(csv.DictReader(f))
        assert len(rows) == 2
        assert rows[0]["rate"] == "nan"
        assert float(rows[1]["rate"]) > 1.0


class TestErrorHandling:
    def test_unknown_subcommand_exits_nonzero(self):
        with pytest.raises(SystemExit) as exc:
            main(["unheard-of"])
        assert exc.value.code != 0

    def test_failure_prints_machine_readable_line(self, capsys):
        code, out, err = run(capsys, "mesh", "validate", "/no/such/file")
        assert code == 1
        assert err.startswith("error: FileNotFoundError:")

    def test_bad_degree_is_reported_not_raised(self, capsys):
        code, _, err = run(capsys, "convergence", "--p", "0",
                           "--h", "0.5", "--T", "0.25")
        assert code == 1
        assert err.startswith("error: ")


class TestMeshCommand:
    def test_generate_validate_roundtrip(self, capsys, tmp_path):
        path = tmp_path / "mesh.txt"
        code, out, _ = run(capsys, "mesh", "generate", "--shape", "square",
                           "--h", "0.5", "--out", str(path))
        assert code == 0
        code, out, _ = run(capsys, "mesh", "validate", str(path))
        assert code == 0
        assert out.startswith("ok: dim=2")

    def test_generate_to_stdout(self, capsys):
        code, out, _ = run(capsys, "mesh", "generate", "--shape", "interval",
                           "--h", "0.5")
        assert code == 0
        assert out.splitlines()[0] == "dim 1"

    def test_lshape_generation(self, capsys, tmp_path):
        path = tmp_path / "lshape.txt"
        code, _, _ = run(capsys, "mesh", "generate", "--shape", "lshape",
                         "--h", "0.5", "--mu", "0.5", "--out", str(path))
        assert code == 0
        text = path.read_text()
        assert text.startswith("dim 2")


class TestStudyCommands:
    def test_compare_spaces_smoke(self, capsys, tmp_path):
        out_path = tmp_path / "spaces.csv"
        code, out, _ = run(capsys, "compare-spaces", "--p", "1",
                           "--nx", "4", "--nt", "4", "--T", "0.5",
                           "--out", str(out_path))
        assert code == 0
        assert out_path.read_text().splitlines()[0] == \
            "space,h,p,dofs,error,rate,seconds"

    def test_energy_smoke(self, capsys, tmp_path):
        out_path = tmp_path / "energy.csv"
        code, out, _ = run(capsys, "energy", "--p", "2", "--T", "1",
                           "--window", "1", "--out", str(out_path))
        assert code == 0
        assert out_path.read_text().splitlines()[0] == "t,p,E,relerr"

    def test_seed_study_smoke(self, capsys, tmp_path):
        out_path = tmp_path / "seeds.csv"
        code, out, _ = run(capsys, "seed-study", "--p", "1,2",
                           "--seed-kind", "monomial", "--out", str(out_path))
        assert code == 0
        assert out_path.read_text().splitlines()[0] == \
            "kind,p,dofs,cond,error,seconds"
