"""File formats and the command-line front end.

Runs the CLI in-process through main(argv).  Exit code contract: 0 for
success, 1 for malformed inputs (with a path:line: diagnostic), 2 when a
certificate fails its re-validation.
"""

import math
import os

import pytest

from dirachains.chains import DipoleChain, PointedChain, pair
from dirachains.cli import main
from dirachains.exterior import KVector
from dirachains.fileio import (
    ParseError,
    format_chain,
    format_form,
    load_cell,
    load_chain,
    load_form,
    write_atomic,
)
from dirachains.forms import FormSpec


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def run_cli(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
        if isinstance(code, str):
            code = 1
    out = capsys.readouterr()
    return code if code is not None else 0, out.out, out.err


class TestChainFiles:
    def test_pointed_roundtrip_bitwise(self, tmp_path):
        chain = PointedChain(
            2, 1,
            [((0.1, -0.3), KVector(2, 1, (1.0, 0.5))),
             ((1 / 3, 2 / 7), KVector(2, 1, (-0.25, 1e-17)))],
        )
        path = write(tmp_path, "a.chain", format_chain(chain))
        assert load_chain(path).terms == chain.terms

    def test_dipole_roundtrip_bitwise(self, tmp_path):
        chain = DipoleChain(
            2, 0,
            [((0.0, 0.0), KVector.scalar(2, 3.0), ((1.0, 2.0), (0.5, -0.5)))],
        )
        path = write(tmp_path, "d.chain", format_chain(chain))
        loaded = load_chain(path)
        assert isinstance(loaded, DipoleChain)
        assert loaded.terms == chain.terms

    def test_comments_and_blanks_skipped(self, tmp_path):
        path = write(
            tmp_path, "c.chain",
            "# demo chain\n\n1 1\n0.0 | 1.0 |  # the unit tangent\n",
        )
        chain = load_chain(path)
        assert chain.terms == (((0.0,), KVector(1, 1, (1.0,))),)

    def test_empty_dirs_field_is_pointed(self, tmp_path):
        path = write(tmp_path, "p.chain", "1 0\n0.5 | 2.0\n")
        assert isinstance(load_chain(path), PointedChain)

    @pytest.mark.parametrize(
        "text,line,fragment",
        [
            ("", 1, "empty chain"),
            ("2 x\n", 1, "integer header"),
            ("2 3\n", 1, "invalid dimensions"),
            ("2 1\n0 0 | 1.0 |\n", 2, "expected 2"),
            ("2 1\n0 | 1.0 0.0 |\n", 2, "coordinates"),
            ("2 1\n0 0 | 1.0 0.0 | 1\n", 2, "direction"),
            ("1 1\n0 | nan |\n", 2, "finite"),
            ("1 1\nx | 1.0 |\n", 2, "bad point"),
            ("1 0\n0 | 1 | 1; 1; 1; 1; 1\n", 1, "order"),
        ],
    )
    def test_malformed_chain(self, tmp_path, text, line, fragment):
        path = write(tmp_path, "bad.chain", text)
        with pytest.raises(ParseError) as err:
            load_chain(path)
        assert err.value.line == line
        assert fragment in str(err.value)
        assert f"{path}:{line}:" in str(err.value)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError, match="cannot read"):
            load_chain(str(tmp_path / "nope.chain"))


class TestFormFiles:
    def test_trig_phase_tokens(self, tmp_path):
        path = write(
            tmp_path, "w.form",
            "1 1\ntrig 1.0 2.0 sin 1\ntrig 0.5 2.0 cos 1\ntrig 0.25 2.0 0.7 1\n",
        )
        w = load_form(path)
        # same frequency and covector: atoms merge into one
        assert len(w.trig_atoms) == 1

    def test_roundtrip_bitwise(self, tmp_path):
        w = (
            FormSpec.trig(2, 0.3, (1.5, -0.5), 0.25, (1,))
            + FormSpec.poly(2, 2.0, (1, 0), (0,))
        )
        path = write(tmp_path, "w.form", format_form(w))
        loaded = load_form(path)
        assert loaded.trig_atoms == w.trig_atoms
        assert loaded.poly_atoms == w.poly_atoms

    def test_zero_form(self, tmp_path):
        path = write(tmp_path, "z.form", "2 1\n")
        w = load_form(path)
        assert w.trig_atoms == () and w.poly_atoms == ()

    @pytest.mark.parametrize(
        "text,line,fragment",
        [
            ("", 1, "empty form"),
            ("2 1\nwave 1.0 0 0 0 1\n", 2, "unknown atom kind"),
            ("2 1\ntrig 1.0 0 0 0\n", 2, "tokens"),
            ("2 1\ntrig 1.0 0 0 tan 1\n", 2, "bad phase"),
            ("2 1\ntrig 1.0 0 0 0 3\n", 2, "indices"),
            ("2 2\ntrig 1.0 0 0 0 2 1\n", 2, "increasing"),
            ("2 1\npoly 1.0 -1 0 1\n", 2, "nonnegative"),
            ("2 1\npoly 1.0 0.5 0 1\n", 2, "integers"),
        ],
    )
    def test_malformed_form(self, tmp_path, text, line, fragment):
        path = write(tmp_path, "bad.form", text)
        with pytest.raises(ParseError) as err:
            load_form(path)
        assert err.value.line == line
        assert fragment in str(err.value)


class TestCellFiles:
    def test_segment(self, tmp_path):
        path = write(tmp_path, "s.cell", "segment\n0 0\n1 1\n")
        cell = load_cell(path)
        assert cell.kind == "segment" and cell.vertices == ((0.0, 0.0), (1.0, 1.0))

    def test_box_with_orientation(self, tmp_path):
        path = write(tmp_path, "b.cell", "box\n0 0\n1 0\n0 1\norientation -1\n")
        cell = load_cell(path)
        assert cell.kind == "box" and cell.orientation == -1
        assert cell.edges == ((1.0, 0.0), (0.0, 1.0))

    def test_triangle(self, tmp_path):
        path = write(tmp_path, "t.cell", "simplex\n0 0\n1 0\n0 1\n")
        assert load_cell(path).dim == 2

    def test_curve(self, tmp_path):
        rows = "\n".join(f"{t} {t * t}" for t in (0.0, 0.5, 1.0))
        path = write(tmp_path, "c.cell", f"curve\n{rows}\n")
        assert load_cell(path).kind == "curve"

    @pytest.mark.parametrize(
        "text,fragment",
        [
            ("", "empty cell"),
            ("blob\n0 0\n", "unknown cell kind"),
            ("segment\n0 0\n", "2 rows"),
            ("segment\n0 0\n0 0\n", "degenerate"),
            ("segment\n0 0\n1\n", "coordinates"),
            ("box\n0 0\n", "edge row"),
            ("segment\n0\n1\norientation 2\n", "orientation"),
        ],
    )
    def test_malformed_cell(self, tmp_path, text, fragment):
        path = write(tmp_path, "bad.cell", text)
        with pytest.raises(ParseError, match=fragment):
            load_cell(path)


class TestAtomicWrite:
    def test_writes_and_replaces(self, tmp_path):
        path = str(tmp_path / "out.csv")
        write_atomic(path, "a\n")
        write_atomic(path, "b\n")
        with open(path) as fh:
            assert fh.read() == "b\n"
        assert [f for f in os.listdir(tmp_path) if f.endswith(".tmp")] == []


@pytest.fixture
def dipole_chain_file(tmp_path):
    return write(tmp_path, "dipole01.chain", "1 0\n0.1 | 1.0 |\n0.0 | -1.0 |\n")


@pytest.fixture
def point_chain_file(tmp_path):
    return write(tmp_path, "pt.chain", "1 1\n0.0 | 1.0 |\n")


@pytest.fixture
def dx1_form_file(tmp_path):
    return write(tmp_path, "dx1.form", "1 1\ntrig 1.0 0 cos 1\n")


@pytest.fixture
def square_cell_file(tmp_path):
    return write(tmp_path, "square.cell", "box\n0 0\n1 0\n0 1\n")


class TestCliPair:
    def test_dual_basis_prints_one(self, point_chain_file, dx1_form_file, capsys):
        # [TRIVIAL] dual basis pairing
        code, out, _ = run_cli(
            ["pair", "--chain", point_chain_file, "--form", dx1_form_file], capsys
        )
        assert code == 0
        assert out.strip() == "1.0"

    def test_csv_output(self, point_chain_file, dx1_form_file, tmp_path, capsys):
        out_path = str(tmp_path / "pair.csv")
        code, _, _ = run_cli(
            ["pair", "--chain", point_chain_file, "--form", dx1_form_file,
             "--out", out_path],
            capsys,
        )
        assert code == 0
        assert open(out_path).read() == "quantity,value\npair,1\n"

    def test_grade_mismatch_exit_1(self, dipole_chain_file, dx1_form_file, capsys):
        code, _, err = run_cli(
            ["pair", "--chain", dipole_chain_file, "--form", dx1_form_file], capsys
        )
        assert code == 1
        assert "mismatch" in err


class TestCliNorm:
    def test_sandwich_table(self, dipole_chain_file, tmp_path, capsys):
        # [DERIVED] two-point difference at scale 0.1: upper bound at
        # order 1 is exactly 0.1, the best sine witness reaches ~0.09996
        out_path = str(tmp_path / "norm.csv")
        code, out, _ = run_cli(
            ["norm", "--chain", dipole_chain_file, "-r", "1", "--out", out_path],
            capsys,
        )
        assert code == 0
        lines = open(out_path).read().splitlines()
        assert lines[0] == "r,lower,upper,gap"
        r1 = lines[2].split(",")
        assert float(r1[2]) == 0.1
        assert 0.098 <= float(r1[1]) <= 0.1

    def test_certificates_dumped_and_reloadable(
        self, dipole_chain_file, tmp_path, capsys
    ):
        out_path = str(tmp_path / "norm.csv")
        run_cli(
            ["norm", "--chain", dipole_chain_file, "-r", "1", "--out", out_path],
            capsys,
        )
        witness = load_form(out_path + ".lower.form")
        chain = load_chain(dipole_chain_file)
        from dirachains.forms import cr_bound

        bound = cr_bound(witness, 1)
        assert pair(chain, witness) / bound >= 0.098
        cells_text = open(out_path + ".upper.cells").read()
        assert cells_text.startswith("1 0 1\n")

    def test_validation_failure_exits_2(
        self, dipole_chain_file, capsys, monkeypatch
    ):
        import dirachains.cli as cli_mod

        monkeypatch.setattr(
            cli_mod, "check_lower_certificate", lambda *a, **k: False
        )
        code, _, err = run_cli(
            ["norm", "--chain", dipole_chain_file, "-r", "0"], capsys
        )
        assert code == 2
        assert "validation failed" in err


class TestCliNatural:
    def test_plateau_summary(self, dipole_chain_file, tmp_path, capsys):
        out_path = str(tmp_path / "nat.csv")
        code, out, _ = run_cli(
            ["natural", "--chain", dipole_chain_file, "--rmax", "3",
             "--out", out_path],
            capsys,
        )
        assert code == 0
        assert "plateau at r=" in out
        assert "monotone" in out
        rows = open(out_path).read().splitlines()
        assert len(rows) == 5  # header + r=0..3


class TestCliOracle:
    def test_dipole_value(self, dipole_chain_file, capsys):
        code, out, _ = run_cli(
            ["oracle", "--chain", dipole_chain_file, "-r", "1", "--grid=-1,1,81"],
            capsys,
        )
        assert code == 0
        assert 0.09 <= float(out.strip()) <= 0.11

    def test_bad_grid_flag(self, dipole_chain_file, capsys):
        code, _, _ = run_cli(
            ["oracle", "--chain", dipole_chain_file, "--grid=1,2", "-r", "0"],
            capsys,
        )
        assert code == 1

    def test_off_grid_point_rejected(self, tmp_path, capsys):
        path = write(tmp_path, "off.chain", "1 0\n0.123456 | 1.0 |\n")
        code, _, err = run_cli(
            ["oracle", "--chain", path, "-r", "0", "--grid=-1,1,11"], capsys
        )
        assert code == 1
        assert "off-grid" in err


class TestCliStokes:
    def test_green_exact(self, square_cell_file, tmp_path, capsys):
        # [DERIVED] x1 dx2 on the unit square: midpoint rule is exact on
        # both sides, so every residual is 0
        form = write(tmp_path, "xdy.form", "2 1\npoly 1.0 1 0 2\n")
        out_path = str(tmp_path / "st.csv")
        code, _, _ = run_cli(
            ["stokes", "--cell", square_cell_file, "--form", form,
             "--m", "4,8,16", "--out", out_path],
            capsys,
        )
        assert code == 0
        rows = open(out_path).read().splitlines()[1:]
        assert [float(r.split(",")[1]) for r in rows] == [0.0, 0.0, 0.0]

    def test_trig_residual_decreases(self, square_cell_file, tmp_path, capsys):
        form = write(tmp_path, "wt.form", "2 1\ntrig 1.0 1.3 0.7 0.2 2\n")
        out_path = str(tmp_path / "st.csv")
        code, out, _ = run_cli(
            ["stokes", "--cell", square_cell_file, "--form", form,
             "--m", "4,8,16", "--out", out_path],
            capsys,
        )
        assert code == 0
        vals = [float(r.split(",")[1]) for r in open(out_path).read().splitlines()[1:]]
        assert vals[0] > vals[1] > vals[2] > 0.0
        assert "slope" in out


class TestCliCauchy:
    def test_segment_slope(self, tmp_path, capsys):
        cell = write(tmp_path, "seg.cell", "segment\n0\n1\n")
        out_path = str(tmp_path / "cy.csv")
        code, out, _ = run_cli(
            ["cauchy", "--cell", cell, "-r", "1", "--m", "4,8,16",
             "--out", out_path],
            capsys,
        )
        assert code == 0
        vals = [float(r.split(",")[1]) for r in open(out_path).read().splitlines()[1:]]
        assert vals == pytest.approx([1 / 16, 1 / 32, 1 / 64], rel=1e-9)
        assert "slope: -1" in out


class TestCliDipoleCheck:
    def test_passes_and_reports(self, tmp_path, capsys):
        out_path = str(tmp_path / "dc.csv")
        code, out, _ = run_cli(
            ["dipole-check", "--seed", "11", "--trials", "30", "--out", out_path],
            capsys,
        )
        assert code == 0
        assert "max |pairing mismatch|" in out
        assert len(open(out_path).read().splitlines()) == 31

    def test_determinism_byte_identical(self, tmp_path, capsys):
        a = str(tmp_path / "a.csv")
        b = str(tmp_path / "b.csv")
        run_cli(["dipole-check", "--seed", "5", "--trials", "20", "--out", a], capsys)
        run_cli(["dipole-check", "--seed", "5", "--trials", "20", "--out", b], capsys)
        assert open(a, "rb").read() == open(b, "rb").read()

    def test_seed_changes_data(self, tmp_path, capsys):
        a = str(tmp_path / "a.csv")
        b = str(tmp_path / "b.csv")
        run_cli(["dipole-check", "--seed", "1", "--trials", "20", "--out", a], capsys)
        run_cli(["dipole-check", "--seed", "2", "--trials", "20", "--out", b], capsys)
        assert open(a).read() != open(b).read()


class TestCliErrors:
    def test_malformed_chain_diagnostic(self, tmp_path, dx1_form_file, capsys):
        path = write(tmp_path, "bad.chain", "1 1\n0.0 | 1.0 2.0 |\n")
        code, _, err = run_cli(
            ["pair", "--chain", path, "--form", dx1_form_file], capsys
        )
        assert code == 1
        assert f"{path}:2:" in err

    def test_norm_determinism(self, dipole_chain_file, tmp_path, capsys):
        a = str(tmp_path / "a.csv")
        b = str(tmp_path / "b.csv")
        run_cli(["norm", "--chain", dipole_chain_file, "-r", "1", "--out", a], capsys)
        run_cli(["norm", "--chain", dipole_chain_file, "-r", "1", "--out", b], capsys)
        assert open(a, "rb").read() == open(b, "rb").read()
