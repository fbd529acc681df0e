import io

import pytest

from brickstress.cli import UsageError, build_config, main
from brickstress.verification import dump_element

from test_verification import corrupt_extra


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


class TestSolve:
    def test_single_cell_counts(self):
        code, text = run("solve", "--n", "1,1,1")
        assert code == 0
        assert "stress dofs: 78, displacement dofs: 12" in text

    def test_two_cells_zero_load(self):
        code, text = run("solve", "--n", "2,1,1", "--recipe", "zero")
        assert code == 0
        assert "stress dofs: 140" in text
        assert "|sigma_h|_0 = 0.000000e+00, |u_h|_0 = 0.000000e+00" in text

    def test_rigid_and_outputs(self, tmp_path):
        vtk, dump = tmp_path / "s.vtk", tmp_path / "sys.txt"
        code, text = run("solve", "--variant", "rigid", "--n", "2", "--vtk", str(vtk), "--system-dump", str(dump))
        assert code == 0 and "stress dofs: 396, displacement dofs: 48" in text
        assert vtk.read_text().startswith("# vtk DataFile Version 3.0")
        assert dump.read_text().startswith("# saddle system 444 x 444")

    def test_usage_errors(self):
        assert run("solve", "--variant", "mixed")[0] == 2
        assert run("solve", "--domain", "0,0,0,2,1,1")[0] == 2
        assert run("solve", "--quad-order", "3")[0] == 2
        assert run("solve", "--nu", "0.5")[0] == 2
        assert run("bogus")[0] == 2


class TestConfig:
    def test_flags_override_file(self, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text("# sweep\nvariant = rigid\nn = 2,1,1\nE = 2\n")
        cfg = build_config("solve", {"config": str(cfg_file), "variant": "full"})
        assert cfg.variant == "full" and cfg.n == (2, 1, 1) and cfg.material[1] == 2

    def test_unknown_key(self, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text("colour = blue\n")
        with pytest.raises(UsageError):
            build_config("solve", {"config": str(cfg_file)})

    def test_lame_pair(self):
        cfg = build_config("solve", {"lam": "1", "mu": "2"})
        assert cfg.material_model().mu == 2
        with pytest.raises(UsageError):
            build_config("solve", {"lam": "1"})


class TestVerify:
    def test_default_passes(self):
        code, text = run("verify")
        assert code == 0 and "7/7 checks passed" in text

    def test_rigid(self):
        code, text = run("verify", "--variant", "rigid")
        assert code == 0 and "[PASS] unisolvency 72x72 (conforming-rigid)" in text

    def test_corrupted_element_file(self, full_element, tmp_path):
        path = tmp_path / "el.txt"
        dump_element(full_element, path)
        corrupt_extra(path)
        code, text = run("verify", "--element-file", str(path))
        assert code == 1
        assert "[FAIL] divergence-free generators" in text
        assert "counterexample for divergence-free generators" in text


class TestConvergence:
    def test_single_level_is_usage_error(self):
        assert run("convergence", "--levels", "2")[0] == 2
        assert run("convergence", "--levels", "2,4,6")[0] == 2

    def test_rigid_csv(self, tmp_path):
        csv = tmp_path / "r.csv"
        code, text = run("convergence", "--variant", "rigid", "--recipe", "polynomial-bubble", "--levels", "1,2,4", "--csv", str(csv))
        rows = csv.read_text().splitlines()
        assert rows[0] == "h,e_sigma,e_u,e_div,rate_sigma,rate_u,rate_div"
        assert len(rows) == 4
        assert code in (0, 1)
        assert "divergence identity defect" in text

    def test_rate_floor_failure(self):
        code, text = run("convergence", "--recipe", "polynomial-bubble", "--levels", "1,2,4", "--rate-floor", "5")
        assert code == 1 and "below floor" in text
