import json
from pathlib import Path

import numpy as np
import pytest

import sparsegrid as sg
from sparsegrid.cli import main

DATA = Path(__file__).parent / "data"


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestGenerate:
    def test_writes_imask(self, tmp_path, capsys):
        out = tmp_path / "p.imask"
        code, _, _ = run(capsys, "generate", "--type", "rand", "--dims", "16x16",
                         "--count", "64", "--seed", "1", "--out", str(out))
        assert code == 0
        pat = sg.parse(out.read_bytes())
        assert len(pat) == 64 and pat.dims == sg.GridDims(16, 16)

    def test_byte_identical_reruns(self, tmp_path, capsys):
        a, b = tmp_path / "a.imask", tmp_path / "b.imask"
        for out in (a, b):
            run(capsys, "generate", "--type", "gauss", "--dims", "20x20",
                "--count", "80", "--seed", "3", "--out", str(out))
        assert a.read_bytes() == b.read_bytes()

    def test_sobol_seed_warning(self, tmp_path, capsys):
        out = tmp_path / "s.imask"
        code, _, err = run(capsys, "generate", "--type", "sobol", "--dims", "8x8",
                           "--count", "10", "--seed", "5", "--out", str(out))
        assert code == 0
        assert "ignored" in err

    def test_generator_error_exit_code(self, tmp_path, capsys):
        code, _, err = run(capsys, "generate", "--type", "rand", "--dims", "4x4",
                           "--count", "17", "--out", str(tmp_path / "x.imask"))
        assert code == 3
        assert err

    def test_argument_error_exit_code(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["generate", "--type", "bogus", "--dims", "4x4",
                  "--count", "4", "--out", str(tmp_path / "x")])
        assert exc.value.code == 2


class TestEvaluate:
    def test_identical_images(self, capsys):
        img = str(DATA / "img00.pgm")
        code, out, _ = run(capsys, "evaluate", "--reference", img, "--candidate", img)
        assert code == 0
        assert out.strip() == "psnr_db=inf"

    def test_uniform_difference(self, tmp_path, capsys):
        a, b = tmp_path / "a.pgm", tmp_path / "b.pgm"
        sg.save_pgm(np.full((8, 8), 128.0), a)
        sg.save_pgm(np.full((8, 8), 129.0), b)
        code, out, _ = run(capsys, "evaluate", "--reference", str(a), "--candidate", str(b))
        assert code == 0
        assert out.strip() == "psnr_db=48.1308"

    def test_dims_mismatch_exit_2(self, tmp_path, capsys):
        a, b = tmp_path / "a.pgm", tmp_path / "b.pgm"
        sg.save_pgm(np.zeros((4, 4)), a)
        sg.save_pgm(np.zeros((4, 5)), b)
        code, _, err = run(capsys, "evaluate", "--reference", str(a), "--candidate", str(b))
        assert code == 2
        assert err


class TestSampleReconstruct:
    def test_pipeline(self, tmp_path, capsys):
        imask = tmp_path / "p.imask"
        run(capsys, "generate", "--type", "gauss", "--dims", "64x64",
            "--count", "2048", "--seed", "1", "--out", str(imask))
        img = tmp_path / "img.pgm"
        rng = np.random.default_rng(0)
        sg.save_pgm(np.floor(rng.random((64, 64)) * 256), img)
        masked = tmp_path / "masked.pgm"
        maskimg = tmp_path / "mask.pgm"
        code, _, _ = run(capsys, "sample", "--image", str(img), "--pattern", str(imask),
                         "--density", "0.3", "--out", str(masked), "--out-mask", str(maskimg))
        assert code == 0
        bitmap = sg.load_pgm(maskimg)
        assert (bitmap == 255).sum() == sg.density_to_count(0.3, sg.GridDims(64, 64))
        rec = tmp_path / "rec.pgm"
        code, _, _ = run(capsys, "reconstruct", "--image", str(img), "--pattern", str(imask),
                         "--density", "0.3", "--method", "lin", "--out", str(rec))
        assert code == 0
        assert sg.load_pgm(rec).shape == (64, 64)

    def test_fsr_config_file(self, tmp_path, capsys):
        cfg = tmp_path / "fsr.cfg"
        cfg.write_text("iterations = 10\nrho = 0.75\n")
        imask = tmp_path / "p.imask"
        run(capsys, "generate", "--type", "rand", "--dims", "32x32",
            "--count", "512", "--seed", "2", "--out", str(imask))
        img = tmp_path / "img.pgm"
        sg.save_pgm(np.full((32, 32), 50.0), img)
        rec = tmp_path / "rec.pgm"
        code, _, _ = run(capsys, "reconstruct", "--image", str(img), "--pattern", str(imask),
                         "--density", "0.5", "--method", "fsr", "--fsr-config", str(cfg),
                         "--out", str(rec))
        assert code == 0


class TestDiscrepancyOptimize:
    def test_discrepancy_output(self, tmp_path, capsys):
        imask = tmp_path / "p.imask"
        run(capsys, "generate", "--type", "sobol", "--dims", "32x32",
            "--count", "200", "--out", str(imask))
        code, out, _ = run(capsys, "discrepancy", "--pattern", str(imask),
                           "--density", "0.1", "--rects", "2000", "--seed", "1")
        assert code == 0
        assert "sup_estimate=" in out and "mean_abs_deviation=" in out

    def test_optimize_roundtrip(self, tmp_path, capsys):
        imask = tmp_path / "p.imask"
        run(capsys, "generate", "--type", "rand", "--dims", "40x40",
            "--count", "200", "--seed", "1", "--out", str(imask))
        out_mask = tmp_path / "opt.imask"
        code, out, _ = run(capsys, "optimize", "--pattern", str(imask), "--density", "0.1",
                           "--steps", "300", "--rects", "200", "--seed", "1",
                           "--out", str(out_mask))
        assert code == 0
        assert "not incremental" in out
        assert len(sg.parse(out_mask.read_bytes())) == 160


class TestSweep:
    def _tiny_dataset(self, tmp_path):
        ds = tmp_path / "ds"
        ds.mkdir()
        rng = np.random.default_rng(0)
        base = np.floor(rng.random((48, 48)) * 256)
        for i in range(2):
            sg.save_pgm(np.roll(base, i * 7, axis=0), ds / f"{i:02d}.pgm")
        return ds

    def test_outputs_and_manifest_rerun(self, tmp_path, capsys):
        ds = self._tiny_dataset(tmp_path)
        out1 = tmp_path / "out1"
        code, _, _ = run(capsys, "sweep", "--dataset", str(ds), "--out", str(out1),
                         "--patterns", "rand,gauss", "--seeds", "1,2",
                         "--densities", "0.1,0.3", "--reconstructors", "lin",
                         "--images", "2")
        assert code == 0
        csv1 = (out1 / "sweep.csv").read_bytes()
        header = csv1.decode().splitlines()[0]
        assert header == "pattern,reconstructor,density,mean_psnr_db,per_seed_psnr_db,images_used"
        assert (out1 / "sweep_lin.svg").exists()
        manifest = json.loads((out1 / "manifest.json").read_text())
        assert manifest["config"]["seeds"] == [1, 2]
        # rerun from the manifest: byte-identical CSV
        out2 = tmp_path / "out2"
        code, _, _ = run(capsys, "sweep", "--from-manifest", str(out1 / "manifest.json"),
                         "--out", str(out2))
        assert code == 0
        assert (out2 / "sweep.csv").read_bytes() == csv1

    def test_row_count(self, tmp_path, capsys):
        ds = self._tiny_dataset(tmp_path)
        out = tmp_path / "o"
        run(capsys, "sweep", "--dataset", str(ds), "--out", str(out),
            "--patterns", "rand,sobol", "--seeds", "1", "--densities", "0.1,0.2,0.3",
            "--reconstructors", "lin", "--images", "1")
        rows = (out / "sweep.csv").read_text().strip().splitlines()
        assert len(rows) == 1 + 2 * 1 * 3  # header + patterns x reconstructors x densities

    def test_missing_dataset_exit_4(self, tmp_path, capsys):
        code, _, err = run(capsys, "sweep", "--dataset", str(tmp_path / "nope"),
                           "--out", str(tmp_path / "o"))
        assert code == 4
        assert err
