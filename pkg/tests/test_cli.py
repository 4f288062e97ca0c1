import math
import subprocess
import sys

import numpy as np
import pytest

from palmlmdp import dataset_io as dio
from palmlmdp.cli import main


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    assert main(["synth", "--dataset", str(out), "--identities", "5", "--samples", "2",
                 "--seed", "3"]) == 0
    return out


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_bank_defaults(tmp_path, capsys):
    code, out, _ = run(capsys, "bank", "--out", tmp_path)
    assert code == 0
    files = sorted(tmp_path.glob("kernel_*.csv"))
    assert len(files) == 12
    k = np.loadtxt(files[0], delimiter=",")
    assert k.shape == (35, 35)
    assert abs(k.sum()) < 1e-9


def test_bank_options(tmp_path, capsys):
    code, _, _ = run(capsys, "bank", "--orientations", "6", "--size", "9", "--no-normalize",
                     "--out", tmp_path)
    assert code == 0
    files = sorted(tmp_path.glob("kernel_*.csv"))
    assert len(files) == 6
    assert np.loadtxt(files[0], delimiter=",")[4, 4] == pytest.approx(1 / (2 * math.pi * 5.6179 ** 2))


def test_bank_bad_sigma(tmp_path, capsys):
    code, _, err = run(capsys, "bank", "--sigma", "0", "--out", tmp_path)
    assert code == 1
    assert "sigma" in err


@pytest.mark.parametrize("method, bins", [("lmdp", 156), ("lbp", 10), ("lldp", 156),
                                          ("ldp", 256), ("eldp", 64), ("ldn", 64)])
def test_extract_methods(synth_dir, tmp_path, capsys, method, bins):
    out = tmp_path / "d.bin"
    code, _, err = run(capsys, "extract", synth_dir, "--out", out, "--method", method)
    assert code == 0
    assert "[10/10]" in err
    recs = dio.read_descriptors(out)
    assert len(recs) == 10
    assert all(r.method == method and r.n_blocks == 64 and r.bins_per_block == bins for r in recs)
    assert all(r.counts.size == 64 * bins for r in recs)
    assert recs[0].identity == "id000_00"


def test_extract_jobs_identical(synth_dir, tmp_path, capsys):
    a, b = tmp_path / "a.bin", tmp_path / "b.bin"
    assert run(capsys, "extract", synth_dir, "--out", a)[0] == 0
    assert run(capsys, "extract", synth_dir, "--out", b, "--jobs", "3")[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_extract_empty(tmp_path, capsys):
    code, _, err = run(capsys, "extract", tmp_path, "--out", tmp_path / "x.bin")
    assert code == 1 and "no <palm_id>" in err


def test_extract_bad_file_named(tmp_path, capsys):
    (tmp_path / "a_1.pgm").write_bytes(b"P5 4 4 255\n" + bytes(3))
    code, _, err = run(capsys, "extract", tmp_path, "--out", tmp_path / "x.bin")
    assert code == 1 and "a_1.pgm" in err


def test_match_and_eval(synth_dir, tmp_path, capsys):
    lmdp = tmp_path / "lmdp.bin"
    lbp = tmp_path / "lbp.bin"
    run(capsys, "extract", synth_dir, "--out", lmdp)
    run(capsys, "extract", synth_dir, "--out", lbp, "--method", "lbp")

    code, out, _ = run(capsys, "match", lmdp, lmdp)
    assert code == 0 and float(out) == 0.0
    _, same, _ = run(capsys, "match", lmdp, lmdp, "--id-a", "id001_00", "--id-b", "id001_01")
    _, diff, _ = run(capsys, "match", lmdp, lmdp, "--id-a", "id001_00", "--id-b", "id002_01")
    assert float(same) < float(diff)
    code, _, err = run(capsys, "match", lmdp, lbp)
    assert code == 1 and "cannot compare" in err

    roc = tmp_path / "roc.csv"
    code, out, _ = run(capsys, "eval-verify", lmdp, "--roc", roc)
    kv = dict(line.split("=", 1) for line in out.splitlines())
    assert code == 0
    assert float(kv["eer"]) == 0.0
    assert kv["genuine_trials"] == "5" and kv["impostor_trials"] == "40"
    assert kv["config.method"] == "lmdp"
    assert roc.read_text().startswith("threshold,far,frr\n")

    code, out, _ = run(capsys, "eval-identify", lmdp, "--train-k", "1")
    kv = dict(line.split("=", 1) for line in out.splitlines())
    assert code == 0
    assert float(kv["rank1.k1"]) == 1.0 and kv["queries.k1"] == "5"
    # default k = 1,2,3 needs more than 3 samples per identity
    code, _, err = run(capsys, "eval-identify", lmdp)
    assert code == 1 and "more than 2" in err


def test_dpn_stats(tmp_path, capsys):
    dio.write_pgm(tmp_path / "flat_1.pgm", np.full((32, 32), 80.0))
    out = tmp_path / "dpn.csv"
    code, _, _ = run(capsys, "dpn-stats", tmp_path, "--out", out)
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "image,pct_dpn1,pct_dpn2,pct_dpn3plus,pct_dpn0,pixels"
    assert lines[-1] == "ALL,0.0000,0.0000,0.0000,100.0000,1024"


def test_synth_single(tmp_path, capsys):
    out = tmp_path / "x.pgm"
    code, _, _ = run(capsys, "synth", "--angles", "60,150", "--noise", "2", "--seed", "5",
                     "--out", out)
    assert code == 0
    img = dio.load_pgm(out)
    assert (img.width, img.height) == (128, 128)
    truth = out.with_suffix(".txt").read_text()
    assert "seed=5" in truth and "degrees=60.0000" in truth and "degrees=150.0000" in truth
    first = out.read_bytes()
    run(capsys, "synth", "--angles", "60,150", "--noise", "2", "--seed", "5", "--out", out)
    assert out.read_bytes() == first


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "palmlmdp", "--help"], capture_output=True,
                          text=True)
    assert proc.returncode == 0 and "eval-verify" in proc.stdout


def test_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["extract"])
    assert exc.value.code == 2
