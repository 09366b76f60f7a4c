"""Command-line interface, exercised through its public entry point."""

import json

import numpy as np
import pytest

from nnsb.bundle import load_bundle
from nnsb.cli import main
from nnsb.engine import ToyConfig, train_toy


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """A small trained model saved as npz + arch json, plus its dataset."""
    root = tmp_path_factory.mktemp("cli")
    model, heldout = train_toy(ToyConfig(samples=400, hidden=24, epochs=80, seed=2))
    np.savez(root / "weights.npz", **model.arrays)
    arch = {
        "layers": [
            {"kind": "dense", "weights": "fc1.w", "bias": "fc1.b"},
            {"kind": "activation", "fn": "relu"},
            {"kind": "dense", "weights": "fc2.w", "bias": "fc2.b"},
            {"kind": "softmax"},
        ],
        "metadata": {"origin": "cli-test"},
    }
    (root / "arch.json").write_text(json.dumps(arch))
    from nnsb.bundle import save_dataset

    save_dataset(heldout, root / "data.bin")
    return root


def run(args):
    return main([str(a) for a in args])


class TestQuantizeInfoEval:
    def test_quantize_writes_loadable_bundle(self, workdir, capsys):
        out = workdir / "m.nnsb"
        assert run(["quantize", "--weights", workdir / "weights.npz",
                    "--arch", workdir / "arch.json", "--codec", "hamming",
                    "--q", "16", "-o", out]) == 0
        bundle = load_bundle(out)
        assert len(bundle.layers) == 4
        assert bundle.metadata["codec"] == "hamming"
        assert "wrote" in capsys.readouterr().out

    def test_parity_flag(self, workdir):
        out = workdir / "mp.nnsb"
        run(["quantize", "--weights", workdir / "weights.npz",
             "--arch", workdir / "arch.json", "--parity", "-o", out])
        bundle = load_bundle(out)
        assert all(t.spec.parity for t in bundle.tensors.values())
        assert all(t.grid.q == 15 for t in bundle.tensors.values())

    def test_info_lists_layers_and_tensors(self, workdir, capsys):
        out = workdir / "m.nnsb"
        run(["info", out])
        text = capsys.readouterr().out
        assert "NNSB v1" in text
        assert "fc1.w" in text and "hamming" in text
        assert "origin = cli-test" in text

    def test_eval_prints_accuracy(self, workdir, capsys):
        assert run(["eval", "--bundle", workdir / "m.nnsb",
                    "--data", workdir / "data.bin"]) == 0
        text = capsys.readouterr().out
        acc = float(text.split("accuracy: ")[1].split(" ")[0])
        assert 0.9 <= acc <= 1.0


class TestCorrupt:
    def test_rber_zero_identity(self, workdir):
        src = workdir / "m.nnsb"
        dst = workdir / "m0.nnsb"
        run(["corrupt", "--rber", "0", "--seed", "5", src, dst])
        assert dst.read_bytes() == src.read_bytes()

    def test_deterministic(self, workdir):
        src = workdir / "m.nnsb"
        a, b = workdir / "a.nnsb", workdir / "b.nnsb"
        run(["corrupt", "--rber", "0.02", "--seed", "5", "--trial", "3", src, a])
        run(["corrupt", "--rber", "0.02", "--seed", "5", "--trial", "3", src, b])
        assert a.read_bytes() == b.read_bytes()
        assert a.read_bytes() != src.read_bytes()

    def test_tensor_filter(self, workdir):
        src = workdir / "m.nnsb"
        dst = workdir / "mf.nnsb"
        run(["corrupt", "--rber", "0.5", "--seed", "1", "--tensors", "fc2.b", src, dst])
        orig, out = load_bundle(src), load_bundle(dst)
        assert np.array_equal(out.tensors["fc1.w"].packed, orig.tensors["fc1.w"].packed)
        assert not np.array_equal(out.tensors["fc2.b"].packed, orig.tensors["fc2.b"].packed)


class TestSweep:
    def test_writes_csv_and_json(self, workdir, capsys):
        out = workdir / "sweep.csv"
        assert run(["sweep", "--bundle", workdir / "m.nnsb", "--data", workdir / "data.bin",
                    "--rber-grid", "0,0.01,0.05", "--trials", "3", "--seed", "9",
                    "--out", out]) == 0
        assert "baseline accuracy" in capsys.readouterr().out
        text = out.read_text()
        assert text.startswith("rber,trial,accuracy,flips\n")
        doc = json.loads((workdir / "sweep.json").read_text())
        assert doc["config"]["rber_grid"] == [0.0, 0.01, 0.05]
        assert len(doc["points"][0]["accuracies"]) == 3

    def test_parity_compare_writes_second_pair(self, workdir, capsys):
        out = workdir / "cmp.csv"
        run(["sweep", "--bundle", workdir / "m.nnsb", "--data", workdir / "data.bin",
             "--rber-grid", "0,0.02", "--trials", "2", "--seed", "9",
             "--parity-compare", "--out", out])
        assert (workdir / "cmp.parity.csv").exists()
        assert (workdir / "cmp.parity.json").exists()
        assert "parity variant" in capsys.readouterr().out


class TestDistortion:
    def test_known_exact_values(self, capsys):
        assert run(["distortion", "--codec", "binary,gray", "--q", "2",
                    "--k", "1", "--mode", "max"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0].startswith("codec,q,k,mode")
        rows = {ln.split(",")[0]: ln.split(",") for ln in lines[1:]}
        assert (rows["binary"][4], rows["binary"][5]) == ("1", "2")
        assert (rows["gray"][4], rows["gray"][5]) == ("3", "4")

    def test_sampled_mode_recorded(self, workdir):
        out = workdir / "d.csv"
        run(["distortion", "--codec", "hamming", "--q", "10", "--k", "1",
             "--samples", "500", "--seed", "3", "-o", out])
        rows = out.read_text().strip().splitlines()[1:]
        assert all(row.split(",")[7] == "sampled" for row in rows)
        assert all(row.split(",")[8] == "500" for row in rows)

    def test_shell_neighborhood_flag(self, capsys):
        # q=2 radius-2 shell: the only neighbor is the complement word
        run(["distortion", "--codec", "binary", "--q", "2", "--k", "2",
             "--mode", "ave", "--shell"])
        row = capsys.readouterr().out.strip().splitlines()[1].split(",")
        assert (row[4], row[5]) == ("1", "2")
