import hashlib
import zipfile

import numpy as np
import pytest

from wsptm.checkpoint import check_vocabulary, load_checkpoint, save_checkpoint
from wsptm.corpus import Vocabulary
from wsptm.exceptions import CheckpointError
from wsptm.inference import ModelState


@pytest.fixture
def state():
    rng = np.random.default_rng(0)
    return ModelState(rng.dirichlet(np.ones(3), 4), rng.dirichlet(np.ones(2), 4), rng.dirichlet(np.ones(5), 3),
                      rng.dirichlet(np.ones(5), 2), rng.random((5, 3)), rng.random(5))


class TestCheckpoint:
    def test_round_trip(self, tmp_path, state):
        path = tmp_path / "m.npz"
        alpha = np.full((4, 3), 0.5)
        save_checkpoint(path, state, {"eta": 10.0}, "abc", alpha)
        meta, loaded, alpha_loaded = load_checkpoint(path)
        assert meta["config"] == {"eta": 10.0} and meta["shape"]["G"] == 2
        for name in ("theta", "theta_hat", "phi", "phi_hat", "gamma", "pi"):
            np.testing.assert_array_equal(getattr(loaded, name), getattr(state, name))
        np.testing.assert_array_equal(alpha_loaded, alpha)

    def test_byte_identical(self, tmp_path, state):
        digests = []
        for name in ("a.npz", "b.npz"):
            save_checkpoint(tmp_path / name, state, {"x": 1}, "abc")
            digests.append(hashlib.sha256((tmp_path / name).read_bytes()).hexdigest())
        assert digests[0] == digests[1]

    def test_garbage(self, tmp_path):
        path = tmp_path / "bad.npz"
        path.write_bytes(b"not a zip")
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_missing_array(self, tmp_path, state):
        path = tmp_path / "m.npz"
        save_checkpoint(path, state, {}, "abc")
        with zipfile.ZipFile(path) as src, zipfile.ZipFile(tmp_path / "cut.npz", "w") as dst:
            for item in src.infolist():
                if item.filename != "phi.npy":
                    dst.writestr(item, src.read(item))
        with pytest.raises(CheckpointError, match="phi"):
            load_checkpoint(tmp_path / "cut.npz")

    def test_vocabulary_mismatch(self, tmp_path, state):
        path = tmp_path / "m.npz"
        save_checkpoint(path, state, {}, Vocabulary(["a", "b"]).digest())
        meta, _, _ = load_checkpoint(path)
        check_vocabulary(meta, Vocabulary(["a", "b"]))
        with pytest.raises(CheckpointError):
            check_vocabulary(meta, Vocabulary(["b", "a"]))
