"""
Model checkpoints.

A checkpoint is a zip archive holding ``meta.json`` (format version, run
config, vocabulary digest) and one ``.npy`` member per model matrix. Member
timestamps are fixed so identical models produce byte-identical files.
"""
import io
import json
import zipfile

import numpy as np

from wsptm.exceptions import CheckpointError
from wsptm.inference import ModelState

FORMAT = "wsptm-checkpoint"
VERSION = 1
ARRAYS = ("theta", "theta_hat", "phi", "phi_hat", "gamma", "pi")
_EPOCH = (1980, 1, 1, 0, 0, 0)


def _member(zf, name, data):
    info = zipfile.ZipInfo(name, date_time=_EPOCH)
    info.compress_type = zipfile.ZIP_DEFLATED
    info.external_attr = 0o644 << 16
    zf.writestr(info, data)


def save_checkpoint(path, state, config, vocab_digest, alpha_prime=None):
    meta = {
        "format": FORMAT,
        "version": VERSION,
        "vocab_digest": vocab_digest,
        "config": config,
        "shape": {"D": state.theta.shape[0], "K": state.K, "G": state.G, "V": state.phi.shape[1]},
    }
    arrays = {name: getattr(state, name) for name in ARRAYS}
    if alpha_prime is not None:
        arrays["alpha_prime"] = alpha_prime
    with zipfile.ZipFile(path, "w") as zf:
        _member(zf, "meta.json", json.dumps(meta, sort_keys=True, indent=1))
        for name, arr in arrays.items():
            buf = io.BytesIO()
            np.lib.format.write_array(buf, np.ascontiguousarray(arr, dtype=np.float64), allow_pickle=False)
            _member(zf, f"{name}.npy", buf.getvalue())


def load_checkpoint(path):
    """Return ``(meta, state, alpha_prime)``; ``alpha_prime`` may be ``None``."""
    try:
        with zipfile.ZipFile(path) as zf:
            meta = json.loads(zf.read("meta.json"))
            if meta.get("format") != FORMAT:
                raise CheckpointError(f"{path}: not a checkpoint")
            if meta.get("version") != VERSION:
                raise CheckpointError(f"{path}: unsupported checkpoint version {meta.get('version')}")
            arrays = {}
            for name in zf.namelist():
                if name.endswith(".npy"):
                    arrays[name[:-4]] = np.lib.format.read_array(io.BytesIO(zf.read(name)), allow_pickle=False)
    except CheckpointError:
        raise
    except (OSError, zipfile.BadZipFile, KeyError, ValueError) as e:
        raise CheckpointError(f"{path}: unreadable checkpoint ({e})") from None

    missing = [n for n in ARRAYS if n not in arrays]
    if missing:
        raise CheckpointError(f"{path}: missing arrays {missing}")
    state = ModelState(*(arrays[n] for n in ARRAYS))
    D, K = state.theta.shape
    if state.phi.shape[0] != K or state.gamma.shape != (state.phi.shape[1], K):
        raise CheckpointError(f"{path}: inconsistent array shapes")
    return meta, state, arrays.get("alpha_prime")


def check_vocabulary(meta, vocabulary):
    if meta["vocab_digest"] != vocabulary.digest():
        raise CheckpointError("checkpoint vocabulary does not match the corpus")
