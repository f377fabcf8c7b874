"""Run configuration: flat ``key = value`` files overridable from the command line."""
import dataclasses
import math
import typing
from dataclasses import dataclass, fields

from wsptm.exceptions import InputError
from wsptm.inference import ModelConfig
from wsptm.priors import PriorConfig

MODES = ("wsptm", "lapswtm")

# names accepted in config files in place of the attribute name
ALIASES = {"lambda": "lam", "alpha_0": "alpha0", "alpha'": "alpha0"}


@dataclass(frozen=True)
class RunConfig:
    corpus: str | None = None
    seeds: str | None = None
    output_dir: str = "wsptm-out"
    mode: str = "wsptm"

    # preprocessing
    min_doc_freq: int = 5
    min_word_len: int = 2
    stopwords: str | None = "english"
    purify: bool = True
    purify_seed: int = 0

    # supervised prior
    eta: float = 10.0
    alpha0: float = 0.01
    rho: float = 0.9
    tau: float = 0.1
    P: int = 1
    epsilon: float = 0.01
    b: float = math.e - 1

    # document graph
    k_neighbors: int = 5
    graph_weighting: str = "tf"

    # inference
    G: int | None = None
    beta: float = 0.01
    beta_hat: float = 0.01
    alpha_hat: float = 0.1
    lam: float = 100.0
    kappa: float = 0.1
    max_iter: int = 200
    max_inner: int = 50
    tol: float = 1e-5
    rng_seed: int = 0
    gem_accept: bool = True

    # evaluation
    perplexity: bool = True
    fold_in_iter: int = 20

    def __post_init__(self):
        if self.mode not in MODES:
            raise InputError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == "lapswtm" and (self.rho != 0 or self.tau != 0):
            object.__setattr__(self, "rho", 0.0)
            object.__setattr__(self, "tau", 0.0)
        if self.k_neighbors < 1:
            raise InputError("k_neighbors must be >= 1")
        if self.graph_weighting not in ("tf", "tfidf"):
            raise InputError("graph_weighting must be 'tf' or 'tfidf'")
        if self.fold_in_iter < 1:
            raise InputError("fold_in_iter must be >= 1")
        self.prior_config()
        self.model_config()

    @property
    def baseline(self):
        return self.mode == "lapswtm"

    def prior_config(self):
        return PriorConfig(self.eta, self.alpha0, self.rho, self.tau, self.P, self.epsilon, self.b)

    def model_config(self):
        return ModelConfig(
            self.G, self.beta, self.beta_hat, self.alpha_hat, self.lam, self.kappa,
            self.max_iter, self.rng_seed, self.tol, self.max_inner, self.gem_accept,
        )

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        return dataclasses.asdict(self)

    def dumps(self):
        return "".join(f"{k} = {_format(v)}\n" for k, v in self.to_dict().items())

    @classmethod
    def from_dict(cls, values):
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            name = ALIASES.get(key, key)
            if name not in known:
                raise InputError(f"unknown config key {key!r}")
            kwargs[name] = _coerce(name, known[name].type, raw)
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path, overrides=None):
        values = read_config_file(path)
        values.update(overrides or {})
        return cls.from_dict(values)


def read_config_file(path):
    values = {}
    try:
        f = open(path, encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read config file {path}: {e.strerror}") from None
    with f:
        for lineno, line in enumerate(f, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InputError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            values[key] = value
    return values


def _format(v):
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _coerce(name, typ, raw):
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    args = typing.get_args(typ)
    if args:
        base = next(a for a in args if a is not type(None))
        if type(None) in args and text.lower() in ("none", "null", ""):
            return None
    else:
        base = typ
    try:
        if base is bool:
            if text.lower() in ("1", "true", "yes", "on"):
                return True
            if text.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        return base(text)
    except ValueError:
        raise InputError(f"bad value for {name}: {raw!r}") from None
