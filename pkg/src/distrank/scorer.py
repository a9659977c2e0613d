"""Feature-vector scorer with a mean head and a confidence head, trained by plain SGD.

The network is either linear or has one tanh hidden layer. Both heads read
the same representation::

    mu   = a @ w_mu + b_mu
    s    = softplus(a @ w_s + b_s) + eps

In ``reciprocal`` mode ``s`` is the confidence 1/sigma; in ``direct`` mode it
is sigma itself. Inputs are standardized with a shift/scale fitted on the
training items and frozen into the parameters.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from distrank.core import MAX_CONFIDENCE, MIN_CONFIDENCE, GaussianScore, pair_loss_terms
from distrank.errors import DivergenceError, UnsupportedRelationError
from distrank.ranking import whdr_arrays

RECIPROCAL = "reciprocal"
DIRECT = "direct"
PARAMETERIZATIONS = (RECIPROCAL, DIRECT)

CHECKPOINT_FORMAT = "distrank-scorer"
CHECKPOINT_VERSION = 1


@dataclass
class ScorerParams:
    weights: dict[str, np.ndarray]
    shift: np.ndarray
    scale: np.ndarray
    parameterization: str = RECIPROCAL
    hidden: int = 16
    eps: float = 1e-3

    def __post_init__(self):
        if self.parameterization not in PARAMETERIZATIONS:
            raise ValueError(f"unknown parameterization {self.parameterization!r}")
        if self.hidden < 0:
            raise ValueError("hidden width must be >= 0 (0 means linear)")
        if not self.eps > 0:
            raise ValueError("eps must be positive")

    @property
    def n_features(self) -> int:
        return len(self.shift)

    def copy(self) -> "ScorerParams":
        return ScorerParams(
            {k: v.copy() for k, v in self.weights.items()},
            self.shift.copy(),
            self.scale.copy(),
            self.parameterization,
            self.hidden,
            self.eps,
        )

    def equals(self, other: "ScorerParams") -> bool:
        return (
            self.parameterization == other.parameterization
            and self.hidden == other.hidden
            and self.eps == other.eps
            and np.array_equal(self.shift, other.shift)
            and np.array_equal(self.scale, other.scale)
            and self.weights.keys() == other.weights.keys()
            and all(np.array_equal(v, other.weights[k]) for k, v in self.weights.items())
        )


def init_params(
    n_features: int,
    hidden: int = 16,
    parameterization: str = RECIPROCAL,
    eps: float = 1e-3,
    seed: int = 0,
    features: np.ndarray | None = None,
) -> ScorerParams:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights; biases likewise.

    If ``features`` is given the input standardization is fitted to it.
    """
    rng = np.random.default_rng(seed)

    def uniform(fan_in, shape):
        bound = 1.0 / math.sqrt(fan_in)
        return rng.uniform(-bound, bound, size=shape)

    w: dict[str, np.ndarray] = {}
    width = n_features
    if hidden:
        w["W1"] = uniform(n_features, (hidden, n_features))
        w["b1"] = uniform(n_features, hidden)
        width = hidden
    w["w_mu"] = uniform(width, width)
    w["b_mu"] = uniform(width, ())
    w["w_s"] = uniform(width, width)
    w["b_s"] = uniform(width, ())

    if features is None:
        shift, scale = np.zeros(n_features), np.ones(n_features)
    else:
        features = np.asarray(features, dtype=float)
        shift = features.mean(axis=0)
        scale = features.std(axis=0)
        scale[scale == 0] = 1.0
    return ScorerParams(w, shift, scale, parameterization, hidden, eps)


def _hidden(params: ScorerParams, x: np.ndarray):
    z = (x - params.shift) / params.scale
    if not params.hidden:
        return z, z
    a = np.tanh(z @ params.weights["W1"].T + params.weights["b1"])
    return z, a


def forward_arrays(params: ScorerParams, x) -> tuple[np.ndarray, np.ndarray]:
    """Means and sigmas for a batch of feature rows."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != params.n_features:
        raise ValueError(f"expected {params.n_features} features, got {x.shape[1]}")
    w = params.weights
    _, a = _hidden(params, x)
    mu = a @ w["w_mu"] + w["b_mu"]
    s = np.logaddexp(0.0, a @ w["w_s"] + w["b_s"]) + params.eps
    sigma = 1.0 / s if params.parameterization == RECIPROCAL else s
    return mu, sigma


def forward(params: ScorerParams, features) -> GaussianScore:
    """Score a single item."""
    features = np.asarray(features, dtype=float)
    if features.ndim != 1:
        raise ValueError("forward expects a single feature vector")
    mu, sigma = forward_arrays(params, features)
    return GaussianScore(float(mu[0]), float(1.0 / sigma[0]))


def _check_relations(relation):
    relation = np.asarray(relation)
    if np.any(relation == 0):
        raise UnsupportedRelationError("pairs with relation 0 are not supported")
    if np.any(np.abs(relation) != 1):
        raise ValueError("relations must be -1 or +1")


def loss_and_grad(params: ScorerParams, features, i, j, relation):
    """Mean pair loss over a batch and its gradient w.r.t. every weight.

    ``features`` holds all item rows; ``i``, ``j``, ``relation`` are the
    batch's pair columns.
    """
    _check_relations(relation)
    i = np.asarray(i)
    j = np.asarray(j)
    pos = np.asarray(relation) == 1
    far = np.where(pos, i, j)
    near = np.where(pos, j, i)
    b = len(far)
    if b == 0:
        return 0.0, {k: np.zeros_like(v) for k, v in params.weights.items()}

    x = np.concatenate([features[far], features[near]])
    if x.shape[1] != params.n_features:
        raise ValueError(f"expected {params.n_features} features, got {x.shape[1]}")
    w = params.weights
    z, a = _hidden(params, x)
    mu = a @ w["w_mu"] + w["b_mu"]
    h = a @ w["w_s"] + w["b_s"]
    s = np.logaddexp(0.0, h) + params.eps
    sigma = 1.0 / s if params.parameterization == RECIPROCAL else s

    loss, dmf, dmc, dsf, dsc = pair_loss_terms(mu[:b], mu[b:], sigma[:b], sigma[b:])
    dmu = np.concatenate([dmf, dmc]) / b
    dsigma = np.concatenate([dsf, dsc]) / b
    ds = -dsigma * sigma * sigma if params.parameterization == RECIPROCAL else dsigma
    dh = ds * expit(h)

    g = {
        "w_mu": a.T @ dmu,
        "b_mu": np.sum(dmu),
        "w_s": a.T @ dh,
        "b_s": np.sum(dh),
    }
    if params.hidden:
        da = np.outer(dmu, w["w_mu"]) + np.outer(dh, w["w_s"])
        dpre = da * (1.0 - a * a)
        g["W1"] = dpre.T @ z
        g["b1"] = dpre.sum(axis=0)
    return float(np.mean(loss)), g


def backward(params: ScorerParams, features, pairs):
    """Gradient of the mean batch loss for a list of :class:`OrdinalPair`."""
    from distrank.ranking import pairs_to_arrays

    i, j, r, _ = pairs_to_arrays(pairs)
    return loss_and_grad(params, np.asarray(features, dtype=float), i, j, r)[1]


def cosine_lr(step: int, steps_per_cycle: int, lr_max: float, lr_min: float) -> float:
    """Cosine-annealed learning rate restarting at ``lr_max`` every cycle."""
    if steps_per_cycle < 1:
        raise ValueError("steps_per_cycle must be >= 1")
    phase = (step % steps_per_cycle) / steps_per_cycle
    return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + math.cos(math.pi * phase))


def sgd_step(params: ScorerParams, grad: dict[str, np.ndarray], lr: float) -> ScorerParams:
    """Return new params ``theta - lr * grad``; no momentum."""
    if lr < 0:
        raise ValueError("learning rate must be >= 0")
    for k, g in grad.items():
        if not np.all(np.isfinite(g)):
            raise DivergenceError(f"non-finite gradient for {k}")
    new = params.copy()
    for k, g in grad.items():
        new.weights[k] = params.weights[k] - lr * g
    return new


# -- training -------------------------------------------------------------------


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 25
    batch_size: int = 8
    lr_max: float = 1e-3
    lr_min: float = 1e-7
    cycle_epochs: int = 5
    seed: int = 0
    parameterization: str = RECIPROCAL
    hidden_width: int = 16
    eps: float = 1e-3
    test_fraction: float = 0.2

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not self.lr_max >= self.lr_min >= 0:
            raise ValueError("need lr_max >= lr_min >= 0")
        if self.cycle_epochs < 1:
            raise ValueError("cycle_epochs must be >= 1")
        if self.parameterization not in PARAMETERIZATIONS:
            raise ValueError(f"unknown parameterization {self.parameterization!r}")
        if self.hidden_width < 0:
            raise ValueError("hidden_width must be >= 0")


HISTORY_HEADER = ("epoch", "train_loss", "test_whdr", "lr")


@dataclass
class History:
    rows: list[tuple[int, float, float, float]] = field(default_factory=list)
    diverged: bool = False
    message: str = ""

    @property
    def final_whdr(self) -> float:
        return self.rows[-1][2]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(HISTORY_HEADER)
        for e, loss, wh, lr in self.rows:
            w.writerow((e, repr(loss), repr(wh), repr(lr)))
        return buf.getvalue()


def _check_sigma(sigma):
    if not np.all(np.isfinite(sigma)):
        raise DivergenceError("non-finite sigma")
    if np.any(sigma < 1.0 / MAX_CONFIDENCE) or np.any(sigma > 1.0 / MIN_CONFIDENCE):
        raise DivergenceError(f"sigma left the supported range (max {np.max(sigma):.3g})")


def evaluate_whdr(params: ScorerParams, ds) -> float:
    mu, _ = forward_arrays(params, ds.features)
    i, j, r, w = ds.pair_arrays()
    return whdr_arrays(mu, i, j, r, w)


def dataset_loss(params: ScorerParams, ds) -> float:
    i, j, r, _ = ds.pair_arrays()
    return loss_and_grad(params, ds.features, i, j, r)[0]


def train(dataset, config: TrainConfig, test=None):
    """Mini-batch SGD over pairs with cosine-annealed learning rate.

    When ``test`` is None the dataset is split by ``config.test_fraction``
    (seeded by ``config.seed``). Returns ``(params, history)``; on divergence
    the last finite parameters are returned and ``history.diverged`` is set.
    """
    from distrank.data import split

    if not dataset.pairs:
        raise ValueError("training needs at least one pair")
    if test is None:
        dataset, test = split(dataset, config.test_fraction, config.seed)

    params = init_params(
        dataset.feature_dim,
        config.hidden_width,
        config.parameterization,
        config.eps,
        config.seed,
        features=dataset.features,
    )
    rng = np.random.default_rng(config.seed + 1)
    i_all, j_all, r_all, _ = dataset.pair_arrays()
    n = len(i_all)
    steps_per_epoch = -(-n // config.batch_size)
    steps_per_cycle = steps_per_epoch * config.cycle_epochs
    x = dataset.features

    history = History()
    history.rows.append(
        (0, dataset_loss(params, dataset), evaluate_whdr(params, test), config.lr_max)
    )
    step = 0
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        total = 0.0
        lr = config.lr_max
        try:
            for start in range(0, n, config.batch_size):
                idx = order[start : start + config.batch_size]
                loss, grad = loss_and_grad(params, x, i_all[idx], j_all[idx], r_all[idx])
                if not math.isfinite(loss):
                    raise DivergenceError("non-finite loss")
                lr = cosine_lr(step, steps_per_cycle, config.lr_max, config.lr_min)
                candidate = sgd_step(params, grad, lr)
                _check_sigma(forward_arrays(candidate, x)[1])
                params = candidate
                total += loss * len(idx)
                step += 1
        except DivergenceError as exc:
            history.diverged = True
            history.message = f"epoch {epoch}, step {step}: {exc}"
            return params, history
        history.rows.append((epoch, total / n, evaluate_whdr(params, test), lr))
    return params, history


# -- checkpoints ----------------------------------------------------------------


def params_to_json(params: ScorerParams) -> str:
    doc = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "n_features": params.n_features,
        "hidden": params.hidden,
        "parameterization": params.parameterization,
        "eps": params.eps,
        "shift": params.shift.tolist(),
        "scale": params.scale.tolist(),
        "weights": {k: np.asarray(v).tolist() for k, v in params.weights.items()},
    }
    return json.dumps(doc, indent=1) + "\n"


def params_from_json(text: str) -> ScorerParams:
    doc = json.loads(text)
    if doc.get("format") != CHECKPOINT_FORMAT:
        raise ValueError("not a scorer checkpoint")
    if doc.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {doc.get('version')!r}")
    params = ScorerParams(
        {k: np.array(v, dtype=float) for k, v in doc["weights"].items()},
        np.array(doc["shift"], dtype=float),
        np.array(doc["scale"], dtype=float),
        doc["parameterization"],
        int(doc["hidden"]),
        float(doc["eps"]),
    )
    if params.n_features != doc["n_features"]:
        raise ValueError("checkpoint feature count is inconsistent")
    return params


def save_checkpoint(params: ScorerParams, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(params_to_json(params))


def load_checkpoint(path) -> ScorerParams:
    with open(path, encoding="utf-8") as fh:
        return params_from_json(fh.read())
