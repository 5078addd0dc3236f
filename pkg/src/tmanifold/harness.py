"""Datasets, synthetic data, 1-NN evaluation and the end-to-end ``run``."""
from dataclasses import asdict, dataclass, field
import json
import os
from pathlib import Path
import tempfile
import time

import numpy as np
from threadpoolctl import threadpool_limits

from . import kernels
from .errors import ConfigError, LabelMismatch, ShapeMismatch
from .io import read_labels, read_t3b, write_t3b
from .manifold import lme_fit, mle_fit, mlde_fit, mlde_project
from .tensor import as_tensor, frobenius_norm, identity_tensor, t_product_many, t_transpose
from .trace_ratio import optimality_residual

ORIENTATIONS = ("lateral", "mode1")
METHODS = ("mlde", "mle", "lme")


@dataclass(frozen=True)
class Dataset:
    """Data tensor plus optional labels.

    ``orientation="lateral"`` stores samples as lateral slices ``x[:, j, :]``
    (p x n x n3); ``"mode1"`` stores them as horizontal slices ``x[i, :, :]``
    (n x p x n3). Labels, when present, are the integers ``1..c``.
    """

    x: np.ndarray
    labels: np.ndarray = None
    name: str = "dataset"
    orientation: str = "lateral"

    def __post_init__(self):
        if self.orientation not in ORIENTATIONS:
            raise ConfigError(f"orientation must be one of {ORIENTATIONS}, got {self.orientation!r}")
        object.__setattr__(self, "x", as_tensor(self.x, "x"))
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            if labels.shape != (self.n_samples,):
                raise LabelMismatch(f"{labels.size} labels for {self.n_samples} samples")
            classes = np.unique(labels)
            if not np.array_equal(classes, np.arange(1, classes.size + 1)):
                raise LabelMismatch(f"labels must be the contiguous integers 1..c, got {classes.tolist()}")
            object.__setattr__(self, "labels", labels)

    @property
    def n_samples(self):
        return self.x.shape[1] if self.orientation == "lateral" else self.x.shape[0]

    @property
    def n_classes(self):
        return 0 if self.labels is None else int(self.labels.max())

    def as_lateral(self):
        return self.x if self.orientation == "lateral" else np.ascontiguousarray(np.transpose(self.x, (1, 0, 2)))

    def as_mode1(self):
        return self.x if self.orientation == "mode1" else np.ascontiguousarray(np.transpose(self.x, (1, 0, 2)))


@dataclass(frozen=True)
class RunConfig:
    method: str
    d: int
    k: int = None
    k1: int = None
    k2: int = None
    t: float = None
    weight_rule: str = "heat"
    eps: float = 1e-10
    reg_eps: float = 1e-3
    max_iter: int = 100
    seed: int = 0
    split: float = 0.8
    domain: str = "spatial"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        need = ("k1", "k2") if self.method == "mlde" else ("k",)
        missing = [name for name in need if getattr(self, name) is None]
        if missing:
            raise ConfigError(f"method {self.method} needs {', '.join(missing)}")
        if self.d is None or self.d < 1:
            raise ConfigError(f"d must be >= 1, got {self.d}")
        if not 0.0 < self.split < 1.0:
            raise ConfigError(f"split must lie in (0, 1), got {self.split}")
        if self.t is not None and not self.t > 0:
            raise ConfigError(f"t must be > 0, got {self.t}")
        if self.weight_rule not in ("heat", "binary"):
            raise ConfigError(f"weight_rule must be 'heat' or 'binary', got {self.weight_rule!r}")
        if self.eps <= 0 or self.max_iter < 1 or self.reg_eps < 0:
            raise ConfigError("need eps > 0, max_iter >= 1 and reg_eps >= 0")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


def load_dataset(tensor_path, labels_path=None, orientation="lateral", name=None):
    x = read_t3b(tensor_path)
    n = x.shape[1] if orientation == "lateral" else x.shape[0]
    labels = read_labels(labels_path, n) if labels_path is not None else None
    return Dataset(x, labels, name or Path(tensor_path).stem, orientation)


def class_means(c, p, separation):
    """Class centres at pairwise distance ``separation``.

    Scaled unit vectors when ``c <= p``; otherwise evenly spaced points on
    the first axis (neighbouring classes ``separation`` apart).
    """
    means = np.zeros((c, p))
    if c <= p:
        means[np.arange(c), np.arange(c)] = separation / np.sqrt(2.0)
    else:
        means[:, 0] = separation * np.arange(c)
    return means


def synth_gaussian_classes(c, per_class, p, n3, separation, seed=0):
    """Unit-variance Gaussian classes, samples as lateral slices (p x n x n3).

    Every frontal slice repeats the class mean with fresh noise. Samples are
    ordered class by class; labels run from 1 to ``c``.
    """
    if c < 2 or per_class < 1 or p < 1 or n3 < 1:
        raise ConfigError("need c >= 2 and positive per_class, p, n3")
    rng = np.random.default_rng(seed)
    means = class_means(c, p, separation)
    labels = np.repeat(np.arange(1, c + 1), per_class)
    x = means[labels - 1][:, :, None] + rng.standard_normal((c * per_class, p, n3))
    return Dataset(np.ascontiguousarray(np.transpose(x, (1, 0, 2))), labels, f"gauss_c{c}_sep{separation:g}")


def _flatten(y, sample_axis):
    return np.ascontiguousarray(np.moveaxis(as_tensor(y), sample_axis, 0).reshape(y.shape[sample_axis], -1))


def evaluate_1nn(y_train, labels_train, y_test, labels_test, sample_axis=1):
    """Fraction of test samples whose nearest training sample shares their label.

    Distance is the Frobenius norm of the difference of the samples'
    coordinate blocks. Ties go to the lower training index.
    """
    y_train = as_tensor(y_train, "y_train")
    y_test = as_tensor(y_test, "y_test")
    other = [ax for ax in range(3) if ax != sample_axis]
    if [y_train.shape[a] for a in other] != [y_test.shape[a] for a in other]:
        raise ShapeMismatch(f"train {y_train.shape} and test {y_test.shape} disagree off the sample axis")
    labels_train = np.asarray(labels_train)
    labels_test = np.asarray(labels_test)
    if labels_train.size != y_train.shape[sample_axis] or labels_test.size != y_test.shape[sample_axis]:
        raise LabelMismatch("label counts do not match the sample counts")
    if labels_test.size == 0:
        return float("nan")
    idx = kernels.nearest_index(_flatten(y_test, sample_axis), _flatten(y_train, sample_axis))
    return float(np.mean(labels_train[idx] == labels_test))


def split_indices(labels, n, fraction, seed):
    """Seeded train/test split, stratified by class when labels are given."""
    rng = np.random.default_rng(seed)
    groups = [np.arange(n)] if labels is None else [np.flatnonzero(labels == c) for c in np.unique(labels)]
    train, test = [], []
    for g in groups:
        g = rng.permutation(g)
        cut = min(max(int(round(fraction * g.size)), 1), g.size)
        train.append(g[:cut])
        test.append(g[cut:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


@dataclass
class RunResult:
    metrics: dict
    embedding: np.ndarray
    projection: np.ndarray = None
    files: dict = field(default_factory=dict)


def _atomic_write(path, data):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    with os.fdopen(fd, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def _check_dims(config, dataset):
    if config.method == "mlde":
        if dataset.labels is None:
            raise ConfigError("mlde needs labels")
        p = dataset.as_lateral().shape[0]
        if config.d >= p:
            raise ShapeMismatch(f"need d < p, got d={config.d}, p={p}")
    elif config.d >= dataset.n_samples:
        raise ShapeMismatch(f"need d < n1, got d={config.d}, n1={dataset.n_samples}")


def run(config, dataset, out_dir=None, results_path=None, threads=1):
    """Fit, embed, evaluate and (optionally) write artifacts.

    MLDE is fit on the training split and projects every sample. MLE and LME
    have no out-of-sample map, so they embed all samples jointly and the
    test samples are only held out from the 1-NN reference set.

    Writes ``embedding.t3b``, ``projection.t3b`` (MLDE) and ``metrics.json``
    into ``out_dir`` and appends one JSON line to ``results_path``.

    ``threads`` sets the parallelism of the compiled kernels. BLAS and LAPACK
    are held to one thread for the duration of the call because their
    multi-threaded reductions change the low bits of the result, so output
    files are identical for every ``threads`` value.
    """
    _check_dims(config, dataset)
    with threadpool_limits(limits=1, user_api="blas"):
        used = kernels.set_threads(threads)
        return _run(config, dataset, out_dir, results_path, used)


def _run(config, dataset, out_dir, results_path, threads):
    start = time.perf_counter()
    n = dataset.n_samples
    train, test = split_indices(dataset.labels, n, config.split, config.seed)
    residuals = {}
    rho_star = None
    iterations = None
    projection = None

    if config.method == "mlde":
        x = dataset.as_lateral()
        model = mlde_fit(x[:, train], dataset.labels[train], config.d, config.k1, config.k2,
                         config.weight_rule, config.t, config.eps, config.max_iter, config.seed)
        projection = model.v
        embedding = mlde_project(model, x)
        rho_star = float(model.rho_star)
        iterations = model.solver_trace.iterations
        residuals["orthogonality"] = frobenius_norm(
            t_product_many(t_transpose(model.v), model.v) - identity_tensor(config.d, x.shape[2]))
        residuals["f_rho_star"] = float(model.solver_trace.f_history[-1])
        residuals["optimality"] = optimality_residual(model.problem, model.v, model.rho_star)
        sample_axis = 1
        evaluation = "inductive"
    else:
        x = dataset.as_mode1()
        if config.method == "mle":
            emb = mle_fit(x, config.d, config.k, config.weight_rule, config.t)
        else:
            emb = lme_fit(x, config.d, config.k, config.reg_eps, config.domain)
        embedding = emb.y
        residuals["eigen"] = float(emb.residual)
        sample_axis = 0
        evaluation = "transductive"

    accuracy = None
    if dataset.labels is not None and test.size:
        accuracy = evaluate_1nn(np.take(embedding, train, axis=sample_axis), dataset.labels[train],
                                np.take(embedding, test, axis=sample_axis), dataset.labels[test], sample_axis)
    metrics = {
        "method": config.method,
        "params": asdict(config),
        "dataset": dataset.name,
        "accuracy": accuracy,
        "rho_star": rho_star,
        "iterations": iterations,
        "residuals": residuals,
        "elapsed_ms": 1e3 * (time.perf_counter() - start),
        "seed": config.seed,
        "evaluation": evaluation,
        "n_train": int(train.size),
        "n_test": int(test.size),
        "backend": kernels.BACKEND,
        "threads": threads,
    }
    result = RunResult(metrics, embedding, projection)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_t3b(out / "embedding.t3b", embedding)
        result.files["embedding"] = str(out / "embedding.t3b")
        if projection is not None:
            write_t3b(out / "projection.t3b", projection)
            result.files["projection"] = str(out / "projection.t3b")
        _atomic_write(out / "metrics.json", (json.dumps(metrics, indent=2) + "\n").encode())
        result.files["metrics"] = str(out / "metrics.json")
    if results_path is not None:
        with open(results_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(metrics) + "\n")
    return result

