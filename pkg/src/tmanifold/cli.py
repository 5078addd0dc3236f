"""Command-line entry point: ``tmanifold {reduce,eval,synth,selftest}``.

Exit codes: 0 on success, 2 for invalid input or configuration, 3 for a
numerical failure.
"""
import argparse
import json
import logging
from pathlib import Path
import sys

import numpy as np

from .errors import NumericalError, ValidationError
from .harness import (
    RunConfig,
    evaluate_1nn,
    load_dataset,
    run,
    split_indices,
    synth_gaussian_classes,
)
from .io import write_labels, write_t3b

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

logger = logging.getLogger("tmanifold")


def _add_data_args(p):
    p.add_argument("--input", required=True, help="T3B data tensor")
    p.add_argument("--labels", help="text file, one integer label per line")
    p.add_argument("--orientation", choices=("lateral", "mode1"), default="lateral",
                   help="samples are lateral slices (p x n x n3) or horizontal slices (n x p x n3)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--split", type=float, default=0.8, help="training fraction")


def build_parser():
    parser = argparse.ArgumentParser(prog="tmanifold", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    red = sub.add_parser("reduce", help="fit a method, embed, evaluate and write artifacts")
    _add_data_args(red)
    red.add_argument("--method", choices=("mlde", "mle", "lme"), required=True)
    red.add_argument("--d", type=int, required=True)
    red.add_argument("--k", type=int, default=5)
    red.add_argument("--k1", type=int, default=5)
    red.add_argument("--k2", type=int, default=5)
    red.add_argument("--t", type=float, default=None, help="heat-kernel width (median distance if omitted)")
    red.add_argument("--weight-rule", choices=("heat", "binary"), default="heat")
    red.add_argument("--eps", type=float, default=1e-10)
    red.add_argument("--reg-eps", type=float, default=1e-3)
    red.add_argument("--max-iter", type=int, default=100)
    red.add_argument("--domain", choices=("spatial", "transform"), default="spatial",
                     help="where LME looks for neighbours")
    red.add_argument("--out-dir", required=True)
    red.add_argument("--results", help="append the metrics record to this JSONL file")
    red.add_argument("--threads", type=int, default=1,
                     help="threads for the compiled kernels (output does not depend on it)")

    ev = sub.add_parser("eval", help="1-NN accuracy of a tensor under the seeded split")
    _add_data_args(ev)

    syn = sub.add_parser("synth", help="write a Gaussian-classes dataset")
    syn.add_argument("--c", type=int, default=2)
    syn.add_argument("--per-class", type=int, default=50)
    syn.add_argument("--p", type=int, default=8)
    syn.add_argument("--n3", type=int, default=3)
    syn.add_argument("--separation", type=float, default=10.0)
    syn.add_argument("--seed", type=int, default=0)
    syn.add_argument("--out-dir", required=True)

    st = sub.add_parser("selftest", help="oracle-equivalence and matrix-degeneration checks")
    st.add_argument("--seed", type=int, default=0)
    return parser


def _reduce(args):
    config = RunConfig(method=args.method, d=args.d, k=args.k, k1=args.k1, k2=args.k2, t=args.t,
                       weight_rule=args.weight_rule, eps=args.eps, reg_eps=args.reg_eps,
                       max_iter=args.max_iter, seed=args.seed, split=args.split, domain=args.domain)
    dataset = load_dataset(args.input, args.labels, args.orientation)
    if args.threads < 1:
        raise ValidationError(f"--threads must be >= 1, got {args.threads}")
    result = run(config, dataset, args.out_dir, args.results, args.threads)
    m = result.metrics
    print(json.dumps({k: m[k] for k in ("method", "accuracy", "rho_star", "iterations", "elapsed_ms")}))
    return EXIT_OK


def _eval(args):
    dataset = load_dataset(args.input, args.labels, args.orientation)
    if dataset.labels is None:
        raise ValidationError("eval needs --labels")
    train, test = split_indices(dataset.labels, dataset.n_samples, args.split, args.seed)
    axis = 1 if dataset.orientation == "lateral" else 0
    acc = evaluate_1nn(np.take(dataset.x, train, axis=axis), dataset.labels[train],
                       np.take(dataset.x, test, axis=axis), dataset.labels[test], axis)
    print(json.dumps({"accuracy": acc, "n_train": int(train.size), "n_test": int(test.size)}))
    return EXIT_OK


def _synth(args):
    ds = synth_gaussian_classes(args.c, args.per_class, args.p, args.n3, args.separation, args.seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_t3b(out / "data.t3b", ds.x)
    write_labels(out / "labels.txt", ds.labels)
    print(json.dumps({"data": str(out / "data.t3b"), "labels": str(out / "labels.txt"), "shape": ds.x.shape}))
    return EXIT_OK


def _selftest(args):
    from .selftest import run_all

    checks = run_all(args.seed)
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail}")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_NUMERICAL


_COMMANDS = {"reduce": _reduce, "eval": _eval, "synth": _synth, "selftest": _selftest}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
