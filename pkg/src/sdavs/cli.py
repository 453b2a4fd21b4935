"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data or validation error,
3 numerical failure.  Defaults of most options can be set through
environment variables named ``SDAVS_<OPTION>`` (for example ``SDAVS_ALPHA``
or ``SDAVS_JOBS``); explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .classifier import ShrinkageDiscriminantAnalysis
from .dataset import LabeledMatrix, load_tsv, read_table, write_tsv
from .evalharness import crossval, default_options, run_sim_benchmark
from .exceptions import DataFormatError, DataValidationError, NumericalError
from .shrinkage import SCHEMA_VERSION
from .simgen import (gen_prostate_like, gen_setup1, gen_setup2, gen_smyth, prostate_like_spec,
                     setup1_spec, setup2_spec)

log = logging.getLogger("sdavs")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
ENV_PREFIX = "SDAVS_"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _env(name, default, cast=str):
    raw = os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"))
    if raw is None:
        return default
    try:
        return cast(raw)
    except ValueError:
        raise UsageError(f"bad value {raw!r} in {ENV_PREFIX}{name.upper()}") from None


def _flag(value) -> bool:
    return str(value).lower() in {"1", "true", "yes", "on"}


def _dump_json(doc, path=None) -> None:
    text = json.dumps(doc, sort_keys=True, indent=1) + "\n"
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# argument groups ------------------------------------------------------------

def _add_data_args(p, required=True):
    p.add_argument("data", nargs=None if required else "?", help="samples x features TSV/CSV")
    p.add_argument("--label-column", default=_env("label_column", "label"),
                   help="name or index of the label column (default: label)")
    p.add_argument("--delimiter", default=None,
                   help="field delimiter (default: ',' for .csv, tab otherwise)")
    p.add_argument("--transpose", action="store_true",
                   help="input is features x samples; the label column is then a row")
    p.add_argument("--id-column", default=None, help="column with sample identifiers")


def _add_model_args(p, selection=True):
    g = p.add_argument_group("model")
    g.add_argument("--diagonal", action="store_true", default=_flag(_env("diagonal", "0")),
                   help="diagonal discriminant analysis (ignore correlations)")
    g.add_argument("--estimator", choices=["fdr-effect", "naive", "efron"],
                   default=_env("estimator", "fdr-effect"))
    g.add_argument("--theoretical-null", action="store_true",
                   default=_flag(_env("theoretical_null", "0")),
                   help="fix the null scale at 1 instead of fitting it")
    g.add_argument("--truncation-quantile", type=float,
                   default=_env("truncation_quantile", 0.75, float))
    g.add_argument("--lambda-var", type=float, default=None)
    g.add_argument("--lambda-corr", type=float, default=None)
    g.add_argument("--lambda-freq", type=float, default=None)
    if selection:
        g.add_argument("--method", "--selection", dest="method",
                       choices=["mr", "hc", "fndr", "all"], default=_env("method", "mr"))
        g.add_argument("--alpha", type=float, default=_env("alpha", 0.05, float),
                       help="target misclassification rate for --method mr")
        g.add_argument("--fndr-cutoff", type=float, default=_env("fndr_cutoff", 0.8, float))
        g.add_argument("--hc-fraction", type=float, default=_env("hc_fraction", 0.1, float))


def _add_jobs(p):
    p.add_argument("--jobs", type=int, default=_env("jobs", os.cpu_count() or 1, int),
                   help="worker processes (default: available cores)")


def _model_options(args) -> dict:
    opts = {
        "diagonal": bool(args.diagonal),
        "estimator": args.estimator,
        "theoretical_null": bool(args.theoretical_null),
        "truncation_quantile": args.truncation_quantile,
        "lambda_var": args.lambda_var,
        "lambda_corr": args.lambda_corr,
        "lambda_freq": args.lambda_freq,
    }
    if hasattr(args, "method"):
        opts.update(selection=args.method, alpha=args.alpha,
                    fndr_cutoff=args.fndr_cutoff, hc_fraction=args.hc_fraction)
    return opts


def _config(args) -> dict:
    skip = {"func", "verbose", "jobs"}  # execution details, not results
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _load(args) -> LabeledMatrix:
    return load_tsv(args.data, args.label_column, args.delimiter, args.transpose, args.id_column)


def _fit(args, data: LabeledMatrix) -> ShrinkageDiscriminantAnalysis:
    clf = ShrinkageDiscriminantAnalysis(**_model_options(args))
    clf.fit(data.X, np.asarray(data.classes)[data.y - 1])
    return clf


def _write_tsv_rows(rows, header, path, config):
    lines = ["\t".join(header)] + ["\t".join(str(c) for c in r) for r in rows]
    text = "\n".join(lines) + "\n"
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        sys.stderr.write("config: " + json.dumps(config, sort_keys=True) + "\n")
    else:
        Path(path).write_text(text)
        _dump_json({"config": config, "table": str(path)}, f"{path}.json")


# subcommands ----------------------------------------------------------------

def cmd_simulate(args) -> int:
    prefix = args.out_prefix
    truth = {"setup": args.setup, "seed": args.seed, "version": SCHEMA_VERSION}
    if args.setup in ("1", "2"):
        gen = gen_setup1 if args.setup == "1" else gen_setup2
        train, test = gen(args.seed)
        spec = setup1_spec() if args.setup == "1" else setup2_spec()
        write_tsv(f"{prefix}.train.tsv", train)
        write_tsv(f"{prefix}.test.tsv", test)
    elif args.setup == "smyth":
        sim = gen_smyth(args.seed)
        spec, train = sim.spec, sim.train
        write_tsv(f"{prefix}.train.tsv", train)
    else:
        train = gen_prostate_like(args.seed)
        spec = prostate_like_spec(seed=args.seed)
        write_tsv(f"{prefix}.train.tsv", train)
    effects = spec.true_effects()
    K = spec.n_classes
    truth["de_index"] = [int(i) for i in spec.de_index]
    truth["priors"] = spec.priors.tolist()
    truth["true_effects"] = {f"{k + 1}-{l + 1}": effects[k, l].tolist()
                             for k in range(K) for l in range(k + 1, K)}
    truth["config"] = _config(args)
    _dump_json(truth, f"{prefix}.truth.json")
    log.info("wrote %s.*", prefix)
    return EXIT_OK


def cmd_fit(args) -> int:
    clf = _fit(args, _load(args))
    doc = clf.to_dict()
    doc["run_config"] = _config(args)
    _dump_json(doc, args.out)
    return EXIT_OK


def cmd_rank(args) -> int:
    data = _load(args)
    clf = _fit(args, data)
    sc, ef = clf.scores_, clf.effects_
    names = data.feature_names or [f"f{j + 1}" for j in range(data.n_features)]
    labels = [str(c) for c in clf.classes_]
    header = ["rank", "feature", "S"] + [f"cat.{c}" for c in labels] + [f"effect.{c}" for c in labels]
    if len(labels) == 2:
        header.append(f"effect.{labels[0]}-{labels[1]}")
    rows = []
    for r, i in enumerate(sc.ranking, start=1):
        row = [r, names[i], f"{sc.S[i]:.10g}"]
        row += [f"{v:.10g}" for v in sc.cat_pool[:, i]]
        row += [f"{v:.10g}" for v in ef.w_pool[:, i]]
        if len(labels) == 2:
            row.append(f"{ef.w_pair[(0, 1)][i]:.10g}")
        rows.append(row)
    _write_tsv_rows(rows, header, args.out, _config(args))
    return EXIT_OK


def cmd_select(args) -> int:
    data = _load(args)
    clf = _fit(args, data)
    res = clf.selection_
    names = data.feature_names or [f"f{j + 1}" for j in range(data.n_features)]
    doc = res.to_dict(names)
    doc["config"] = _config(args)
    _dump_json(doc, args.out)
    if args.tsv:
        rows = [[r, i, names[i], f"{clf.scores_.S[i]:.10g}"]
                for r, i in enumerate(res.selected, start=1)]
        _write_tsv_rows(rows, ["rank", "index", "feature", "S"], args.tsv, _config(args))
    return EXIT_OK


def cmd_predict(args) -> int:
    clf = ShrinkageDiscriminantAnalysis.load(args.model)
    table = read_table(args.data, args.label_column, args.delimiter, args.transpose,
                       args.id_column, require_label=False)
    pred = clf.predict(table.X)
    ids = table.ids or [str(i + 1) for i in range(len(pred))]
    header = ["sample", "predicted"]
    cols = [ids, [str(p) for p in pred]]
    if args.proba:
        proba = clf.predict_proba(table.X)
        for j, c in enumerate(clf.classes_):
            header.append(f"p.{c}")
            cols.append([f"{v:.10g}" for v in proba[:, j]])
    rows = list(zip(*cols))
    _write_tsv_rows(rows, header, args.out, _config(args))
    if table.labels is not None:
        err = float(np.mean(np.asarray([str(p) for p in pred]) != np.asarray(table.labels)))
        sys.stderr.write(f"error rate on labeled input: {err:.4f}\n")
    return EXIT_OK


def cmd_cv(args) -> int:
    if args.standin:
        data = gen_prostate_like(args.seed)
    elif args.data:
        data = _load(args)
    else:
        raise UsageError("cv: give an input file or --standin prostate-like")
    report = crossval(data, _model_options(args), args.folds, args.reps, args.seed, args.jobs)
    doc = report.to_dict()
    doc["config"]["run"] = _config(args)
    if args.out:
        _dump_json(doc, args.out)
    print(report.format_table(args.spread))
    print(f"features (single selection run on the whole data): {report.extra['whole_data_features']}")
    return EXIT_OK


def cmd_bench(args) -> int:
    setup = int(args.setup)
    options = default_options(setup)
    if args.lda:
        options["diagonal"] = False
    if args.dda:
        options["diagonal"] = True
    options.update(estimator=args.estimator, alpha=args.alpha, fndr_cutoff=args.fndr_cutoff,
                   hc_fraction=args.hc_fraction, theoretical_null=args.theoretical_null,
                   truncation_quantile=args.truncation_quantile)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    report = run_sim_benchmark(setup, methods, args.runs, args.seed, args.jobs, options)
    doc = report.to_dict()
    doc["config"]["run"] = _config(args)
    if args.out:
        _dump_json(doc, args.out)
    print(report.format_table(args.spread))
    return EXIT_OK


# parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sdavs", description="Shrinkage discriminant analysis with "
                     "effect-size based feature selection.")
    parser.add_argument("--version", action="version",
                        version=f"sdavs {__version__} (schema {SCHEMA_VERSION})")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="generate benchmark data")
    p.add_argument("--setup", choices=["1", "2", "smyth", "prostate-like"], required=True)
    p.add_argument("--seed", type=int, default=_env("seed", 0, int))
    p.add_argument("--out-prefix", required=True,
                   help="writes PREFIX.train.tsv, PREFIX.test.tsv and PREFIX.truth.json")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit a classifier and write it as JSON")
    _add_data_args(p)
    _add_model_args(p)
    p.add_argument("-o", "--out", default=None, help="model JSON (default: stdout)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("rank", help="rank features and report effect sizes")
    _add_data_args(p)
    _add_model_args(p, selection=False)
    p.add_argument("-o", "--out", default=None, help="TSV output (default: stdout)")
    p.set_defaults(func=cmd_rank, method="all", alpha=0.05, fndr_cutoff=0.8, hc_fraction=0.1)

    p = sub.add_parser("select", help="select features")
    _add_data_args(p)
    _add_model_args(p)
    p.add_argument("-o", "--out", default=None, help="selection JSON (default: stdout)")
    p.add_argument("--tsv", default=None, help="also write the selected features as TSV")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("predict", help="predict labels with a fitted model")
    p.add_argument("--model", required=True, help="model JSON written by 'fit'")
    _add_data_args(p)
    p.add_argument("--proba", action="store_true", help="add posterior probabilities")
    p.add_argument("-o", "--out", default=None, help="labels TSV (default: stdout)")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("cv", help="repeated stratified cross-validation")
    _add_data_args(p, required=False)
    _add_model_args(p)
    p.add_argument("--standin", choices=["prostate-like"], default=None,
                   help="use the bundled synthetic stand-in (n=102, d=6033) instead of a file")
    p.add_argument("--folds", type=int, default=_env("folds", 10, int))
    p.add_argument("--reps", type=int, default=_env("reps", 20, int))
    p.add_argument("--seed", type=int, default=_env("seed", 0, int))
    p.add_argument("--spread", choices=["sd", "se"], default="se")
    p.add_argument("-o", "--out", default=None, help="report JSON")
    _add_jobs(p)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("bench", help="simulation benchmark (setup 1 or 2)")
    p.add_argument("--setup", choices=["1", "2"], required=True)
    p.add_argument("--methods", default="mr,fndr,hc,all")
    p.add_argument("--runs", type=int, default=_env("runs", 25, int))
    p.add_argument("--seed", type=int, default=_env("seed", 0, int))
    kind = p.add_mutually_exclusive_group()
    kind.add_argument("--lda", action="store_true", help="force LDA (default for setup 2)")
    kind.add_argument("--dda", action="store_true", help="force DDA (default for setup 1)")
    p.add_argument("--estimator", choices=["fdr-effect", "naive", "efron"],
                   default=_env("estimator", "fdr-effect"))
    p.add_argument("--alpha", type=float, default=_env("alpha", 0.05, float))
    p.add_argument("--fndr-cutoff", type=float, default=_env("fndr_cutoff", 0.8, float))
    p.add_argument("--hc-fraction", type=float, default=_env("hc_fraction", 0.1, float))
    p.add_argument("--theoretical-null", action="store_true")
    p.add_argument("--truncation-quantile", type=float,
                   default=_env("truncation_quantile", 0.75, float))
    p.add_argument("--spread", choices=["sd", "se"], default="sd",
                   help="bracketed spread in the table (both are in the JSON)")
    p.add_argument("-o", "--out", default=None, help="report JSON")
    _add_jobs(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s: %(message)s")
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", RuntimeWarning)
            code = args.func(args)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        return code
    except BrokenPipeError:
        # downstream reader closed early (e.g. piped into head)
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK
    except UsageError as exc:
        print(f"sdavs: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, DataFormatError, DataValidationError, ValueError) as exc:
        print(f"sdavs: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"sdavs: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    raise SystemExit(main())
