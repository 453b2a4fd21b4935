"""Simulation benchmarks and repeated stratified cross-validation.

Run ``r`` of a benchmark started with seed ``s`` draws its data with seed
``s + r``.  Tasks may run in worker processes, but results are collected in
task order, so reports do not depend on scheduling.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .classifier import ShrinkageDiscriminantAnalysis
from .dataset import LabeledMatrix, stratified_folds
from .simgen import gen_setup1, gen_setup2

SETUPS = {1: gen_setup1, 2: gen_setup2}
METHODS = ("mr", "fndr", "hc", "all")


@dataclass
class MethodRow:
    """Per-run errors and selected-feature counts of one method."""

    name: str
    errors: np.ndarray
    counts: np.ndarray

    @staticmethod
    def _spread(x):
        # SD and SE are undefined for a single run
        if x.size < 2:
            return None, None
        sd = float(np.std(x, ddof=1))
        return sd, sd / np.sqrt(x.size)

    def summary(self) -> dict:
        sd_e, se_e = self._spread(self.errors)
        sd_f, se_f = self._spread(self.counts)
        return {
            "method": self.name,
            "mean_error": float(np.mean(self.errors)),
            "sd_error": sd_e,
            "se_error": se_e,
            "mean_features": float(np.mean(self.counts)),
            "sd_features": sd_f,
            "se_features": se_f,
            "errors": [float(e) for e in self.errors],
            "features": [int(c) for c in self.counts],
        }


@dataclass
class BenchmarkReport:
    """Table-style summary of a benchmark or cross-validation run.

    ``runs`` counts simulation runs, or fold-repetition cells for CV.
    """

    title: str
    rows: list
    runs: int
    seeds: list
    config: dict
    extra: dict = field(default_factory=dict)

    def row(self, name: str) -> dict:
        for r in self.rows:
            if r.name == name:
                return r.summary()
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "schema": "sdavs.benchmark",
            "title": self.title,
            "runs": self.runs,
            "seeds": list(self.seeds),
            "config": self.config,
            "rows": [r.summary() for r in self.rows],
            **self.extra,
        }

    def format_table(self, spread: str = "sd") -> str:
        """Text table with ``mean (spread)`` cells; ``spread`` is ``"sd"`` or ``"se"``."""
        head = f"{'Method':<12}{'Prediction Error':>20}{'Features':>22}"
        lines = [self.title, head, "-" * len(head)]
        for r in self.rows:
            s = r.summary()
            e_sp, f_sp = s[f"{spread}_error"], s[f"{spread}_features"]
            err = f"{s['mean_error']:.4f}" + ("" if e_sp is None else f" ({e_sp:.4f})")
            feat = f"{s['mean_features']:.2f}" + ("" if f_sp is None else f" ({f_sp:.2f})")
            lines.append(f"{r.name:<12}{err:>20}{feat:>22}")
        label = "sample SD over runs" if spread == "sd" else "SD / sqrt(runs)"
        lines.append(f"runs = {self.runs}; brackets: {label}")
        return "\n".join(lines)


def _map(fn, tasks, jobs):
    if jobs is None or jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))


def _fit_quiet(options, X, y):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return ShrinkageDiscriminantAnalysis(**options).fit(X, y)


def _select_quiet(clf, method):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return clf.select(method)


def _sim_task(task):
    setup, seed, methods, options = task
    train, test = SETUPS[setup](seed)
    clf = _fit_quiet(options, train.X, train.y)
    out = []
    for m in methods:
        _select_quiet(clf, m)
        err = float(np.mean(clf.predict(test.X) != test.y))
        out.append((err, len(clf.selected_), "fallback" in clf.selection_.diagnostics))
    return out


def default_options(setup: int) -> dict:
    """DDA for the uncorrelated setup 1, LDA for the correlated setup 2."""
    return {"diagonal": setup == 1}


def run_sim_benchmark(setup: int, methods=METHODS, runs: int = 25, seed: int = 0,
                      jobs: int | None = 1, options: dict | None = None) -> BenchmarkReport:
    """Repeat a simulation setup ``runs`` times and tabulate test error and feature counts.

    The classifier is fitted once per run; every method re-selects features
    on the same fitted scores.
    """
    if setup not in SETUPS:
        raise ValueError(f"unknown setup {setup!r}; choose 1 or 2")
    if runs < 1:
        raise ValueError("runs must be positive")
    methods = [m.lower() for m in methods]
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}; choose from {METHODS}")
    options = default_options(setup) if options is None else dict(options)
    seeds = [seed + r for r in range(runs)]
    results = _map(_sim_task, [(setup, s, methods, options) for s in seeds], jobs)
    prefix = "DDA" if options.get("diagonal") else "LDA"
    rows = []
    for j, m in enumerate(methods):
        errs = np.array([res[j][0] for res in results])
        counts = np.array([res[j][1] for res in results])
        rows.append(MethodRow(f"{prefix}-{m.upper()}", errs, counts))
    fallbacks = {f"{prefix}-{m.upper()}": int(sum(res[j][2] for res in results))
                 for j, m in enumerate(methods)}
    return BenchmarkReport(
        title=f"Simulation setup {setup}",
        rows=rows, runs=runs, seeds=seeds,
        config={"setup": setup, "methods": methods, "seed": seed, "options": options},
        extra={"fallback_runs": fallbacks},
    )


def _cv_task(task):
    X, y, train, test, options = task
    clf = _fit_quiet(options, X[train], y[train])
    err = float(np.mean(clf.predict(X[test]) != y[test]))
    return err, len(clf.selected_)


def crossval(data: LabeledMatrix, options: dict | None = None, folds: int = 10,
             reps: int = 20, seed: int = 0, jobs: int | None = 1) -> BenchmarkReport:
    """Repeated stratified ``folds``-fold cross-validation.

    Everything, including feature selection, is refitted inside each training
    fold.  The reported feature count comes from one additional fit on the
    whole data set; per-fold counts are kept under ``fold_features``.
    """
    options = {} if options is None else dict(options)
    splits = stratified_folds(data, folds, reps, seed)
    tasks = [(data.X, data.y, tr, te, options) for tr, te in splits]
    results = _map(_cv_task, tasks, jobs)
    errs = np.array([r[0] for r in results])
    whole = _fit_quiet(options, data.X, data.y)
    n_whole = len(whole.selected_)
    prefix = "DDA" if options.get("diagonal") else "LDA"
    name = f"{prefix}-{str(options.get('selection', 'mr')).upper()}"
    row = MethodRow(name, errs, np.array([n_whole]))
    return BenchmarkReport(
        title=f"{folds}-fold cross-validation, {reps} repetitions",
        rows=[row], runs=len(splits), seeds=[seed],
        config={"folds": folds, "reps": reps, "seed": seed, "options": options,
                "n_samples": data.n_samples, "n_features": data.n_features},
        extra={
            "whole_data_features": n_whole,
            "whole_data_selected": [int(i) for i in whole.selected_],
            "fold_features": [int(r[1]) for r in results],
        },
    )
