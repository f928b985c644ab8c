"""Experiment grids over mechanisms, epsilon, delta0, alpha and passes.

Every cell is run once per shuffle; a shuffle is a different ordering-hash
seed (``base_seed + shuffle index``), which is the only user order the
pipeline ever sees. Sweeping hyperparameters and picking the best cell is
not itself private, so every result is labeled ``private: false``.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from dpsu.calibration import calibrate
from dpsu.core import Mechanism, MechanismConfig, PrivacyParams
from dpsu.ingestion import LognormalSetSize, load_corpus, synth_zipf_corpus
from dpsu.release import run_dpsu

CSV_COLUMNS = ("mechanism", "epsilon", "delta0", "alpha", "passes", "mean", "sd")


@dataclass(frozen=True)
class SynthSpec:
    users: int = 20000
    vocab: int = 50000
    exponent: float = 1.0
    mu: float = 3.0
    sigma: float = 1.0
    seed: int = 7

    def build(self):
        return synth_zipf_corpus(self.users, self.vocab, self.exponent,
                                 LognormalSetSize(self.mu, self.sigma), self.seed)


@dataclass(frozen=True)
class ExperimentSpec:
    mechanisms: tuple
    epsilons: tuple = (3.0,)
    delta: float = math.exp(-10)
    delta0s: tuple = (100,)
    alphas: tuple = (5.0,)
    shuffles: int = 5
    passes: tuple = (1,)
    base_seed: int = 0
    corpus: str | None = None
    corpus_format: str | None = None
    ngram: int = 1
    synth: SynthSpec | None = None

    def __post_init__(self):
        object.__setattr__(self, "mechanisms", tuple(Mechanism(m) for m in self.mechanisms))
        for name in ("mechanisms", "epsilons", "delta0s", "alphas", "passes"):
            value = tuple(getattr(self, name))
            if not value:
                raise ValueError(f"{name} must be non-empty")
            object.__setattr__(self, name, value)
        if self.shuffles < 1:
            raise ValueError("shuffles must be at least 1")
        if (self.corpus is None) == (self.synth is None):
            raise ValueError("give exactly one of corpus or synth")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        d = dict(d)
        if isinstance(d.get("synth"), dict):
            d["synth"] = SynthSpec(**d["synth"])
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "ExperimentSpec":
        with open(path, encoding="utf-8") as fh:
            spec = cls.from_dict(json.load(fh))
        # Relative corpus paths resolve against the spec file.
        if spec.corpus and not os.path.isabs(spec.corpus):
            base = os.path.dirname(os.path.abspath(path))
            spec = ExperimentSpec.from_dict({**spec.to_dict(),
                                             "corpus": os.path.join(base, spec.corpus)})
        return spec

    def to_dict(self) -> dict:
        return {
            "mechanisms": [m.value for m in self.mechanisms],
            "epsilons": list(self.epsilons),
            "delta": self.delta,
            "delta0s": list(self.delta0s),
            "alphas": list(self.alphas),
            "shuffles": self.shuffles,
            "passes": list(self.passes),
            "base_seed": self.base_seed,
            "corpus": self.corpus,
            "corpus_format": self.corpus_format,
            "ngram": self.ngram,
            "synth": None if self.synth is None else vars(self.synth).copy(),
        }

    def load_database(self):
        if self.synth is not None:
            return self.synth.build()
        return load_corpus(self.corpus, self.corpus_format, self.ngram)

    def cells(self):
        return list(itertools.product(self.mechanisms, self.epsilons, self.delta0s,
                                      self.alphas, self.passes))


@dataclass
class CellResult:
    mechanism: Mechanism
    epsilon: float
    delta0: int
    alpha: float
    passes: int
    sizes: list = field(default_factory=list)
    error: str | None = None

    @property
    def key(self):
        return (self.mechanism, self.epsilon, self.delta0, self.alpha, self.passes)

    @property
    def mean(self) -> float | None:
        return float(np.mean(self.sizes)) if self.sizes else None

    @property
    def sd(self) -> float | None:
        if not self.sizes:
            return None
        return float(np.std(self.sizes, ddof=1)) if len(self.sizes) > 1 else 0.0

    def to_dict(self) -> dict:
        return {
            "mechanism": self.mechanism.value,
            "epsilon": self.epsilon,
            "delta0": self.delta0,
            "alpha": self.alpha,
            "passes": self.passes,
            "mean": self.mean,
            "sd": self.sd,
            "sizes": list(self.sizes),
            "error": self.error,
        }


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    cells: list

    def cell(self, mechanism, epsilon=None, delta0=None, alpha=None, passes=1) -> CellResult:
        mechanism = Mechanism(mechanism)
        for c in self.cells:
            if (c.mechanism is mechanism and (epsilon is None or c.epsilon == epsilon)
                    and (delta0 is None or c.delta0 == delta0)
                    and (alpha is None or c.alpha == alpha) and c.passes == passes):
                return c
        raise KeyError((mechanism, epsilon, delta0, alpha, passes))

    def to_dict(self) -> dict:
        return {
            "private": False,
            "note": "hyperparameter sweep; choosing a cell after seeing results spends extra privacy budget",
            "spec": self.spec.to_dict(),
            "cells": [c.to_dict() for c in self.cells],
        }


# -- grid execution -----------------------------------------------------------

_WORKER_DB = None


def _init_worker(spec_dict):
    global _WORKER_DB
    _WORKER_DB = ExperimentSpec.from_dict(spec_dict).load_database()


def _run_cell(db, spec: ExperimentSpec, cell) -> CellResult:
    mech, eps, delta0, alpha, passes = cell
    out = CellResult(mech, eps, delta0, alpha, passes)
    try:
        params = PrivacyParams(eps, spec.delta)
        cal = calibrate(mech, params, delta0, alpha)
        for s in range(spec.shuffles):
            config = MechanismConfig(mech, delta0=delta0, alpha=alpha,
                                     seed=spec.base_seed + s, passes=passes,
                                     experimental=passes > 1)
            out.sizes.append(run_dpsu(db, config, params, calibration=cal).released_size)
    except Exception as exc:  # one bad cell must not sink the grid
        out.sizes = []
        out.error = f"{type(exc).__name__}: {exc}"
    return out


def _run_cell_in_worker(args):
    spec_dict, cell = args
    return _run_cell(_WORKER_DB, ExperimentSpec.from_dict(spec_dict), cell)


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("DPSU_WORKERS", "1")))
    except ValueError:
        return 1


def run_grid(spec: ExperimentSpec, db=None, workers: int | None = None) -> ExperimentResult:
    """Run every (cell, shuffle) pair and aggregate sizes per cell.

    ``db`` may be supplied to skip loading the corpus. ``workers`` defaults to
    ``$DPSU_WORKERS`` (1 if unset). Cell order in the result always follows
    the spec, whatever order the workers finish in.
    """
    workers = workers or default_workers()
    cells = spec.cells()
    if workers <= 1 or len(cells) <= 1:
        db = db if db is not None else spec.load_database()
        return ExperimentResult(spec, [_run_cell(db, spec, c) for c in cells])
    spec_dict = spec.to_dict()
    with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                             initargs=(spec_dict,)) as pool:
        results = list(pool.map(_run_cell_in_worker, [(spec_dict, c) for c in cells]))
    return ExperimentResult(spec, results)


def welch_test(a, b):
    """Two-sided Welch t-test returning (t, p).

    Degenerate zero-variance samples are handled explicitly: equal means give
    (0, 1), different means give (+-inf, 0).
    """
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if np.var(a) == 0 and np.var(b) == 0:
        diff = a.mean() - b.mean()
        if diff == 0:
            return 0.0, 1.0
        return math.copysign(math.inf, diff), 0.0
    res = stats.ttest_ind(a, b, equal_var=False)
    return float(res.statistic), float(res.pvalue)


def compare_passes(spec: ExperimentSpec, db=None, workers=None):
    """Run the grid with passes {1, 2} and t-test single vs double pass per cell.

    Returns:
      (ExperimentResult, list of dicts with mechanism, epsilon, delta0, alpha,
      mean_1, mean_2, t, p)
    """
    if spec.shuffles < 2:
        raise ValueError("comparing passes needs at least two shuffles")
    spec = ExperimentSpec.from_dict({**spec.to_dict(), "passes": [1, 2]})
    result = run_grid(spec, db=db, workers=workers)
    tests = []
    for mech, eps, delta0, alpha in itertools.product(spec.mechanisms, spec.epsilons,
                                                      spec.delta0s, spec.alphas):
        one = result.cell(mech, eps, delta0, alpha, passes=1)
        two = result.cell(mech, eps, delta0, alpha, passes=2)
        if one.error or two.error:
            continue
        t, p = welch_test(one.sizes, two.sizes)
        tests.append({"mechanism": mech.value, "epsilon": eps, "delta0": delta0,
                      "alpha": alpha, "mean_1": one.mean, "mean_2": two.mean,
                      "t": t, "p": p})
    return result, tests


# -- reports ------------------------------------------------------------------

def _fmt(x):
    return "n/a" if x is None else f"{x:.1f}"


def _groups(result):
    """Cells grouped by (epsilon, alpha, passes) for Table-2-style layouts."""
    groups = {}
    for c in result.cells:
        groups.setdefault((c.epsilon, c.alpha, c.passes), []).append(c)
    return groups


def to_markdown(result: ExperimentResult) -> str:
    spec = result.spec
    lines = ["Released set sizes, mean ± sd over "
             f"{spec.shuffles} shuffle(s); delta = {spec.delta:.6g}. Not private.", ""]
    for (eps, alpha, passes), cells in _groups(result).items():
        lines.append(f"### epsilon = {eps:g}, alpha = {alpha:g}, passes = {passes}")
        lines.append("")
        lines.append("| mechanism | " + " | ".join(f"delta0 = {d}" for d in spec.delta0s) + " |")
        lines.append("|---|" + "---:|" * len(spec.delta0s))
        for mech in spec.mechanisms:
            row = []
            for d in spec.delta0s:
                c = next(c for c in cells if c.mechanism is mech and c.delta0 == d)
                row.append(f"error: {c.error}" if c.error else f"{_fmt(c.mean)} ± {_fmt(c.sd)}")
            lines.append(f"| {mech.value} | " + " | ".join(row) + " |")
        lines.append("")
    return "\n".join(lines)


def to_csv(result: ExperimentResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for c in result.cells:
        writer.writerow([c.mechanism.value, c.epsilon, c.delta0, c.alpha, c.passes,
                         "" if c.mean is None else repr(c.mean),
                         "" if c.sd is None else repr(c.sd)])
    return buf.getvalue()


def epsilon_series(result: ExperimentResult) -> list:
    """Size-vs-epsilon series per (mechanism, delta0, alpha, passes)."""
    series = {}
    for c in result.cells:
        key = (c.mechanism.value, c.delta0, c.alpha, c.passes)
        series.setdefault(key, []).append([c.epsilon, c.mean])
    return [{"mechanism": k[0], "delta0": k[1], "alpha": k[2], "passes": k[3],
             "points": sorted(v, key=lambda p: p[0])} for k, v in series.items()]


def to_json(result: ExperimentResult) -> str:
    doc = result.to_dict()
    doc["epsilon_series"] = epsilon_series(result)
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def emit_report(result: ExperimentResult, path, format=None) -> None:
    """Write ``result`` as JSON, Markdown or CSV (inferred from the extension)."""
    fmt = (format or os.path.splitext(str(path))[1].lstrip(".") or "json").lower()
    render = {"json": to_json, "md": to_markdown, "markdown": to_markdown, "csv": to_csv}
    if fmt not in render:
        raise ValueError(f"unknown report format {fmt!r}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render[fmt](result))
