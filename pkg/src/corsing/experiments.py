"""Manufactured solutions, best s-term baselines and the Monte-Carlo study runner.

Recovery errors are measured in coefficient space: for the H1-normalized
coefficient vectors ``u`` (reference) and ``v`` (recovered) the reported value
is ``|u - v|_2 / |u|_2``, a surrogate of the relative H1 error by norm
equivalence. The reference vector holds the coefficients of the level-``L``
interpolant of the exact solution.

Seeds
-----
Trial ``t`` at grid point ``g`` of study ``study_id`` uses the seed
``SeedSequence(master, spawn_key=(crc32(study_id), g, t)).generate_state(1, uint64)[0]``,
so results do not depend on the order in which studies or trials are run.
"""

from __future__ import annotations

import csv
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

import numpy as np
import yaml

from corsing.assembly import AdrProblem, CoeffField, assemble_B
from corsing.coherence import empirical_coherence, empirical_rule_m, recommend_R
from corsing.solver import corsing_solve, default_measure

__all__ = [
    "PRESETS",
    "SOLUTIONS",
    "STATS_COLUMNS",
    "SUMMARY_COLUMNS",
    "ManufacturedSolution",
    "StudyConfig",
    "TrialStats",
    "best_s_term",
    "build_problem",
    "load_config",
    "make_problem",
    "parse_field",
    "preset",
    "relative_error",
    "run_study",
    "trial_seed",
    "validate_suite",
    "write_coherence_csv",
]

STATS_COLUMNS = ("study_id", "s", "m", "measure", "seed", "rel_error", "runtime_ms")
SUMMARY_COLUMNS = (
    "study_id",
    "basis",
    "s",
    "m",
    "measure",
    "trials",
    "median",
    "q1",
    "q3",
    "whisker_low",
    "whisker_high",
    "n_outliers",
    "best_s_term_error",
    "median_over_best",
)


@dataclass(frozen=True)
class ManufacturedSolution:
    name: str
    n: int
    func: Callable = field(repr=False)
    description: str = ""

    def __call__(self, *x):
        return self.func(*x)


def _g(x, c, w):
    return np.exp(-((x - c) ** 2) / w)


SOLUTIONS = {
    "u1": ManufacturedSolution(
        "u1",
        1,
        lambda x: 1.0 + _g(x, 0.3, 0.0005) + 0.5 * np.cos(2 * np.pi * x),
        "bump at x = 0.3 on a smooth periodic background",
    ),
    "u2": ManufacturedSolution(
        "u2",
        2,
        lambda x1, x2: _g(x1, 0.3, 0.0005) * _g(x2, 0.4, 0.0005) + 2 * _g(x1, 0.6, 0.001) * _g(x2, 0.5, 0.005),
        "isotropic bump at (0.3, 0.4) plus anisotropic bump at (0.6, 0.5)",
    ),
    "u3": ManufacturedSolution(
        "u3",
        2,
        lambda x1, x2: _g(x1, 0.45, 0.005) + 0.0 * x2,
        "Gaussian ridge in x1, constant in x2",
    ),
    "u4": ManufacturedSolution(
        "u4",
        3,
        lambda x1, x2, x3: _g(x1, 0.4, 0.005) * _g(x2, 0.5, 0.0005) * _g(x3, 0.6, 0.005),
        "anisotropic Gaussian at (0.4, 0.5, 0.6)",
    ),
}


def relative_error(reference, approx) -> float:
    """``|reference - approx|_2 / |reference|_2``."""
    reference = np.asarray(reference)
    return float(np.linalg.norm(reference - np.asarray(approx)) / np.linalg.norm(reference))


def best_s_term(coeffs, s: int) -> tuple[np.ndarray, float]:
    """Support of the ``s`` largest entries (ties to the smaller index) and the relative tail norm."""
    coeffs = np.asarray(coeffs)
    if not 0 <= s <= len(coeffs):
        raise ValueError(f"s must lie in [0, {len(coeffs)}]")
    order = np.argsort(-np.abs(coeffs), kind="stable")
    support = np.sort(order[:s])
    tail = np.linalg.norm(coeffs[order[s:]])
    return support, float(tail / np.linalg.norm(coeffs))


@dataclass
class TrialStats:
    """Per-trial errors of one grid point plus box-plot statistics (1.5 IQR whiskers)."""

    study_id: str
    basis: str
    s: int
    m: int
    measure: str
    errors: np.ndarray
    seeds: list
    runtimes_ms: list
    best_error: float

    @property
    def median(self) -> float:
        return float(np.median(self.errors))

    @property
    def quartiles(self) -> tuple[float, float]:
        q1, q3 = np.percentile(self.errors, [25, 75])
        return float(q1), float(q3)

    @property
    def whiskers(self) -> tuple[float, float]:
        q1, q3 = self.quartiles
        iqr = q3 - q1
        e = self.errors
        inside = e[(e >= q1 - 1.5 * iqr) & (e <= q3 + 1.5 * iqr)]
        return float(inside.min()), float(inside.max())

    @property
    def outliers(self) -> np.ndarray:
        lo, hi = self.whiskers
        return self.errors[(self.errors < lo) | (self.errors > hi)]

    def summary_row(self) -> dict:
        q1, q3 = self.quartiles
        lo, hi = self.whiskers
        return {
            "study_id": self.study_id,
            "basis": self.basis,
            "s": self.s,
            "m": self.m,
            "measure": self.measure,
            "trials": len(self.errors),
            "median": self.median,
            "q1": q1,
            "q3": q3,
            "whisker_low": lo,
            "whisker_high": hi,
            "n_outliers": len(self.outliers),
            "best_s_term_error": self.best_error,
            "median_over_best": self.median / self.best_error if self.best_error > 0 else float("inf"),
        }


def parse_field(spec, n: int) -> CoeffField:
    """Coefficient field from a config value.

    Accepted forms: a number; ``{"mean": a, "amplitude": b, "freq": k}`` for
    ``a + b sin(2 pi k x)`` (1D); ``{"terms": [[r_1, ..., r_n, re, im], ...]}``;
    the string ``"sine:a,b,k"``.
    """
    if isinstance(spec, CoeffField):
        return spec
    if isinstance(spec, (int, float)):
        return CoeffField.constant(float(spec), n)
    if isinstance(spec, str):
        if spec.startswith("sine:"):
            a, b, k = spec[5:].split(",")
            return CoeffField.sine(float(a), float(b), int(k))
        return CoeffField.constant(float(spec), n)
    if isinstance(spec, dict):
        if "terms" in spec:
            return CoeffField.from_terms(
                (tuple(t[:n]), complex(t[n], t[n + 1] if len(t) > n + 1 else 0.0)) for t in spec["terms"]
            )
        if {"mean", "amplitude", "freq"} <= set(spec):
            if n != 1:
                raise ValueError("sine fields are one-dimensional")
            return CoeffField.sine(float(spec["mean"]), float(spec["amplitude"]), int(spec["freq"]))
    raise ValueError(f"cannot interpret coefficient field {spec!r}")


@dataclass(frozen=True)
class StudyConfig:
    """One Monte-Carlo study: a problem and a grid over ``s``, ``m`` and sampling measures.

    ``m_rule = "2slogN"`` replaces the ``m`` grid by ``ceil(2 s ln N)`` for each ``s``.
    ``R = None`` selects the practical truncation (``N`` in 1D, ``2^L`` otherwise).
    """

    study_id: str
    solution: str
    basis: str = "ani"
    l0: int = 2
    L: int = 9
    R: Optional[int] = None
    eta: object = 1.0
    beta: object = 0.0
    rho: object = 1.0
    s: tuple = (50,)
    m: tuple = ()
    m_rule: Optional[str] = None
    measures: tuple = ("nonuniform",)
    trials: int = 100
    dedup: bool = False
    load: str = "consistent"
    coherence: bool = False

    def __post_init__(self):
        if self.solution not in SOLUTIONS:
            raise ValueError(f"unknown solution {self.solution!r}; choose from {sorted(SOLUTIONS)}")
        for name in ("s", "m", "measures"):
            val = getattr(self, name)
            if isinstance(val, (int, str)):
                val = (val,)
            object.__setattr__(self, name, tuple(val))
        if self.m_rule not in (None, "2slogN"):
            raise ValueError(f"unknown m rule {self.m_rule!r}")
        if not self.m and self.m_rule is None:
            raise ValueError("give an m grid or an m rule")
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if not self.s or min(self.s) < 1:
            raise ValueError("s grid must hold positive integers")

    @property
    def n(self) -> int:
        return SOLUTIONS[self.solution].n

    @classmethod
    def from_dict(cls, d: dict) -> "StudyConfig":
        d = dict(d)
        if "problem" in d:
            d["solution"] = d.pop("problem")
        if "l_0" in d:
            d["l0"] = d.pop("l_0")
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        out = asdict(self)
        for k in ("eta", "beta", "rho"):
            if isinstance(out[k], CoeffField):
                out[k] = {"terms": [[*r, c.real, c.imag] for r, c in out[k].terms]}
        return out

    def grid(self, N: int) -> list[tuple[int, int, str]]:
        pts = []
        for s in self.s:
            ms = [empirical_rule_m(s, N)] if self.m_rule else list(self.m)
            for m in ms:
                for meas in self.measures:
                    pts.append((s, m, meas))
        return pts


def make_problem(solution: str, basis: str = "ani", l0: int = 2, L: int = 9, R=None, eta=1.0, beta=0.0, rho=1.0) -> AdrProblem:
    """Problem for a named manufactured solution with config-style field specs (see :func:`parse_field`).

    A scalar ``beta`` is used for every axis. ``basis`` is ignored in 1D.
    """
    if solution not in SOLUTIONS:
        raise ValueError(f"unknown solution {solution!r}; choose from {sorted(SOLUTIONS)}")
    n = SOLUTIONS[solution].n
    mode = "1d" if n == 1 else basis
    R = R if R is not None else recommend_R(1, 2 ** (n * L), n, practical=True)
    if isinstance(beta, (list, tuple)):
        beta = tuple(parse_field(b, n) for b in beta)
    else:
        beta = tuple(parse_field(beta, n) for _ in range(n))
    return AdrProblem(
        n=n,
        l0=l0,
        L=L,
        R=R,
        mode=mode,
        eta=parse_field(eta, n),
        beta=beta,
        rho=parse_field(rho, n),
        solution=SOLUTIONS[solution],
    )


def build_problem(config: StudyConfig) -> AdrProblem:
    c = config
    return make_problem(c.solution, c.basis, c.l0, c.L, c.R, c.eta, c.beta, c.rho)


def load_config(path) -> list[StudyConfig]:
    """Read studies from a YAML (or JSON) file: a mapping, a list, or ``{"studies": [...]}``."""
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if isinstance(data, dict) and "studies" in data:
        data = data["studies"]
    if isinstance(data, dict):
        data = [data]
    return [StudyConfig.from_dict(d) for d in data]


_M_1D = tuple(range(100, 501, 50))
_OSC = {"mean": 1.0, "amplitude": 0.5, "freq": 3}

PRESETS = {
    "m_sweep_1d": [
        dict(study_id="msweep_const", solution="u1", L=9, s=[50], m=_M_1D),
        dict(study_id="msweep_osc", solution="u1", L=9, eta=_OSC, s=[50], m=_M_1D),
    ],
    "s_sweep_1d": [
        dict(study_id="ssweep_const", solution="u1", L=9, s=list(range(5, 51, 5)), m_rule="2slogN"),
        dict(study_id="ssweep_osc", solution="u1", L=9, eta=_OSC, s=list(range(5, 51, 5)), m_rule="2slogN"),
    ],
    "u2_2d": [
        dict(
            study_id=f"u2_{b}",
            solution="u2",
            basis=b,
            L=6,
            beta=[1.0, 1.0],
            s=[100],
            m=[100, 200, 300, 400, 500],
            measures=["uniform", "nonuniform"],
        )
        for b in ("ani", "iso")
    ],
    "u3_2d": [
        dict(
            study_id=f"u3_{b}",
            solution="u3",
            basis=b,
            L=6,
            beta=[1.0, 1.0],
            s=[100],
            m=[100, 200, 300, 400, 500],
            measures=["uniform", "nonuniform"],
        )
        for b in ("ani", "iso")
    ],
    "u4_3d": [
        dict(
            study_id=f"u4_{b}",
            solution="u4",
            basis=b,
            L=4,
            beta=[1.0, 1.0, 1.0],
            s=[200],
            m=[200, 300, 400, 500, 600],
            measures=["uniform", "nonuniform"],
        )
        for b in ("ani", "iso")
    ],
}


def preset(name: str, **overrides) -> list[StudyConfig]:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return [StudyConfig.from_dict({**d, **overrides}) for d in PRESETS[name]]


def trial_seed(master: int, study_id: str, point: int, trial: int) -> int:
    ss = np.random.SeedSequence(int(master), spawn_key=(zlib.crc32(study_id.encode()), point, trial))
    return int(ss.generate_state(1, np.uint64)[0])


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, (float, np.floating)) else str(x)


def run_study(
    configs: Union[StudyConfig, Sequence[StudyConfig]],
    out_dir=None,
    seed: int = 0,
    record_timing: bool = True,
    workers: int = 1,
) -> list[TrialStats]:
    """Run every grid point of every study and optionally write the CSV outputs.

    Parameters
    ----------
    configs : StudyConfig or sequence of StudyConfig
    out_dir : path-like, optional
        Receives ``stats.csv``, ``summary.csv`` and, for studies with
        ``coherence=True``, ``coherence_<study_id>.csv``.
    seed : int
        Master seed (see module docstring for the splitting rule).
    record_timing : bool
        With ``False`` the ``runtime_ms`` column is written as 0, making the
        output byte-for-byte reproducible.
    workers : int
        Trials of one grid point are distributed over this many threads.
    """
    if isinstance(configs, StudyConfig):
        configs = [configs]
    results: list[TrialStats] = []
    for cfg in configs:
        problem = build_problem(cfg)
        ref = problem.reference_coefficients
        measures = {}
        for g, (s, m, meas) in enumerate(cfg.grid(problem.N)):
            if meas not in measures:
                measures[meas] = default_measure(problem, meas)
            measure = measures[meas]
            seeds = [trial_seed(seed, cfg.study_id, g, t) for t in range(cfg.trials)]

            def one(sd, s=s, m=m, measure=measure):
                t0 = time.perf_counter()
                _, x, _ = corsing_solve(problem, s, m, measure, sd, dedup=cfg.dedup, load=cfg.load)
                return relative_error(ref, x), (time.perf_counter() - t0) * 1e3

            if workers > 1:
                with ThreadPoolExecutor(workers) as pool:
                    out = list(pool.map(one, seeds))
            else:
                out = [one(sd) for sd in seeds]
            errors = np.array([e for e, _ in out])
            times = [t if record_timing else 0 for _, t in out]
            best = best_s_term(ref, s)[1]
            results.append(TrialStats(cfg.study_id, problem.mode, s, m, meas, errors, seeds, times, best))
        if out_dir is not None and cfg.coherence:
            write_coherence_csv(problem, Path(out_dir) / f"coherence_{cfg.study_id}.csv")
    if out_dir is not None:
        _write_outputs(results, Path(out_dir))
    return results


def _write_outputs(results: list[TrialStats], out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "stats.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(STATS_COLUMNS)
        for st in results:
            for sd, err, rt in zip(st.seeds, st.errors, st.runtimes_ms):
                w.writerow([st.study_id, st.s, st.m, st.measure, sd, _fmt(err), _fmt(round(float(rt), 3))])
    with open(out_dir / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for st in results:
            row = st.summary_row()
            w.writerow([_fmt(row[c]) for c in SUMMARY_COLUMNS])


def write_coherence_csv(problem: AdrProblem, path, measure: str = "nonuniform") -> Path:
    """Write ``q_1..q_n, nu, p, mu`` for every test frequency (``mu`` from the assembled matrix)."""
    meas = default_measure(problem, measure)
    mu = empirical_coherence(assemble_B(problem))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"q{d + 1}" for d in range(problem.n)] + ["nu", "p", "mu"])
        for q, v, p, u in zip(problem.tests, meas.bound, meas.probabilities, mu):
            w.writerow([*map(int, q), _fmt(v), _fmt(p), _fmt(u)])
    return path


def validate_suite(filters=None, quick: bool = False) -> list:
    """Run the built-in oracle checks; see :mod:`corsing.validation`."""
    from corsing.validation import run_checks

    return run_checks(filters=filters, quick=quick)
