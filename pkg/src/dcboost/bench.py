"""Multi-start experiment harness.

Runs the solvers from seeded random starts, classifies limit points
against known references, and aggregates basin counts and paired
objective comparisons.  Determinism contract: every start draws its own
random substream keyed by ``(seed, start_index)``, so reports are
bitwise identical for a given spec regardless of execution order or the
number of workers.  Wall times are measured and carried in the report
but are the one field excluded from that contract.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Any, Optional, Sequence

import numpy as np

from dcboost.core import RunResult, SolverParams, Termination
from dcboost.problems.example2d import CRITICAL_POINTS, Example2dProblem
from dcboost.problems.mssc import ClusterData, MsscProblem
from dcboost.solvers import run_bdca, run_bdca_plus, run_dca
from dcboost.spanning import PositiveSpanningSet, make_d1, make_d2, make_d3

__all__ = [
    "ALGORITHMS",
    "TABLE1_BOX",
    "ExperimentSpec",
    "StartSummary",
    "PairRow",
    "PairedStats",
    "MultiStartReport",
    "classify_limit_point",
    "run_table1",
    "run_pairwise_mssc",
    "make_pss",
]

ALGORITHMS = ("DCA", "BDCA", "BDCA+")
TABLE1_BOX = (-1.5, 1.5)
UNCLASSIFIED = "unclassified"

_PSS_FACTORIES = {"d1": make_d1, "d2": make_d2, "d3": make_d3}


def make_pss(kind: str, dim: int) -> PositiveSpanningSet:
    """Build one of the named spanning sets ("d1", "d2", "d3")."""
    try:
        return _PSS_FACTORIES[kind](dim)
    except KeyError:
        raise ValueError(f"unknown spanning set kind {kind!r}") from None


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything needed to reproduce a multi-start experiment."""

    problem_id: str  # "example2d" or "mssc"
    algorithms: tuple[str, ...]
    n_starts: int
    seed: int
    pss_kind: str = "d1"
    params: SolverParams = field(default_factory=SolverParams)
    k: Optional[int] = None  # clustering only
    data: Optional[ClusterData] = None  # clustering only
    rho: Optional[float] = None  # clustering only; default 1/(n*k)

    def __post_init__(self) -> None:
        if self.n_starts < 1:
            raise ValueError("n_starts must be >= 1")
        if self.problem_id not in ("example2d", "mssc"):
            raise ValueError(f"unknown problem_id {self.problem_id!r}")
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown:
            raise ValueError(f"unknown algorithms: {sorted(unknown)}")


@dataclass
class StartSummary:
    """Outcome of one run from one start (trace dropped, finals kept)."""

    index: int
    x0: np.ndarray
    final_point: np.ndarray
    final_phi: float
    n_iterations: int
    dfo_invocations: int
    wall_time: Optional[float]
    termination: Termination
    label: Optional[str] = None

    def to_dict(self, include_timings: bool = False) -> dict[str, Any]:
        return {
            "index": self.index,
            "x0": self.x0.tolist(),
            "final_point": self.final_point.tolist(),
            "final_phi": self.final_phi,
            "n_iterations": self.n_iterations,
            "dfo_invocations": self.dfo_invocations,
            "wall_time": self.wall_time if include_timings else None,
            "termination": self.termination.value,
            "label": self.label,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "StartSummary":
        return cls(
            index=d["index"],
            x0=np.asarray(d["x0"], dtype=float),
            final_point=np.asarray(d["final_point"], dtype=float),
            final_phi=d["final_phi"],
            n_iterations=d["n_iterations"],
            dfo_invocations=d["dfo_invocations"],
            wall_time=d["wall_time"],
            termination=Termination(d["termination"]),
            label=d["label"],
        )


@dataclass
class PairRow:
    """A paired comparison of two algorithms from one shared start."""

    instance: int
    phi_dca: float
    phi_bdca_plus: float
    gap: float
    iters_dca: int
    iters_bdca_plus: int
    dfo_invocations: int
    time_ratio: Optional[float]

    def to_dict(self, include_timings: bool = False) -> dict[str, Any]:
        return {
            "instance": self.instance,
            "phi_dca": self.phi_dca,
            "phi_bdca_plus": self.phi_bdca_plus,
            "gap": self.gap,
            "iters_dca": self.iters_dca,
            "iters_bdca_plus": self.iters_bdca_plus,
            "dfo_invocations": self.dfo_invocations,
            "time_ratio": self.time_ratio if include_timings else None,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "PairRow":
        return cls(**d)


@dataclass
class PairedStats:
    win_fraction: float
    mean_gap: float
    max_gap: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "win_fraction": self.win_fraction,
            "mean_gap": self.mean_gap,
            "max_gap": self.max_gap,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "PairedStats":
        return cls(**d)


@dataclass
class MultiStartReport:
    """Aggregated multi-start results.

    ``runs`` keeps one summary list per algorithm (ordered by start
    index).  ``basin_counts`` maps algorithm -> label -> count and is
    present for the 2-D experiment only.  ``pairs``/``paired_stats``
    are present for paired comparisons only, with rows sorted by
    objective gap descending.
    """

    runs: dict[str, list[StartSummary]]
    basin_counts: Optional[dict[str, dict[str, int]]] = None
    pairs: Optional[list[PairRow]] = None
    paired_stats: Optional[PairedStats] = None

    def to_dict(self, include_timings: bool = False) -> dict[str, Any]:
        return {
            "runs": {
                algo: [s.to_dict(include_timings) for s in rows]
                for algo, rows in self.runs.items()
            },
            "basin_counts": self.basin_counts,
            "pairs": (
                None
                if self.pairs is None
                else [p.to_dict(include_timings) for p in self.pairs]
            ),
            "paired_stats": (
                None if self.paired_stats is None else self.paired_stats.to_dict()
            ),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "MultiStartReport":
        return cls(
            runs={
                algo: [StartSummary.from_dict(s) for s in rows]
                for algo, rows in d["runs"].items()
            },
            basin_counts=d["basin_counts"],
            pairs=(
                None
                if d["pairs"] is None
                else [PairRow.from_dict(p) for p in d["pairs"]]
            ),
            paired_stats=(
                None
                if d["paired_stats"] is None
                else PairedStats.from_dict(d["paired_stats"])
            ),
        )


def classify_limit_point(
    x: np.ndarray,
    references: Sequence[tuple[str, np.ndarray]],
    tol: float = 1e-3,
) -> str:
    """Label of the unique reference within ``tol`` of ``x`` (Euclidean),
    or ``"unclassified"``.

    References closer than ``2*tol`` to each other would make labels
    ambiguous, so that configuration is rejected outright.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    pts = [np.asarray(p, dtype=float) for _, p in references]
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if float(np.linalg.norm(pts[i] - pts[j])) <= 2.0 * tol:
                raise ValueError(
                    f"references {references[i][0]!r} and {references[j][0]!r} "
                    f"are too close for tol={tol}"
                )
    x = np.asarray(x, dtype=float)
    for (label, _), p in zip(references, pts):
        if float(np.linalg.norm(x - p)) <= tol:
            return label
    return UNCLASSIFIED


def _chunk_ranges(n: int, n_chunks: int) -> list[tuple[int, int]]:
    n_chunks = max(1, min(n_chunks, n))
    bounds = np.linspace(0, n, n_chunks + 1, dtype=int)
    return [(int(bounds[i]), int(bounds[i + 1])) for i in range(n_chunks)]


def _run_chunks(task, n_starts: int, workers: int) -> list[dict]:
    """Run ``task`` over index ranges and concatenate, order-preserving."""
    if workers <= 1:
        out = []
        for rng in _chunk_ranges(n_starts, 1):
            out.extend(task(rng))
        return out
    ranges = _chunk_ranges(n_starts, workers * 4)
    results: list[dict] = []
    with ProcessPoolExecutor(max_workers=workers) as ex:
        for part in ex.map(task, ranges):
            results.extend(part)
    return results


def _summarize(index: int, x0: np.ndarray, res: RunResult, label=None) -> StartSummary:
    return StartSummary(
        index=index,
        x0=x0,
        final_point=res.final_point,
        final_phi=res.final_phi,
        n_iterations=res.n_iterations,
        dfo_invocations=res.dfo_invocations,
        wall_time=res.wall_time,
        termination=res.termination,
        label=label,
    )


def _table1_chunk(
    bounds: tuple[int, int],
    seed: int,
    params: SolverParams,
    sign_at_zero: float,
    pss_kind: str,
) -> list[dict]:
    lo, hi = bounds
    problem = Example2dProblem(sign_at_zero)
    pss = make_pss(pss_kind, problem.dim)
    refs = [(label, np.asarray(p)) for label, p in CRITICAL_POINTS]
    rows = []
    for i in range(lo, hi):
        rng = np.random.default_rng((seed, i))
        x0 = rng.uniform(TABLE1_BOX[0], TABLE1_BOX[1], problem.dim)
        per: dict[str, StartSummary] = {}
        for algo in ALGORITHMS:
            if algo == "DCA":
                res = run_dca(problem, x0, params)
            elif algo == "BDCA":
                res = run_bdca(problem, x0, params)
            else:
                res = run_bdca_plus(problem, x0, pss, params)
            label = classify_limit_point(res.final_point, refs)
            per[algo] = _summarize(i, x0, res, label)
        rows.append(per)
    return rows


def run_table1(
    n_starts: int,
    seed: int,
    params: Optional[SolverParams] = None,
    workers: int = 1,
    sign_at_zero: float = 1.0,
    pss_kind: str = "d1",
) -> MultiStartReport:
    """Basin-of-attraction counts on the 2-D test problem.

    Runs all three algorithms from ``n_starts`` uniform random starts in
    the square [-1.5, 1.5]^2 and counts which of the four critical points
    each run converged to (tolerance 1e-3; anything else lands in the
    "unclassified" bucket).
    """
    if n_starts < 1:
        raise ValueError("n_starts must be >= 1")
    if params is None:
        params = SolverParams()
    task = partial(
        _table1_chunk,
        seed=seed,
        params=params,
        sign_at_zero=sign_at_zero,
        pss_kind=pss_kind,
    )
    rows = _run_chunks(task, n_starts, workers)
    labels = [label for label, _ in CRITICAL_POINTS] + [UNCLASSIFIED]
    runs: dict[str, list[StartSummary]] = {a: [] for a in ALGORITHMS}
    counts: dict[str, dict[str, int]] = {
        a: {label: 0 for label in labels} for a in ALGORITHMS
    }
    for per in rows:
        for algo in ALGORITHMS:
            s = per[algo]
            runs[algo].append(s)
            counts[algo][s.label] += 1
    return MultiStartReport(runs=runs, basin_counts=counts)


def _pairwise_chunk(
    bounds: tuple[int, int],
    data: ClusterData,
    k: int,
    rho: Optional[float],
    seed: int,
    params: SolverParams,
    pss_kind: str,
) -> list[dict]:
    lo, hi = bounds
    problem = MsscProblem(data, k, rho)
    pss = make_pss(pss_kind, problem.dim)
    rows = []
    for i in range(lo, hi):
        rng = np.random.default_rng((seed, i))
        x0 = problem.sample_start(rng)
        res_dca = run_dca(problem, x0, params)
        res_plus = run_bdca_plus(problem, x0, pss, params)
        rows.append(
            {
                "DCA": _summarize(i, x0, res_dca),
                "BDCA+": _summarize(i, x0, res_plus),
            }
        )
    return rows


def run_pairwise_mssc(spec: ExperimentSpec, workers: int = 1) -> MultiStartReport:
    """Paired plain-vs-escape comparison on a clustering instance.

    Both algorithms start from the same random centroid configuration
    (uniform in the data bounding box, one substream per start).  Rows
    are sorted by objective gap ``phi_dca - phi_bdca_plus`` descending.
    """
    if spec.problem_id != "mssc":
        raise ValueError("run_pairwise_mssc needs an mssc spec")
    if spec.data is None or spec.k is None:
        raise ValueError("spec must carry data and k")
    task = partial(
        _pairwise_chunk,
        data=spec.data,
        k=spec.k,
        rho=spec.rho,
        seed=spec.seed,
        params=spec.params,
        pss_kind=spec.pss_kind,
    )
    rows = _run_chunks(task, spec.n_starts, workers)
    runs: dict[str, list[StartSummary]] = {"DCA": [], "BDCA+": []}
    pairs: list[PairRow] = []
    for per in rows:
        a, b = per["DCA"], per["BDCA+"]
        runs["DCA"].append(a)
        runs["BDCA+"].append(b)
        ratio = (
            a.wall_time / b.wall_time
            if (a.wall_time and b.wall_time and b.wall_time > 0)
            else None
        )
        pairs.append(
            PairRow(
                instance=a.index,
                phi_dca=a.final_phi,
                phi_bdca_plus=b.final_phi,
                gap=a.final_phi - b.final_phi,
                iters_dca=a.n_iterations,
                iters_bdca_plus=b.n_iterations,
                dfo_invocations=b.dfo_invocations,
                time_ratio=ratio,
            )
        )
    pairs.sort(key=lambda r: (-r.gap, r.instance))
    gaps = np.array([p.gap for p in pairs])
    stats = PairedStats(
        win_fraction=float(np.mean(gaps > 1e-9)),
        mean_gap=float(gaps.mean()),
        max_gap=float(gaps.max()),
    )
    return MultiStartReport(runs=runs, pairs=pairs, paired_stats=stats)
