"""Problem abstraction, solver parameters, and run traces shared by all solvers.

A DC objective is minimized in the split form ``phi(x) = g(x) - h(x)`` where
both components are convex with a common strong-convexity modulus ``rho`` and
``g`` is smooth.  Solvers never see ``phi`` directly: they work through the
oracles bundled in a :class:`DcProblem` (values, gradient of ``g``, a
subgradient selection for ``h``, and the strongly convex linearized
subproblem ``min g(x) - <u, x>``).
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional, Sequence

import numpy as np

__all__ = [
    "Point",
    "ProblemDefinitionError",
    "Termination",
    "SolverParams",
    "DfoEvent",
    "IterationRecord",
    "RunResult",
    "DcProblem",
    "eval_phi",
    "CheckResult",
    "ValidationReport",
    "validate_problem",
    "as_point",
]

#: Dense real vector of length ``problem.dim``.
Point = np.ndarray

# Contract tolerances used by the runtime oracle checks.
SUBPROBLEM_RESIDUAL_RTOL = 1e-8
DESCENT_SLACK = 1e-9


class ProblemDefinitionError(RuntimeError):
    """A problem oracle violated its contract (non-finite value, bad
    subproblem solution, or a broken descent guarantee).  This always
    indicates a bug in the problem definition, not in the solver."""


class Termination(str, Enum):
    """Why a run stopped."""

    CRITICAL_POINT = "CriticalPoint"
    D_STATIONARY_CERTIFIED = "DStationaryCertified"
    MAX_ITERATIONS = "MaxIterations"


def as_point(x: Sequence[float] | np.ndarray, dim: int | None = None) -> Point:
    """Coerce to a finite 1-D float64 vector, optionally checking its length."""
    p = np.asarray(x, dtype=float)
    if p.ndim != 1:
        raise ValueError(f"expected a 1-D point, got shape {p.shape}")
    if dim is not None and p.shape[0] != dim:
        raise ValueError(f"point has length {p.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(p)):
        raise ValueError("point has non-finite entries")
    return p


@dataclass(frozen=True)
class SolverParams:
    """Tuning constants for the boosted solvers and the direct-search step.

    Attributes:
        alpha: sufficient-decrease coefficient of the line search.
        beta1: backtracking shrink factor of the line search, in (0, 1).
        beta2: shrink factor of the direct-search radius, in (0, 1).
        eps1: criticality tolerance on the DC displacement ``||y_k - x_k||``.
        eps2: direct-search stopping radius.
        mu_bar: initial direct-search radius.
        eta: growth factor applied to the radius when the direct search is
            re-entered.  Defaults to ``1 / beta2`` (undo the last shrink).
        tau: additive offset applied alongside ``eta``.  Defaults to ``eps2``.
        gamma: growth factor of the self-adaptive trial step, > 1.
        lambda_bar1: trial step used the second time the line search runs
            (the first trial is always 0).
        max_iter: hard iteration cap; purely a guard against runaway runs.
    """

    alpha: float = 1e-4
    beta1: float = 0.25
    beta2: float = 0.5
    eps1: float = 1e-8
    eps2: float = 1e-4
    mu_bar: float = 10.0
    eta: Optional[float] = None
    tau: Optional[float] = None
    gamma: float = 2.0
    lambda_bar1: float = 10.0
    max_iter: int = 10000

    def __post_init__(self) -> None:
        if self.eta is None:
            object.__setattr__(self, "eta", 1.0 / self.beta2)
        if self.tau is None:
            object.__setattr__(self, "tau", self.eps2)
        if not 0.0 < self.beta1 < 1.0:
            raise ValueError("beta1 must lie in (0, 1)")
        if not 0.0 < self.beta2 < 1.0:
            raise ValueError("beta2 must lie in (0, 1)")
        if self.gamma <= 1.0:
            raise ValueError("gamma must be > 1")
        if self.alpha <= 0.0:
            raise ValueError("alpha must be positive")
        if self.eps1 < 0.0:
            raise ValueError("eps1 must be nonnegative")
        if self.eps2 <= 0.0:
            raise ValueError("eps2 must be positive")
        if self.mu_bar <= 0.0:
            raise ValueError("mu_bar must be positive")
        if self.eta < 0.0:
            raise ValueError("eta must be nonnegative")
        if self.tau < 0.0:
            raise ValueError("tau must be nonnegative")
        if self.lambda_bar1 <= 0.0:
            raise ValueError("lambda_bar1 must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be a positive integer")


@dataclass
class DfoEvent:
    """Outcome of one direct-search invocation.

    ``mu_tried`` lists the radii at which full direction scans ran, in
    order.  On a successful escape ``mu_accepted`` is the radius kept and
    ``direction_index`` the index (within the spanning set) of the winning
    direction; both are ``None`` when the scan exhausted all radii.
    """

    mu_tried: list[float]
    mu_accepted: Optional[float]
    direction_index: Optional[int]

    def to_dict(self) -> dict[str, Any]:
        return {
            "mu_tried": list(self.mu_tried),
            "mu_accepted": self.mu_accepted,
            "direction_index": self.direction_index,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "DfoEvent":
        return cls(list(d["mu_tried"]), d["mu_accepted"], d["direction_index"])


@dataclass
class IterationRecord:
    """One iteration of any solver: the DC step and what followed it.

    ``lambda_k`` is 0 for pure DC steps and for direct-search iterations;
    ``d_k`` is exactly ``y_k - x_k``.
    """

    k: int
    x_k: Point
    y_k: Point
    d_k: Point
    phi_x: float
    phi_y: float
    lambda_k: float
    lambda_trial: float
    dfo_event: Optional[DfoEvent] = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "k": self.k,
            "x_k": self.x_k.tolist(),
            "y_k": self.y_k.tolist(),
            "d_k": self.d_k.tolist(),
            "phi_x": self.phi_x,
            "phi_y": self.phi_y,
            "lambda_k": self.lambda_k,
            "lambda_trial": self.lambda_trial,
            "dfo_event": self.dfo_event.to_dict() if self.dfo_event else None,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "IterationRecord":
        return cls(
            k=d["k"],
            x_k=np.asarray(d["x_k"], dtype=float),
            y_k=np.asarray(d["y_k"], dtype=float),
            d_k=np.asarray(d["d_k"], dtype=float),
            phi_x=d["phi_x"],
            phi_y=d["phi_y"],
            lambda_k=d["lambda_k"],
            lambda_trial=d["lambda_trial"],
            dfo_event=DfoEvent.from_dict(d["dfo_event"]) if d["dfo_event"] else None,
        )


@dataclass
class RunResult:
    """Full outcome of a solver run: termination point, reason, and trace."""

    final_point: Point
    final_phi: float
    iterations: list[IterationRecord]
    termination: Termination
    dfo_invocations: int = 0
    wall_time: float = 0.0

    @property
    def n_iterations(self) -> int:
        return len(self.iterations)

    def to_dict(self) -> dict[str, Any]:
        return {
            "final_point": self.final_point.tolist(),
            "final_phi": self.final_phi,
            "iterations": [r.to_dict() for r in self.iterations],
            "termination": self.termination.value,
            "dfo_invocations": self.dfo_invocations,
            "wall_time": self.wall_time,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "RunResult":
        return cls(
            final_point=np.asarray(d["final_point"], dtype=float),
            final_phi=d["final_phi"],
            iterations=[IterationRecord.from_dict(r) for r in d["iterations"]],
            termination=Termination(d["termination"]),
            dfo_invocations=d["dfo_invocations"],
            wall_time=d["wall_time"] if d["wall_time"] is not None else 0.0,
        )


class DcProblem(ABC):
    """A DC objective given through its oracles.

    Subclasses fix ``dim`` (problem dimension) and ``rho`` (the common
    strong-convexity modulus of both components, > 0) and implement the
    five oracles below.  All oracles must be pure: instances are treated
    as immutable and may be shared across concurrent runs.

    ``solve_subproblem(u)`` must return the unique minimizer ``y`` of
    ``g(x) - <u, x>``, i.e. the point with ``grad_g(y) = u``.  Solvers
    verify the residual ``||grad_g(y) - u|| <= 1e-8 * (1 + ||u||)`` at
    every step and abort with :class:`ProblemDefinitionError` otherwise.
    """

    dim: int
    rho: float

    #: Exact one-sided directional derivative ``h'(x; d)``, or ``None``
    #: when unavailable (stationarity checks then fall back to a forward
    #: difference).  Subclasses override this as a method.
    dir_deriv_h = None

    @abstractmethod
    def eval_g(self, x: Point) -> float: ...

    @abstractmethod
    def eval_h(self, x: Point) -> float: ...

    @abstractmethod
    def grad_g(self, x: Point) -> Point: ...

    @abstractmethod
    def subgrad_h(self, x: Point) -> Point: ...

    @abstractmethod
    def solve_subproblem(self, u: Point) -> Point: ...


def eval_phi(problem: DcProblem, x: Point) -> float:
    """Objective value ``g(x) - h(x)``.

    The objective is always formed as the difference of the two component
    oracles; problems may expose a direct formula for cross-checking, but
    solvers never use it.
    """
    val = problem.eval_g(x) - problem.eval_h(x)
    if not math.isfinite(val):
        raise ProblemDefinitionError(
            f"objective is not finite at x={np.asarray(x)!r} (got {val})"
        )
    return val


@dataclass
class CheckResult:
    name: str
    passed: bool
    max_violation: float
    detail: str = ""


@dataclass
class ValidationReport:
    """Result of the numerical contract checks on a problem definition."""

    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _fd_grad_g(problem: DcProblem, x: Point, fd_step: float) -> Point:
    # Central differences with a per-coordinate step scaled to the point,
    # balancing truncation against round-off in double precision.
    grad = np.empty_like(x)
    for i in range(x.shape[0]):
        step = fd_step * (1.0 + abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += step
        xm[i] -= step
        grad[i] = (problem.eval_g(xp) - problem.eval_g(xm)) / (2.0 * step)
    return grad


def validate_problem(
    problem: DcProblem,
    samples: Sequence[Point],
    fd_step: float = 1e-6,
) -> ValidationReport:
    """Spot-check a problem definition on a set of sample points.

    Three checks run, each reported separately:

    * ``gradient``: central finite differences of ``g`` against ``grad_g``,
      relative error at most 1e-5 per sample.
    * ``subgradient``: the inequality
      ``h(y) >= h(x) + <subgrad_h(x), y - x>`` over all ordered sample
      pairs, with 1e-9 slack.
    * ``strong_convexity``: midpoint convexity of ``g - (rho/2)||.||^2``
      over all sample pairs, with 1e-9 slack.
    """
    if len(samples) == 0:
        raise ValueError("samples must be nonempty")
    if fd_step <= 0:
        raise ValueError("fd_step must be positive")
    pts = [as_point(s, problem.dim) for s in samples]
    report = ValidationReport()

    worst = 0.0
    worst_at = -1
    for idx, x in enumerate(pts):
        fd = _fd_grad_g(problem, x, fd_step)
        exact = problem.grad_g(x)
        err = float(np.linalg.norm(fd - exact) / (1.0 + np.linalg.norm(exact)))
        if err > worst:
            worst, worst_at = err, idx
    report.checks.append(
        CheckResult(
            "gradient",
            worst <= 1e-5,
            worst,
            f"worst sample index {worst_at}",
        )
    )

    h_vals = np.array([problem.eval_h(x) for x in pts])
    subgrads = [problem.subgrad_h(x) for x in pts]
    worst = 0.0
    worst_pair = (-1, -1)
    for i, x in enumerate(pts):
        u = subgrads[i]
        for j, y in enumerate(pts):
            if i == j:
                continue
            gap = h_vals[i] + float(np.dot(u, y - x)) - h_vals[j]
            if gap > worst:
                worst, worst_pair = gap, (i, j)
    report.checks.append(
        CheckResult(
            "subgradient",
            worst <= 1e-9,
            worst,
            f"worst pair {worst_pair}",
        )
    )

    def q(x: Point) -> float:
        return problem.eval_g(x) - 0.5 * problem.rho * float(np.dot(x, x))

    q_vals = np.array([q(x) for x in pts])
    worst = 0.0
    worst_pair = (-1, -1)
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            mid = 0.5 * (pts[i] + pts[j])
            gap = q(mid) - 0.5 * (q_vals[i] + q_vals[j])
            if gap > worst:
                worst, worst_pair = gap, (i, j)
    report.checks.append(
        CheckResult(
            "strong_convexity",
            worst <= 1e-9,
            worst,
            f"worst pair {worst_pair}",
        )
    )
    return report
