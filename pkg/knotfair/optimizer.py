"""Numerical minimization of badness.

The search runs over a :class:`~knotfair.knot.KnotVec` or, under a symmetry
spec, over the free parameters of a :class:`~knotfair.symmetry.ReducedVec`
so every visited knot is exactly symmetric. scipy drives the search; this
module owns the evaluation budget, the best-so-far bookkeeping, progress
lines, checkpoints and the topology post-check.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np
from scipy.optimize import minimize as scipy_minimize

from .badness import SENTINEL, assess, component_breakdown
from .bezier import arc_length_array
from .errors import IoFailure, MalformedPath, NonFiniteProbe, NonFiniteStart, TopologyChanged
from .knot import KnotVec, MinObj, format_knotvec, from_knotvec, parse_knotvec, to_controlpoints, to_knotvec
from .models import BadnessWeights, OptimizeOptions, OptimizeReport, SymmetrySpec, TopologyFingerprint
from .symmetry import ReducedVec, expand, reduce

logger = logging.getLogger(__name__)

Start = Union[KnotVec, ReducedVec]
Objective = Callable[[np.ndarray], float]


class _BudgetExhausted(Exception):
    pass


def finite_diff_gradient(f: Objective, x, h: float = 1e-7) -> np.ndarray:
    """Central-difference gradient of ``f`` at ``x``."""
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for i in range(len(x)):
        step = np.zeros_like(x)
        step[i] = h
        ahead = f(x + step)
        behind = f(x - step)
        if not (math.isfinite(ahead) and math.isfinite(behind)):
            raise NonFiniteProbe(f"objective is not finite within {h:g} of coordinate {i}")
        grad[i] = (ahead - behind) / (2.0 * h)
    return grad


@dataclass
class _Problem:
    """Maps optimizer coordinates to knots and back."""

    start: Start

    @property
    def symmetric(self) -> bool:
        return isinstance(self.start, ReducedVec)

    @property
    def x0(self) -> np.ndarray:
        return np.array(self.start.values, dtype=float)

    def minobj(self, x: np.ndarray) -> MinObj:
        if isinstance(self.start, ReducedVec):
            return expand(self.start.with_values(x))
        return from_knotvec(KnotVec(x, self.start.n))

    def point(self, x: np.ndarray) -> Start:
        if isinstance(self.start, ReducedVec):
            return self.start.with_values(x)
        return KnotVec(x, self.start.n)

    def knotvec(self, x: np.ndarray) -> KnotVec:
        return to_knotvec(self.minobj(x))


@dataclass
class _Tracker:
    problem: _Problem
    weights: BadnessWeights
    ref: TopologyFingerprint
    options: OptimizeOptions
    objective: Optional[Objective] = None
    checkpoint: Optional[Path] = None
    evals: int = 0
    offset: int = 0
    best_x: Optional[np.ndarray] = None
    best_value: float = math.inf
    safe_x: Optional[np.ndarray] = None
    safe_value: float = math.inf
    trajectory: list[tuple[int, float]] = field(default_factory=list)

    def value(self, x: np.ndarray) -> float:
        """Objective with budget and bookkeeping; also tracks the best topology-preserving point."""
        if self.evals >= self.options.max_evals:
            raise _BudgetExhausted
        self.evals += 1
        x = np.array(x, dtype=float)
        if self.objective is not None:
            value = float(self.objective(x))
            preserved = True
        else:
            try:
                knot = to_controlpoints(self.problem.minobj(x))
            except (MalformedPath, ValueError):
                value, preserved = SENTINEL, False
            else:
                result = assess(knot, self.weights, self.ref)
                value = result.value
                preserved = result.fingerprint is not None and result.fingerprint.discrepancy(self.ref) == 0
        if not math.isfinite(value):
            value = SENTINEL
        if value < self.best_value:
            self.best_value, self.best_x = value, x
        if preserved and value < self.safe_value:
            self.safe_value, self.safe_x = value, x
        if self.evals % self.options.checkpoint_every == 0:
            self.progress()
        return value

    @property
    def total_evals(self) -> int:
        return self.offset + self.evals

    def progress(self) -> None:
        self.trajectory.append((self.total_evals, self.best_value))
        logger.info("eval=%d badness=%.7g", self.total_evals, self.best_value)
        if self.checkpoint is not None and self.safe_x is not None:
            write_checkpoint(self.checkpoint, self.problem.knotvec(self.safe_x), self.partial_report())

    def partial_report(self) -> OptimizeReport:
        return OptimizeReport(
            algorithm=self.options.algorithm,
            initial_badness=self.trajectory[0][1] if self.trajectory else self.best_value,
            final_badness=self.safe_value,
            evals=self.total_evals,
            dimension=len(self.problem.x0),
            symmetric=self.problem.symmetric,
            trajectory=list(self.trajectory),
        )


def _simplex(x0: np.ndarray, step: float, rng: np.random.Generator) -> np.ndarray:
    dim = len(x0)
    signs = rng.choice([-1.0, 1.0], size=dim)
    jitter = 1.0 + 0.25 * rng.uniform(-1.0, 1.0, size=dim)
    simplex = np.tile(x0, (dim + 1, 1))
    simplex[1:] += np.diag(signs * jitter * step)
    return simplex


def _scale_of(problem: _Problem) -> float:
    """Total arc length of the start: one normalized unit in knot coordinates."""
    return float(arc_length_array(to_controlpoints(problem.minobj(problem.x0)).segments).sum())


def _run(tracker: _Tracker, x0: np.ndarray, scale: float, rng: np.random.Generator) -> tuple[bool, str]:
    options = tracker.options
    remaining = options.max_evals - tracker.evals
    try:
        if options.algorithm == "nelder-mead":
            result = scipy_minimize(
                tracker.value,
                x0,
                method="Nelder-Mead",
                options={
                    "initial_simplex": _simplex(x0, options.simplex_scale * scale, rng),
                    "maxfev": remaining,
                    "xatol": options.xtol * scale,
                    "fatol": options.ftol,
                    "adaptive": len(x0) > 10,
                },
            )
        else:
            h = options.fd_step * scale
            result = scipy_minimize(
                tracker.value,
                x0,
                method="BFGS",
                jac=lambda x: finite_diff_gradient(tracker.value, x, h),
                options={"gtol": options.gtol / scale, "xrtol": options.xtol},
            )
    except _BudgetExhausted:
        return False, "evaluation budget exhausted"
    return bool(result.success), str(result.message)


def minimize(
    start: Start,
    w: Optional[BadnessWeights] = None,
    s: Optional[SymmetrySpec] = None,
    o: Optional[OptimizeOptions] = None,
    *,
    objective: Optional[Objective] = None,
    checkpoint: Optional[Path] = None,
    evals_offset: int = 0,
) -> tuple[Start, OptimizeReport]:
    """Minimize badness from ``start``; never returns a point worse than the start.

    With ``s`` given and a :class:`KnotVec` start, the search runs in the
    reduced space of ``s``: the start is moved so its node centroid sits at
    the origin, then symmetrized. ``objective``
    replaces badness on the raw coordinate vector, for testing the driver.
    """
    w = w or BadnessWeights()
    o = o or OptimizeOptions()
    if s is not None and isinstance(start, KnotVec) and not s.trivial:
        start = reduce(from_knotvec(start).centered(), s)
    problem = _Problem(start)
    x0 = problem.x0

    if objective is None:
        start_knot = to_controlpoints(problem.minobj(x0))
        initial = assess(start_knot, w, full=True)
        if initial.value >= SENTINEL or initial.fingerprint is None:
            raise NonFiniteStart("the starting knot has no finite badness")
        ref = initial.fingerprint
        before = initial.breakdown
        scale = _scale_of(problem)
    else:
        ref = TopologyFingerprint(crossing_count=0)
        before = None
        scale = 1.0

    tracker = _Tracker(problem, w, ref, o, objective=objective, checkpoint=checkpoint, offset=evals_offset)
    initial_value = tracker.value(x0)
    if not math.isfinite(initial_value) or initial_value >= SENTINEL:
        raise NonFiniteStart("the starting point has no finite objective value")
    tracker.trajectory.append((tracker.total_evals, initial_value))
    logger.info("start: dim=%d badness=%.7g algorithm=%s", len(x0), initial_value, o.algorithm)

    rng = np.random.default_rng(o.seed)
    converged, message = False, "evaluation budget exhausted"
    for attempt in range(o.restart_count + 1):
        if tracker.evals >= o.max_evals:
            break
        origin = tracker.safe_x if tracker.safe_x is not None else x0
        converged, message = _run(tracker, origin, scale, rng)
        if attempt < o.restart_count:
            logger.info("restart %d from badness=%.7g", attempt + 1, tracker.safe_value)

    topology_changed = tracker.best_value < tracker.safe_value
    if topology_changed:
        logger.warning(
            "best iterate (badness=%.7g) changed the crossing structure; keeping badness=%.7g",
            tracker.best_value,
            tracker.safe_value,
        )
    final_x = tracker.safe_x if tracker.safe_x is not None else x0
    final_value = min(tracker.safe_value, initial_value)
    if tracker.safe_value > initial_value:
        final_x = x0
    if not tracker.trajectory or tracker.trajectory[-1][0] != tracker.total_evals:
        tracker.trajectory.append((tracker.total_evals, tracker.best_value))

    after = None
    if objective is None:
        after = component_breakdown(to_controlpoints(problem.minobj(final_x)), w, ref)
    report = OptimizeReport(
        algorithm=o.algorithm,
        initial_badness=initial_value,
        final_badness=final_value,
        evals=tracker.total_evals,
        converged=converged,
        message=message,
        dimension=len(x0),
        symmetric=problem.symmetric,
        topology_changed=topology_changed,
        before=before,
        after=after,
        trajectory=tracker.trajectory,
    )
    logger.info("done: evals=%d badness=%.7g -> %.7g", report.evals, initial_value, final_value)
    if checkpoint is not None:
        write_checkpoint(checkpoint, problem.knotvec(final_x), report)
    return problem.point(final_x), report


def require_topology(report: OptimizeReport) -> None:
    """Raise when the search never improved on the start while keeping its crossings."""
    if report.topology_changed and report.final_badness >= report.initial_badness:
        raise TopologyChanged(
            "every improvement found changed the crossing structure; the start is returned unchanged"
        )


# --- checkpoints -------------------------------------------------------------


def report_path(checkpoint: Path) -> Path:
    return checkpoint.with_suffix(checkpoint.suffix + ".json")


def write_checkpoint(path: Path, knot: KnotVec, report: OptimizeReport) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(format_knotvec(knot))
        report_path(path).write_text(report.model_dump_json(indent=2))
    except OSError as exc:
        raise IoFailure(f"cannot write checkpoint {path}: {exc.strerror or exc}") from exc


def read_checkpoint(path: Path) -> tuple[KnotVec, Optional[OptimizeReport]]:
    """Load a checkpoint and, when present, its report sidecar."""
    path = Path(path)
    try:
        knot = parse_knotvec(path.read_text(), str(path))
        sidecar = report_path(path)
        report = OptimizeReport.model_validate(json.loads(sidecar.read_text())) if sidecar.exists() else None
    except OSError as exc:
        raise IoFailure(f"cannot read checkpoint {path}: {exc.strerror or exc}") from exc
    return knot, report
