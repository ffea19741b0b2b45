"""Predictor-corrector nonlinearity continuation from q = 0 to q = 1.

Step control: the first attempted increment of each step is
min(1 - q, 2 * dq_last); a failed corrector halves the increment, and the run
fails once the increment drops to ``dq_min`` or below without a success.
"""

from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .constitutive import ContinuationKind
from .linalg import LinearSolveError, solve
from .newton import NewtonParams, NewtonReport, newton_solve
from .system import DiscreteSystem

log = logging.getLogger(__name__)

# corrector(system, x0, q, newton_params, reference_norm=...) -> (x, report)
Corrector = Callable[..., "tuple[np.ndarray, NewtonReport]"]


@dataclass(frozen=True)
class ContinuationParams:
    predictor_order: int = 1
    dq_min: float = 1e-4
    delta: float = 1e-7
    kind: ContinuationKind = ContinuationKind.POWER
    newton: NewtonParams = NewtonParams()

    def __post_init__(self):
        if self.predictor_order not in (0, 1):
            raise ValueError(f"predictor_order must be 0 or 1, got {self.predictor_order}")
        if not 0.0 < self.dq_min < 1.0:
            raise ValueError("dq_min must lie in (0, 1)")
        if not self.delta > 0.0:
            raise ValueError("delta must be positive")


@dataclass
class StepRecord:
    q_start: float
    dq: float
    accepted: bool
    newton_iterations: int
    linesearch_evaluations: int
    wall_time: float
    failure: Optional[str] = None

    @property
    def q_target(self) -> float:
        return self.q_start + self.dq


@dataclass
class ContinuationTrace:
    steps: list[StepRecord] = field(default_factory=list)
    initial: Optional[NewtonReport] = None
    tangent_solves: int = 0
    tangent_fallbacks: int = 0
    total_time: float = 0.0
    q_reached: float = 0.0

    @property
    def successful_steps(self) -> int:
        return sum(s.accepted for s in self.steps)

    @property
    def failed_steps(self) -> int:
        return sum(not s.accepted for s in self.steps)

    @property
    def newton_iterations(self) -> int:
        """Newton iterations over all q-advancing attempts (q = 0 solve excluded)."""
        return sum(s.newton_iterations for s in self.steps)

    @property
    def initial_iterations(self) -> int:
        return self.initial.iterations if self.initial else 0

    @property
    def linesearch_evaluations(self) -> int:
        return sum(s.linesearch_evaluations for s in self.steps)

    def accepted_dq(self) -> list[float]:
        return [s.dq for s in self.steps if s.accepted]

    def attempted_dq(self) -> list[float]:
        return [s.dq for s in self.steps]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(
                ["step", "q_start", "dq", "q_target", "accepted", "newton_iterations",
                 "linesearch_evaluations", "wall_time", "failure"]
            )
            for i, s in enumerate(self.steps):
                w.writerow(
                    [i, repr(s.q_start), repr(s.dq), repr(s.q_target), int(s.accepted), s.newton_iterations,
                     s.linesearch_evaluations, f"{s.wall_time:.6f}", s.failure or ""]
                )


class ContinuationFailure(RuntimeError):
    """Raised when no admissible increment is found; carries the trace."""

    def __init__(self, message: str, trace: ContinuationTrace, q: float, x: np.ndarray):
        super().__init__(message)
        self.trace = trace
        self.q = q
        self.x = x


def predict_zeroth(x_q: np.ndarray) -> np.ndarray:
    return np.array(x_q, dtype=float, copy=True)


def predict_first(x_q: np.ndarray, tangent: np.ndarray, dq: float) -> np.ndarray:
    """Euler extrapolation x_q + dq * dx/dq."""
    return np.asarray(x_q, dtype=float) + dq * np.asarray(tangent, dtype=float)


def compute_tangent(
    system: DiscreteSystem, x: np.ndarray, q: float, delta: float = 1e-7, rel_tol: float = 1e-10
) -> np.ndarray:
    """Solve J(x, q) t = -(F(x, q + delta) - F(x, q)) / delta.

    Raises :class:`~richcont.linalg.LinearSolveError` if the solve fails.
    """
    dFdq = (system.residual(x, q + delta) - system.residual(x, q)) / delta
    t = solve(system.jacobian(x, q), -dFdq, rel_tol)
    if not np.all(np.isfinite(t)):
        raise LinearSolveError("non-finite tangent")
    return t


def continuation_solve(
    system: DiscreteSystem,
    params: ContinuationParams = ContinuationParams(),
    x0: Optional[np.ndarray] = None,
    corrector: Optional[Corrector] = None,
) -> tuple[np.ndarray, ContinuationTrace]:
    """Drive ``system`` from the linear problem at q = 0 to q = 1.

    ``corrector`` defaults to :func:`~richcont.newton.newton_solve`; tests
    substitute scripted correctors, which are called as
    ``corrector(system, x0, q, newton_params, reference_norm=...)`` for every
    q > 0 attempt. ``reference_norm`` is ||F(x_q, q_new)||, the residual of
    the last accepted solution at the new parameter value; the relative
    Newton tolerance is measured against it. Raises
    :class:`ContinuationFailure`.
    """
    correct = corrector or newton_solve
    trace = ContinuationTrace()
    t_run = time.perf_counter()
    x = system.initial_guess() if x0 is None else np.array(x0, dtype=float, copy=True)

    x, rep = correct(system, x, 0.0, params.newton)
    trace.initial = rep
    if not rep.converged:
        trace.total_time = time.perf_counter() - t_run
        raise ContinuationFailure(f"q = 0 solve failed ({rep.failure})", trace, 0.0, x)

    q = 0.0
    dq_last = 1.0
    while q < 1.0:
        dq = min(1.0 - q, 2.0 * dq_last)
        tangent = None
        if params.predictor_order == 1:
            try:
                tangent = compute_tangent(system, x, q, params.delta, params.newton.linear_rel_tol)
                trace.tangent_solves += 1
            except LinearSolveError as exc:
                log.debug("tangent solve failed at q=%g (%s); using zeroth-order prediction", q, exc)
                trace.tangent_fallbacks += 1
        accepted = False
        while dq > params.dq_min:
            t0 = time.perf_counter()
            guess = predict_zeroth(x) if tangent is None else predict_first(x, tangent, dq)
            q_new = 1.0 if dq == 1.0 - q else q + dq
            # The relative tolerance refers to the residual of the previous
            # solution at the new q, so a poor prediction cannot loosen it.
            ref = float(np.linalg.norm(system.residual(x, q_new)))
            x_new, rep = correct(system, guess, q_new, params.newton, reference_norm=ref)
            trace.steps.append(
                StepRecord(q, dq, rep.converged, rep.iterations, rep.linesearch_evaluations,
                           time.perf_counter() - t0, rep.failure)
            )
            if rep.converged:
                x, q, dq_last = x_new, q_new, dq
                accepted = True
                log.info("q = %.6g accepted (dq = %.3g, %d its)", q, dq, rep.iterations)
                break
            dq = dq / 2.0
        if not accepted:
            trace.total_time = time.perf_counter() - t_run
            trace.q_reached = q
            raise ContinuationFailure(
                f"no admissible increment from q = {q:.6g}", trace, q, x
            )
    trace.total_time = time.perf_counter() - t_run
    trace.q_reached = q
    return x, trace
