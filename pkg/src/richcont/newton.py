"""Damped Newton corrector with Armijo backtracking on the residual norm."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .linalg import LinearSolveError, solve
from .system import DiscreteSystem

log = logging.getLogger(__name__)


def residual_norm(F: np.ndarray) -> float:
    return float(np.linalg.norm(F))


@dataclass(frozen=True)
class NewtonParams:
    eps_rel: float = 1e-5
    eps_abs: float = 1e-5
    maxit: int = 25
    linesearch_skip: int = 5
    armijo_c: float = 1e-4
    backtrack_factor: float = 0.5
    max_backtracks: int = 20
    linear_rel_tol: float = 1e-10

    def __post_init__(self):
        if not (self.eps_rel > 0 and self.eps_abs > 0):
            raise ValueError("Newton tolerances must be positive")
        if self.maxit < 1:
            raise ValueError("maxit must be at least 1")
        if not 0.0 < self.backtrack_factor < 1.0:
            raise ValueError("backtrack_factor must lie in (0, 1)")


@dataclass
class NewtonReport:
    converged: bool = False
    iterations: int = 0
    residual_history: list[float] = field(default_factory=list)
    linesearch_evaluations: int = 0
    failure: str | None = None  # "maxit" | "linesearch" | "linear-solve" | "non-finite"


def newton_solve(
    system: DiscreteSystem,
    x0: np.ndarray,
    q: float,
    params: NewtonParams = NewtonParams(),
    reference_norm: float | None = None,
) -> tuple[np.ndarray, NewtonReport]:
    """Solve F(x, q) = 0 from ``x0``; never raises on divergence.

    Full steps are taken for the first ``linesearch_skip`` iterations, after
    which step lengths 1, 1/2, 1/4, ... are tried until
    ||F(x + a dx)|| <= (1 - c a) ||F(x)||. Convergence means
    ||F|| <= eps_abs + eps_rel * ref, where ``ref`` is ``reference_norm`` if
    given and ||F(x0)|| otherwise.
    """
    x = np.array(x0, dtype=float, copy=True)
    if x.shape != (system.size,):
        raise ValueError(f"initial guess has shape {x.shape}, expected ({system.size},)")
    rep = NewtonReport()
    F = system.residual(x, q)
    r = residual_norm(F)
    rep.residual_history.append(r)
    if not np.isfinite(r):
        rep.failure = "non-finite"
        return x, rep
    ref = r if reference_norm is None else reference_norm
    target = params.eps_abs + params.eps_rel * ref
    if r <= target:
        rep.converged = True
        return x, rep

    while rep.iterations < params.maxit:
        try:
            dx = solve(system.jacobian(x, q), -F, params.linear_rel_tol)
        except LinearSolveError as exc:
            log.debug("linear solve failed at q=%g: %s", q, exc)
            rep.failure = "linear-solve"
            return x, rep
        if not np.all(np.isfinite(dx)):
            rep.failure = "non-finite"
            return x, rep
        rep.iterations += 1
        if rep.iterations <= params.linesearch_skip:
            x = x + dx
            F = system.residual(x, q)
            r_new = residual_norm(F)
            if not np.isfinite(r_new):
                rep.residual_history.append(r_new)
                rep.failure = "non-finite"
                return x, rep
        else:
            a = 1.0
            for _ in range(params.max_backtracks + 1):
                x_try = x + a * dx
                F_try = system.residual(x_try, q)
                rep.linesearch_evaluations += 1
                r_new = residual_norm(F_try)
                if np.isfinite(r_new) and r_new <= (1.0 - params.armijo_c * a) * r:
                    break
                a *= params.backtrack_factor
            else:
                rep.residual_history.append(r)
                rep.failure = "linesearch"
                return x, rep
            x, F = x_try, F_try
        r = r_new
        rep.residual_history.append(r)
        if r <= target:
            rep.converged = True
            return x, rep

    rep.failure = "maxit"
    return x, rep
