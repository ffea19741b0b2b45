import numpy as np
import pytest

from richcont.newton import NewtonParams, newton_solve
from richcont.system import FunctionSystem


def scalar(f, df, x0):
    return FunctionSystem(lambda x, q: f(x), lambda x, q: df(x), x0)


def test_hand_sequence_for_square_root():
    # x_{k+1} = x_k - (x_k^2 - 4) / (2 x_k) from x_0 = 3
    sys_ = scalar(lambda x: x * x - 4.0, lambda x: np.diag(2.0 * x), 3.0)
    x, rep = newton_solve(sys_, sys_.initial_guess(), 0.0)
    assert rep.converged
    hist = rep.residual_history
    expected = [5.0, 25 / 36, 0.025682117028270876, 4.096020971600531e-05]
    # target = 1e-5 + 1e-5 * 5: met after the third update
    assert rep.iterations == 3
    assert len(hist) == rep.iterations + 1
    np.testing.assert_allclose(hist, expected, rtol=1e-9)
    assert x[0] == pytest.approx(2.0000102400262145, rel=1e-14)


def test_quadratic_convergence_rate():
    sys_ = scalar(lambda x: x * x - 4.0, lambda x: np.diag(2.0 * x), 3.0)
    _, rep = newton_solve(sys_, sys_.initial_guess(), 0.0, NewtonParams(eps_rel=1e-14, eps_abs=1e-14))
    r = rep.residual_history
    # error e_{k+1} = e_k^2 / (2 x*) and r = 4 e near the root, so r_{k+1} = r_k^2 / 16
    for a, b in zip(r[1:-2], r[2:-1]):
        assert b / a**2 == pytest.approx(1 / 16, rel=0.6)


def test_already_converged():
    sys_ = scalar(lambda x: x - 1.0, lambda x: np.eye(1), 1.0)
    x, rep = newton_solve(sys_, np.array([1.0]), 0.0)
    assert rep.converged and rep.iterations == 0 and rep.residual_history == [0.0]


def test_linear_problem_one_iteration(rng):
    A = rng.normal(size=(6, 6)) + 6 * np.eye(6)
    b = rng.normal(size=6)
    sys_ = FunctionSystem(lambda x, q: A @ x - b, lambda x, q: A, np.zeros(6))
    x, rep = newton_solve(sys_, 100 * rng.normal(size=6), 0.0)
    assert rep.converged and rep.iterations == 1


def _arctan():
    return scalar(np.arctan, lambda x: np.diag(1.0 / (1.0 + x * x)), 2.0)


def test_armijo_backtracking_hand_step():
    # from x = 2 the full step lands at -3.535 (|atan| grows); alpha = 1/2 is accepted
    sys_ = _arctan()
    params = NewtonParams(linesearch_skip=0, maxit=1)
    x, rep = newton_solve(sys_, sys_.initial_guess(), 0.0, params)
    assert rep.linesearch_evaluations == 2
    assert x[0] == pytest.approx(2.0 - 0.5 * 5.0 * np.arctan(2.0), rel=1e-14)


@pytest.mark.filterwarnings("ignore:overflow")
def test_line_search_rescues_divergent_newton():
    sys_ = _arctan()
    undamped = NewtonParams(linesearch_skip=50, maxit=50)
    _, rep = newton_solve(sys_, sys_.initial_guess(), 0.0, undamped)
    # iterates grow until the derivative underflows and the solve fails
    assert not rep.converged and rep.failure in ("maxit", "non-finite", "linear-solve")
    x, rep = newton_solve(sys_, sys_.initial_guess(), 0.0, NewtonParams(linesearch_skip=0))
    assert rep.converged and abs(x[0]) < 1e-4
    # once active, the line search never lets the residual grow
    assert all(b <= a for a, b in zip(rep.residual_history, rep.residual_history[1:]))


def test_line_search_skip_counts_iterations():
    # with skip = 1 the first (divergent) step is taken in full
    sys_ = _arctan()
    x, rep = newton_solve(sys_, sys_.initial_guess(), 0.0, NewtonParams(linesearch_skip=1, maxit=1))
    assert x[0] == pytest.approx(2.0 - 5.0 * np.arctan(2.0))
    assert rep.linesearch_evaluations == 0
    assert rep.failure == "maxit"


def test_linesearch_exhaustion():
    # F = 1 + x^2 has no root; no step can reduce |F| below 1
    sys_ = scalar(lambda x: 1.0 + x * x, lambda x: np.diag(2.0 * x), 0.5)
    x, rep = newton_solve(sys_, sys_.initial_guess(), 0.0, NewtonParams(linesearch_skip=0, maxit=50))
    assert rep.failure == "linesearch"
    assert rep.linesearch_evaluations >= 21
    assert len(rep.residual_history) == rep.iterations + 1


def test_singular_jacobian_reported():
    sys_ = scalar(lambda x: x * x + 1.0, lambda x: np.diag(2.0 * x), 0.0)
    x, rep = newton_solve(sys_, sys_.initial_guess(), 0.0)
    assert rep.failure == "linear-solve" and rep.iterations == 0


def test_non_finite_residual_reported():
    f = lambda x: np.where(x > 1.5, np.nan, x - 2.0)
    sys_ = scalar(f, lambda x: np.eye(1), 0.0)
    x, rep = newton_solve(sys_, sys_.initial_guess(), 0.0)
    assert rep.failure == "non-finite" and not rep.converged
    assert len(rep.residual_history) == rep.iterations + 1


def test_reference_norm_sets_relative_target():
    sys_ = scalar(lambda x: x - 1.0, lambda x: np.eye(1), 1.0 + 1e-4)
    _, loose = newton_solve(sys_, sys_.initial_guess(), 0.0, NewtonParams(eps_abs=1e-12), reference_norm=100.0)
    assert loose.converged and loose.iterations == 0
    _, tight = newton_solve(sys_, sys_.initial_guess(), 0.0, NewtonParams(eps_abs=1e-12), reference_norm=1e-4)
    assert tight.iterations == 1


def test_shape_checked():
    sys_ = scalar(lambda x: x, lambda x: np.eye(1), 0.0)
    with pytest.raises(ValueError):
        newton_solve(sys_, np.zeros(2), 0.0)


@pytest.mark.parametrize("kw", [dict(eps_rel=0.0), dict(eps_abs=-1.0), dict(maxit=0), dict(backtrack_factor=1.0)])
def test_params_validated(kw):
    with pytest.raises(ValueError):
        NewtonParams(**kw)
