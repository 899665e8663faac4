"""Small Levenberg-Marquardt solver for the low-dimensional fits of this package."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import FitError


@dataclass
class LSQResult:
    x: np.ndarray
    cost: float  # 0.5 * sum(residual**2)
    jac: np.ndarray
    n_iter: int
    trace: list = field(default_factory=list)  # cost after every accepted step, starting with x0

    @property
    def rms(self) -> float:
        n = self.jac.shape[0]
        return float(np.sqrt(2.0 * self.cost / n)) if n else 0.0


def levenberg_marquardt(
    fun,
    jac,
    x0,
    max_iter: int = 200,
    xtol: float = 1e-10,
    ftol: float = 1e-12,
    lam0: float = 1e-3,
) -> LSQResult:
    """Minimize ``0.5 * ||fun(x)||**2`` by damped Gauss-Newton.

    Damping uses Marquardt's diagonal scaling. A step is accepted only if it
    lowers the cost, so ``trace`` is non-increasing.

    Raises
    ------
    FitError
        If no convergence within ``max_iter`` accepted or rejected steps; the
        last iterate is attached.
    """
    x = np.array(x0, dtype=float)
    r = np.asarray(fun(x), dtype=float)
    if not np.all(np.isfinite(r)):
        raise FitError("residuals are not finite at the initial guess", last_iterate=x)
    cost = 0.5 * float(r @ r)
    trace = [cost]
    lam = lam0
    J = np.asarray(jac(x), dtype=float)

    for it in range(1, max_iter + 1):
        g = J.T @ r
        A = J.T @ J
        d = np.diag(A).copy()
        d[d <= 0] = max(float(np.max(d)), 1.0) * 1e-12
        if cost == 0.0 or not np.any(g):
            return LSQResult(x, cost, J, it - 1, trace)

        accepted = False
        while lam < 1e20:
            try:
                dx = np.linalg.solve(A + lam * np.diag(d), -g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            x_new = x + dx
            r_new = np.asarray(fun(x_new), dtype=float)
            cost_new = 0.5 * float(r_new @ r_new) if np.all(np.isfinite(r_new)) else np.inf
            if cost_new <= cost:
                accepted = True
                break
            lam *= 10.0

        if not accepted:
            # no descent direction left at working precision
            return LSQResult(x, cost, J, it, trace)

        small_step = np.linalg.norm(dx) <= xtol * (np.linalg.norm(x) + xtol)
        small_drop = cost - cost_new <= ftol * cost
        x, r, cost = x_new, r_new, cost_new
        trace.append(cost)
        J = np.asarray(jac(x), dtype=float)
        lam = max(lam / 10.0, 1e-15)
        if small_step or small_drop:
            return LSQResult(x, cost, J, it, trace)

    raise FitError(f"no convergence after {max_iter} iterations", last_iterate=x)
