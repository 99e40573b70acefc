"""Independent Newton solver for the discrete system, used as ground truth.

Solves G(xi) = xi + Phi(xi) + F(xi) - g = 0 with a dense finite-difference
Jacobian (forward differences, column by column) and LU-factorized updates.
Deliberately shares no iteration machinery with the continuation solver so
the two can check each other; the only common code is the system evaluation
itself.  No globalization: the systems in scope are contraction-dominated,
and divergence is reported rather than repaired.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import discrete

__all__ = ["NewtonConfig", "NewtonError", "newton_solve", "jacobian_check", "DIM_CAP"]

DIM_CAP = 1000
_CHECK_DIM_CAP = 60


class NewtonError(RuntimeError):
    """Newton iteration failed: singular Jacobian, divergence, or no convergence."""


@dataclass(frozen=True)
class NewtonConfig:
    max_iter: int = 50
    residual_tol: float = 1e-12  # in the weighted norm
    fd_step: float = 1e-7

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError(f"need max_iter >= 1, got {self.max_iter}")
        if not self.residual_tol > 0:
            raise ValueError(f"need residual_tol > 0, got {self.residual_tol}")
        if not self.fd_step > 0:
            raise ValueError(f"need fd_step > 0, got {self.fd_step}")


def _system_map(sys: discrete.DiscreteSystem, xi: np.ndarray) -> np.ndarray:
    return xi + discrete.phi(sys, xi) + discrete.fred(sys, xi)


def _fd_jacobian(sys: discrete.DiscreteSystem, at: np.ndarray, step: float) -> np.ndarray:
    base = _system_map(sys, at)
    jac = np.empty((sys.dim, sys.dim))
    for j in range(sys.dim):
        bumped = at.copy()
        bumped[j] += step
        jac[:, j] = (_system_map(sys, bumped) - base) / step
    return jac


def newton_solve(
    sys: discrete.DiscreteSystem,
    cfg: NewtonConfig | None = None,
    start=None,
) -> np.ndarray:
    """Newton iteration from ``start`` (default: the forcing vector g).

    Returns xi with weighted residual <= cfg.residual_tol, or raises
    :class:`NewtonError` naming the failure and the last residual seen.
    """
    cfg = cfg or NewtonConfig()
    if sys.dim > DIM_CAP:
        raise ValueError(
            f"system dimension {sys.dim} exceeds the dense-Jacobian cap {DIM_CAP}"
        )
    xi = sys.g_vec.copy() if start is None else np.asarray(start, dtype=float).copy()
    res = np.inf
    for _ in range(cfg.max_iter):
        defect = _system_map(sys, xi) - sys.g_vec
        res = discrete.norm(sys, defect)
        if res <= cfg.residual_tol:
            return xi
        jac = _fd_jacobian(sys, xi, cfg.fd_step)
        try:
            delta = np.linalg.solve(jac, defect)
        except np.linalg.LinAlgError as exc:
            raise NewtonError(f"singular Jacobian: {exc}") from None
        xi = xi - delta
        if not np.all(np.isfinite(xi)):
            raise NewtonError(
                f"iteration diverged to non-finite values (residual was {res:.3e})"
            )
    defect = _system_map(sys, xi) - sys.g_vec
    res = discrete.norm(sys, defect)
    if res <= cfg.residual_tol:
        return xi
    raise NewtonError(
        f"no convergence within {cfg.max_iter} iterations; last residual {res:.3e}"
    )


def jacobian_check(
    sys: discrete.DiscreteSystem,
    at,
    cfg: NewtonConfig | None = None,
) -> float:
    """Richardson-style self-consistency check of the FD Jacobian.

    Builds the Jacobian at steps fd_step and fd_step/2 and returns the max
    absolute entry-wise discrepancy.  Restricted to small systems (dim <= 60).
    """
    cfg = cfg or NewtonConfig()
    if sys.dim > _CHECK_DIM_CAP:
        raise ValueError(
            f"jacobian_check is limited to dim <= {_CHECK_DIM_CAP}, got {sys.dim}"
        )
    at = np.asarray(at, dtype=float)
    full = _fd_jacobian(sys, at, cfg.fd_step)
    half = _fd_jacobian(sys, at, cfg.fd_step / 2.0)
    return float(np.max(np.abs(full - half)))
