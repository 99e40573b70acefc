"""The discrete nonlinear system xi + Phi(xi) + F(xi) = g on a quadrature grid.

Component definitions (nodes t_i, Volterra weights w[i, j], global weights w_r):

    phi_i(xi)  = sum_{j<=i} w[i, j] * k1(t_i, s_j, xi_j)      (Volterra part)
    fred_i(xi) = sum_r     w_r     * k2(t_i, s_r, xi_r)       (Fredholm part)

together with the weighted inner product <u, v> = sum_i w_i u_i v_i and its
norm, in which all error bounds of :mod:`vfsolve.hybrid` are stated.

State vectors are plain 1-d numpy arrays of length ``sys.dim``.  Kernel
callables are evaluated on full (dim x dim) meshes; cells with zero Volterra
weight are evaluated at clamped in-domain arguments (s_0, xi_0) and then
discarded, so kernels never see points outside [a, b]^2 x state-box.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from .problem import Problem
    from .quadrature import Grid, QuadScheme

__all__ = [
    "DiscreteSystem",
    "build_system",
    "phi",
    "fred",
    "inner",
    "norm",
    "residual",
]


@dataclass(frozen=True, eq=False)
class DiscreteSystem:
    """One problem discretized by one scheme, with precomputed meshes."""

    grid: "Grid"
    scheme: "QuadScheme"
    problem: "Problem"
    g_vec: np.ndarray = field(repr=False)
    dim: int = 0
    # meshes, cached once: t down the rows, s across the columns
    t_mesh: np.ndarray = field(repr=False, default=None)
    s_mesh: np.ndarray = field(repr=False, default=None)
    s_mesh_volterra: np.ndarray = field(repr=False, default=None)
    volterra_mask: np.ndarray = field(repr=False, default=None)


def build_system(problem: "Problem", scheme: "QuadScheme") -> DiscreteSystem:
    """Sample g on the nodes and precompute the kernel-evaluation meshes."""
    nodes = scheme.nodes
    g_vec = np.asarray(problem.g(nodes), dtype=float)
    if g_vec.shape != nodes.shape:
        raise ValueError(
            f"g returned shape {g_vec.shape} for {nodes.shape} nodes"
        )
    if not np.all(np.isfinite(g_vec)):
        bad = int(np.argmax(~np.isfinite(g_vec)))
        raise ValueError(f"g is non-finite at node {bad} (t = {nodes[bad]})")
    mask = scheme.volterra_weights != 0.0
    t_mesh = np.broadcast_to(nodes[:, None], (scheme.dim, scheme.dim))
    s_mesh = np.broadcast_to(nodes[None, :], (scheme.dim, scheme.dim))
    # zero-weight cells get the first node's s so kernels stay inside [a, b]
    s_volterra = np.where(mask, s_mesh, nodes[0])
    return DiscreteSystem(
        grid=scheme.grid,
        scheme=scheme,
        problem=problem,
        g_vec=g_vec,
        dim=scheme.dim,
        t_mesh=t_mesh,
        s_mesh=s_mesh,
        s_mesh_volterra=s_volterra,
        volterra_mask=mask,
    )


def _as_state(sys: DiscreteSystem, xi, what: str = "state vector") -> np.ndarray:
    v = np.asarray(xi, dtype=float)
    if v.shape != (sys.dim,):
        raise ValueError(f"{what} has shape {v.shape}, system dimension is {sys.dim}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{what} contains non-finite entries")
    return v


def _check_kernel_values(vals: np.ndarray, mask, which: str) -> None:
    bad = ~np.isfinite(vals)
    if mask is not None:
        bad &= mask
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        raise ValueError(f"{which} evaluated non-finite at mesh cell (i={i}, j={j})")


def phi(sys: DiscreteSystem, xi) -> np.ndarray:
    """Volterra part: row i integrates k1(t_i, s, xi(s)) over [a, t_i]."""
    v = _as_state(sys, xi)
    x_mesh = np.where(sys.volterra_mask, v[None, :], v[0])
    vals = np.asarray(sys.problem.k1(sys.t_mesh, sys.s_mesh_volterra, x_mesh), dtype=float)
    _check_kernel_values(vals, sys.volterra_mask, "volterra kernel k1")
    vals = np.where(sys.volterra_mask, vals, 0.0)
    return (sys.scheme.volterra_weights * vals).sum(axis=1)


def fred(sys: DiscreteSystem, xi) -> np.ndarray:
    """Fredholm part: row i integrates k2(t_i, s, xi(s)) over [a, b]."""
    v = _as_state(sys, xi)
    vals = np.asarray(
        sys.problem.k2(sys.t_mesh, sys.s_mesh, np.broadcast_to(v[None, :], sys.t_mesh.shape)),
        dtype=float,
    )
    _check_kernel_values(vals, None, "fredholm kernel k2")
    return vals @ sys.scheme.global_weights


def inner(sys: DiscreteSystem, u, v) -> float:
    """Weighted inner product <u, v> = sum_i w_i u_i v_i (global weights)."""
    a = _as_state(sys, u, "left vector")
    b = _as_state(sys, v, "right vector")
    # w * (a*b) rather than (w*a) * b: keeps <u,v> == <v,u> bit-exact
    return float(np.sum(sys.scheme.global_weights * (a * b)))


def norm(sys: DiscreteSystem, u) -> float:
    """Norm induced by :func:`inner`."""
    a = _as_state(sys, u, "vector")
    return float(np.sqrt(np.sum(sys.scheme.global_weights * a * a)))


def residual(sys: DiscreteSystem, xi) -> float:
    """Weighted norm of the defect xi + Phi(xi) + F(xi) - g."""
    v = _as_state(sys, xi)
    return norm(sys, v + phi(sys, v) + fred(sys, v) - sys.g_vec)
