"""Quadrature grids and weight tables on an interval [a, b].

A scheme carries two kinds of weights for the same node set:

* ``global_weights`` — one row integrating over all of [a, b] (used for the
  Fredholm part of an equation);
* ``volterra_weights`` — a lower-triangular table whose row i integrates over
  [a, t_i] using only nodes s_0 .. s_i (used for the Volterra part).

Rules: ``midpoint`` (nodes at cell centers, order 2), ``trapezoid`` (order 2)
and ``simpson`` (order 4, needs an even cell count).

For the midpoint rule the truncated row has two natural conventions, selected
by ``midpoint_rows``:

* ``"half_cell"`` (default): w = h for s_j left of the cell containing t_i and
  h/2 for the cell's own node, so row i sums to exactly t_i - a and keeps
  second-order accuracy.
* ``"full_cell"``: w = h for every j <= i, so row i integrates over
  [a, t_i + h/2] (sums to t_i - a + h/2).  First-order at t_i; kept as a
  compatibility variant because the shipped reference table for the benchmark
  problem was produced with it.

Row 0 of a trapezoid or Simpson table is identically zero (t_0 = a).  Odd
Simpson rows span an odd number of cells, which composite Simpson cannot do,
so those rows fall back to the trapezoid rule over the same nodes; row sums
remain exact for all rules.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["Grid", "QuadScheme", "make_grid", "build_scheme", "RULES"]

RULES = ("midpoint", "trapezoid", "simpson")
MIDPOINT_ROW_CONVENTIONS = ("half_cell", "full_cell")


@dataclass(frozen=True)
class Grid:
    """Uniform partition of [a, b] into n_cells cells of width h."""

    a: float
    b: float
    n_cells: int

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)):
            raise ValueError("interval endpoints must be finite")
        if self.b <= self.a:
            raise ValueError(f"need b > a, got [{self.a}, {self.b}]")
        if self.n_cells < 1:
            raise ValueError(f"need at least one cell, got {self.n_cells}")

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.n_cells


def make_grid(a: float, b: float, n_cells: int) -> Grid:
    return Grid(float(a), float(b), int(n_cells))


@dataclass(frozen=True)
class QuadScheme:
    """Nodes plus global and Volterra weights for one rule on one grid."""

    rule: str
    order: int
    grid: Grid
    nodes: np.ndarray = field(repr=False)
    global_weights: np.ndarray = field(repr=False)
    volterra_weights: np.ndarray = field(repr=False)
    midpoint_rows: str | None = None

    @property
    def dim(self) -> int:
        return len(self.nodes)


def _simpson_row(k: int, h: float) -> np.ndarray:
    # composite Simpson coefficients over k cells (k even, k >= 2)
    c = np.full(k + 1, 2.0)
    c[1::2] = 4.0
    c[0] = c[k] = 1.0
    return c * (h / 3.0)


def _trapezoid_row(k: int, h: float) -> np.ndarray:
    w = np.full(k + 1, h)
    w[0] = w[k] = h / 2.0
    return w


def build_scheme(grid: Grid, rule: str, midpoint_rows: str = "half_cell") -> QuadScheme:
    """Construct the nodes and both weight tables for ``rule`` on ``grid``."""
    if rule not in RULES:
        raise ValueError(f"unknown quadrature rule {rule!r}; choose from {RULES}")
    h = grid.h

    if rule == "midpoint":
        if midpoint_rows not in MIDPOINT_ROW_CONVENTIONS:
            raise ValueError(
                f"unknown midpoint row convention {midpoint_rows!r}; "
                f"choose from {MIDPOINT_ROW_CONVENTIONS}"
            )
        n = grid.n_cells
        nodes = grid.a + (np.arange(n) + 0.5) * h
        gw = np.full(n, h)
        if midpoint_rows == "half_cell":
            vw = np.tril(np.full((n, n), h), -1)
            np.fill_diagonal(vw, h / 2.0)
        else:
            vw = np.tril(np.full((n, n), h))
        return QuadScheme("midpoint", 2, grid, nodes, gw, vw, midpoint_rows)

    n = grid.n_cells + 1  # closed rules include both endpoints
    nodes = grid.a + np.arange(n) * h

    if rule == "trapezoid":
        gw = _trapezoid_row(grid.n_cells, h)
        vw = np.zeros((n, n))
        for i in range(1, n):
            vw[i, : i + 1] = _trapezoid_row(i, h)
        return QuadScheme("trapezoid", 2, grid, nodes, gw, vw, None)

    # simpson
    if grid.n_cells % 2 != 0:
        raise ValueError(
            f"simpson needs an even number of cells, got {grid.n_cells}"
        )
    gw = _simpson_row(grid.n_cells, h)
    vw = np.zeros((n, n))
    for i in range(1, n):
        if i % 2 == 0:
            vw[i, : i + 1] = _simpson_row(i, h)
        else:
            vw[i, : i + 1] = _trapezoid_row(i, h)
    return QuadScheme("simpson", 4, grid, nodes, gw, vw, None)
