"""Panel Gauss-Legendre quadrature over the torus cell and its bins.

Integrands here are analytic apart from isolated |.| kinks, so fixed panel
layouts with escalating node counts converge geometrically; every routine
verifies self-consistency between two refinement levels and raises
QuadratureNotConverged instead of returning a silently bad number.

Grid evaluators: callables f(xs, zs) -> array (len(xs), len(zs)). The Wigner
evaluators in this package are cheap on tensor grids, so each refinement
level costs a single call.
"""
from __future__ import annotations

import numpy as np
from numpy.polynomial.legendre import leggauss


class QuadratureNotConverged(RuntimeError):
    """Two successive refinement levels failed to agree to tolerance."""


def panel_rule(edges, nodes_per_panel: int):
    """Gauss-Legendre nodes and weights on each interval of an edge list."""
    edges = np.asarray(edges, dtype=float)
    assert edges.ndim == 1 and edges.size >= 2 and np.all(np.diff(edges) > 0)
    x, w = leggauss(nodes_per_panel)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * np.diff(edges)
    pts = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wts = (half[:, None] * w[None, :]).ravel()
    return pts, wts


def subdivide(edges, pieces: int) -> np.ndarray:
    """Split every interval of an edge list into equal pieces."""
    edges = np.asarray(edges, dtype=float)
    out = [
        np.linspace(a, b, pieces + 1)[:-1] for a, b in zip(edges[:-1], edges[1:])
    ]
    return np.append(np.concatenate(out), edges[-1])


def integrate_grid_2d(eval_grid, x_edges, z_edges, nodes: int) -> float:
    px, wx = panel_rule(x_edges, nodes)
    pz, wz = panel_rule(z_edges, nodes)
    vals = eval_grid(px, pz)
    return float(wx @ vals @ wz)


def integrate_cell_2d(
    eval_grid,
    x_edges,
    z_edges,
    abs_tol: float = 1e-9,
    start_nodes: int = 8,
    max_nodes: int = 48,
):
    """Integral over the rectangle partition, with node escalation.

    Returns (value, error_estimate); the estimate is the change between the
    final two levels.
    """
    prev = None
    nodes = start_nodes
    while nodes <= max_nodes:
        val = integrate_grid_2d(eval_grid, x_edges, z_edges, nodes)
        if prev is not None and abs(val - prev) <= abs_tol:
            return val, abs(val - prev)
        prev = val
        nodes += max(4, nodes // 2)
    raise QuadratureNotConverged(
        f"node escalation reached {max_nodes} with residual "
        f"{abs(val - prev):.3e} > {abs_tol:.1e}"
    )


def integrate_bins_x(
    eval_grid,
    bin_edges,
    z_edges,
    panels_per_bin: int = 4,
    abs_tol: float = 1e-9,
    start_nodes: int = 8,
    max_nodes: int = 48,
):
    """Per-bin integrals along x (full z range), sharing one grid per level.

    bin_edges has K+1 entries; returns an array of K integrals. Each bin is
    internally split into panels_per_bin panels.
    """
    bin_edges = np.asarray(bin_edges, dtype=float)
    k = bin_edges.size - 1
    prev = None
    nodes = start_nodes
    while nodes <= max_nodes:
        per_bin = np.empty(k)
        px_all = []
        wx_all = []
        for b in range(k):
            edges = np.linspace(bin_edges[b], bin_edges[b + 1], panels_per_bin + 1)
            px, wx = panel_rule(edges, nodes)
            px_all.append(px)
            wx_all.append(wx)
        pz, wz = panel_rule(z_edges, nodes)
        vals = eval_grid(np.concatenate(px_all), pz)
        row = vals @ wz
        pos = 0
        for b in range(k):
            npts = px_all[b].size
            per_bin[b] = wx_all[b] @ row[pos: pos + npts]
            pos += npts
        if prev is not None and np.max(np.abs(per_bin - prev)) <= abs_tol:
            return per_bin, float(np.max(np.abs(per_bin - prev)))
        prev = per_bin
        nodes += max(4, nodes // 2)
    raise QuadratureNotConverged(
        f"bin integrals did not settle below {abs_tol:.1e} by {max_nodes} nodes"
    )


def integrate_bins_1d(
    f,
    bin_edges,
    panels_per_bin: int = 4,
    abs_tol: float = 1e-10,
    start_nodes: int = 8,
    max_nodes: int = 48,
):
    """Per-bin integrals of a vectorized 1-D function."""
    bin_edges = np.asarray(bin_edges, dtype=float)
    k = bin_edges.size - 1
    prev = None
    nodes = start_nodes
    while nodes <= max_nodes:
        per_bin = np.empty(k)
        for b in range(k):
            edges = np.linspace(bin_edges[b], bin_edges[b + 1], panels_per_bin + 1)
            px, wx = panel_rule(edges, nodes)
            per_bin[b] = wx @ np.asarray(f(px), dtype=float)
        if prev is not None and np.max(np.abs(per_bin - prev)) <= abs_tol:
            return per_bin, float(np.max(np.abs(per_bin - prev)))
        prev = per_bin
        nodes += max(4, nodes // 2)
    raise QuadratureNotConverged(
        f"1-D bin integrals did not settle below {abs_tol:.1e} by {max_nodes} nodes"
    )
