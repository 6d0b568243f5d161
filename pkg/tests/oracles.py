"""Independent reference implementations used to cross-check the solver.

Everything here is deliberately written from the definitions (grid searches,
plain expectations, explicit policy enumeration) and shares no code paths with
the implementations under test beyond the price model inputs.
"""

from __future__ import annotations

import itertools

import numpy as np

from evcharge.mdp import MWH_PER_KWH, MdpConfig
from evcharge.price_model import PriceGrid, PriceModelParams, next_price_dist, noise_dist
from evcharge.risk import RiskSchedule, mean_cvar_values


def cvar_grid_search(values: np.ndarray, probs: np.ndarray, alpha: float) -> float:
    """Rockafellar-Uryasev infimum by direct search over u.

    The objective u + E[(X-u)^+]/(1-alpha) is piecewise linear with kinks only
    at support points, so evaluating at the support points is exact; a dense
    linspace is added as a belt-and-braces check.
    """
    candidates = np.concatenate([values, np.linspace(values.min(), values.max(), 2001)])
    best = np.inf
    for u in candidates:
        obj = u + float(np.maximum(values - u, 0.0) @ probs) / (1.0 - alpha)
        best = min(best, obj)
    return best


def risk_neutral_dp(cfg: MdpConfig, pm: PriceModelParams, grid: PriceGrid) -> np.ndarray:
    """Plain expected-cost backward induction, coded from scratch with loops."""
    T = cfg.horizon
    n_r, n_p = cfg.r_max + 1, len(grid)
    decay = np.exp(-pm.kappa_Y)
    p_kwh = grid.points * MWH_PER_KWH

    # terminal: expected compensation one period after return
    psi = noise_dist(T, pm)
    y_dev = psi.support - pm.seasonality(T + 1)
    bench = min(cfg.r0 + T * cfg.x_max, cfg.r_max)
    V = np.zeros((T + 1, n_r, n_p))
    for r in range(n_r):
        h = bench - r
        for ip, p in enumerate(grid.points):
            y = (p * decay + y_dev) * MWH_PER_KWH
            e_gamma = float(cfg.gamma_y(y) @ psi.probs)
            V[T, r, ip] = (1.0 + cfg.gamma_h * h + e_gamma) * h * cfg.p_ref

    for t in range(T - 1, -1, -1):
        dists = [next_price_dist(p, t, pm, grid) for p in grid.points]
        for ip, p in enumerate(grid.points):
            dist = dists[ip]
            nxt = [int(np.argmin(np.abs(grid.points - q))) for q in dist.support]
            for r in range(n_r):
                best = np.inf
                for x in range(0, min(cfg.r_max - r, cfg.x_max) + 1):
                    cont = sum(w * V[t + 1, r + x, jp] for w, jp in zip(dist.probs, nxt))
                    best = min(best, x * p_kwh[ip] - cfg.c_f + cont)
                V[t, r, ip] = best
    return V


def enumerate_policies_value(cfg: MdpConfig, beta: RiskSchedule, pm: PriceModelParams,
                             grid: PriceGrid, r0: int, ip0: int) -> float:
    """Exact nested-risk optimum for a horizon-2 instance by enumerating every
    deterministic policy on the reachable tree from (r0, grid[ip0])."""
    assert cfg.horizon == 2
    from evcharge.mdp import terminal_values

    term = terminal_values(cfg, beta[2], pm, grid)  # (n_r, n_p)
    p_kwh = grid.points * MWH_PER_KWH
    p0 = grid.points[ip0]

    dist0 = next_price_dist(p0, 0, pm, grid)
    out0 = [int(np.argmin(np.abs(grid.points - q))) for q in dist0.support]

    best = np.inf
    for x0 in range(0, min(cfg.r_max - r0, cfg.x_max) + 1):
        r1 = r0 + x0
        acts1 = list(range(0, min(cfg.r_max - r1, cfg.x_max) + 1))
        # value of each candidate (outcome state, action) pair at t=1
        w1 = np.empty((len(out0), len(acts1)))
        for j, ip1 in enumerate(out0):
            dist1 = next_price_dist(grid.points[ip1], 1, pm, grid)
            out1 = np.array([int(np.argmin(np.abs(grid.points - q))) for q in dist1.support])
            for a, x1 in enumerate(acts1):
                tail = mean_cvar_values(term[r1 + x1, out1], dist1.probs, beta[1])
                w1[j, a] = x1 * p_kwh[ip1] - cfg.c_f + tail
        for choice in itertools.product(range(len(acts1)), repeat=len(out0)):
            stage1 = np.array([w1[j, a] for j, a in enumerate(choice)])
            v0 = x0 * p_kwh[ip0] - cfg.c_f + mean_cvar_values(stage1, dist0.probs, beta[0])
            best = min(best, v0)
    return best


def greedy_from_tables(sol, t: int, r: int, ip: int) -> int:
    """Action reconstruction straight from the stored post-decision table."""
    cfg = sol.cfg
    p_kwh = sol.grid.points[ip] * MWH_PER_KWH
    post = sol.post_values[t, :, ip]
    xs = range(0, min(cfg.r_max - r, cfg.x_max) + 1)
    costs = [x * p_kwh - cfg.c_f + post[r + x] for x in xs]
    return int(np.argmin(costs))
