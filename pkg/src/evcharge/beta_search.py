"""Risk-parameter selection: sample (lam, alpha) pairs, fit polynomial
surfaces for practical reward and risk, and pick the best feasible pair.

The risk surface is fitted under nonincreasing-partial-derivative constraints
enforced on a finite grid, solved as a single l1 linear program.  Monotonicity
between grid points is re-verified on a finer grid after fitting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.optimize import linprog

from .mdp import MdpConfig, solve
from .policy_eval import TauDist, ThresholdPolicyFamily, estimate
from .price_model import PriceGrid, PriceModelParams
from .risk import RiskSchedule


@dataclass(frozen=True)
class BetaSample:
    """One sampled time-homogeneous risk parameter with its estimated metrics."""

    lam: float
    alpha: float
    reward: float
    reward_se: float
    risk: float
    risk_se: float


def _powers(degree: int) -> np.ndarray:
    """Exponent pairs (i, j) with i + j <= degree, in graded order."""
    return np.array([(i, j) for d in range(degree + 1)
                     for i in range(d, -1, -1) for j in (d - i,)])


def _design(points: np.ndarray, powers: np.ndarray) -> np.ndarray:
    lam, alpha = points[:, 0:1], points[:, 1:2]
    return lam ** powers[:, 0] * alpha ** powers[:, 1]


def _derivative_design(points: np.ndarray, powers: np.ndarray, var: int) -> np.ndarray:
    lam, alpha = points[:, 0:1], points[:, 1:2]
    e = powers.astype(float).copy()
    coef = e[:, var].copy()
    e[:, var] = np.maximum(e[:, var] - 1.0, 0.0)
    return coef * lam ** e[:, 0] * alpha ** e[:, 1]


@dataclass(frozen=True)
class MonotoneFit:
    """Monomial-basis surface; when constrained, nonincreasing in both
    variables on the constraint grid by construction."""

    weights: np.ndarray
    powers: np.ndarray
    degree: int
    constrained: bool
    l1_error: float

    def coefficient_matrix(self) -> np.ndarray:
        c = np.zeros((self.degree + 1, self.degree + 1))
        c[self.powers[:, 0], self.powers[:, 1]] = self.weights
        return c

    def __call__(self, lam, alpha):
        return npoly.polyval2d(np.asarray(lam, dtype=float),
                               np.asarray(alpha, dtype=float),
                               self.coefficient_matrix())


def evaluate(fit: MonotoneFit, lam: float, alpha: float) -> float:
    return float(fit(lam, alpha))


def default_constraint_grid(n: int = 50) -> np.ndarray:
    lam = np.linspace(0.0, 1.0, n)
    alpha = np.linspace(0.005, 0.995, n)
    ll, aa = np.meshgrid(lam, alpha, indexing="ij")
    return np.column_stack([ll.ravel(), aa.ravel()])


def fit(data: list[BetaSample], target: str, degree: int,
        constraint_grid: np.ndarray | None = None) -> MonotoneFit:
    """l1 polynomial fit of the reward or risk observations.

    target="risk" enforces nonincreasing partial derivatives at every
    constraint-grid point; target="reward" is unconstrained.
    """
    if target not in ("reward", "risk"):
        raise ValueError("target must be 'reward' or 'risk'")
    if degree < 0:
        raise ValueError("degree must be >= 0")
    constrained = target == "risk"
    points = np.array([[s.lam, s.alpha] for s in data])
    obs = np.array([s.risk if constrained else s.reward for s in data])
    powers = _powers(degree)
    phi = _design(points, powers)
    n, k = phi.shape

    # minimize sum(e) s.t. -e <= phi w - obs <= e, derivative rows <= 0
    c = np.concatenate([np.zeros(k), np.ones(n)])
    eye = np.eye(n)
    rows = [np.hstack([phi, -eye]), np.hstack([-phi, -eye])]
    rhs = [obs, -obs]
    if constrained and degree >= 1:
        if constraint_grid is None:
            constraint_grid = default_constraint_grid()
        for var in (0, 1):
            d = _derivative_design(constraint_grid, powers, var)
            rows.append(np.hstack([d, np.zeros((len(d), n))]))
            rhs.append(np.zeros(len(d)))
    res = linprog(c, A_ub=np.vstack(rows), b_ub=np.concatenate(rhs),
                  bounds=[(None, None)] * k + [(0, None)] * n, method="highs")
    if not res.success:
        raise RuntimeError(f"l1 regression LP failed: {res.message}")
    weights = res.x[:k]
    err = float(np.abs(phi @ weights - obs).sum())
    return MonotoneFit(weights, powers, degree, constrained, err)


def verify_monotone(fit_: MonotoneFit, n: int = 200, tol: float = 1e-6) -> bool:
    """Post-hoc check of nonincreasing partials on a finer grid."""
    grid = np.column_stack([
        np.repeat(np.linspace(0.0, 1.0, n), n),
        np.tile(np.linspace(0.005, 0.995, n), n),
    ])
    for var in (0, 1):
        d = _derivative_design(grid, fit_.powers, var) @ fit_.weights
        if d.max(initial=0.0) > tol:
            return False
    return True


@dataclass(frozen=True)
class SelectedBeta:
    lam: float
    alpha: float
    feasible: bool
    fitted_reward: float
    fitted_risk: float


def select_beta(reward_fit: MonotoneFit, risk_fit: MonotoneFit, epsilon: float,
                n_lambda: int = 201, n_alpha: int = 199) -> SelectedBeta:
    """Dense-grid maximizer of fitted reward subject to fitted risk <= epsilon.

    Ties break to the lexicographically smallest (lam, alpha); with no feasible
    grid point, the risk-minimizing point is returned flagged infeasible.
    """
    lam = np.linspace(0.0, 1.0, n_lambda)
    alpha = np.linspace(0.005, 0.995, n_alpha)
    ll, aa = np.meshgrid(lam, alpha, indexing="ij")
    reward = reward_fit(ll, aa)
    risk = risk_fit(ll, aa)
    feasible = risk <= epsilon
    if feasible.any():
        masked = np.where(feasible, reward, -np.inf)
        idx = np.unravel_index(int(np.argmax(masked)), masked.shape)
        return SelectedBeta(float(ll[idx]), float(aa[idx]), True,
                            float(reward[idx]), float(risk[idx]))
    idx = np.unravel_index(int(np.argmin(risk)), risk.shape)
    return SelectedBeta(float(ll[idx]), float(aa[idx]), False,
                        float(reward[idx]), float(risk[idx]))


@dataclass(frozen=True)
class SelectionRow:
    epsilon: float
    lam: float
    alpha: float
    feasible: bool
    reward: float
    reward_se: float
    risk: float
    risk_se: float


@dataclass(frozen=True)
class PipelineResult:
    samples: tuple[BetaSample, ...]
    reward_fit: MonotoneFit
    risk_fit: MonotoneFit
    rows: tuple[SelectionRow, ...]


def solve_family(lam: float, alpha: float, cfg: MdpConfig, pm: PriceModelParams,
                 grid: PriceGrid, horizons) -> ThresholdPolicyFamily:
    """Solve the MDP at every reservation length needed by the tau distribution."""
    sols = {}
    for T in horizons:
        cfg_t = MdpConfig(r_max=cfg.r_max, x_max=cfg.x_max, c_f=cfg.c_f,
                          p_ref=cfg.p_ref, gamma_h=cfg.gamma_h, horizon=int(T),
                          r0=cfg.r0, gamma_y_kind=cfg.gamma_y_kind,
                          gamma_y_cap=cfg.gamma_y_cap)
        beta = RiskSchedule.homogeneous(lam, alpha, int(T))
        sols[int(T)] = solve(cfg_t, beta, pm, grid)
    return ThresholdPolicyFamily(sols)


def pipeline(sample_grid, cfg: MdpConfig, pm: PriceModelParams, grid: PriceGrid,
             tau_dist: TauDist, epsilons, n_paths: int, seed: int, p0: float,
             degree: int = 10, constraint_grid: np.ndarray | None = None,
             risk_kind: str = "indicator", delta: float = 0.3) -> PipelineResult:
    """Three-step selection: estimate metrics for sampled betas, fit both
    surfaces, then re-solve and re-simulate the recommendation for each epsilon."""
    def measure(lam, alpha):
        family = solve_family(lam, alpha, cfg, pm, grid, tau_dist.horizons)
        return estimate(family, tau_dist, cfg, pm, p0, n_paths, seed,
                        risk_kind=risk_kind, delta=delta)

    samples = []
    for lam, alpha in sample_grid:
        m = measure(lam, alpha)
        samples.append(BetaSample(float(lam), float(alpha), m.reward, m.reward_se,
                                  m.risk, m.risk_se))

    reward_fit = fit(samples, "reward", degree, constraint_grid)
    risk_fit = fit(samples, "risk", degree, constraint_grid)

    rows = []
    cache: dict[tuple[float, float], object] = {}
    for eps in epsilons:
        sel = select_beta(reward_fit, risk_fit, float(eps))
        key = (sel.lam, sel.alpha)
        if key not in cache:
            cache[key] = measure(sel.lam, sel.alpha)
        m = cache[key]
        rows.append(SelectionRow(float(eps), sel.lam, sel.alpha, sel.feasible,
                                 m.reward, m.reward_se, m.risk, m.risk_se))
    return PipelineResult(tuple(samples), reward_fit, risk_fit, tuple(rows))
