"""Graded response model: ordinal item curves over a latent trait.

Each item has one discrimination ``alpha`` and K-1 increasing difficulties
``betas``; the probability of answering above level k is a logistic curve in
theta.  Fitting is marginal maximum likelihood with a standard-normal prior
(EM over a fixed quadrature grid, per-item quasi-Newton M-steps); latent
scores are MAP estimates clipped to [-6, +6].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit

from .errors import UnobservedCategory

THETA_LO, THETA_HI = -6.0, 6.0
N_QUAD = 61
MAP_GRID_STEP = 1e-3
ALPHA_CAP = 50.0
_MIN_PROB = 1e-12


@dataclass(frozen=True)
class GrmItemParams:
    """One item's curves; ``level_map`` translates raw levels 1..K to the
    item's internal categories when sparse levels were collapsed."""

    alpha: float
    betas: np.ndarray
    level_map: tuple[int, ...] | None = None

    def __post_init__(self):
        betas = np.asarray(self.betas, dtype=float)
        object.__setattr__(self, "betas", betas)
        if not (0 < self.alpha <= ALPHA_CAP):
            raise ValueError(f"alpha must be in (0, {ALPHA_CAP}], got {self.alpha}")
        if betas.ndim != 1 or len(betas) < 1:
            raise ValueError("need at least one difficulty")
        if not np.all(np.isfinite(betas)) or np.any(np.diff(betas) <= 0):
            raise ValueError("betas must be finite and strictly increasing")
        if self.level_map is not None:
            if min(self.level_map) != 1 or max(self.level_map) != self.n_categories:
                raise ValueError("level_map must cover internal categories 1..m")
            if any(b - a not in (0, 1) for a, b in zip(self.level_map, self.level_map[1:])):
                raise ValueError("level_map must be non-decreasing in unit steps")

    @property
    def n_categories(self) -> int:
        return len(self.betas) + 1

    def internal_level(self, level: int) -> int:
        if self.level_map is None:
            if not 1 <= level <= self.n_categories:
                raise ValueError(f"level {level} outside 1..{self.n_categories}")
            return level
        if not 1 <= level <= len(self.level_map):
            raise ValueError(f"level {level} outside 1..{len(self.level_map)}")
        return self.level_map[level - 1]


def boundary_prob(params: GrmItemParams, k: int, theta) -> float | np.ndarray:
    """P(response > k | theta) = logistic(alpha * (theta - beta_k)), k in 1..m-1."""
    if not 1 <= k <= len(params.betas):
        raise ValueError(f"boundary index {k} outside 1..{len(params.betas)}")
    out = expit(params.alpha * (np.asarray(theta, dtype=float) - params.betas[k - 1]))
    return float(out) if np.isscalar(theta) else out


def _boundaries(params: GrmItemParams, theta: np.ndarray) -> np.ndarray:
    """Stack B_0=1, B_1..B_{m-1}, B_m=0 as an (m+1, len(theta)) array."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    mid = expit(params.alpha * (theta[None, :] - params.betas[:, None]))
    ones = np.ones((1, len(theta)))
    zeros = np.zeros((1, len(theta)))
    return np.vstack([ones, mid, zeros])


def category_prob_all(params: GrmItemParams, theta) -> np.ndarray:
    """P(level = k | theta) for k = 1..m, shape (m, len(theta))."""
    b = _boundaries(params, theta)
    return b[:-1] - b[1:]


def category_prob(params: GrmItemParams, k: int, theta) -> float | np.ndarray:
    if not 1 <= k <= params.n_categories:
        raise ValueError(f"category {k} outside 1..{params.n_categories}")
    p = category_prob_all(params, theta)[k - 1]
    return float(p[0]) if np.isscalar(theta) else p


def item_information(params: GrmItemParams, theta) -> float | np.ndarray:
    """Fisher information: sum over categories of (dP/dtheta)^2 / P."""
    theta_arr = np.atleast_1d(np.asarray(theta, dtype=float))
    b = _boundaries(params, theta_arr)
    bp = np.zeros_like(b)
    bp[1:-1] = params.alpha * b[1:-1] * (1 - b[1:-1])
    p = b[:-1] - b[1:]
    dp = bp[:-1] - bp[1:]
    info = np.sum(
        np.divide(dp**2, p, out=np.zeros_like(p), where=p > 0), axis=0
    )
    return float(info[0]) if np.isscalar(theta) else info


def _quadrature(n: int = N_QUAD) -> tuple[np.ndarray, np.ndarray]:
    nodes = np.linspace(THETA_LO, THETA_HI, n)
    w = np.exp(-0.5 * nodes**2)
    return nodes, w / w.sum()


@dataclass(frozen=True)
class LatentEstimate:
    theta: float
    posterior_sd: float
    n_items_used: int

    def __post_init__(self):
        if not THETA_LO <= self.theta <= THETA_HI:
            raise ValueError("theta outside bounds")
        if self.posterior_sd < 0:
            raise ValueError("posterior_sd must be >= 0")


@dataclass
class GrmModel:
    """Fitted item parameters plus the quadrature and MAP machinery.

    Treated as immutable after construction; the lazily built per-item
    log-probability grids make repeated MAP calls cheap and are safe to share
    across threads (rebuilding them is idempotent).
    """

    items: dict[int, GrmItemParams]
    K: int
    quad_nodes: np.ndarray = None
    quad_weights: np.ndarray = None
    fit_meta: dict = field(default_factory=dict)
    _grid: np.ndarray = field(default=None, repr=False, compare=False)
    _log_tables: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.quad_nodes is None:
            nodes, weights = _quadrature()
            self.quad_nodes = nodes
            self.quad_weights = weights
        if self.K < 2:
            raise ValueError("K must be >= 2")

    @property
    def theta_bounds(self) -> tuple[float, float]:
        return (THETA_LO, THETA_HI)

    @property
    def parameter_count(self) -> int:
        """One alpha plus m-1 betas per item; J*K total when nothing collapsed."""
        return sum(1 + len(p.betas) for p in self.items.values())

    def _ensure_grid(self) -> np.ndarray:
        if self._grid is None:
            n = int(round((THETA_HI - THETA_LO) / MAP_GRID_STEP)) + 1
            self._grid = np.linspace(THETA_LO, THETA_HI, n)
        return self._grid

    def _log_table(self, item_id: int) -> np.ndarray:
        table = self._log_tables.get(item_id)
        if table is None:
            grid = self._ensure_grid()
            p = np.clip(category_prob_all(self.items[item_id], grid), _MIN_PROB, None)
            table = np.log(p)
            self._log_tables[item_id] = table
        return table


def _log_posterior_derivatives(
    model: GrmModel, responses: dict[int, int], theta: float
) -> tuple[float, float]:
    """First and second derivative of the log posterior at theta."""
    d1, d2 = -theta, -1.0
    for item_id, level in responses.items():
        params = model.items[item_id]
        k = params.internal_level(level)
        b = _boundaries(params, np.array([theta]))[:, 0]
        bp = np.zeros_like(b)
        bp[1:-1] = params.alpha * b[1:-1] * (1 - b[1:-1])
        bpp = np.zeros_like(b)
        bpp[1:-1] = params.alpha**2 * b[1:-1] * (1 - b[1:-1]) * (1 - 2 * b[1:-1])
        p = max(b[k - 1] - b[k], _MIN_PROB)
        dp = bp[k - 1] - bp[k]
        dpp = bpp[k - 1] - bpp[k]
        d1 += dp / p
        d2 += dpp / p - (dp / p) ** 2
    return d1, d2


def map_estimate(model: GrmModel, responses: dict[int, int]) -> LatentEstimate:
    """Posterior mode of theta given graded responses, standard-normal prior.

    Dense-grid argmax (step 1e-3) plus one Newton refinement, clipped to the
    theta bounds; the empty response set returns the prior mode.
    """
    if not responses:
        return LatentEstimate(0.0, 1.0, 0)
    grid = model._ensure_grid()
    log_post = -0.5 * grid**2
    for item_id, level in responses.items():
        k = model.items[item_id].internal_level(level)
        log_post = log_post + model._log_table(item_id)[k - 1]
    idx = int(np.argmax(log_post))
    theta = float(grid[idx])
    d1, d2 = _log_posterior_derivatives(model, responses, theta)
    if d2 < -1e-12:
        step = float(np.clip(-d1 / d2, -MAP_GRID_STEP, MAP_GRID_STEP))
        theta = float(np.clip(theta + step, THETA_LO, THETA_HI))
    rel = np.exp(log_post - log_post[idx])
    rel_sum = rel.sum()
    mean = float((rel @ grid) / rel_sum)
    var = float((rel @ (grid - mean) ** 2) / rel_sum)
    return LatentEstimate(theta, float(np.sqrt(max(var, 0.0))), len(responses))


def _collapse_maps(
    levels: np.ndarray, K: int, item_ids: list[int], on_unobserved: str
) -> tuple[np.ndarray, dict[int, tuple[int, ...]]]:
    """Re-index levels so every internal category is observed.

    Unobserved raw levels adopt the nearest observed level (ties prefer the
    lower), and survivors are renumbered 1..m preserving order.
    """
    missing = {
        item_ids[j]: [k for k in range(1, K + 1) if not np.any(levels[:, j] == k)]
        for j in range(levels.shape[1])
    }
    missing = {i: m for i, m in missing.items() if m}
    if missing and on_unobserved == "raise":
        raise UnobservedCategory(missing)
    out = np.empty_like(levels)
    maps: dict[int, tuple[int, ...]] = {}
    for j, item_id in enumerate(item_ids):
        observed = sorted(set(int(v) for v in levels[:, j]))
        if len(observed) < 2:
            raise UnobservedCategory({item_id: missing.get(item_id, [])})
        rank = {lvl: r + 1 for r, lvl in enumerate(observed)}
        table = []
        for k in range(1, K + 1):
            nearest = min(observed, key=lambda lvl: (abs(lvl - k), lvl))
            table.append(rank[nearest])
        maps[item_id] = tuple(table)
        out[:, j] = np.array(table)[levels[:, j] - 1]
    return out, maps


def _init_item(x_col: np.ndarray, m: int) -> np.ndarray:
    """Starting point (log alpha, beta1, log gaps) from observed proportions."""
    n = len(x_col)
    above = np.array([np.sum(x_col > k) / n for k in range(1, m)])
    above = np.clip(above, 1e-3, 1 - 1e-3)
    betas = np.log((1 - above) / above)
    for i in range(1, len(betas)):
        betas[i] = max(betas[i], betas[i - 1] + 0.05)
    u = np.zeros(1 + m - 1)
    u[1] = betas[0]
    if m > 2:
        u[2:] = np.log(np.diff(betas))
    return u


def _params_from_u(u: np.ndarray) -> tuple[float, np.ndarray]:
    alpha = float(np.exp(u[0]))
    gaps = np.exp(u[2:])
    betas = u[1] + np.concatenate([[0.0], np.cumsum(gaps)])
    return alpha, betas


def _neg_expected_loglik(u: np.ndarray, R: np.ndarray, nodes: np.ndarray):
    """Minus the M-step objective sum_{q,k} R[k,q] log P_k(node_q), with its
    gradient in the (log alpha, beta1, log gaps) parameterization."""
    alpha, betas = _params_from_u(u)
    m = R.shape[0]
    mid = expit(alpha * (nodes[None, :] - betas[:, None]))
    b = np.vstack([np.ones((1, len(nodes))), mid, np.zeros((1, len(nodes)))])
    p = np.clip(b[:-1] - b[1:], _MIN_PROB, None)
    value = float((R * np.log(p)).sum())
    g = R / p
    dfdb = g[1:] - g[:-1]  # (m-1, Q), derivative wrt each middle boundary
    bprime = mid * (1 - mid)
    dfdalpha = float((dfdb * bprime * (nodes[None, :] - betas[:, None])).sum())
    dfdbeta = -(alpha * (dfdb * bprime).sum(axis=1))
    grad = np.empty_like(u)
    grad[0] = dfdalpha * alpha
    grad[1] = dfdbeta.sum()
    if m > 2:
        gaps = np.exp(u[2:])
        tails = np.cumsum(dfdbeta[::-1])[::-1]
        grad[2:] = gaps * tails[1:]
    return -value, -grad


def _sanitize_u(alpha: float, betas: np.ndarray) -> np.ndarray:
    alpha = min(max(alpha, 1e-4), ALPHA_CAP)
    gaps = np.maximum(np.diff(betas), 1e-6)
    u = np.empty(1 + len(betas))
    u[0] = np.log(alpha)
    u[1] = betas[0]
    if len(betas) > 1:
        u[2:] = np.log(gaps)
    return u


def fit_grm(
    levels: np.ndarray,
    K: int,
    *,
    item_ids: list[int] | None = None,
    max_cycles: int = 500,
    tol: float = 1e-4,
    on_unobserved: str = "collapse",
    n_quad: int = N_QUAD,
) -> GrmModel:
    """Marginal-ML fit of all items from an n x J matrix of levels in 1..K.

    EM with a fixed-grid quadrature E-step and per-item BFGS M-steps; each
    M-step keeps the previous parameters unless it improves its objective, so
    the marginal log-likelihood never decreases.  Stops when no parameter
    moves more than ``tol`` or after ``max_cycles`` (then flagged as not
    converged in ``fit_meta`` rather than raising).
    """
    levels = np.asarray(levels, dtype=int)
    if levels.ndim != 2:
        raise ValueError("levels must be an n x J matrix")
    n, J = levels.shape
    if item_ids is None:
        item_ids = list(range(1, J + 1))
    if np.any(levels < 1) or np.any(levels > K):
        raise ValueError("levels must lie in 1..K")
    x, maps = _collapse_maps(levels, K, item_ids, on_unobserved)
    nodes, weights = _quadrature(n_quad)
    log_w = np.log(weights)
    m_of = [int(x[:, j].max()) for j in range(J)]
    u_of = [_init_item(x[:, j], m_of[j]) for j in range(J)]

    def log_tables() -> list[np.ndarray]:
        tables = []
        for j in range(J):
            alpha, betas = _params_from_u(u_of[j])
            params = GrmItemParams(min(alpha, ALPHA_CAP), _strictify(betas))
            tables.append(np.log(np.clip(category_prob_all(params, nodes), _MIN_PROB, None)))
        return tables

    def e_step() -> tuple[np.ndarray, float]:
        log_like = np.zeros((n, len(nodes)))
        for j, table in enumerate(log_tables()):
            log_like += table[x[:, j] - 1, :]
        joint = log_like + log_w[None, :]
        peak = joint.max(axis=1, keepdims=True)
        rel = np.exp(joint - peak)
        total = rel.sum(axis=1, keepdims=True)
        loglik = float((peak[:, 0] + np.log(total[:, 0])).sum())
        return rel / total, loglik

    trace: list[float] = []
    converged = False
    cycles = 0
    for cycle in range(1, max_cycles + 1):
        cycles = cycle
        posterior, loglik = e_step()
        trace.append(loglik)
        max_move = 0.0
        for j in range(J):
            R = np.zeros((m_of[j], len(nodes)))
            np.add.at(R, x[:, j] - 1, posterior)
            u0 = u_of[j]
            f0, _ = _neg_expected_loglik(u0, R, nodes)
            res = minimize(
                _neg_expected_loglik,
                u0,
                args=(R, nodes),
                jac=True,
                method="BFGS",
                options={"maxiter": 100, "gtol": 1e-8},
            )
            u_new = u0
            if res.fun < f0:
                alpha_new, betas_new = _params_from_u(res.x)
                candidate = _sanitize_u(alpha_new, betas_new)
                f_candidate, _ = _neg_expected_loglik(candidate, R, nodes)
                if f_candidate < f0:
                    u_new = candidate
            a_old, b_old = _params_from_u(u0)
            a_new, b_new = _params_from_u(u_new)
            move = max(abs(a_new - a_old), float(np.max(np.abs(b_new - b_old))))
            max_move = max(max_move, move)
            u_of[j] = u_new
        if max_move < tol:
            converged = True
            break
    _, final_loglik = e_step()
    trace.append(final_loglik)

    items: dict[int, GrmItemParams] = {}
    for j, item_id in enumerate(item_ids):
        alpha, betas = _params_from_u(u_of[j])
        level_map = maps[item_id]
        identity = level_map == tuple(range(1, K + 1))
        items[item_id] = GrmItemParams(
            min(alpha, ALPHA_CAP),
            _strictify(betas),
            level_map=None if identity else level_map,
        )
    fit_meta = {
        "cycles": cycles,
        "tol": tol,
        "loglik": final_loglik,
        "converged": converged,
        "loglik_trace": trace,
        "collapsed": {i: list(m) for i, m in maps.items() if m != tuple(range(1, K + 1))},
    }
    return GrmModel(items=items, K=K, fit_meta=fit_meta)


def _strictify(betas: np.ndarray) -> np.ndarray:
    """Nudge numerically merged difficulties apart to keep strict ordering."""
    out = np.array(betas, dtype=float)
    for i in range(1, len(out)):
        if out[i] <= out[i - 1]:
            out[i] = out[i - 1] + 1e-9
    return out
