"""The three structure-learning algorithms and their sample-size calculators.

All learners reconstruct the edge set of the generating graph from spin
samples: correlation thresholding, a local conditional-independence test
(with an optional correlation-pruned candidate pool), and l1-regularized
logistic regression solved per vertex.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .graphs import Graph
from .ising import ExactDistribution, SampleSet, empirical_correlations


def thresholding(corr: np.ndarray, tau: float) -> Graph:
    """Edge (i, j) iff corr[i-1, j-1] >= tau, for i < j."""
    if not 0.0 < tau < 1.0:
        raise ValueError(f"threshold must lie in (0, 1), got {tau}")
    p = corr.shape[0]
    edges = [
        (i + 1, j + 1) for i in range(p) for j in range(i + 1, p) if corr[i, j] >= tau
    ]
    return Graph(p, frozenset(edges))


def tau_tree(theta: float) -> float:
    """Threshold separating tree edge correlations from non-edge ones."""
    if theta <= 0:
        raise ValueError("theta must be positive")
    t = math.tanh(theta)
    return 0.5 * (t + t * t)


def tau_degree(theta: float, delta: int) -> float:
    """Threshold for degree-bounded graphs; valid for tanh(theta) < 1/(2 delta)."""
    if theta <= 0:
        raise ValueError("theta must be positive")
    if delta < 2:
        raise ValueError("delta must be >= 2")
    if math.tanh(theta) >= 1.0 / (2 * delta):
        raise ValueError(
            f"out of regime: theta={theta} >= atanh(1/(2*{delta}))"
            f"={math.atanh(1.0 / (2 * delta)):.5f}"
        )
    return 0.5 * (math.tanh(theta) + 1.0 / (2 * delta))


def default_ind_params(theta: float, delta: int) -> tuple[float, float, float]:
    """(eps, gamma, kappa) defaults for the independence-test learners."""
    if theta <= 0:
        raise ValueError("theta must be positive")
    eps = 0.25 * math.sinh(2.0 * theta)
    gamma = math.exp(-4.0 * delta * theta) * 2.0 ** (-2 * delta)
    kappa = math.tanh(theta)
    return eps, gamma, kappa


def sample_bound(
    alg: str,
    theta: float,
    delta: int = 0,
    p: int = 0,
    dlt: float = 0.05,
    k2: float = 1.0,
) -> int:
    """Number of samples sufficient for exact recovery with probability
    1 - dlt, per learner. `k2` scales the rlr bound, whose absolute
    constant is not pinned down; the default 1 is a placeholder.
    """
    if p < 2:
        raise ValueError("p must be >= 2")
    if not 0 < dlt < 1:
        raise ValueError("dlt must lie in (0, 1)")
    if theta <= 0:
        raise ValueError("theta must be positive")
    if alg == "thr-tree":
        t = math.tanh(theta)
        return math.ceil(32.0 / (t - t * t) ** 2 * math.log(2 * p / dlt))
    if alg == "thr-degree":
        if delta < 2:
            raise ValueError("delta must be >= 2")
        if math.tanh(theta) >= 1.0 / (2 * delta):
            raise ValueError("out of regime: theta >= atanh(1/(2*delta))")
        t = math.tanh(theta)
        return math.ceil(32.0 / (t - 1.0 / (2 * delta)) ** 2 * math.log(2 * p / dlt))
    if alg == "ind":
        if delta < 1:
            raise ValueError("delta must be >= 1")
        eps, gamma, _ = default_ind_params(theta, delta)
        return math.ceil(100.0 * delta / (eps**2 * gamma**4) * math.log(2 * p / dlt))
    if alg == "indd":
        if delta < 1:
            raise ValueError("delta must be >= 1")
        kappa = math.tanh(theta)
        return math.ceil(8.0 * (kappa**2 + 8.0**delta) * math.log(4 * p / dlt))
    if alg == "rlr":
        if delta < 1:
            raise ValueError("delta must be >= 1")
        return math.ceil(k2 * theta**-2 * delta * math.log(8 * p**2 / dlt))
    raise ValueError(f"unknown algorithm tag {alg!r}")


# ---------------------------------------------------------------------------
# conditional-independence score


def _empirical_joint_factory(s: SampleSet):
    """Joint pmf tables from samples; axis k follows the k-th requested
    vertex, index 0 = spin +1."""
    bits = ((1 - s.spins.astype(np.int64)) // 2)
    n = s.n

    def joint(vertices):
        m = len(vertices)
        code = np.zeros(n, dtype=np.int64)
        for k, v in enumerate(vertices):
            code |= bits[:, v - 1] << (m - 1 - k)
        t = np.bincount(code, minlength=1 << m).astype(np.float64) / n
        return t.reshape((2,) * m)

    return joint


def _population_joint_factory(dist: ExactDistribution):
    def joint(vertices):
        return dist.marginal(vertices)

    return joint


def _subsets_up_to(pool, kmax):
    for k in range(0, kmax + 1):
        yield from itertools.combinations(pool, k)


def _score_from_joint(joint, p, r, U, delta, gamma, w_pool=None, floor=None):
    """min over (W, j) of the max admissible conditional shift of the root.

    For each probe set W and each j in U: condition the root variable on
    the values of W and U, flip the value at j, and record the largest
    absolute change in the conditional law of the root over assignment
    pairs whose conditioning events both have probability > gamma/2.
    A (W, j) with no admissible pair contributes 0. When `floor` is given
    the search stops early once the running minimum falls to or below it.
    """
    U = sorted(U)
    if not U:
        raise ValueError("candidate set U must be non-empty")
    if len(U) > delta:
        raise ValueError("candidate set U larger than the degree bound")
    if w_pool is None:
        w_pool = [v for v in range(1, p + 1) if v != r]
    w_pool = [v for v in w_pool if v != r and v not in U]
    best = math.inf
    for W in _subsets_up_to(w_pool, delta):
        vars_ = sorted(set(U) | set(W))
        tbl = joint((r,) + tuple(vars_))
        pa = tbl.sum(axis=0)
        with np.errstate(invalid="ignore", divide="ignore"):
            cond = np.where(pa > 0, tbl[0] / np.where(pa > 0, pa, 1.0), 0.0)
        for j in U:
            ax = vars_.index(j)
            pa_flip = np.flip(pa, axis=ax)
            ok = (pa > gamma / 2.0) & (pa_flip > gamma / 2.0)
            if ok.any():
                diff = np.abs(cond - np.flip(cond, axis=ax))
                contrib = float(diff[ok].max())
            else:
                contrib = 0.0
            if contrib < best:
                best = contrib
                if floor is not None and best <= floor:
                    return best
    return best


def score(s: SampleSet, r: int, U, delta: int, gamma: float) -> float:
    """Empirical conditional-shift score of candidate neighborhood U at root r."""
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    return _score_from_joint(_empirical_joint_factory(s), s.p, r, U, delta, gamma)


def population_score(dist: ExactDistribution, r: int, U, delta: int, gamma: float) -> float:
    """Score evaluated with exact conditionals instead of empirical ones."""
    return _score_from_joint(
        _population_joint_factory(dist), dist.graph.p, r, U, delta, gamma
    )


def _neighborhood_by_score(joint, p, r, pool, delta, eps, gamma):
    """Largest U (ties: lexicographically smallest) with score > eps/2."""
    pool = sorted(v for v in pool if v != r)
    for size in range(min(delta, len(pool)), 0, -1):
        for U in itertools.combinations(pool, size):
            sc = _score_from_joint(
                joint, p, r, list(U), delta, gamma, w_pool=pool, floor=eps / 2.0
            )
            if sc > eps / 2.0:
                return set(U)
    return set()


def _edges_from_neighborhoods(p: int, hoods: dict, rule: str) -> Graph:
    edges = set()
    for r, nb in hoods.items():
        for j in nb:
            e = (r, j) if r < j else (j, r)
            if rule == "or":
                edges.add(e)
            elif rule == "and":
                if r in hoods.get(j, set()):
                    edges.add(e)
            else:
                raise ValueError(f"unknown edge rule {rule!r}")
    return Graph(p, frozenset(edges))


def local_independence_test(
    s: SampleSet, delta: int, eps: float, gamma: float, rule: str = "or"
) -> Graph:
    """Per root, exhaustively search candidate sets of size <= delta and keep
    the largest whose score clears eps/2; combine neighborhoods into edges."""
    if eps <= 0 or gamma <= 0:
        raise ValueError("thresholds must be positive")
    joint = _empirical_joint_factory(s)
    pool_all = list(range(1, s.p + 1))
    hoods = {
        r: _neighborhood_by_score(joint, s.p, r, pool_all, delta, eps, gamma)
        for r in range(1, s.p + 1)
    }
    return _edges_from_neighborhoods(s.p, hoods, rule)


def local_independence_test_pruned(
    s: SampleSet, delta: int, eps: float, gamma: float, kappa: float, rule: str = "or"
) -> Graph:
    """Independence test with candidates and probe sets restricted to the
    correlation ball B(r) = {i : corr(r, i) > kappa/2}."""
    if eps <= 0 or gamma <= 0:
        raise ValueError("thresholds must be positive")
    joint = _empirical_joint_factory(s)
    corr = empirical_correlations(s)
    hoods = {}
    for r in range(1, s.p + 1):
        ball = [
            v for v in range(1, s.p + 1) if v != r and corr[r - 1, v - 1] > kappa / 2.0
        ]
        hoods[r] = _neighborhood_by_score(joint, s.p, r, ball, delta, eps, gamma)
    return _edges_from_neighborhoods(s.p, hoods, rule)


def population_independence_test(
    dist: ExactDistribution, delta: int, eps: float, gamma: float, rule: str = "or"
) -> Graph:
    """Population-limit run of the independence test on exact conditionals."""
    joint = _population_joint_factory(dist)
    p = dist.graph.p
    pool_all = list(range(1, p + 1))
    hoods = {
        r: _neighborhood_by_score(joint, p, r, pool_all, delta, eps, gamma)
        for r in range(1, p + 1)
    }
    return _edges_from_neighborhoods(p, hoods, rule)


# ---------------------------------------------------------------------------
# l1-regularized logistic regression


def _design(s: SampleSet, r: int):
    """Columns X_j for j != r (ascending labels) and the response X_r."""
    X = s.spins.astype(np.float64)
    cols = [v for v in range(s.p) if v != r - 1]
    return X[:, cols], X[:, r - 1], [v + 1 for v in cols]


def pseudo_likelihood_objective(
    theta_r: np.ndarray, s: SampleSet, r: int
) -> tuple[float, np.ndarray]:
    """Negative mean conditional log-likelihood of the root and its gradient.

    value = mean log(1 + exp(-2 x_r h)) with h = sum_j theta_rj x_j,
    grad_j = mean x_j (tanh h - x_r). Evaluated via logaddexp so large
    fields cannot overflow.
    """
    theta_r = np.asarray(theta_r, dtype=np.float64)
    if not np.all(np.isfinite(theta_r)):
        raise ValueError("coefficients must be finite")
    Xo, xr, _ = _design(s, r)
    if theta_r.shape != (s.p - 1,):
        raise ValueError(f"expected coefficient vector of length {s.p - 1}")
    h = Xo @ theta_r
    value = float(np.mean(np.logaddexp(0.0, -2.0 * xr * h)))
    grad = Xo.T @ (np.tanh(h) - xr) / s.n
    return value, grad


def _soft(v: np.ndarray, t: float) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def _kkt_residual(theta: np.ndarray, grad: np.ndarray, lam: float) -> float:
    """Distance of -grad from lam * subdifferential of the l1 norm."""
    on = theta != 0.0
    res_on = np.abs(grad[on] + lam * np.sign(theta[on]))
    res_off = np.maximum(np.abs(grad[~on]) - lam, 0.0)
    out = 0.0
    if res_on.size:
        out = max(out, float(res_on.max()))
    if res_off.size:
        out = max(out, float(res_off.max()))
    return out


@dataclass(frozen=True)
class NeighborhoodEstimate:
    """Solution of one per-vertex l1 problem plus solver diagnostics."""

    root: int
    labels: tuple  # vertex label for each coefficient
    theta: np.ndarray
    neighbors: frozenset
    converged: bool
    iterations: int
    objective: float
    residual: float
    objective_history: tuple = ()


def rlr_neighborhood(
    s: SampleSet,
    r: int,
    lam: float,
    tol: float = 1e-6,
    max_iter: int = 5000,
    selection_threshold: float = 1e-6,
    theta0: np.ndarray | None = None,
    record_history: bool = False,
) -> NeighborhoodEstimate:
    """Minimize the penalized conditional log-likelihood by proximal
    gradient descent with a fixed 1/L step (L from the Gram matrix), and
    select neighbors with coefficients above `selection_threshold`.

    Stops when the subgradient optimality residual drops below tol; a
    non-converged result carries converged=False rather than raising.
    """
    if lam < 0:
        raise ValueError("lam must be >= 0")
    Xo, xr, labels = _design(s, r)
    n = s.n
    gram = Xo.T @ Xo / n
    lip = float(np.linalg.eigvalsh(gram)[-1])
    step = 1.0 / max(lip, 1e-12)
    theta = np.zeros(s.p - 1) if theta0 is None else np.array(theta0, dtype=np.float64)

    def value_grad(th):
        h = Xo @ th
        val = float(np.mean(np.logaddexp(0.0, -2.0 * xr * h)))
        grad = Xo.T @ (np.tanh(h) - xr) / n
        return val, grad

    def penalized_grad(th):
        val, grad = value_grad(th)
        return val + lam * float(np.abs(th).sum()), grad

    # Accelerated proximal gradient with a monotone safeguard: a momentum
    # step that would raise the penalized objective is replaced by a plain
    # proximal step from the current iterate (momentum reset), so accepted
    # iterates always descend.
    history = []
    converged = False
    it = 0
    f_cur, grad = penalized_grad(theta)
    prev = theta
    t_mom = 1.0
    for it in range(1, max_iter + 1):
        res = _kkt_residual(theta, grad, lam)
        if res < tol:
            converged = True
            break
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t_mom * t_mom))
        y = theta + ((t_mom - 1.0) / t_next) * (theta - prev)
        _, grad_y = value_grad(y)
        cand = _soft(y - step * grad_y, step * lam)
        f_cand, grad_cand = penalized_grad(cand)
        if f_cand > f_cur:
            cand = _soft(theta - step * grad, step * lam)
            f_cand, grad_cand = penalized_grad(cand)
            t_next = 1.0
        prev, theta, f_cur, grad, t_mom = theta, cand, f_cand, grad_cand, t_next
        if record_history:
            history.append(f_cur)
    res = _kkt_residual(theta, grad, lam)
    if res < tol:
        converged = True
    val = f_cur - lam * float(np.abs(theta).sum())
    nb = frozenset(
        labels[k] for k in range(len(labels)) if theta[k] > selection_threshold
    )
    return NeighborhoodEstimate(
        root=r,
        labels=tuple(labels),
        theta=theta,
        neighbors=nb,
        converged=converged,
        iterations=it,
        objective=val + lam * float(np.abs(theta).sum()),
        residual=res,
        objective_history=tuple(history),
    )


@dataclass(frozen=True)
class RlrGraphResult:
    graph: Graph
    estimates: dict
    all_converged: bool


def _rlr_all_roots(
    X: np.ndarray, lam: float, tol: float, max_iter: int, theta0: np.ndarray | None
):
    """Solve every root's l1 problem at once.

    Column r-1 of the iterate holds root r's coefficients against all p
    vertices, with the self-coefficient pinned to zero; the dynamics are
    the same safeguarded accelerated proximal scheme as the single-root
    solver, applied columnwise. Returns (Theta, objective, residual,
    iterations) with per-column diagnostics.
    """
    n, p = X.shape
    # Collapse duplicate sample rows into weights: every objective below is
    # a weighted sum over rows, so this is exact and pays off massively in
    # the strongly coupled regime where most samples coincide.
    Xu, counts = np.unique(X, axis=0, return_counts=True)
    wgt = (counts / n)[:, None]
    gram = Xu.T @ (wgt * Xu)
    lip = float(np.linalg.eigvalsh(gram)[-1])
    step = 1.0 / max(lip, 1e-12)

    def pin_self(mat, cols):
        mat[cols, np.arange(len(cols))] = 0.0  # self-coefficients stay 0

    def f_and_g(th, cols):
        H = Xu @ th
        vals = np.sum(wgt * np.logaddexp(0.0, -2.0 * Xu[:, cols] * H), axis=0)
        vals = vals + lam * np.abs(th).sum(axis=0)
        G = Xu.T @ (wgt * (np.tanh(H) - Xu[:, cols]))
        pin_self(G, cols)
        return vals, G

    def grad_only(th, cols):
        G = Xu.T @ (wgt * (np.tanh(Xu @ th) - Xu[:, cols]))
        pin_self(G, cols)
        return G

    def residuals(th, G, cols):
        on = th != 0.0
        r_on = np.where(on, np.abs(G + lam * np.sign(th)), 0.0)
        r_off = np.where(~on, np.maximum(np.abs(G) - lam, 0.0), 0.0)
        out = np.maximum(r_on, r_off)
        pin_self(out, cols)
        return out.max(axis=0)

    theta_full = np.zeros((p, p)) if theta0 is None else theta0.copy()
    np.fill_diagonal(theta_full, 0.0)
    f_full = np.empty(p)
    res_full = np.empty(p)

    # roots whose residual still exceeds tol; frozen columns are final
    cols = np.arange(p)
    theta = theta_full[:, cols].copy()
    prev = theta.copy()
    t_mom = np.ones(len(cols))
    f_cur, G = f_and_g(theta, cols)
    it = 0
    for it in range(1, max_iter + 1):
        res = residuals(theta, G, cols)
        done = res < tol
        if done.any():
            idx = cols[done]
            theta_full[:, idx] = theta[:, done]
            f_full[idx] = f_cur[done]
            res_full[idx] = res[done]
            keep = ~done
            cols = cols[keep]
            if cols.size == 0:
                break
            theta = theta[:, keep]
            prev = prev[:, keep]
            t_mom = t_mom[keep]
            f_cur = f_cur[keep]
            G = G[:, keep]
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_mom * t_mom))
        y = theta + ((t_mom - 1.0) / t_next) * (theta - prev)
        pin_self(y, cols)
        cand = _soft(y - step * grad_only(y, cols), step * lam)
        pin_self(cand, cols)
        f_cand, g_cand = f_and_g(cand, cols)
        bad = f_cand > f_cur
        if bad.any():
            cand2 = _soft(theta - step * G, step * lam)
            pin_self(cand2, cols)
            f2, g2 = f_and_g(cand2, cols)
            cand[:, bad] = cand2[:, bad]
            f_cand[bad] = f2[bad]
            g_cand[:, bad] = g2[:, bad]
            t_next = np.where(bad, 1.0, t_next)
        prev, theta, f_cur, G, t_mom = theta, cand, f_cand, g_cand, t_next
    if cols.size:
        theta_full[:, cols] = theta
        f_full[cols] = f_cur
        res_full[cols] = residuals(theta, G, cols)
    return theta_full, f_full, res_full, it


def rlr_graph(
    s: SampleSet,
    lam: float,
    rule: str = "or",
    tol: float = 1e-6,
    max_iter: int = 5000,
    selection_threshold: float = 1e-6,
    warm: np.ndarray | None = None,
) -> RlrGraphResult:
    """Regularized regression at every vertex, combined by the OR or AND
    rule. `warm` is a (p, p) matrix of starting coefficients (column r-1
    for root r), e.g. the solution at a nearby regularization level."""
    X = s.spins.astype(np.float64)
    theta, f_cur, res, it = _rlr_all_roots(X, lam, tol, max_iter, warm)
    estimates = {}
    hoods = {}
    for r in range(1, s.p + 1):
        col = theta[:, r - 1]
        labels = tuple(v for v in range(1, s.p + 1) if v != r)
        coef = np.array([col[v - 1] for v in labels])
        nb = frozenset(v for v in labels if col[v - 1] > selection_threshold)
        estimates[r] = NeighborhoodEstimate(
            root=r,
            labels=labels,
            theta=coef,
            neighbors=nb,
            converged=bool(res[r - 1] < tol),
            iterations=it,
            objective=float(f_cur[r - 1]),
            residual=float(res[r - 1]),
        )
        hoods[r] = set(nb)
    g = _edges_from_neighborhoods(s.p, hoods, rule)
    return RlrGraphResult(g, estimates, all(e.converged for e in estimates.values()))


@dataclass
class LearnerConfig:
    """Which learner to run and with what parameters.

    Fields left as None are derived from (theta, delta) at run time:
    tau via tau_rule, and eps/gamma/kappa via default_ind_params.
    """

    alg: str  # thr | ind | indd | rlr
    tau: float | None = None
    tau_rule: str = "tree"  # tree | degree
    eps: float | None = None
    gamma: float | None = None
    kappa: float | None = None
    rule: str = "or"
    tol: float = 1e-6
    max_iter: int = 3000
    selection_threshold: float = 1e-6

    def __post_init__(self):
        if self.alg not in ("thr", "ind", "indd", "rlr"):
            raise ValueError(f"unknown learner {self.alg!r}")


def run_learner(
    cfg: LearnerConfig,
    s: SampleSet,
    theta: float,
    delta: int,
    lam: float = 0.0,
) -> Graph:
    """Dispatch a configured learner on a sample set."""
    if cfg.alg == "thr":
        tau = cfg.tau
        if tau is None:
            tau = tau_tree(theta) if cfg.tau_rule == "tree" else tau_degree(theta, delta)
        return thresholding(empirical_correlations(s), tau)
    if cfg.alg in ("ind", "indd"):
        eps, gamma, kappa = default_ind_params(theta, delta)
        eps = cfg.eps if cfg.eps is not None else eps
        gamma = cfg.gamma if cfg.gamma is not None else gamma
        kappa = cfg.kappa if cfg.kappa is not None else kappa
        if cfg.alg == "ind":
            return local_independence_test(s, delta, eps, gamma, rule=cfg.rule)
        return local_independence_test_pruned(s, delta, eps, gamma, kappa, rule=cfg.rule)
    if cfg.alg == "rlr":
        return rlr_graph(
            s,
            lam,
            rule=cfg.rule,
            tol=cfg.tol,
            max_iter=cfg.max_iter,
            selection_threshold=cfg.selection_threshold,
        ).graph
    raise AssertionError(cfg.alg)


# ---------------------------------------------------------------------------
# population-limit regression on the double-hub graph


def _gp_population_tables(theta: float, p: int):
    """Joint pmf of (X_1, X_2, M) on the double-hub graph, with
    M = X_3 + ... + X_p, returned as aligned flat arrays (x1, x2, m, prob)."""
    from .graphs import make_toy_gp
    from .ising import exact_moments

    g = make_toy_gp(p)
    dist = exact_moments(g, theta)
    k = p - 2
    tbl = np.zeros((2, 2, k + 1))
    for X, w in dist._blocks():
        i1 = ((1.0 - X[:, 0]) * 0.5).astype(np.int64)
        i2 = ((1.0 - X[:, 1]) * 0.5).astype(np.int64)
        msum = X[:, 2:].sum(axis=1)
        km = ((msum + k) * 0.5).astype(np.int64)
        np.add.at(tbl, (i1, i2, km), w)
    tbl /= dist._z_shifted
    x1 = np.array([1.0, -1.0])[:, None, None]
    x2 = np.array([1.0, -1.0])[None, :, None]
    m = (2.0 * np.arange(k + 1) - k)[None, None, :]
    prob = tbl
    return (
        np.broadcast_to(x1, tbl.shape).ravel(),
        np.broadcast_to(x2, tbl.shape).ravel(),
        np.broadcast_to(m, tbl.shape).ravel(),
        prob.ravel(),
    )


def _log2cosh(h):
    return np.abs(h) + np.log1p(np.exp(-2.0 * np.abs(h)))


def population_rlr_gp(
    theta: float, p: int, lam: float, tol: float = 1e-10
) -> tuple[float, float]:
    """Population-limit regression at the hub of the double-hub graph.

    By symmetry the hub's coefficients toward all spoke vertices coincide,
    so the problem reduces to two variables (t13 toward a spoke, t12 toward
    the opposite hub) with penalty lam*(p-2)*|t13| + lam*|t12|. The
    minimizer is found by alternating exact one-dimensional minimizations
    (bisection on the stationarity condition). Returns (t13_hat, t12_hat).
    """
    if p < 5:
        raise ValueError("p must be >= 5")
    if theta <= 0:
        raise ValueError("theta must be positive")
    if lam < 0:
        raise ValueError("lam must be >= 0")
    x1, x2, m, prob = _gp_population_tables(theta, p)
    e12 = float(np.sum(prob * x1 * x2))
    e1m = float(np.sum(prob * x1 * m))

    def partials(t13, t12):
        h = t12 * x2 + t13 * m
        tanh_h = np.tanh(h)
        g13 = float(np.sum(prob * m * tanh_h)) - e1m
        g12 = float(np.sum(prob * x2 * tanh_h)) - e12
        return g13, g12

    def solve_coord(other_fixed, which, weight):
        """Exact minimizer in one coordinate given the other."""

        def dsmooth(t):
            if which == 13:
                return partials(t, other_fixed)[0]
            return partials(other_fixed, t)[1]

        g0 = dsmooth(0.0)
        if abs(g0) <= weight:
            return 0.0
        sign = -math.copysign(1.0, g0)  # descent direction from 0
        # stationarity: dsmooth(t) + weight*sign(t) = 0 on the active side
        target = -weight * sign

        def f(t):
            return dsmooth(sign * t) - target

        hi = 1.0
        while f(hi) * sign < 0 and hi < 1e6:
            hi *= 2.0
        lo = 0.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if f(mid) * sign < 0:
                lo = mid
            else:
                hi = mid
            if hi - lo < tol * 0.25:
                break
        return sign * 0.5 * (lo + hi)

    t13, t12 = 0.0, 0.0
    for _ in range(500):
        t13_new = solve_coord(t12, 13, lam * (p - 2))
        t12_new = solve_coord(t13_new, 12, lam)
        moved = max(abs(t13_new - t13), abs(t12_new - t12))
        t13, t12 = t13_new, t12_new
        if moved < tol * 0.1:
            break
    return t13, t12
