"""Population-level quantities that predict when each learner breaks down.

Covers the exact Hessian of the per-vertex conditional log-likelihood,
the incoherence norm controlling l1-regularized neighborhood selection,
the infinite-tree limit of that norm on random regular graphs with its
crossing point, closed-form correlation calculus for glued subgraphs and
the double-hub family, and a certificate showing where plain correlation
thresholding must fail.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graphs import Graph, make_regular_plus_edge
from .ising import (
    ENUMERATION_MAX_P,
    ExactDistribution,
    exact_moments,
    empirical_correlations,
    gibbs_sample,
    tree_boundary_field,
)


class SingularHessian(ValueError):
    """The neighborhood block of the Hessian is numerically singular."""


class RootNotFound(RuntimeError):
    """A threshold solver found no sign change in its scan range."""


GRAD_CHECK_TOL = 1e-10
SIGMA_MIN_FLOOR = 1e-12


@dataclass(frozen=True)
class PopulationHessian:
    """Exact Hessian of the conditional log-likelihood at the true couplings.

    q[a, b] = E{X_i X_j / cosh^2(h_r)} for i = vertices[a], j = vertices[b],
    with h_r the field seen by the root. grad_inf_norm records the largest
    component of the stationarity check (must vanish at the truth).
    """

    root: int
    vertices: tuple
    q: np.ndarray
    grad_inf_norm: float


def population_hessian(dist: ExactDistribution, r: int) -> PopulationHessian:
    """Exact (p-1) x (p-1) Hessian block for root r, with a stationarity
    self-check of the gradient at the true couplings."""
    p = dist.graph.p
    if not 1 <= r <= p:
        raise ValueError(f"root {r} out of range")
    theta_row = dist.field.theta_row(r)

    s_mat = np.zeros((p, p))
    t_vec = np.zeros(p)
    z = 0.0
    for X, w in dist._blocks():
        h = X @ theta_row  # X_r never enters: theta_row[r-1] = 0
        sech2 = 1.0 / np.cosh(h) ** 2
        ws = w * sech2
        s_mat += (X * ws[:, None]).T @ X
        t_vec += X.T @ (w * np.tanh(h))
        z += float(w.sum())
    s_mat /= z
    t_vec /= z

    grad = t_vec - dist.corr[:, r - 1]
    keep = [v for v in range(p) if v != r - 1]
    grad_inf = float(np.max(np.abs(grad[keep])))
    if grad_inf > GRAD_CHECK_TOL:
        raise ValueError(
            f"stationarity check failed at root {r}: |grad|_inf = {grad_inf:.3e}"
        )
    q = s_mat[np.ix_(keep, keep)]
    return PopulationHessian(
        root=r, vertices=tuple(v + 1 for v in keep), q=q, grad_inf_norm=grad_inf
    )


@dataclass(frozen=True)
class IncoherenceReport:
    """Blocks and norms of the Hessian split by the true neighborhood S."""

    root: int
    neighbors: tuple
    q_ss: np.ndarray
    q_scs: np.ndarray
    norm: float  # max_i |row_i(Q_ScS Q_SS^-1) . 1|
    sigma_min: float
    row_sums: np.ndarray
    row_l1: np.ndarray
    sc_vertices: tuple


def incoherence(hess: PopulationHessian, neighbors) -> IncoherenceReport:
    """Incoherence norm ||Q_ScS Q_SS^-1 1||_inf for the given neighborhood.

    The all-ones vector is the ferromagnetic subgradient at the truth."""
    nb = tuple(sorted(neighbors))
    vmap = {v: k for k, v in enumerate(hess.vertices)}
    s_idx = [vmap[v] for v in nb]
    sc = [v for v in hess.vertices if v not in nb]
    sc_idx = [vmap[v] for v in sc]
    q_ss = hess.q[np.ix_(s_idx, s_idx)]
    q_scs = hess.q[np.ix_(sc_idx, s_idx)]
    sigma_min = float(np.linalg.eigvalsh(q_ss)[0])
    if sigma_min < SIGMA_MIN_FLOOR:
        raise SingularHessian(
            f"sigma_min(Q_SS) = {sigma_min:.3e} below {SIGMA_MIN_FLOOR}"
        )
    w = np.linalg.solve(q_ss, q_scs.T).T  # rows of Q_ScS Q_SS^-1
    row_sums = w.sum(axis=1)
    row_l1 = np.abs(w).sum(axis=1)
    norm = float(np.max(np.abs(row_sums))) if len(sc) else 0.0
    return IncoherenceReport(
        root=hess.root,
        neighbors=nb,
        q_ss=q_ss,
        q_scs=q_scs,
        norm=norm,
        sigma_min=sigma_min,
        row_sums=row_sums,
        row_l1=row_l1,
        sc_vertices=tuple(sc),
    )


def graph_incoherence(g: Graph, theta, r: int) -> IncoherenceReport:
    """Convenience: exact incoherence report of root r on graph g."""
    dist = exact_moments(g, theta)
    hess = population_hessian(dist, r)
    return incoherence(hess, g.neighbors(r))


# ---------------------------------------------------------------------------
# infinite-tree limit on random regular graphs


def _log_binom(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def _logcosh(x: float) -> float:
    ax = abs(x)
    return ax + math.log1p(math.exp(-2.0 * ax)) - math.log(2.0)


@dataclass(frozen=True)
class TreeLimitReport:
    """Large-graph limit of the neighborhood Hessian on a regular tree with
    the depth-independent boundary field, and the resulting incoherence."""

    delta: int
    theta: float
    h_star: float
    a: float
    b: float
    c1: float
    c2: float
    alpha: float
    beta: float
    incoherence_limit: float  # limiting value of the incoherence norm
    c_min: float


def _leaf_sum_terms(delta: int, theta: float, h_star: float):
    """log Z of the depth-1 tree with leaf fields, leaf-sum values m, and
    per-m log weights log C(delta, (delta+m)/2) + h* m."""
    ms = np.arange(-delta, delta + 1, 2)
    logw = np.array(
        [_log_binom(delta, (delta + m) // 2) + h_star * m for m in ms], dtype=float
    )
    log_terms_z = logw + np.array([_logcosh(theta * m) for m in ms]) + math.log(2.0)
    shift = log_terms_z.max()
    log_z = shift + math.log(np.exp(log_terms_z - shift).sum())
    return ms, logw, log_z


def tree_limit_report(delta: int, theta: float) -> TreeLimitReport:
    """Evaluate the limiting Hessian entries (a, b), the conditional leaf
    moments (c1, c2), the one-step transition probabilities (alpha, beta)
    and the limiting incoherence value at the positive boundary field."""
    if delta < 4:
        raise ValueError("the limit requires degree >= 4")
    h_star = tree_boundary_field(delta, theta)
    if h_star <= 0.0:
        raise ValueError(
            f"out of regime: no positive boundary field at delta={delta}, theta={theta}"
        )
    ms, logw, log_z = _leaf_sum_terms(delta, theta, h_star)
    log2 = math.log(2.0)

    # Summing the root out of the depth-1 tree leaves each leaf configuration
    # with weight C(delta, (delta+m)/2) e^{h* m} 2 cosh(theta m); multiplying
    # by sech^2(theta m) turns the cosh into 2/cosh.

    # a = E{1/cosh^2(theta M)}
    a = float(
        sum(
            math.exp(log2 + lw - _logcosh(theta * m) - log_z)
            for m, lw in zip(ms, logw)
        )
    )

    # b = E{X_i X_j / cosh^2(theta M)} over two marked leaves
    b = 0.0
    for xi in (1, -1):
        for xj in (1, -1):
            for mpp in range(-(delta - 2), delta - 1, 2):
                m = mpp + xi + xj
                lw = _log_binom(delta - 2, (delta - 2 + mpp) // 2) + h_star * m
                b += xi * xj * math.exp(log2 + lw - _logcosh(theta * m) - log_z)

    # conditional leaf-sum moments: c1 fixes a marked leaf at +1, c2 at -1;
    # binomial coefficients vanish outside their admissible index range
    c1 = 0.0
    c2 = 0.0
    for m in ms:
        k1 = (delta + m - 2) // 2
        if 0 <= k1 <= delta - 1:
            c1 += m * math.exp(
                log2 + _log_binom(delta - 1, k1) + h_star * m - _logcosh(theta * m) - log_z
            )
        k2 = (delta + m) // 2
        if 0 <= k2 <= delta - 1:
            c2 += m * math.exp(
                log2 + _log_binom(delta - 1, k2) + h_star * m - _logcosh(theta * m) - log_z
            )

    alpha = 1.0 / (1.0 + math.exp(-2.0 * (h_star + theta)))
    beta = 1.0 / (1.0 + math.exp(-2.0 * (theta - h_star)))
    root_mag = math.tanh(delta * h_star / (delta - 1))
    b_limit = root_mag * (c1 + c2) / (c1 - c2)
    return TreeLimitReport(
        delta=delta,
        theta=theta,
        h_star=h_star,
        a=a,
        b=b,
        c1=c1,
        c2=c2,
        alpha=alpha,
        beta=beta,
        incoherence_limit=b_limit,
        c_min=min(a - b, c1 - c2),
    )


def _incoherence_limit_sign(delta: int, theta: float) -> float:
    """c1(alpha-1) + c2(1-beta): same sign as (limit incoherence - 1)."""
    rep = tree_limit_report(delta, theta)
    return rep.c1 * (rep.alpha - 1.0) + rep.c2 * (1.0 - rep.beta)


def theta_thr(delta: int, tol: float = 1e-6, theta_max: float = 5.0) -> float:
    """Coupling at which the limiting incoherence crosses 1 on random
    regular graphs of the given degree, by bisection on its sign proxy."""
    if delta < 4:
        raise ValueError("degree must be >= 4")
    onset = math.atanh(1.0 / (delta - 1))
    lo = onset * (1.0 + 1e-9) + 1e-12
    if _incoherence_limit_sign(delta, lo) >= 0:
        raise RootNotFound("sign proxy not negative just above the field onset")
    hi = None
    t = max(lo * 1.5, onset + 0.01)
    while t <= theta_max:
        if _incoherence_limit_sign(delta, t) > 0:
            hi = t
            break
        lo = t
        t *= 1.5
    if hi is None:
        raise RootNotFound(f"no crossing found in ({onset}, {theta_max}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _incoherence_limit_sign(delta, mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def h_infinity(tol: float = 1e-12) -> tuple[float, float]:
    """Root of h tanh(h) = 1 and its square, the large-degree scaling
    constant of the crossing coupling."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    lo, hi = 0.0, 10.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid * math.tanh(mid) < 1.0:
            lo = mid
        else:
            hi = mid
    h = 0.5 * (lo + hi)
    return h, h * h


# ---------------------------------------------------------------------------
# correlation calculus for glued subgraphs


def series_corr(a: float, b: float) -> float:
    """Pair correlation through two chained blocks sharing one vertex."""
    return a * b


def parallel_corr(a: float, b: float) -> float:
    """Pair correlation of two blocks glued at both endpoints."""
    return (a + b) / (1.0 + a * b)


def bridge_corr(c_inner: float, theta: float) -> float:
    """Correlation of the two free corners of a 4-cycle whose other two
    corners are bridged by a block with internal correlation c_inner."""
    t2 = math.tanh(theta) ** 2
    return (2.0 * t2 + 2.0 * c_inner * t2) / (1.0 + t2 * t2 + 2.0 * c_inner * t2)


@dataclass(frozen=True)
class ToyCovariances:
    e12: float
    e13: float | None
    e34: float | None


def _gp_e12(p: int, theta: float) -> float:
    """Hub-hub correlation on the double-hub graph: p-2 two-step channels
    in parallel."""
    z = math.tanh(theta) ** 2
    return math.tanh((p - 2) * math.atanh(z))


def toy_covariances(p: int, theta: float) -> ToyCovariances:
    """Closed-form pair correlations on the double-hub graph: hub-hub,
    hub-spoke, spoke-spoke. The latter two need p >= 5."""
    if p < 3:
        raise ValueError("p must be >= 3")
    e12 = _gp_e12(p, theta)
    if p < 5:
        return ToyCovariances(e12, None, None)
    t = math.tanh(theta)
    e13 = math.tanh(theta + math.atanh(_gp_e12(p - 1, theta) * t))
    e34 = bridge_corr(_gp_e12(p - 2, theta), theta)
    return ToyCovariances(e12, e13, e34)


def gp_neighbor_corr(delta: int, theta: float) -> float:
    """Hub-hub correlation of the double-hub graph with delta spokes."""
    if delta < 1:
        raise ValueError("delta must be >= 1")
    z = math.tanh(theta) ** 2
    up = (1.0 + z) ** delta - (1.0 - z) ** delta
    dn = (1.0 + z) ** delta + (1.0 - z) ** delta
    return up / dn


def theta_T(delta: int, tol: float = 1e-8, theta_max: float = 5.0) -> float:
    """Coupling at which the indirect hub-hub correlation overtakes the
    direct edge correlation on the double-hub family: the root of
    gp_neighbor_corr(delta-1, theta) = tanh(theta)."""
    if delta < 3:
        raise ValueError("delta must be >= 3")

    def f(th):
        return gp_neighbor_corr(delta - 1, th) - math.tanh(th)

    lo = 1e-6
    if f(lo) >= 0:
        raise RootNotFound("no negative branch at small theta")
    hi = None
    t = 0.01
    while t <= theta_max:
        if f(t) > 0:
            hi = t
            break
        lo = t
        t *= 1.3
    if hi is None:
        raise RootNotFound(f"no crossing found below {theta_max}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def toy_gp5_incoherence(theta: float) -> float:
    """Closed-form incoherence norm at a hub of the 5-vertex double-hub
    graph: 3x(1+x^2)/(1+3x^2) with x = tanh(theta)."""
    x = math.tanh(theta)
    return 3.0 * x * (1.0 + x * x) / (1.0 + 3.0 * x * x)


# ---------------------------------------------------------------------------
# failure certificate for thresholding


@dataclass(frozen=True)
class FailureCertificate:
    delta: int
    theta: float
    p: int
    seed: int
    edge_corr: float  # correlation across the planted isolated edge
    max_nonedge_corr: float  # within the regular component
    argmax_pair: tuple
    certificate: float  # max_nonedge_corr - tanh(theta); > 0 means failure
    m_squared: float  # tree-limit magnetization squared, for comparison
    exact: bool


def thresholding_failure_certificate(
    delta: int,
    theta: float,
    p: int,
    seed: int,
    n_gibbs: int = 20_000,
) -> FailureCertificate:
    """Compare the planted isolated-edge correlation tanh(theta) against the
    largest non-edge correlation inside a random regular component.

    A positive certificate means no threshold can separate edges from
    non-edges on this graph. Exact enumeration when 2^p fits the budget,
    otherwise a Gibbs estimate.
    """
    g = make_regular_plus_edge(p, delta, seed)
    exact = p <= ENUMERATION_MAX_P
    if exact:
        corr = exact_moments(g, theta).corr
    else:
        corr = empirical_correlations(
            gibbs_sample(g, theta, n=n_gibbs, seed=seed)
        )
    edge_corr = float(corr[p - 2, p - 1])
    best = -1.0
    best_pair = (0, 0)
    for i in range(1, p - 1):
        for j in range(i + 1, p - 1):
            if g.has_edge(i, j):
                continue
            v = float(corr[i - 1, j - 1])
            if v > best:
                best = v
                best_pair = (i, j)
    h_star = tree_boundary_field(delta, theta)
    m_sq = math.tanh(delta * h_star / (delta - 1)) ** 2 if h_star > 0 else 0.0
    return FailureCertificate(
        delta=delta,
        theta=theta,
        p=p,
        seed=seed,
        edge_corr=edge_corr,
        max_nonedge_corr=best,
        argmax_pair=best_pair,
        certificate=best - math.tanh(theta),
        m_squared=m_sq,
        exact=exact,
    )
