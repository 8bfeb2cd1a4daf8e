"""Exact and Monte Carlo inference for ferromagnetic Ising models.

Spins live in {-1, +1}. A model is a graph plus a symmetric coupling
field; the probability of a configuration x is proportional to
exp(sum_{(i,j)} theta_ij x_i x_j).

Vertex labels are 1-based; numpy arrays produced here (correlation
matrices, sample matrices) use column v-1 for vertex v.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Sequence

import numpy as np

from .graphs import Graph

# 2^26 states keeps a full enumeration in the sub-minute range.
ENUMERATION_MAX_P = 26
_BLOCK_BITS = 18


class EnumerationTooLarge(ValueError):
    """State space exceeds the exact-enumeration budget."""


@dataclass(frozen=True)
class CouplingField:
    """Symmetric coupling map stored as upper-triangle (i, j, theta) triples.

    theta_ij = theta_ji is implied; absent pairs (and the diagonal) are 0.
    """

    p: int
    couplings: tuple

    def __post_init__(self):
        seen = set()
        for i, j, th in self.couplings:
            if not (1 <= i < j <= self.p):
                raise ValueError(f"bad coupling pair ({i},{j}) for p={self.p}")
            if (i, j) in seen:
                raise ValueError(f"duplicate coupling ({i},{j})")
            seen.add((i, j))

    @classmethod
    def homogeneous(cls, g: Graph, theta: float) -> "CouplingField":
        """theta on every edge of g, zero elsewhere."""
        return cls(g.p, tuple((i, j, float(theta)) for i, j in g.sorted_edges()))

    @classmethod
    def from_dict(cls, p: int, mapping: dict) -> "CouplingField":
        items = []
        for (a, b), th in mapping.items():
            i, j = (a, b) if a < b else (b, a)
            items.append((i, j, float(th)))
        return cls(p, tuple(sorted(items)))

    def get(self, a: int, b: int) -> float:
        i, j = (a, b) if a < b else (b, a)
        for ii, jj, th in self.couplings:
            if (ii, jj) == (i, j):
                return th
        return 0.0

    @property
    def support(self) -> frozenset:
        return frozenset((i, j) for i, j, _ in self.couplings)

    def homogeneous_value(self) -> float | None:
        """The common coupling if all entries are equal, else None."""
        vals = {th for _, _, th in self.couplings}
        if len(vals) == 1:
            return vals.pop()
        return None

    def abs_total(self) -> float:
        return sum(abs(th) for _, _, th in self.couplings)

    def neighbor_data(self):
        """Per-site 0-based neighbor index lists and coupling lists."""
        nbrs = [[] for _ in range(self.p)]
        ths = [[] for _ in range(self.p)]
        for i, j, th in self.couplings:
            nbrs[i - 1].append(j - 1)
            ths[i - 1].append(th)
            nbrs[j - 1].append(i - 1)
            ths[j - 1].append(th)
        return nbrs, ths

    def theta_row(self, r: int) -> np.ndarray:
        """Couplings of vertex r against all vertices (length p, 0-based)."""
        row = np.zeros(self.p)
        for i, j, th in self.couplings:
            if i == r:
                row[j - 1] = th
            elif j == r:
                row[i - 1] = th
        return row


def _as_field(g: Graph, theta) -> CouplingField:
    if isinstance(theta, CouplingField):
        if theta.p != g.p:
            raise ValueError("coupling field and graph disagree on p")
        if not theta.support <= g.edges:
            raise ValueError("coupling support is not contained in the graph")
        return theta
    return CouplingField.homogeneous(g, float(theta))


def _spin_block(start: int, count: int, p: int) -> np.ndarray:
    """Block of spin configurations for state indices start..start+count-1.

    Bit b of the index gives the spin of vertex b+1 (+1 for bit 0).
    """
    idx = np.arange(start, start + count, dtype=np.uint64)
    bits = (idx[:, None] >> np.arange(p, dtype=np.uint64)) & np.uint64(1)
    return 1.0 - 2.0 * bits.astype(np.float64)


@dataclass
class ExactDistribution:
    """Moment oracle over the full 2^p state space.

    corr[i-1, j-1] holds E{X_i X_j}. Expectations of arbitrary bounded
    functions are evaluated by re-streaming the state space in blocks,
    so instances stay small regardless of p.
    """

    graph: Graph
    field: CouplingField
    log_z: float
    corr: np.ndarray
    _h_max: float = dc_field(repr=False, default=0.0)
    _z_shifted: float = dc_field(repr=False, default=0.0)

    def _blocks(self):
        """Yield (spins, weights) with weights = exp(H - H_max) per state."""
        p = self.graph.p
        nstates = 1 << p
        bs = min(nstates, 1 << _BLOCK_BITS)
        cps = [(i - 1, j - 1, th) for i, j, th in self.field.couplings]
        for start in range(0, nstates, bs):
            X = _spin_block(start, min(bs, nstates - start), p)
            H = np.zeros(len(X))
            for i, j, th in cps:
                H += th * (X[:, i] * X[:, j])
            yield X, np.exp(H - self._h_max)

    def expectation(self, fn: Callable[[np.ndarray], np.ndarray]) -> float:
        """E{fn(X)} for a vectorized fn mapping a (B, p) block to (B,)."""
        acc = 0.0
        for X, w in self._blocks():
            acc += float(np.dot(fn(X), w))
        return acc / self._z_shifted

    def expectation_vector(self, fn: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """E{X_v fn(X)} for every vertex, as a length-p array."""
        acc = np.zeros(self.graph.p)
        for X, w in self._blocks():
            acc += X.T @ (fn(X) * w)
        return acc / self._z_shifted

    def expectation_matrix(self, weight_fn: Callable[[np.ndarray], np.ndarray] | None = None) -> np.ndarray:
        """E{X X^T w(X)} as a (p, p) array; w defaults to 1."""
        acc = np.zeros((self.graph.p, self.graph.p))
        for X, w in self._blocks():
            ww = w if weight_fn is None else w * weight_fn(X)
            acc += (X * ww[:, None]).T @ X
        return acc / self._z_shifted

    def marginal(self, vertices: Sequence[int]) -> np.ndarray:
        """Joint pmf over the given vertices, shape (2,)*len(vertices).

        Axis k follows vertices[k]; index 0 means spin +1, index 1 spin -1.
        """
        m = len(vertices)
        if m > 20:
            raise ValueError("marginal table over more than 20 vertices")
        table = np.zeros(1 << m)
        for X, w in self._blocks():
            code = np.zeros(len(X), dtype=np.int64)
            for k, v in enumerate(vertices):
                bit = ((1.0 - X[:, v - 1]) * 0.5).astype(np.int64)
                code |= bit << (m - 1 - k)
            table += np.bincount(code, weights=w, minlength=1 << m)
        return (table / self._z_shifted).reshape((2,) * m)


def exact_moments(g: Graph, theta) -> ExactDistribution:
    """Exact partition function and pair correlations by full enumeration.

    Stable for arbitrary couplings: weights are computed relative to the
    maximum attainable energy, so nothing overflows.
    """
    if g.p > ENUMERATION_MAX_P:
        raise EnumerationTooLarge(
            f"p={g.p} exceeds the enumeration budget of {ENUMERATION_MAX_P}"
        )
    fld = _as_field(g, theta)
    h_max = fld.abs_total()
    dist = ExactDistribution(g, fld, log_z=0.0, corr=np.empty(0), _h_max=h_max)
    z = 0.0
    s = np.zeros((g.p, g.p))
    for X, w in dist._blocks():
        z += float(w.sum())
        s += (X * w[:, None]).T @ X
    dist._z_shifted = z
    dist.log_z = h_max + math.log(z)
    corr = s / z
    np.fill_diagonal(corr, 1.0)
    dist.corr = corr
    return dist


@dataclass(frozen=True)
class SampleSet:
    """n samples of p spins with the sampler settings that produced them."""

    spins: np.ndarray  # (n, p) int8 in {-1, +1}
    seed: int
    burn_in: int
    thin: int

    def __post_init__(self):
        spins = np.ascontiguousarray(self.spins, dtype=np.int8)
        object.__setattr__(self, "spins", spins)
        if spins.ndim != 2:
            raise ValueError("spins must be an (n, p) matrix")
        if not np.all(np.abs(spins) == 1):
            raise ValueError("spins must be +1 or -1")

    @property
    def n(self) -> int:
        return self.spins.shape[0]

    @property
    def p(self) -> int:
        return self.spins.shape[1]


class _Glauber:
    """Single-site heat-bath dynamics with uniformly random scan order.

    One sweep is p single-site updates. For homogeneous couplings the
    acceptance probabilities come from a lookup table indexed by the
    integer sum of neighbor spins.
    """

    _CHUNK = 128  # sweeps of randomness drawn per batch

    def __init__(self, fld: CouplingField):
        self.p = fld.p
        nbrs, ths = fld.neighbor_data()
        self.nbrs = [tuple(x) for x in nbrs]
        self.ths = [tuple(x) for x in ths]
        theta0 = fld.homogeneous_value()
        self.table = None
        self.offset = 0
        if theta0 is not None or not fld.couplings:
            maxdeg = max((len(x) for x in nbrs), default=0)
            t0 = 0.0 if theta0 is None else theta0
            ms = np.arange(-maxdeg, maxdeg + 1)
            self.table = (1.0 / (1.0 + np.exp(-2.0 * t0 * ms))).tolist()
            self.offset = maxdeg

    def initial_state(self, rng) -> list:
        return (rng.integers(0, 2, self.p) * 2 - 1).tolist()

    def run(self, x: list, nsweeps: int, rng, stop_on_negative_mag: bool = False):
        """Advance the chain in place; returns (sweeps_run, stopped_early)."""
        p = self.p
        nbrs = self.nbrs
        mag = sum(x) if stop_on_negative_mag else 0
        done = 0
        while done < nsweeps:
            k = min(self._CHUNK, nsweeps - done)
            sites = rng.integers(0, p, size=k * p).tolist()
            us = rng.random(k * p).tolist()
            idx = 0
            if self.table is not None:
                table = self.table
                off = self.offset
                for _ in range(k):
                    for _ in range(p):
                        i = sites[idx]
                        u = us[idx]
                        idx += 1
                        m = 0
                        for j in nbrs[i]:
                            m += x[j]
                        s = 1 if u < table[m + off] else -1
                        if stop_on_negative_mag:
                            mag += s - x[i]
                        x[i] = s
                    done += 1
                    if stop_on_negative_mag and mag < 0:
                        return done, True
            else:
                ths = self.ths
                for _ in range(k):
                    for _ in range(p):
                        i = sites[idx]
                        u = us[idx]
                        idx += 1
                        h = 0.0
                        nb = nbrs[i]
                        tt = ths[i]
                        for t in range(len(nb)):
                            h += tt[t] * x[nb[t]]
                        s = 1 if u < 1.0 / (1.0 + math.exp(-2.0 * h)) else -1
                        if stop_on_negative_mag:
                            mag += s - x[i]
                        x[i] = s
                    done += 1
                    if stop_on_negative_mag and mag < 0:
                        return done, True
        return done, False


@dataclass(frozen=True)
class MixingEstimate:
    sweeps: int
    saturated: bool


def estimate_mixing(g: Graph, theta, seed: int, max_sweeps: int = 10_000) -> MixingEstimate:
    """Sweeps until the magnetization first goes negative, started all-(+1).

    A conservative relaxation-time proxy; saturates at max_sweeps.
    """
    if max_sweeps < 1:
        raise ValueError("max_sweeps must be >= 1")
    fld = _as_field(g, theta)
    kern = _Glauber(fld)
    rng = np.random.default_rng(seed)
    x = [1] * g.p
    done, stopped = kern.run(x, max_sweeps, rng, stop_on_negative_mag=True)
    if stopped:
        return MixingEstimate(done, False)
    return MixingEstimate(max_sweeps, True)


def default_sampler_settings(
    g: Graph,
    theta,
    seed: int,
    mixing_cap: int = 1000,
    burn_in_factor: int = 10,
    thin_divisor: int = 10,
    thin_cap: int = 50,
) -> tuple[int, int, MixingEstimate]:
    """burn_in/thin derived from the mixing estimate: 10x and /10 by default."""
    est = estimate_mixing(g, theta, seed, max_sweeps=mixing_cap)
    burn_in = max(1, burn_in_factor * est.sweeps)
    thin = max(1, min(thin_cap, est.sweeps // thin_divisor))
    return burn_in, thin, est


def gibbs_sample(
    g: Graph,
    theta,
    n: int,
    burn_in: int | None = None,
    thin: int | None = None,
    seed: int = 0,
    mixing_cap: int = 1000,
) -> SampleSet:
    """n samples by random-scan heat-bath dynamics, one sample kept every
    `thin` full sweeps after `burn_in` sweeps. Deterministic under seed.

    When burn_in or thin is omitted it is derived from estimate_mixing
    (10x the estimate, and the estimate over 10, respectively).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    ss = np.random.SeedSequence(seed)
    mix_seed, run_seed = ss.spawn(2)
    if burn_in is None or thin is None:
        b, t, _ = default_sampler_settings(
            g, theta, seed=mix_seed.generate_state(1)[0], mixing_cap=mixing_cap
        )
        burn_in = b if burn_in is None else burn_in
        thin = t if thin is None else thin
    if burn_in < 1 or thin < 1:
        raise ValueError("burn_in and thin must be >= 1")
    fld = _as_field(g, theta)
    kern = _Glauber(fld)
    rng = np.random.default_rng(run_seed)
    x = kern.initial_state(rng)
    kern.run(x, burn_in, rng)
    out = np.empty((n, g.p), dtype=np.int8)
    for ell in range(n):
        kern.run(x, thin, rng)
        out[ell] = x
    return SampleSet(out, seed=seed, burn_in=burn_in, thin=thin)


def empirical_correlations(s: SampleSet) -> np.ndarray:
    """Symmetric p x p matrix of sample pair moments; diagonal exactly 1."""
    X = s.spins.astype(np.float64)
    c = (X.T @ X) / s.n
    np.fill_diagonal(c, 1.0)
    return c


def tree_boundary_field(delta: int, theta: float, tol: float = 1e-12) -> float:
    """Unique positive fixed point of h = (delta-1) atanh(tanh(theta) tanh(h)).

    Returns 0.0 in the high-temperature regime (delta-1) tanh(theta) <= 1,
    where only the trivial fixed point exists. Bisection plus a fixed-point
    polish drive the residual below tol.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if delta < 3:
        raise ValueError("degree must be >= 3")
    if theta <= 0:
        raise ValueError("theta must be positive")
    t = math.tanh(theta)
    if (delta - 1) * t <= 1.0:
        return 0.0

    def step(h):
        z = min(t * math.tanh(h), 1.0 - 1e-16)
        return (delta - 1) * math.atanh(z)

    lo = tol
    hi = 50.0 * max(1.0, theta * delta)
    # f(h) = step(h) - h is positive on (0, h*), negative beyond
    while step(hi) - hi >= 0:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if step(mid) - mid > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol * 0.5:
            break
    h = 0.5 * (lo + hi)
    for _ in range(200):
        h_next = step(h)
        if abs(h_next - h) < tol * 1e-3:
            h = h_next
            break
        h = h_next
    if abs(step(h) - h) >= tol:
        # fall back to the bisection midpoint when the polish stalls
        h = 0.5 * (lo + hi)
    return h


@dataclass(frozen=True)
class TreeModel:
    """Rooted regular tree of given degree with a boundary field on the
    leaves chosen so local expectations are depth-independent."""

    delta: int
    theta: float
    generations: int
    h_star: float = -1.0
    tol: float = 1e-10

    def __post_init__(self):
        if self.h_star < 0:
            object.__setattr__(
                self, "h_star", tree_boundary_field(self.delta, self.theta, self.tol)
            )
        if self.h_star <= 0:
            raise ValueError(
                "no positive boundary field: (delta-1) tanh(theta) <= 1"
            )
        t = math.tanh(self.theta)
        resid = abs((self.delta - 1) * math.atanh(t * math.tanh(self.h_star)) - self.h_star)
        if resid >= self.tol:
            raise ValueError(f"boundary field residual {resid} exceeds tol")


def saw_correlation_bound(delta: int, theta: float, dist: int) -> float:
    """Path-counting upper bound on a pair correlation at graph distance
    `dist`: delta^(dist-1) tanh(theta)^dist / (1 - delta tanh(theta))."""
    if dist < 1:
        raise ValueError("dist must be >= 1")
    t = math.tanh(theta)
    if delta * t >= 1.0:
        raise ValueError(f"bound inapplicable: delta*tanh(theta) = {delta * t:.4f} >= 1")
    return delta ** (dist - 1) * t**dist / (1.0 - delta * t)


def write_samples(s: SampleSet, path) -> None:
    """Header `n p seed burn_in thin`, then one +/-1 row per sample."""
    with open(path, "w") as fh:
        fh.write(f"{s.n} {s.p} {s.seed} {s.burn_in} {s.thin}\n")
        for row in s.spins:
            fh.write(" ".join("+1" if v > 0 else "-1" for v in row) + "\n")


def read_samples(path) -> SampleSet:
    with open(path) as fh:
        head = fh.readline().split()
        if len(head) != 5:
            raise ValueError("sample file header must be `n p seed burn_in thin`")
        n, p, seed, burn_in, thin = (int(v) for v in head)
        spins = np.empty((n, p), dtype=np.int8)
        for ell in range(n):
            row = fh.readline().split()
            if len(row) != p:
                raise ValueError(f"sample row {ell} has {len(row)} tokens, wanted {p}")
            spins[ell] = [int(v) for v in row]
    return SampleSet(spins, seed=seed, burn_in=burn_in, thin=thin)


def write_correlations_csv(c: np.ndarray, path) -> None:
    """CSV with a 0-based vertex-index header row."""
    p = c.shape[0]
    with open(path, "w") as fh:
        fh.write(",".join(str(v) for v in range(p)) + "\n")
        for row in c:
            fh.write(",".join(f"{v:.12g}" for v in row) + "\n")
