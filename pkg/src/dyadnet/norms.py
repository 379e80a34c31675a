"""Monte Carlo L^q norms with standard errors, the exponential-Orlicz
estimate over a moment grid, an exact second-moment oracle for the
truncated discrepancy approximation, and digit-sign (Khinchin-type)
ratio experiments.

Sampling is counter-based: each fixed-size block owns a jumped Philox
substream, and block moments are reduced with compensated summation in
block order, so results depend on the seed but never on the worker
count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .discrepancy import DiscrepancyContext
from .nets import PointSet
from .walsh import rho_total

DEFAULT_Q_GRID = (1.0, 2.0, 4.0, 8.0, 12.0, 16.0)
_BLOCK = 4096

_popcount = np.bitwise_count


def q_grid(values: Sequence[float] | None = None) -> tuple[float, ...]:
    """Validated moment grid: sorted, distinct, every exponent >= 1."""
    vals = tuple(float(v) for v in (values if values is not None else DEFAULT_Q_GRID))
    if not vals:
        raise ValueError("moment grid must be nonempty")
    if any(v < 1 for v in vals):
        raise ValueError("moment exponents must be >= 1")
    if sorted(set(vals)) != list(vals):
        raise ValueError("moment grid must be sorted and distinct")
    return vals


@dataclass(frozen=True)
class LqEstimate:
    q: float
    value: float
    stderr: float
    samples: int


@dataclass(frozen=True)
class OrliczEstimate:
    value: float
    theta: float
    at_q: float


@dataclass(frozen=True)
class NormReport:
    """Per-exponent norm estimates for one target function, with the
    derived Orlicz estimate and growth-profile ratios."""

    target: str
    estimates: tuple[LqEstimate, ...]
    seed: int
    samples: int

    def estimate(self, q: float) -> LqEstimate:
        for e in self.estimates:
            if e.q == q:
                return e
        raise KeyError(f"no estimate at q={q}")

    def orlicz(self, alpha: float | None = None,
               theta: float | None = None) -> "OrliczEstimate":
        return exp_orlicz_estimate(self.estimates, alpha=alpha, theta=theta)

    def ratios(self, s: int, n: int) -> tuple[float, ...]:
        return tuple(
            normalized_ratio(e.value, e.q, s, n) for e in self.estimates
        )


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed).jumped(block))


def _block_uniforms(seed: int, block: int, size: int, dims: int,
                    stratified: bool) -> np.ndarray:
    rng = _block_rng(seed, block)
    u = rng.random((size, dims))
    if stratified:
        # Per-axis equal strata within the block (latin hypercube).
        for j in range(dims):
            perm = rng.permutation(size)
            u[:, j] = (perm + u[:, j]) / size
    return u


def lq_norms_mc(f: Callable[[np.ndarray], np.ndarray], dims: int,
                qs: Sequence[float], samples: int, seed: int,
                workers: int = 1, stratified: bool = False) -> list[LqEstimate]:
    """(mean |f|^q)^(1/q) over uniform samples, for every q in the grid.

    One pass evaluates f per block and accumulates the q-th and 2q-th
    absolute moments; the standard error of the norm comes from the delta
    method applied to the q-th moment.
    """
    qs = q_grid(qs)
    if samples < 1:
        raise ValueError("need at least one sample")
    blocks = (samples + _BLOCK - 1) // _BLOCK
    sizes = [min(_BLOCK, samples - b * _BLOCK) for b in range(blocks)]

    def run_block(b: int) -> list[tuple[float, float]]:
        u = _block_uniforms(seed, b, sizes[b], dims, stratified)
        vals = np.abs(np.asarray(f(u), dtype=np.float64))
        out = []
        for q in qs:
            p = vals**q
            out.append((float(p.sum()), float((p * p).sum())))
        return out

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_block = list(pool.map(run_block, range(blocks)))
    else:
        per_block = [run_block(b) for b in range(blocks)]

    results = []
    for qi, q in enumerate(qs):
        m1 = math.fsum(pb[qi][0] for pb in per_block) / samples
        m2 = math.fsum(pb[qi][1] for pb in per_block) / samples
        var_mean = max(m2 - m1 * m1, 0.0) / samples
        value = m1 ** (1.0 / q)
        if m1 > 0:
            stderr = (value / (q * m1)) * math.sqrt(var_mean)
        else:
            stderr = 0.0
        results.append(LqEstimate(q, value, stderr, samples))
    return results


def lq_norm_mc(f, dims: int, q: float, samples: int, seed: int,
               workers: int = 1, stratified: bool = False) -> LqEstimate:
    return lq_norms_mc(f, dims, [q], samples, seed, workers, stratified)[0]


def dn_sampler(points: PointSet) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorized discrepancy of a fixed point set at uniform queries."""
    arr = points.array
    size = points.size

    def f(y: np.ndarray) -> np.ndarray:
        inside = np.ones((size, y.shape[0]), dtype=bool)
        for j in range(points.n):
            inside &= arr[:, j][:, None] < y[None, :, j]
        return inside.sum(axis=0) - size * y.prod(axis=1)

    return f


def m_sampler(ctx: DiscrepancyContext) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorized truncated approximation over joint (query, shift) samples.

    Input columns: n query coordinates, then n uniforms that are floored
    to grid words acting as the random digit shift.
    """
    dual = [L for L in ctx.require_dual() if any(L)]
    n, s = ctx.n, ctx.s
    card = float(ctx.cardinality)
    rows = []
    for L in dual:
        per_coord = []
        base = card
        for l in L:
            rho = l.bit_length()
            if rho == 0:
                per_coord.append(None)
                continue
            tau = l ^ (1 << (rho - 1))
            k = tau.bit_length()
            per_coord.append((
                rho,
                np.int64(_bit_reverse_int(tau, k)) if tau else np.int64(0),
                k,
                np.int64(_bit_reverse_int(l, s)),
            ))
            base *= 2.0 ** (-rho - 1)
        rows.append((per_coord, base))

    def f(u: np.ndarray) -> np.ndarray:
        y = u[:, :n]
        twords = np.minimum((u[:, n:] * (1 << s)).astype(np.int64), (1 << s) - 1)
        total = np.zeros(u.shape[0], dtype=np.float64)
        for per_coord, base in rows:
            term = np.full(u.shape[0], base)
            for j, info in enumerate(per_coord):
                if info is None:
                    term = term * y[:, j]
                    continue
                rho, revtau, k, revl = info
                yj = y[:, j]
                period = 2.0 ** (1 - rho)
                r = np.mod(yj, period)
                tri = np.minimum(r, period - r)
                om = tri * float(1 << (rho + 1))
                if k:
                    yw = (yj * (1 << k)).astype(np.int64)
                    sign = 1.0 - 2.0 * (_popcount(yw & revtau) & 1)
                    term = term * sign
                tsign = 1.0 - 2.0 * (_popcount(twords[:, j] & revl) & 1)
                term = term * om * tsign
            total += term
        return total

    return f


def _bit_reverse_int(word: int, width: int) -> int:
    out = 0
    for _ in range(width):
        out = (out << 1) | (word & 1)
        word >>= 1
    return out


def l2_m_exact(ctx: DiscrepancyContext) -> Fraction:
    """Exact squared L^2 norm of the truncated approximation, jointly in
    query and shift: cardinality^2 / 3^n times the sum of 4^-rho over the
    nonzero dual."""
    acc = Fraction(0)
    for L in ctx.require_dual():
        if not any(L):
            continue
        acc += Fraction(1, 1 << (2 * rho_total(L)))
    return Fraction(ctx.cardinality**2, 3**ctx.n) * acc


def exp_orlicz_estimate(estimates: Sequence[LqEstimate], alpha: float | None = None,
                        theta: float | None = None) -> OrliczEstimate:
    """Grid sup of q^-theta times the q-norm; theta defaults to 1/alpha.

    The grid-restricted supremum is a lower bound for the true one.
    """
    if theta is None:
        if alpha is None or alpha <= 0:
            raise ValueError("need theta or a positive alpha")
        theta = 1.0 / alpha
    if not estimates:
        raise ValueError("empty moment grid")
    best = max(estimates, key=lambda e: e.q**-theta * e.value)
    return OrliczEstimate(best.q**-theta * best.value, theta, best.q)


def normalized_ratio(value: float, q: float, s: int, n: int) -> float:
    """Norm divided by q^((n+1)/2) s^((n-1)/2), the moment growth profile."""
    return value / (q ** ((n + 1) / 2) * s ** ((n - 1) / 2))


@dataclass(frozen=True)
class RatioEstimate:
    q: float
    ratio: float
    stderr: float
    samples: int


def _sign_series_norms(eval_block: Callable[[np.random.Generator, int], np.ndarray],
                       qs: Sequence[float], samples: int, seed: int,
                       workers: int = 1) -> list[LqEstimate]:
    """Shared driver: digit-sign series sampled blockwise, all q at once."""
    qs = q_grid(qs)
    blocks = (samples + _BLOCK - 1) // _BLOCK
    sizes = [min(_BLOCK, samples - b * _BLOCK) for b in range(blocks)]

    def run_block(b: int) -> list[tuple[float, float]]:
        rng = _block_rng(seed, b)
        vals = np.abs(eval_block(rng, sizes[b]))
        out = []
        for q in qs:
            p = vals**q
            out.append((float(p.sum()), float((p * p).sum())))
        return out

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_block = list(pool.map(run_block, range(blocks)))
    else:
        per_block = [run_block(b) for b in range(blocks)]
    results = []
    for qi, q in enumerate(qs):
        m1 = math.fsum(pb[qi][0] for pb in per_block) / samples
        m2 = math.fsum(pb[qi][1] for pb in per_block) / samples
        var_mean = max(m2 - m1 * m1, 0.0) / samples
        value = m1 ** (1.0 / q)
        stderr = (value / (q * m1)) * math.sqrt(var_mean) if m1 > 0 else 0.0
        results.append(LqEstimate(q, value, stderr, samples))
    return results


def khinchin_ratios(coeffs: Sequence[float], qs: Sequence[float], samples: int,
                    seed: int, workers: int = 1) -> list[RatioEstimate]:
    """Norm of a digit-sign series over sqrt(q) times the coefficient norm.

    The independent fair signs are drawn directly; evaluating the digit
    signs at a uniform point gives the same law.
    """
    c = np.asarray(coeffs, dtype=np.float64)
    if c.size == 0 or not np.any(c):
        raise ValueError("coefficient vector must be nonzero")
    c2 = float(np.sqrt((c * c).sum()))

    def eval_block(rng: np.random.Generator, size: int) -> np.ndarray:
        signs = rng.integers(0, 2, size=(size, c.size)).astype(np.float64) * 2 - 1
        return signs @ c

    norms = _sign_series_norms(eval_block, qs, samples, seed, workers)
    return [
        RatioEstimate(e.q, e.value / (math.sqrt(e.q) * c2),
                      e.stderr / (math.sqrt(e.q) * c2), e.samples)
        for e in norms
    ]


def khinchin_ratio(coeffs: Sequence[float], q: float, samples: int, seed: int,
                   workers: int = 1) -> RatioEstimate:
    if q < 2:
        raise ValueError("ratio is calibrated for q >= 2")
    return khinchin_ratios(coeffs, [q], samples, seed, workers)[0]


def hyperbolic_indices(n: int, k: int) -> list[tuple[int, ...]]:
    """All positive integer vectors of length n with entries summing to k."""
    if n < 1 or k < n:
        raise ValueError("need k >= n >= 1 for positive entries")
    if n == 1:
        return [(k,)]
    out = []
    for head in range(1, k - n + 2):
        for rest in hyperbolic_indices(n - 1, k - head):
            out.append((head,) + rest)
    return out


def hyperbolic_lp_ratios(coeffs: dict[tuple[int, ...], float], offset: Sequence[int],
                         qs: Sequence[float], samples: int, seed: int,
                         workers: int = 1) -> list[RatioEstimate]:
    """Hyperbolic digit-sign sums: norm over q^((n-1)/2) times coefficient norm.

    Coefficients are indexed by positive integer vectors of one common
    length sum; each term is the product over coordinates of the digit
    sign at the index shifted by the offset vector.
    """
    if not coeffs:
        raise ValueError("empty coefficient set")
    offset = tuple(int(v) for v in offset)
    n = len(offset)
    idx = sorted(coeffs)
    sums = {sum(i) for i in idx}
    if len(sums) != 1:
        raise ValueError("all index vectors must share one entry sum")
    if any(len(i) != n or min(i) < 1 for i in idx):
        raise ValueError("index vectors must be positive and match the offset length")
    k = sums.pop()
    if k < n:
        raise ValueError("entry sum must be at least the dimension")
    c = np.array([coeffs[i] for i in idx], dtype=np.float64)
    if not np.any(c):
        raise ValueError("coefficient vector must be nonzero")
    c2 = float(np.sqrt((c * c).sum()))
    digit_counts = [max(i[j] + offset[j] for i in idx) for j in range(n)]

    def eval_block(rng: np.random.Generator, size: int) -> np.ndarray:
        signs = [
            rng.integers(0, 2, size=(size, digit_counts[j])).astype(np.float64) * 2 - 1
            for j in range(n)
        ]
        vals = np.zeros(size, dtype=np.float64)
        for ci, i in enumerate(idx):
            term = np.full(size, coeffs[i], dtype=np.float64)
            for j in range(n):
                term = term * signs[j][:, i[j] + offset[j] - 1]
            vals += term
        return vals

    norms = _sign_series_norms(eval_block, qs, samples, seed, workers)
    scale = (n - 1) / 2
    return [
        RatioEstimate(e.q, e.value / (e.q**scale * c2),
                      e.stderr / (e.q**scale * c2), e.samples)
        for e in norms
    ]


def hyperbolic_lp_ratio(coeffs, offset, q: float, samples: int, seed: int,
                        workers: int = 1) -> RatioEstimate:
    return hyperbolic_lp_ratios(coeffs, offset, [q], samples, seed, workers)[0]
