"""Discrepancy of shifted digital nets, exactly.

The box-counting discrepancy and its truncated-character approximation
are evaluated over integer numerators on a common power-of-two
denominator, so the two independent routes (kernel sum over the net
versus character sum over the nonzero dual) can be compared for exact
equality, and the dual can be sliced into the leading-digit groups that
drive the moment bounds.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .f2core import (
    DEFAULT_ENUM_CAP,
    DyadicPoint,
    F2Subspace,
    bit_reverse,
    parity,
)
from .nets import DigitShift, GeneratorSet, NetQuality, PointSet, as_subspace, certify_deficiency
from .walsh import rho_vector

__all__ = [
    "DiscrepancyContext",
    "LambdaGroup",
    "RouteUnavailableError",
    "IdentityViolation",
    "approximation_gap",
    "delta_indicator",
    "discrepancy_exact",
    "lambda_group",
    "m_direct",
    "m_dual_sum",
]


class RouteUnavailableError(RuntimeError):
    """The dual enumeration needed by this route exceeds the cap."""


class IdentityViolation(AssertionError):
    """An exact structural identity failed; carries a witness."""

    def __init__(self, message: str, witness: dict):
        super().__init__(f"{message}: {witness}")
        self.witness = witness


@dataclass(frozen=True)
class DiscrepancyContext:
    """A (possibly shifted) linear distribution with its dual enumerated.

    `dual_points` lists the dual as integer index vectors (grid words),
    `dual_signs` the matching characters evaluated at the shift, and
    `groups` buckets the dual by per-coordinate leading-digit positions.
    """

    n: int
    s: int
    subspace: F2Subspace
    dual: F2Subspace
    shift: DyadicPoint
    point_words: tuple[tuple[int, ...], ...]
    dual_points: tuple[tuple[int, ...], ...] | None
    dual_signs: tuple[int, ...] | None
    quality: NetQuality | None

    @classmethod
    def build(cls, source: GeneratorSet | F2Subspace,
              shift: DigitShift | DyadicPoint | None = None,
              cap: int = DEFAULT_ENUM_CAP) -> "DiscrepancyContext":
        if isinstance(source, GeneratorSet):
            sub = as_subspace(source)
            quality: NetQuality | None = certify_deficiency(source, cap=cap)
        else:
            sub = source
            quality = None
        n, s = sub.n, sub.s
        if isinstance(shift, DigitShift):
            t = shift.point
        elif shift is None:
            t = DyadicPoint.zero(n, max(s, 1))
        else:
            t = shift
        if t.n != n or (s > 0 and t.s != s):
            raise ValueError("shift grid does not match the distribution")
        if s > 0:
            # The cap gates the dual route only; the net itself is the object.
            points = tuple(
                tuple(w ^ tw for w, tw in zip(p.words, t.words))
                for p in sub.enumerate_points(max(cap, sub.cardinality))
            )
        else:
            points = ((0,) * n,)
        dual = sub.dual()
        dual_points: tuple[tuple[int, ...], ...] | None
        if dual.cardinality <= cap:
            if s > 0:
                dual_points = tuple(sorted(
                    tuple(p.words) for p in dual.enumerate_points(cap)
                ))
            else:
                dual_points = ((0,) * n,)
        else:
            dual_points = None
        if quality is None and dual_points is not None and s > 0 and sub.dim == s:
            nonzero = [L for L in dual_points if any(L)]
            if nonzero:
                w = min(sum(l.bit_length() for l in L) for L in nonzero)
                quality = NetQuality(s + 1 - w, w, True)
            else:
                quality = NetQuality(0, s + 1, True)
        ctx = cls(n, s, sub, dual, t, points, dual_points, None, quality)
        if dual_points is not None:
            signs = tuple(ctx.shift_sign(L) for L in dual_points)
            ctx = replace(ctx, dual_signs=signs)
        return ctx

    @property
    def cardinality(self) -> int:
        return self.subspace.cardinality

    def with_dual_points(self, dual_points) -> "DiscrepancyContext":
        """Test hook: replace the enumerated dual (e.g. to corrupt it)."""
        pts = tuple(tuple(L) for L in dual_points)
        out = replace(self, dual_points=pts, dual_signs=None)
        return replace(out, dual_signs=tuple(out.shift_sign(L) for L in pts))

    def require_dual(self) -> tuple[tuple[int, ...], ...]:
        if self.dual_points is None:
            raise RouteUnavailableError(
                f"dual has 2^{self.dual.dim} elements, above the enumeration cap"
            )
        return self.dual_points

    def groups(self) -> dict[tuple[int, ...], list[tuple[int, ...]]]:
        out: dict[tuple[int, ...], list[tuple[int, ...]]] = {}
        for L in self.require_dual():
            out.setdefault(rho_vector(L), []).append(L)
        return out

    def shift_sign(self, L: Sequence[int]) -> int:
        """Tensor character of the shift at index vector L."""
        if self.s == 0:
            return 1
        acc = 0
        for l, tw in zip(L, self.shift.words):
            acc ^= parity(bit_reverse(l, self.s) & tw)
        return -1 if acc else 1


def _grid_words(Y, s: int) -> tuple[int, tuple[int, ...]]:
    """Common-resolution integer view of a dyadic point or value tuple."""
    if isinstance(Y, DyadicPoint):
        g = max(Y.s, s)
        return g, tuple(w << (g - Y.s) for w in Y.words)
    ys = [Fraction(y) for y in Y]
    g = max(s, 1)
    for y in ys:
        if not 0 <= y <= 1:
            raise ValueError(f"{y} outside [0,1]")
        d = y.denominator
        if d & (d - 1):
            raise ValueError(f"{y} is not dyadic; exact routes need dyadic input")
        g = max(g, d.bit_length() - 1)
    return g, tuple(int(y * (1 << g)) for y in ys)


def discrepancy_exact(points: PointSet, Y) -> Fraction:
    """Point count in the half-open box [0, Y) minus size times volume."""
    ys = tuple(Fraction(y) for y in Y)
    if len(ys) != points.n:
        raise ValueError("query dimension mismatch")
    vol = Fraction(1)
    for y in ys:
        if not 0 <= y <= 1:
            raise ValueError(f"{y} outside [0,1]")
        vol *= y
    count = 0
    for p in points.points:
        if all(c < y for c, y in zip(p, ys)):
            count += 1
    return count - points.size * vol


@lru_cache(maxsize=1 << 20)
def _chi_num(l: int, u: int, g: int) -> int:
    """Numerator over 2^g of the integral of w_l on [0, u/2^g)."""
    if l == 0:
        return u
    rho = l.bit_length()
    period = 1 << (g + 1 - rho)
    r = u % period
    tri = min(r, period - r)
    if tri == 0:
        return 0
    tau = l ^ (1 << (rho - 1))
    if tau == 0:
        return tri
    k = tau.bit_length()
    return -tri if parity(bit_reverse(tau, k) & (u >> (g - k))) else tri


def m_direct(ctx: DiscrepancyContext, Y) -> Fraction:
    """Truncated-kernel route: cell-overlap sum over the shifted points
    minus cardinality times the box volume."""
    g, us = _grid_words(Y, ctx.s)
    if len(us) != ctx.n:
        raise ValueError("query dimension mismatch")
    step = 1 << (g - ctx.s)
    total = 0
    for words in ctx.point_words:
        prod = 1
        for w, u in zip(words, us):
            nu = u - w * step
            if nu <= 0:
                prod = 0
                break
            prod *= min(nu, step)
        total += prod
    vol = 1
    for u in us:
        vol *= u
    num = (total << (ctx.s * ctx.n)) - ctx.cardinality * vol
    return Fraction(num, 1 << (g * ctx.n))


def m_dual_sum(ctx: DiscrepancyContext, Y) -> Fraction:
    """Dual route: cardinality times the character-weighted coefficient sum
    over the nonzero dual indices."""
    g, us = _grid_words(Y, ctx.s)
    if len(us) != ctx.n:
        raise ValueError("query dimension mismatch")
    total = 0
    signs = ctx.dual_signs
    for idx, L in enumerate(ctx.require_dual()):
        if not any(L):
            continue
        prod = 1
        for l, u in zip(L, us):
            prod *= _chi_num(l, u, g)
            if prod == 0:
                break
        if prod:
            sign = signs[idx] if signs is not None else ctx.shift_sign(L)
            total += sign * prod
    return Fraction(ctx.cardinality * total, 1 << (g * ctx.n))


@dataclass(frozen=True)
class GapReport:
    max_gap: Fraction
    bound: int
    argmax: tuple[Fraction, ...]
    points_checked: int

    @property
    def within_bound(self) -> bool:
        return self.max_gap <= self.bound


def approximation_gap(ctx: DiscrepancyContext, resolution: int | None = None,
                      ys: Iterable | None = None) -> GapReport:
    """Largest |discrepancy - truncated approximation| over a query sample.

    Defaults to the exhaustive dyadic grid two digits finer than the net.
    The certified bound is n * 2^deficiency.
    """
    if ctx.quality is None or not ctx.quality.exhaustive:
        raise ValueError("gap bound needs an exhaustively certified deficiency")
    bound = ctx.n * (1 << ctx.quality.deficiency)
    if ys is None:
        g = ctx.s + 2 if resolution is None else resolution
        queries: Iterable = _grid_iter(ctx.n, g)
    else:
        queries = (_grid_words(Y, ctx.s) for Y in ys)
    worst = Fraction(-1)
    argmax: tuple[Fraction, ...] = ()
    checked = 0
    card = ctx.cardinality
    for g, us in queries:
        step = 1 << (g - ctx.s)
        den = 1 << (g * ctx.n)
        count = 0
        kernel = 0
        for words in ctx.point_words:
            prod = 1
            for w, u in zip(words, us):
                nu = u - w * step
                if nu <= 0:
                    prod = 0
                    break
                prod *= min(nu, step)
            if prod:
                count += 1
            kernel += prod
        vol = 1
        for u in us:
            vol *= u
        d_num = count * den - card * vol
        m_num = (kernel << (ctx.s * ctx.n)) - card * vol
        gap = Fraction(abs(d_num - m_num), den)
        checked += 1
        if gap > worst:
            worst = gap
            argmax = tuple(Fraction(u, 1 << g) for u in us)
    return GapReport(worst, bound, argmax, checked)


def _grid_iter(n: int, g: int):
    top = 1 << g
    us = [0] * n
    total = top**n
    for idx in range(total):
        v = idx
        for j in range(n):
            us[j] = v % top
            v //= top
        yield g, tuple(us)


@dataclass(frozen=True)
class LambdaGroup:
    """Dual indices with a prescribed leading-digit position vector."""

    rho_bar: tuple[int, ...]
    members: tuple[tuple[int, ...], ...]
    representative: tuple[int, ...] | None
    lambda0: tuple[tuple[int, ...], ...]
    cardinality_bound_ok: bool | None

    @property
    def lambda0_count(self) -> int:
        return len(self.lambda0)


def _lambda0_members(ctx: DiscrepancyContext, rho_bar: Sequence[int]):
    bounds = [1 << (r - 1) if r >= 1 else 1 for r in rho_bar]
    return tuple(
        L for L in ctx.require_dual() if all(l < b for l, b in zip(L, bounds))
    )


def lambda_group(ctx: DiscrepancyContext, rho_bar: Sequence[int]) -> LambdaGroup:
    """Slice the dual at one leading-digit position vector.

    Members share the exact per-coordinate positions; the companion
    subgroup collects indices strictly below them (coordinates with
    position 0 must vanish there, keeping the subgroup linear).  The
    cardinality bound 2^(|rho_bar| - s + deficiency) is checked whenever
    the group has a nonzero member and the deficiency is certified.
    """
    rho_bar = tuple(rho_bar)
    if len(rho_bar) != ctx.n or any(not 0 <= r <= ctx.s for r in rho_bar):
        raise ValueError(f"position vector {rho_bar} out of range for s={ctx.s}")
    members = tuple(L for L in ctx.require_dual() if rho_vector(L) == rho_bar)
    lam0 = _lambda0_members(ctx, rho_bar)
    bound_ok: bool | None = None
    if ctx.quality is not None and ctx.quality.exhaustive and any(any(L) for L in members):
        exponent = sum(rho_bar) - ctx.s + ctx.quality.deficiency
        bound_ok = exponent >= 0 and len(lam0) <= (1 << exponent)
    representative = min(members) if members else None
    return LambdaGroup(rho_bar, members, representative, lam0, bound_ok)


def delta_indicator(ctx: DiscrepancyContext, rho_bar: Sequence[int], Y) -> int:
    """Character sum over the strictly-below subgroup at a truncated query.

    Cross-checked internally against the orthogonality form: the value is
    the subgroup size when the truncated query annihilates every member,
    else zero.
    """
    lam0 = _lambda0_members(ctx, tuple(rho_bar))
    if not lam0:
        raise IdentityViolation(
            "no members strictly below the position vector",
            {"rho_bar": tuple(rho_bar)},
        )
    if ctx.s == 0:
        yt_words: tuple[int, ...] = (0,) * ctx.n
    elif isinstance(Y, DyadicPoint):
        yt_words = Y.truncate(ctx.s).words
    else:
        yt_words = []
        for y in Y:
            fy = Fraction(y)
            if not 0 <= fy < 1:
                raise ValueError(f"{y} outside [0,1)")
            yt_words.append((fy.numerator << ctx.s) // fy.denominator)
        yt_words = tuple(yt_words)
    total = 0
    orthogonal = True
    for L in lam0:
        acc = 0
        for l, yw in zip(L, yt_words):
            acc ^= parity(bit_reverse(l, ctx.s) & yw)
        total += -1 if acc else 1
        if acc:
            orthogonal = False
    predicted = len(lam0) if orthogonal else 0
    if total != predicted:
        raise IdentityViolation(
            "character sum disagrees with the orthogonality form",
            {"rho_bar": tuple(rho_bar), "sum": total, "predicted": predicted},
        )
    return total
