"""Integral Weierstrass curve arithmetic at desk scale.

Exact invariants, reduction type at a prime, point counts over small prime
powers, rational torsion via division polynomials, isogeny quotients by a
rational prime-order point, and the odd part of a genus-2 model
discriminant.  All arithmetic is exact: integers, Fractions, and the dense
polynomial layer; nothing here floats.

Minimality is the caller's contract.  The only model surgery provided is
the standard (u, r, s, t) change of coordinates with scale u in {1, 2},
which is enough to integralize and reduce every quotient produced by the
curve families in this package; additive reduction is reported, never
repaired.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

from .arith import is_prime
from .polynomials import (
    GF,
    degree,
    discriminant,
    find_irreducible,
    padd,
    peval,
    pmul,
    pscale,
    rational_roots,
    trim,
)


class SingularCurveError(ValueError):
    """Raised when a Weierstrass model has vanishing discriminant."""


@dataclass(frozen=True)
class WeierstrassCurve:
    a1: int
    a2: int
    a3: int
    a4: int
    a6: int

    def __post_init__(self):
        for name in ("a1", "a2", "a3", "a4", "a6"):
            if not isinstance(getattr(self, name), int):
                raise TypeError(f"{name} must be an integer")
        if _disc_from_b(*_b_invariants(self)) == 0:
            raise SingularCurveError(f"singular model {self.coefficients()}")

    def coefficients(self) -> tuple[int, int, int, int, int]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)


@dataclass(frozen=True)
class CurveInvariants:
    b2: int
    b4: int
    b6: int
    b8: int
    c4: int
    c6: int
    disc: int
    j: Fraction


@dataclass(frozen=True)
class LocalData:
    p: int
    kind: str  # good | multiplicative | additive
    component_order: int  # ord_p(disc) when multiplicative, else 1


def _b_invariants(e: WeierstrassCurve) -> tuple[int, int, int, int]:
    b2 = e.a1**2 + 4 * e.a2
    b4 = 2 * e.a4 + e.a1 * e.a3
    b6 = e.a3**2 + 4 * e.a6
    b8 = (
        e.a1**2 * e.a6
        + 4 * e.a2 * e.a6
        - e.a1 * e.a3 * e.a4
        + e.a2 * e.a3**2
        - e.a4**2
    )
    return b2, b4, b6, b8


def _disc_from_b(b2: int, b4: int, b6: int, b8: int) -> int:
    return -(b2**2) * b8 - 8 * b4**3 - 27 * b6**2 + 9 * b2 * b4 * b6


def invariants(e: WeierstrassCurve) -> CurveInvariants:
    b2, b4, b6, b8 = _b_invariants(e)
    c4 = b2**2 - 24 * b4
    c6 = -(b2**3) + 36 * b2 * b4 - 216 * b6
    disc = _disc_from_b(b2, b4, b6, b8)
    if disc == 0:
        raise SingularCurveError("singular model")
    if 4 * b8 != b2 * b6 - b4**2 or 1728 * disc != c4**3 - c6**2:
        raise AssertionError("invariant identities violated")
    return CurveInvariants(
        b2=b2, b4=b4, b6=b6, b8=b8, c4=c4, c6=c6, disc=disc, j=Fraction(c4**3, disc)
    )


def _val(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of 0")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def local_data(e: WeierstrassCurve, p: int) -> LocalData:
    """Reduction type of a model assumed minimal at p."""
    if not is_prime(p):
        raise ValueError(f"p must be prime, got {p}")
    inv = invariants(e)
    if inv.disc % p:
        return LocalData(p=p, kind="good", component_order=1)
    if inv.c4 % p:
        return LocalData(
            p=p, kind="multiplicative", component_order=_val(inv.disc, p)
        )
    return LocalData(p=p, kind="additive", component_order=1)


# ---------------------------------------------------------------------------
# point counting

_COUNT_LIMIT = 10**6


def _prime_power(q: int) -> tuple[int, int]:
    if q < 2:
        raise ValueError(f"not a prime power: {q}")
    p = q
    for d in range(2, isqrt(q) + 1):
        if q % d == 0:
            p = d
            break
    k = 0
    while q % p == 0:
        q //= p
        k += 1
    if q != 1:
        raise ValueError("not a prime power")
    return p, k


def count_points(e: WeierstrassCurve, q: int) -> int:
    """Number of points over F_q, including infinity; good reduction only."""
    if q > _COUNT_LIMIT:
        raise ValueError(f"q exceeds the desk-scale limit {_COUNT_LIMIT}")
    p, k = _prime_power(q)
    if invariants(e).disc % p == 0:
        raise ValueError(f"bad reduction at {p}")
    h = (e.a3, e.a1)  # y-linear part
    g = (e.a6, e.a4, e.a2, 1)
    if k == 1 and p > 2:
        # z = 2y + h(x) turns the count into counting square roots of 4g + h^2
        f = trim(padd(pscale(g, 4), pmul(h, h)))
        ns = [0] * p
        for z in range(p):
            ns[z * z % p] += 1
        count = 1 + sum(ns[peval(f, x) % p] for x in range(p))
    elif k == 1:
        count = 1
        for x in (0, 1):
            for y in (0, 1):
                lhs = y * y + e.a1 * x * y + e.a3 * y
                rhs = x**3 + e.a2 * x * x + e.a4 * x + e.a6
                count += (lhs - rhs) % 2 == 0
    else:
        field = GF(p, find_irreducible(p, k))
        elems = field.elements()
        count = 1
        if p > 2:
            ns: dict = {}
            for z in elems:
                key = field.mul(z, z)
                ns[key] = ns.get(key, 0) + 1
            f = trim(padd(pscale(g, 4), pmul(h, h)))
            for x in elems:
                count += ns.get(_horner(field, f, x), 0)
        else:
            for x in elems:
                hx = _horner(field, h, x)
                gx = _horner(field, g, x)
                if hx == field.zero:
                    count += 1  # squaring is a bijection in characteristic 2
                    continue
                u = field.mul(gx, field.pow(hx, -2))
                tr, sq = field.zero, u
                for _ in range(k):
                    tr = field.add(tr, sq)
                    sq = field.mul(sq, sq)
                count += 2 if tr == field.zero else 0
    if (q + 1 - count) ** 2 > 4 * q:
        raise AssertionError("count outside the Hasse interval")
    return count


def _horner(field: GF, poly, x):
    acc = field.zero
    for c in reversed(poly):
        acc = field.add(field.mul(acc, x), field.element((c,)))
    return acc


def trace_of_frobenius(e: WeierstrassCurve, q: int) -> int:
    return q + 1 - count_points(e, q)


def is_ordinary(e: WeierstrassCurve, ell: int) -> bool:
    """True when the trace at a good prime ell is a unit mod ell."""
    if not is_prime(ell):
        raise ValueError(f"ell must be prime, got {ell}")
    return trace_of_frobenius(e, ell) % ell != 0


# ---------------------------------------------------------------------------
# rational points and torsion

Point = tuple[Fraction, Fraction] | None  # None is the point at infinity


def on_curve(e: WeierstrassCurve, pt: Point) -> bool:
    if pt is None:
        return True
    x, y = Fraction(pt[0]), Fraction(pt[1])
    return y * y + e.a1 * x * y + e.a3 * y == x**3 + e.a2 * x * x + e.a4 * x + e.a6


def negate(e: WeierstrassCurve, pt: Point) -> Point:
    if pt is None:
        return None
    x, y = pt
    return (x, -y - e.a1 * x - e.a3)


def add_points(e: WeierstrassCurve, p1: Point, p2: Point) -> Point:
    if p1 is None:
        return p2
    if p2 is None:
        return p1
    x1, y1 = Fraction(p1[0]), Fraction(p1[1])
    x2, y2 = Fraction(p2[0]), Fraction(p2[1])
    if x1 == x2 and y1 + y2 + e.a1 * x2 + e.a3 == 0:
        return None
    if x1 == x2:
        lam = (3 * x1 * x1 + 2 * e.a2 * x1 + e.a4 - e.a1 * y1) / (
            2 * y1 + e.a1 * x1 + e.a3
        )
    else:
        lam = (y2 - y1) / (x2 - x1)
    nu = y1 - lam * x1
    x3 = lam * lam + e.a1 * lam - e.a2 - x1 - x2
    y3 = -(lam + e.a1) * x3 - nu - e.a3
    return (x3, y3)


def multiply_point(e: WeierstrassCurve, k: int, pt: Point) -> Point:
    if k < 0:
        return multiply_point(e, -k, negate(e, pt))
    acc: Point = None
    for _ in range(k):
        acc = add_points(e, acc, pt)
    return acc


def point_order(e: WeierstrassCurve, pt: Point, cap: int = 12) -> int:
    """Order of a torsion point; rational torsion is bounded by 12."""
    if not on_curve(e, pt):
        raise ValueError("point not on curve")
    acc = pt
    for k in range(1, cap + 1):
        if acc is None:
            return k
        acc = add_points(e, acc, pt)
    raise ValueError("point is not torsion of small order")


def two_division_poly(e: WeierstrassCurve) -> tuple[int, ...]:
    b2, b4, b6, _ = _b_invariants(e)
    return (b6, 2 * b4, b2, 4)


def division_poly(e: WeierstrassCurve, ell: int) -> tuple[int, ...]:
    """The univariate ell-division polynomial for odd ell in {3, 5, 7}."""
    b2, b4, b6, b8 = _b_invariants(e)
    psi3 = (b8, 3 * b6, 3 * b4, b2, 3)
    if ell == 3:
        return psi3
    f = (b6, 2 * b4, b2, 4)
    q4 = (
        b4 * b8 - b6**2,
        b2 * b8 - b4 * b6,
        10 * b8,
        10 * b6,
        5 * b4,
        b2,
        2,
    )
    psi5 = trim(
        padd(pmul(q4, pmul(f, f)), pscale(pmul(psi3, pmul(psi3, psi3)), -1))
    )
    if ell == 5:
        return psi5
    if ell == 7:
        q4cube = pmul(q4, pmul(q4, q4))
        return trim(
            padd(
                pmul(psi5, pmul(psi3, pmul(psi3, psi3))),
                pscale(pmul(pmul(f, f), q4cube), -1),
            )
        )
    raise ValueError(f"division polynomial not provided for ell = {ell}")


def _fraction_sqrt(v: Fraction):
    if v < 0:
        return None
    rn, rd = isqrt(v.numerator), isqrt(v.denominator)
    if rn * rn == v.numerator and rd * rd == v.denominator:
        return Fraction(rn, rd)
    return None


def has_rational_ell_torsion(e: WeierstrassCurve, ell: int):
    """(found, witness point) for a rational point of exact order ell."""
    if ell not in (2, 3, 5, 7):
        raise ValueError("torsion search supports ell in {2, 3, 5, 7}")
    if ell == 2:
        for x in rational_roots(two_division_poly(e)):
            y = Fraction(-(e.a1 * x + e.a3), 2)
            pt = (x, y)
            assert on_curve(e, pt)
            return True, pt
        return False, None
    for x in rational_roots(division_poly(e, ell)):
        # y solves a monic quadratic; rational iff 4g + h^2 is a square at x
        hx = e.a1 * x + e.a3
        gx = x**3 + e.a2 * x * x + e.a4 * x + e.a6
        root = _fraction_sqrt(hx * hx + 4 * gx)
        if root is None:
            continue
        pt = (x, (root - hx) / 2)
        assert on_curve(e, pt)
        if point_order(e, pt) == ell:
            return True, pt
    return False, None


# ---------------------------------------------------------------------------
# isogeny quotients


def velu_quotient(e: WeierstrassCurve, pt: Point) -> WeierstrassCurve:
    """Quotient by the subgroup generated by a rational prime-order point.

    The raw quotient keeps a1, a2, a3 and so may be non-integral when the
    kernel point has denominators; the result is integralized and reduced
    with scale-2 moves before returning.
    """
    if pt is None:
        raise ValueError("cannot quotient by the point at infinity")
    if not on_curve(e, pt):
        raise ValueError("kernel point not on curve")
    ell = point_order(e, pt)
    if not is_prime(ell):
        raise ValueError(f"kernel point order {ell} is not prime")
    b2 = e.a1**2 + 4 * e.a2
    half = [multiply_point(e, k, pt) for k in range(1, ell // 2 + 1)]
    if ell == 2:
        half = [pt]
    v = w = Fraction(0)
    for x, y in half:
        gx = 3 * x * x + 2 * e.a2 * x + e.a4 - e.a1 * y
        gy = -2 * y - e.a1 * x - e.a3
        vq = gx if gy == 0 else 2 * gx - e.a1 * gy
        uq = gy * gy
        v += vq
        w += uq + x * vq
    coeffs = (
        Fraction(e.a1),
        Fraction(e.a2),
        Fraction(e.a3),
        e.a4 - 5 * v,
        e.a6 - b2 * v - 7 * w,
    )
    return reduce_model(_integralize(coeffs))


def transform(e: WeierstrassCurve, u: int, r: int, s: int, t: int):
    """Coefficients after x = u^2 x' + r, y = u^3 y' + s u^2 x' + t.

    Returned as Fractions; the caller decides whether they are integral.
    """
    a1 = Fraction(e.a1 + 2 * s, u)
    a2 = Fraction(e.a2 - s * e.a1 + 3 * r - s * s, u**2)
    a3 = Fraction(e.a3 + r * e.a1 + 2 * t, u**3)
    a4 = Fraction(
        e.a4 - s * e.a3 + 2 * r * e.a2 - (t + r * s) * e.a1 + 3 * r * r - 2 * s * t,
        u**4,
    )
    a6 = Fraction(
        e.a6 + r * e.a4 + r * r * e.a2 + r**3 - t * e.a3 - t * t - r * t * e.a1,
        u**6,
    )
    return (a1, a2, a3, a4, a6)


def _integralize(coeffs) -> WeierstrassCurve:
    """Scale up x = x'/u^2, y = y'/u^3 until all coefficients are integers."""
    needs: dict[int, int] = {}
    for c, weight in zip(coeffs, (1, 2, 3, 4, 6)):
        den = Fraction(c).denominator
        q = 2
        while den > 1:
            if den % q:
                q += 1
                continue
            v = 0
            while den % q == 0:
                den //= q
                v += 1
            needs[q] = max(needs.get(q, 0), -(-v // weight))
    u = 1
    for q, n in needs.items():
        u *= q**n
    scaled = [int(c * u**k) for c, k in zip(coeffs, (1, 2, 3, 4, 6))]
    return WeierstrassCurve(*scaled)


def _try_scale_down(e: WeierstrassCurve) -> WeierstrassCurve | None:
    if invariants(e).disc % 2**12:
        return None
    for r in range(4):
        for s in range(2):
            for t in range(8):
                cand = transform(e, 2, r, s, t)
                if all(c.denominator == 1 for c in cand):
                    return WeierstrassCurve(*(int(c) for c in cand))
    return None


def reduce_model(e: WeierstrassCurve) -> WeierstrassCurve:
    """Scale down by 2 while possible, then shift to the standard shape
    a1, a3 in {0, 1} and a2 in {-1, 0, 1}."""
    while True:
        smaller = _try_scale_down(e)
        if smaller is None:
            break
        e = smaller
    s = -(e.a1 >> 1)
    e = WeierstrassCurve(*(int(c) for c in transform(e, 1, 0, s, 0)))
    target = (e.a2 + 1) % 3 - 1  # same residue mod 3, so the shift is integral
    e = WeierstrassCurve(*(int(c) for c in transform(e, 1, (target - e.a2) // 3, 0, 0)))
    t = -(e.a3 >> 1)
    return WeierstrassCurve(*(int(c) for c in transform(e, 1, 0, 0, t)))


def isogeny_class(e: WeierstrassCurve, depth: int = 3) -> list[WeierstrassCurve]:
    """Closure of a curve under quotients by rational prime-order points.

    Breadth-first over ell in {2, 3, 5, 7} up to the given depth, deduplicated
    by reduced model; the start curve is reduced too, so members are directly
    comparable.
    """
    start = reduce_model(e)
    seen = {start.coefficients(): start}
    frontier = [start]
    for _ in range(depth):
        nxt = []
        for cur in frontier:
            for ell in (2, 3, 5, 7):
                for x in _torsion_x_coords(cur, ell):
                    pt = _lift_x(cur, x)
                    if pt is None or point_order(cur, pt) != ell:
                        continue
                    quo = velu_quotient(cur, pt)
                    key = quo.coefficients()
                    if key not in seen:
                        seen[key] = quo
                        nxt.append(quo)
        frontier = nxt
        if not frontier:
            break
    return sorted(seen.values(), key=lambda c: c.coefficients())


def _torsion_x_coords(e: WeierstrassCurve, ell: int):
    poly = two_division_poly(e) if ell == 2 else division_poly(e, ell)
    return rational_roots(poly)


def _lift_x(e: WeierstrassCurve, x: Fraction) -> Point:
    hx = e.a1 * x + e.a3
    gx = x**3 + e.a2 * x * x + e.a4 * x + e.a6
    root = _fraction_sqrt(hx * hx + 4 * gx)
    if root is None:
        return None
    return (x, (root - hx) / 2)


# ---------------------------------------------------------------------------
# genus-2 model discriminant


def hyperelliptic_odd_disc(p_poly, q_poly) -> int:
    """Odd part of disc(4P + Q^2) for a model y^2 + Q(x) y = P(x).

    P must have degree 5 and Q degree at most 3; the combined polynomial has
    to be squarefree.  The sign is kept: only the factors of 2 are stripped.
    """
    p_poly, q_poly = trim(p_poly), trim(q_poly)
    if degree(p_poly) != 5:
        raise ValueError("P must have degree exactly 5")
    if degree(q_poly) > 3:
        raise ValueError("Q must have degree at most 3")
    combined = trim(padd(pscale(p_poly, 4), pmul(q_poly, q_poly)))
    d = discriminant(combined)
    if d == 0:
        raise ValueError("model is not squarefree")
    while d % 2 == 0:
        d //= 2
    return d
