"""Prime-conductor curve families and their distinguished isogeny members.

Three sources of curves live here: the two-parameter family attached to
primes p = u^2 + 64, an exhaustive small-coefficient box search for curves
of prime-power discriminant with a rational odd-torsion point, and a short
packaged table of seed curves.  On top of the enumeration sits the "dagger"
selection: inside each isogeny class, the member whose discriminant
valuation at p carries the largest power of ell.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from math import isqrt

from .arith import is_prime
from .curves import (
    SingularCurveError,
    WeierstrassCurve,
    has_rational_ell_torsion,
    invariants,
    is_ordinary,
    isogeny_class,
    local_data,
    two_division_poly,
)
from .polynomials import discriminant, roots_mod

EXCEPTIONAL_PRIME = 17
EXCEPTIONAL_SEED = WeierstrassCurve(1, -1, 1, -1, -14)


@dataclass(frozen=True)
class SquarePlus64Pair:
    """The two curves attached to a prime p = u^2 + 64 with u = 1 mod 4."""

    p: int
    u: int
    disc_p: WeierstrassCurve
    disc_p_squared: WeierstrassCurve


@dataclass(frozen=True)
class SeedRow:
    ell: int
    p: int
    curve: WeierstrassCurve


@dataclass(frozen=True)
class DaggerReport:
    ell: int
    p: int
    seed: WeierstrassCurve
    members: tuple[WeierstrassCurve, ...]
    dagger: WeierstrassCurve
    dagger_valuation: int
    valuations: tuple[int, ...]
    congruence_ok: bool
    unramified_signal: bool | None  # two-division proxy, ell = 2 only


def ord_at(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of 0")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def ns_enumerate(bound: int) -> list[SquarePlus64Pair]:
    """All pairs for primes p = u^2 + 64 up to bound, smallest first.

    The sign of u is normalized to u = 1 mod 4; with a2 = (u - 1)/4 the two
    models are [1, a2, 0, -1, 0] and [1, a2, 0, 4, u].  Their discriminants
    are p and -p^2 on the nose, and the first curve is ordinary at 2; both
    facts are rechecked here on every pair rather than trusted.
    """
    out = []
    for u_abs in range(1, isqrt(max(bound - 64, 0)) + 1, 2):
        p = u_abs * u_abs + 64
        if not is_prime(p):
            continue
        u = u_abs if u_abs % 4 == 1 else -u_abs
        a2 = (u - 1) // 4
        first = WeierstrassCurve(1, a2, 0, -1, 0)
        second = WeierstrassCurve(1, a2, 0, 4, u)
        if invariants(first).disc != p or invariants(second).disc != -p * p:
            raise AssertionError(f"discriminant identities fail at p = {p}")
        if not is_ordinary(first, 2):
            raise AssertionError(f"family curve is supersingular at 2 for p = {p}")
        out.append(SquarePlus64Pair(p=p, u=u, disc_p=first, disc_p_squared=second))
    return out


def _prime_power_base(n: int) -> int | None:
    """The prime p with n = p^k, or None.  n must be positive."""
    for p in range(2, isqrt(n) + 1):
        if n % p:
            continue
        while n % p == 0:
            n //= p
        return p if n == 1 else None
    return n if n > 1 else None


def miyawaki_search(ell: int, coeff_bound: int = 8) -> dict[int, list[WeierstrassCurve]]:
    """Box search for semistable prime-power-discriminant curves with a
    rational point of order ell.

    Models run over a1, a3 in {0, 1}, a2 in {-1, 0, 1} and |a4|, |a6| up to
    coeff_bound; a hit must have |disc| = p^k with multiplicative reduction
    at p.  Hits are grouped by p and deduplicated by j-invariant.
    """
    if ell not in (3, 5, 7):
        raise ValueError("search covers ell in {3, 5, 7}")
    hits: dict[int, dict] = {}
    span = range(-coeff_bound, coeff_bound + 1)
    for a1 in (0, 1):
        for a2 in (-1, 0, 1):
            for a3 in (0, 1):
                for a4 in span:
                    for a6 in span:
                        try:
                            e = WeierstrassCurve(a1, a2, a3, a4, a6)
                        except SingularCurveError:
                            continue
                        p = _prime_power_base(abs(invariants(e).disc))
                        if p is None:
                            continue
                        if local_data(e, p).kind != "multiplicative":
                            continue
                        if not has_rational_ell_torsion(e, ell)[0]:
                            continue
                        hits.setdefault(p, {})[invariants(e).j] = e
    return {p: sorted(by_j.values(), key=lambda c: c.coefficients()) for p, by_j in sorted(hits.items())}


def identify_dagger(members, ell: int, p: int) -> WeierstrassCurve:
    """The unique member whose ord_p(disc) has the largest ell-part.

    Ambiguity means the class does not carry a distinguished member, which
    violates the contract of every family handled here; that is an error,
    not a tie to break silently.
    """
    best: list[WeierstrassCurve] = []
    best_part = 0
    for e in members:
        v = ord_at(abs(invariants(e).disc), p)
        part = 1
        while v % (part * ell) == 0:
            part *= ell
        if part > best_part:
            best, best_part = [e], part
        elif part == best_part:
            best.append(e)
    if len(best) != 1:
        raise ValueError(
            f"no unique distinguished member at ell = {ell}, p = {p}: "
            f"{[e.coefficients() for e in best]}"
        )
    return best[0]


def conductor_congruence(ell: int, p: int) -> bool:
    """The congruence a prime must satisfy to carry these torsion structures:
    p = 1 mod 8 when ell = 2, p = 1 mod ell for odd ell."""
    if ell == 2:
        return p % 8 == 1
    return p % ell == 1


def two_torsion_field_unramified_at(e: WeierstrassCurve, p: int) -> bool:
    """Desk-level proxy for the 2-division field being unramified at odd p:
    the 2-division cubic has even discriminant valuation at p and splits
    into linear factors mod p (multiplicities counted)."""
    if p == 2 or not is_prime(p):
        raise ValueError("p must be an odd prime")
    cubic = two_division_poly(e)
    if ord_at(discriminant(cubic), p) % 2:
        return False
    linear_count = 0
    work = [c % p for c in cubic]
    for r in roots_mod(cubic, p):
        # peel (x - r) with multiplicity
        while True:
            quot, rem = _fp_linear_div(work, r, p)
            if rem:
                break
            work = quot
            linear_count += 1
    return linear_count == 3


def _fp_linear_div(poly, r: int, p: int) -> tuple[list[int], int]:
    """Synthetic division of poly by (x - r) over F_p: (quotient, remainder)."""
    acc = 0
    quot = [0] * (len(poly) - 1)
    for i in range(len(poly) - 1, 0, -1):
        acc = (acc * r + poly[i]) % p
        quot[i - 1] = acc
    rem = (acc * r + poly[0]) % p
    return quot, rem


def load_seed_rows() -> list[SeedRow]:
    """Rows of the packaged seed table: `ell p a1 a2 a3 a4 a6` per line,
    `#` comments allowed."""
    text = (
        resources.files("semistable_lab")
        .joinpath("data/prime_conductor_curves.txt")
        .read_text()
    )
    rows = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 7:
            raise ValueError(f"malformed seed row: {line!r}")
        ell, p, a1, a2, a3, a4, a6 = map(int, parts)
        rows.append(SeedRow(ell=ell, p=p, curve=WeierstrassCurve(a1, a2, a3, a4, a6)))
    return rows


def _seed_for(ell: int, p: int) -> WeierstrassCurve:
    if ell == 2:
        if p == EXCEPTIONAL_PRIME:
            return EXCEPTIONAL_SEED
        for pair in ns_enumerate(p):
            if pair.p == p:
                return pair.disc_p
        raise ValueError(f"{p} is not 17 and not of the form u^2 + 64")
    for row in load_seed_rows():
        if row.ell == ell and row.p == p:
            return row.curve
    raise ValueError(f"no seed recorded for ell = {ell}, p = {p}")


def dagger_report(ell: int, p: int) -> DaggerReport:
    """Isogeny-class closure from the recorded seed, with the distinguished
    member and the facts the family is supposed to satisfy."""
    seed = _seed_for(ell, p)
    members = tuple(isogeny_class(seed))
    dagger = identify_dagger(members, ell, p)
    valuations = tuple(
        sorted(ord_at(abs(invariants(e).disc), p) for e in members)
    )
    signal = two_torsion_field_unramified_at(dagger, p) if ell == 2 else None
    return DaggerReport(
        ell=ell,
        p=p,
        seed=seed,
        members=members,
        dagger=dagger,
        dagger_valuation=ord_at(abs(invariants(dagger).disc), p),
        valuations=valuations,
        congruence_ok=conductor_congruence(ell, p),
        unramified_signal=signal,
    )
