"""Exact finite-precision l-adic lattice calculus.

Everything lives over the work ring Z/l^N for a prime l and precision N.
A Lattice is the submodule of (Z/l^N)^r generated by explicit columns; the
stored basis is a canonical column echelon form (pivots are powers of l,
columns sorted by increasing pivot valuation then pivot row), so module
equality is a matrix comparison and membership is a greedy division pass.

Purity of X in T = (Z/l^N)^r means T/X is torsion free, detected by the
Nakayama criterion: every elementary divisor of the basis is 0, equivalently
the mod-l projection of X has dimension equal to the number of basis columns.
A divisor that reaches the precision N is indistinguishable from an exact
relation and is reported as a precision loss rather than silently dropped.

All objects are immutable; every operation returns fresh values, so the
module is safe to drive from concurrent workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import intlinalg
from .arith import is_prime


class PrecisionLossError(ArithmeticError):
    """A computation hit the bottom of the work ring Z/l^N."""


class PairingError(ValueError):
    """The supplied gram matrix does not define a perfect pairing."""


@dataclass(frozen=True)
class PadicContext:
    """Work ring descriptor: arithmetic happens in Z/ell^precision."""

    ell: int
    precision: int

    def __post_init__(self) -> None:
        if not is_prime(self.ell):
            raise ValueError(f"ell must be prime, got {self.ell}")
        if self.precision < 1:
            raise ValueError(f"precision must be >= 1, got {self.precision}")

    @property
    def modulus(self) -> int:
        return self.ell**self.precision

    def valuation(self, x: int) -> int:
        """l-adic valuation of x in the work ring, clipped at the precision."""
        x %= self.modulus
        if x == 0:
            return self.precision
        v = 0
        while x % self.ell == 0:
            x //= self.ell
            v += 1
        return v

    def unit_part(self, x: int) -> int:
        """u with x = u * l^valuation(x); 1 for x == 0."""
        x %= self.modulus
        if x == 0:
            return 1
        while x % self.ell == 0:
            x //= self.ell
        return x

    def invert_unit(self, u: int) -> int:
        u %= self.modulus
        if u % self.ell == 0:
            raise ZeroDivisionError(f"{u} is not a unit mod {self.ell}^{self.precision}")
        return pow(u, -1, self.modulus)


@dataclass(frozen=True)
class PadicMatrix:
    """Immutable matrix over Z/l^N, stored as a tuple of row tuples."""

    ctx: PadicContext
    rows: tuple[tuple[int, ...], ...]

    @staticmethod
    def from_rows(ctx: PadicContext, rows) -> "PadicMatrix":
        m = ctx.modulus
        norm = tuple(tuple(int(x) % m for x in r) for r in rows)
        if norm and any(len(r) != len(norm[0]) for r in norm):
            raise ValueError("ragged matrix rows")
        return PadicMatrix(ctx, norm)

    @staticmethod
    def identity(ctx: PadicContext, n: int) -> "PadicMatrix":
        return PadicMatrix.from_rows(ctx, [[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def ncols(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    def entry(self, i: int, j: int) -> int:
        return self.rows[i][j]

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(r[j] for r in self.rows)

    def columns(self) -> list[tuple[int, ...]]:
        return [self.column(j) for j in range(self.ncols)]

    def __add__(self, other: "PadicMatrix") -> "PadicMatrix":
        self._check(other)
        m = self.ctx.modulus
        return PadicMatrix(
            self.ctx,
            tuple(
                tuple((a + b) % m for a, b in zip(ra, rb))
                for ra, rb in zip(self.rows, other.rows)
            ),
        )

    def __sub__(self, other: "PadicMatrix") -> "PadicMatrix":
        self._check(other)
        m = self.ctx.modulus
        return PadicMatrix(
            self.ctx,
            tuple(
                tuple((a - b) % m for a, b in zip(ra, rb))
                for ra, rb in zip(self.rows, other.rows)
            ),
        )

    def __matmul__(self, other: "PadicMatrix") -> "PadicMatrix":
        if self.ctx != other.ctx:
            raise ValueError("mixed work rings")
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch in matrix product")
        m = self.ctx.modulus
        ocols = other.ncols
        out = []
        for i in range(self.nrows):
            row = []
            for j in range(ocols):
                row.append(sum(self.rows[i][k] * other.rows[k][j] for k in range(self.ncols)) % m)
            out.append(tuple(row))
        return PadicMatrix(self.ctx, tuple(out))

    def scale(self, c: int) -> "PadicMatrix":
        m = self.ctx.modulus
        return PadicMatrix(self.ctx, tuple(tuple((c * x) % m for x in r) for r in self.rows))

    def apply(self, vec) -> tuple[int, ...]:
        m = self.ctx.modulus
        if len(vec) != self.ncols:
            raise ValueError("vector length mismatch")
        return tuple(sum(r[k] * vec[k] for k in range(self.ncols)) % m for r in self.rows)

    def transpose(self) -> "PadicMatrix":
        return PadicMatrix(self.ctx, tuple(zip(*self.rows)) if self.rows else ())

    def det(self) -> int:
        if self.nrows != self.ncols:
            raise ValueError("determinant of a non-square matrix")
        n = self.nrows
        if n == 0:
            return 1
        # Exact integer determinant of the canonical lift, then reduce.
        mat = [list(r) for r in self.rows]
        det = _int_det(mat)
        return det % self.ctx.modulus

    def inverse(self) -> "PadicMatrix":
        """Inverse of a matrix with unit determinant, by elimination."""
        if self.nrows != self.ncols:
            raise ValueError("inverse of a non-square matrix")
        ctx = self.ctx
        m = ctx.modulus
        n = self.nrows
        a = [list(r) for r in self.rows]
        inv = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
        for col in range(n):
            piv = next((i for i in range(col, n) if a[i][col] % ctx.ell), None)
            if piv is None:
                raise ZeroDivisionError("matrix is not invertible over the work ring")
            a[col], a[piv] = a[piv], a[col]
            inv[col], inv[piv] = inv[piv], inv[col]
            u = ctx.invert_unit(a[col][col])
            a[col] = [(u * x) % m for x in a[col]]
            inv[col] = [(u * x) % m for x in inv[col]]
            for i in range(n):
                if i != col and a[i][col]:
                    q = a[i][col]
                    a[i] = [(x - q * y) % m for x, y in zip(a[i], a[col])]
                    inv[i] = [(x - q * y) % m for x, y in zip(inv[i], inv[col])]
        return PadicMatrix.from_rows(ctx, inv)

    def block_diag(self, copies: int) -> "PadicMatrix":
        n, k = self.nrows, self.ncols
        out = [[0] * (k * copies) for _ in range(n * copies)]
        for c in range(copies):
            for i in range(n):
                for j in range(k):
                    out[c * n + i][c * k + j] = self.rows[i][j]
        return PadicMatrix.from_rows(self.ctx, out)

    def _check(self, other: "PadicMatrix") -> None:
        if self.ctx != other.ctx:
            raise ValueError("mixed work rings")
        if self.nrows != other.nrows or self.ncols != other.ncols:
            raise ValueError("shape mismatch")


def _int_det(mat: list[list[int]]) -> int:
    """Fraction-free (Bareiss) determinant of a small integer matrix."""
    n = len(mat)
    m = [list(r) for r in mat]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k]), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def column_reduce(matrix: PadicMatrix) -> tuple[PadicMatrix, list[int]]:
    """Canonical column echelon form over Z/l^N plus elementary divisors.

    Returns (reduced, divisors): reduced spans the same column module with
    zero columns dropped, pivots normalized to powers of l, columns sorted
    by pivot valuation then pivot row; divisors are the l-valuations of the
    Smith form diagonal of the input, clipped at the precision N (a value of
    N marks a column that is zero at this precision).
    """
    ctx = matrix.ctx
    basis, divisors = _echelon_columns(ctx, matrix.columns())
    rows = [[col[i] for col in basis] for i in range(matrix.nrows)]
    return PadicMatrix.from_rows(ctx, rows), divisors


def _echelon_columns(ctx: PadicContext, columns) -> tuple[list[tuple[int, ...]], list[int]]:
    """Column engine behind column_reduce, on plain vectors."""
    m = ctx.modulus
    cols = [list(int(x) % m for x in c) for c in columns]
    if not cols:
        return [], []
    r = len(cols[0])
    if any(len(c) != r for c in cols):
        raise ValueError("generator vectors have mixed lengths")

    divisors = [min(v, ctx.precision) for v in _smith_valuations(cols, ctx)]

    work = [c for c in cols if any(c)]
    pivots: list[tuple[int, int, int]] = []  # (valuation, row, column-index in `work`)
    used_rows: set[int] = set()
    remaining = list(range(len(work)))
    while remaining:
        # Minimal valuation entry among remaining columns, tie-broken by
        # (row, column) for determinism.
        best = None
        for j in remaining:
            col = work[j]
            for i in range(r):
                if i in used_rows:
                    continue
                v = ctx.valuation(col[i])
                if v >= ctx.precision:
                    continue
                if best is None or (v, i, j) < best:
                    best = (v, i, j)
        if best is None:
            break
        v, i, j = best
        col = work[j]
        u_inv = ctx.invert_unit(ctx.unit_part(col[i]))
        work[j] = [(u_inv * x) % m for x in col]
        piv = ctx.ell**v
        # Fully clear the pivot row in not-yet-pivoted columns, and reduce it
        # modulo the pivot in already-pivoted ones.
        for k in range(len(work)):
            if k == j:
                continue
            entry = work[k][i]
            if entry == 0:
                continue
            if k in remaining:
                if entry % piv:
                    raise AssertionError("pivot was not minimal in its stage")
                q = entry // piv
            else:
                q = entry // piv  # leaves the residue entry % piv
            if q:
                work[k] = [(x - q * y) % m for x, y in zip(work[k], work[j])]
        pivots.append((v, i, j))
        used_rows.add(i)
        remaining.remove(j)
        remaining = [k for k in remaining if any(work[k])]
    basis = [tuple(work[j]) for (_v, _i, j) in sorted(pivots)]
    return basis, divisors


def _smith_valuations(cols: list[list[int]], ctx: PadicContext) -> list[int]:
    """l-valuations of the integer Smith diagonal of the column matrix."""
    if not cols:
        return []
    r = len(cols[0])
    mat = [[cols[j][i] for j in range(len(cols))] for i in range(r)]
    diag = intlinalg.smith_diagonal(mat)
    out = []
    for d in diag:
        if d == 0:
            out.append(ctx.precision)
        else:
            v = 0
            while d % ctx.ell == 0:
                d //= ctx.ell
                v += 1
            out.append(v)
    return sorted(out)


@dataclass(frozen=True)
class Lattice:
    """Submodule of (Z/l^N)^r given by a canonical echelon basis."""

    ctx: PadicContext
    ambient_rank: int
    basis: tuple[tuple[int, ...], ...]
    elementary_divisors: tuple[int, ...] = field(default=())

    @staticmethod
    def from_generators(ctx: PadicContext, ambient_rank: int, generators) -> "Lattice":
        gens = [tuple(g) for g in generators]
        for g in gens:
            if len(g) != ambient_rank:
                raise ValueError(
                    f"generator length {len(g)} != ambient rank {ambient_rank}"
                )
        basis, divisors = _echelon_columns(ctx, gens)
        return Lattice(ctx, ambient_rank, tuple(basis), tuple(divisors))

    @staticmethod
    def zero(ctx: PadicContext, ambient_rank: int) -> "Lattice":
        return Lattice(ctx, ambient_rank, (), ())

    @staticmethod
    def full(ctx: PadicContext, ambient_rank: int) -> "Lattice":
        gens = [
            tuple(1 if i == j else 0 for i in range(ambient_rank))
            for j in range(ambient_rank)
        ]
        return Lattice.from_generators(ctx, ambient_rank, gens)

    @property
    def declared_rank(self) -> int:
        return len(self.basis)

    def is_zero(self) -> bool:
        return not self.basis

    def rebased(self) -> "Lattice":
        """Same module, divisors recomputed from the minimal echelon basis.

        The echelon basis has one pivot per column with distinct pivot rows,
        so its Smith valuations are exactly the sorted pivot valuations; a
        redundant generating set's divisors (which may include the precision
        itself) are discarded.  Operation outputs are rebased so purity
        reflects the module, not a presentation.
        """
        divisors = tuple(sorted(v for v, _row in self._pivots()))
        return Lattice(self.ctx, self.ambient_rank, self.basis, divisors)

    def _pivots(self) -> list[tuple[int, int]]:
        """(valuation, row) per basis column, in stored order."""
        out = []
        for col in self.basis:
            v = min(self.ctx.valuation(x) for x in col)
            row = next(i for i, x in enumerate(col) if self.ctx.valuation(x) == v)
            out.append((v, row))
        return out

    def contains(self, vec) -> bool:
        return self.coordinates(vec) is not None

    def coordinates(self, vec) -> list[int] | None:
        """Coefficients expressing vec in the basis, or None if outside.

        The greedy pass is exact: later basis columns are zero in earlier
        pivot rows, and coefficient ambiguity at a pivot of valuation v is a
        multiple of l^(N-v), which kills the whole column mod l^N.
        """
        m = self.ctx.modulus
        v = [int(x) % m for x in vec]
        if len(v) != self.ambient_rank:
            raise ValueError("vector length mismatch")
        coeffs = []
        for col, (val, row) in zip(self.basis, self._pivots()):
            piv = self.ctx.ell**val
            entry = v[row]
            if entry % piv:
                return None
            q = (entry // piv) % m
            if q:
                v = [(x - q * y) % m for x, y in zip(v, col)]
            coeffs.append(q)
        if any(v):
            return None
        return coeffs

    def members(self):
        """Iterate every element of the module (small cases only)."""
        m = self.ctx.modulus
        if not self.basis:
            yield (0,) * self.ambient_rank
            return
        counts = [m // (self.ctx.ell ** v) for v, _row in self._pivots()]
        idx = [0] * len(counts)
        while True:
            vec = [0] * self.ambient_rank
            for c, col in zip(idx, self.basis):
                for i in range(self.ambient_rank):
                    vec[i] = (vec[i] + c * col[i]) % m
            yield tuple(vec)
            k = 0
            while k < len(idx):
                idx[k] += 1
                if idx[k] < counts[k]:
                    break
                idx[k] = 0
                k += 1
            if k == len(idx):
                return

    def member_count(self) -> int:
        n = 1
        for v, _row in self._pivots():
            n *= self.ctx.modulus // (self.ctx.ell ** v)
        return n

    def same_module(self, other: "Lattice") -> bool:
        """Span equality by mutual membership (semantic fallback to __eq__)."""
        if self.ctx != other.ctx or self.ambient_rank != other.ambient_rank:
            return False
        return all(other.contains(c) for c in self.basis) and all(
            self.contains(c) for c in other.basis
        )


def is_pure(lattice: Lattice) -> bool:
    """Nakayama purity test: every elementary divisor of the basis is zero.

    Raises PrecisionLossError when a divisor equals the precision N: at this
    precision an exact relation and a unit times l^N cannot be told apart,
    so the purity verdict would be meaningless.
    """
    divisors = lattice.elementary_divisors
    if any(d >= lattice.ctx.precision for d in divisors):
        raise PrecisionLossError(
            "an elementary divisor reached the precision; purity is undecidable "
            f"at N={lattice.ctx.precision}"
        )
    return all(d == 0 for d in divisors)


def intersect(x: Lattice, y: Lattice) -> Lattice:
    """X ∩ Y inside the common ambient module."""
    _check_compatible(x, y)
    if x.is_zero() or y.is_zero():
        return Lattice.zero(x.ctx, x.ambient_rank)
    m = x.ctx.modulus
    a = [list(col) for col in x.basis]
    b = [list(col) for col in y.basis]
    # Solve A*u = B*w (mod m): kernel of [A | -B].
    mat = [
        [a[j][i] for j in range(len(a))] + [-b[j][i] % m for j in range(len(b))]
        for i in range(x.ambient_rank)
    ]
    gens = []
    for col in intlinalg.kernel_mod(mat, m):
        u = col[: len(a)]
        vec = [0] * x.ambient_rank
        for c, acol in zip(u, a):
            for i in range(x.ambient_rank):
                vec[i] = (vec[i] + c * acol[i]) % m
        if any(vec):
            gens.append(tuple(vec))
    return Lattice.from_generators(x.ctx, x.ambient_rank, gens).rebased()


def lattice_sum(x: Lattice, y: Lattice) -> tuple[Lattice, bool, bool]:
    """X + Y with directness and purity verdicts.

    Returns (sum, is_direct, sum_is_pure); is_direct means X ∩ Y = 0.
    When both summands are pure and their mod-l projections meet trivially,
    the sum is guaranteed direct and pure, and this is asserted.
    """
    _check_compatible(x, y)
    total = Lattice.from_generators(
        x.ctx, x.ambient_rank, list(x.basis) + list(y.basis)
    ).rebased()
    direct = intersect(x, y).is_zero()
    try:
        pure = is_pure(total)
    except PrecisionLossError:
        pure = False
    try:
        hypothesis = (
            is_pure(x)
            and is_pure(y)
            and _fl_dim_intersection(project_mod_ell(x), project_mod_ell(y), x.ctx.ell) == 0
        )
    except PrecisionLossError:
        hypothesis = False
    if hypothesis and not (direct and pure):
        raise AssertionError(
            "trivial mod-l intersection of pure summands must give a pure direct sum"
        )
    return total, direct, pure


def project_mod_ell(x: Lattice) -> list[tuple[int, ...]]:
    """Basis (reduced echelon over F_l) of the image of X in F_l^r."""
    ell = x.ctx.ell
    vecs = [[c % ell for c in col] for col in x.basis]
    return _fl_rref(vecs, ell, x.ambient_rank)


def _fl_rref(vecs: list[list[int]], ell: int, r: int) -> list[tuple[int, ...]]:
    basis: list[list[int]] = []
    pivots: list[int] = []
    for v in vecs:
        v = list(v)
        for b, p in zip(basis, pivots):
            if v[p]:
                c = v[p]
                v = [(x - c * y) % ell for x, y in zip(v, b)]
        piv = next((i for i, x in enumerate(v) if x), None)
        if piv is None:
            continue
        inv = pow(v[piv], -1, ell)
        v = [(inv * x) % ell for x in v]
        for b, p in zip(basis, pivots):
            if b[piv]:
                c = b[piv]
                for i in range(r):
                    b[i] = (b[i] - c * v[i]) % ell
        basis.append(v)
        pivots.append(piv)
    order = sorted(range(len(basis)), key=lambda i: pivots[i])
    return [tuple(basis[i]) for i in order]


def _fl_dim_intersection(a: list[tuple[int, ...]], b: list[tuple[int, ...]], ell: int) -> int:
    if not a or not b:
        return 0
    r = len(a[0])
    dim_a = len(a)
    dim_b = len(b)
    joint = _fl_rref([list(v) for v in a] + [list(v) for v in b], ell, r)
    return dim_a + dim_b - len(joint)


@dataclass(frozen=True)
class Pairing:
    """Bilinear form e(x, y) = x^T * gram * y over the work ring."""

    ctx: PadicContext
    gram: PadicMatrix

    def __post_init__(self) -> None:
        if self.gram.ctx != self.ctx:
            raise ValueError("gram matrix lives in a different work ring")

    def is_perfect(self) -> bool:
        if self.gram.nrows != self.gram.ncols:
            return False
        return self.gram.det() % self.ctx.ell != 0

    def value(self, x, y) -> int:
        m = self.ctx.modulus
        gy = self.gram.apply(y)
        return sum(a * b for a, b in zip(x, gy)) % m

    @staticmethod
    def standard(ctx: PadicContext, r: int) -> "Pairing":
        return Pairing(ctx, PadicMatrix.identity(ctx, r))


def orthogonal(x: Lattice, pairing: Pairing) -> Lattice:
    """X-perp = {y : e(b, y) = 0 for every basis vector b of X}."""
    if not pairing.is_perfect():
        raise PairingError("orthogonal complements need a perfect pairing")
    if pairing.gram.nrows != x.ambient_rank:
        raise ValueError("pairing rank does not match the ambient module")
    m = x.ctx.modulus
    if x.is_zero():
        return Lattice.full(x.ctx, x.ambient_rank)
    rows = []
    for col in x.basis:
        gt = [sum(col[i] * pairing.gram.entry(i, j) for i in range(x.ambient_rank)) % m
              for j in range(x.ambient_rank)]
        rows.append(gt)
    gens = intlinalg.kernel_mod(rows, m)
    return Lattice.from_generators(x.ctx, x.ambient_rank, [tuple(g) for g in gens]).rebased()


def _check_compatible(x: Lattice, y: Lattice) -> None:
    if x.ctx != y.ctx:
        raise ValueError("lattices live in different work rings")
    if x.ambient_rank != y.ambient_rank:
        raise ValueError(
            f"ambient rank mismatch: {x.ambient_rank} != {y.ambient_rank}"
        )
