"""Small exact integer matrix routines: Smith form and kernels.

Matrices are lists of row lists of Python ints. Sizes here are tiny
(ambient rank <= 8), so the plain gcd-driven eliminations below are fine.
"""

from __future__ import annotations


def _mat_copy(m: list[list[int]]) -> list[list[int]]:
    return [list(row) for row in m]


def identity_matrix(n: int) -> list[list[int]]:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def mat_mul(a: list[list[int]], b: list[list[int]]) -> list[list[int]]:
    rows, inner, cols = len(a), len(b), len(b[0]) if b else 0
    out = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        ai = a[i]
        for k in range(inner):
            aik = ai[k]
            if aik:
                bk = b[k]
                oi = out[i]
                for j in range(cols):
                    oi[j] += aik * bk[j]
    return out


def smith_diagonal(mat: list[list[int]]) -> list[int]:
    """Diagonal of the Smith normal form of an integer matrix.

    Returns min(rows, cols) nonnegative integers d_1 | d_2 | ... (zeros at
    the end when the rank is deficient). Transform matrices are not tracked.
    """
    m = _mat_copy(mat)
    rows = len(m)
    cols = len(m[0]) if rows else 0
    n = min(rows, cols)
    diag = []
    top = 0
    while top < n:
        # Find a nonzero pivot of minimal absolute value in the working block.
        best = None
        for i in range(top, rows):
            for j in range(top, cols):
                v = m[i][j]
                if v != 0 and (best is None or abs(v) < abs(best[0])):
                    best = (v, i, j)
        if best is None:
            diag.extend([0] * (n - top))
            break
        _, bi, bj = best
        m[top], m[bi] = m[bi], m[top]
        for row in m:
            row[top], row[bj] = row[bj], row[top]
        # Clear the pivot row and column; restart if a remainder shrinks the pivot.
        while True:
            piv = m[top][top]
            dirty = False
            for i in range(top + 1, rows):
                if m[i][top]:
                    q = m[i][top] // piv
                    for j in range(top, cols):
                        m[i][j] -= q * m[top][j]
                    if m[i][top]:
                        m[top], m[i] = m[i], m[top]
                        dirty = True
                        break
            if dirty:
                continue
            for j in range(top + 1, cols):
                if m[top][j]:
                    q = m[top][j] // piv
                    for i in range(top, rows):
                        m[i][j] -= q * m[i][top]
                    if m[top][j]:
                        for row in m:
                            row[top], row[j] = row[j], row[top]
                        dirty = True
                        break
            if not dirty:
                break
        # Divisibility sweep: pivot must divide every remaining entry.
        piv = m[top][top]
        fixed = True
        for i in range(top + 1, rows):
            for j in range(top + 1, cols):
                if m[i][j] % piv:
                    for jj in range(top, cols):
                        m[top][jj] += m[i][jj]
                    fixed = False
                    break
            if not fixed:
                break
        if not fixed:
            continue
        diag.append(abs(piv))
        top += 1
    return diag


def smith_with_transforms(
    mat: list[list[int]],
) -> tuple[list[list[int]], list[list[int]], list[list[int]]]:
    """Smith form with transforms: returns (d, u, v) with u*mat*v = d.

    u and v are unimodular; d is diagonal (rectangular allowed).
    """
    m = _mat_copy(mat)
    rows = len(m)
    cols = len(m[0]) if rows else 0
    u = identity_matrix(rows)
    v = identity_matrix(cols)

    def row_swap(i, j):
        m[i], m[j] = m[j], m[i]
        u[i], u[j] = u[j], u[i]

    def col_swap(i, j):
        for row in m:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def row_sub(i, j, q):
        # row_i -= q * row_j
        mi, mj = m[i], m[j]
        for k in range(cols):
            mi[k] -= q * mj[k]
        ui, uj = u[i], u[j]
        for k in range(rows):
            ui[k] -= q * uj[k]

    def col_sub(i, j, q):
        # col_i -= q * col_j
        for row in m:
            row[i] -= q * row[j]
        for row in v:
            row[i] -= q * row[j]

    n = min(rows, cols)
    top = 0
    while top < n:
        best = None
        for i in range(top, rows):
            for j in range(top, cols):
                val = m[i][j]
                if val != 0 and (best is None or abs(val) < abs(best[0])):
                    best = (val, i, j)
        if best is None:
            break
        _, bi, bj = best
        if bi != top:
            row_swap(top, bi)
        if bj != top:
            col_swap(top, bj)
        while True:
            piv = m[top][top]
            dirty = False
            for i in range(top + 1, rows):
                if m[i][top]:
                    row_sub(i, top, m[i][top] // piv)
                    if m[i][top]:
                        row_swap(top, i)
                        dirty = True
                        break
            if dirty:
                continue
            for j in range(top + 1, cols):
                if m[top][j]:
                    col_sub(j, top, m[top][j] // piv)
                    if m[top][j]:
                        col_swap(top, j)
                        dirty = True
                        break
            if not dirty:
                break
        piv = m[top][top]
        fixed = True
        for i in range(top + 1, rows):
            bad = next((j for j in range(top + 1, cols) if m[i][j] % piv), None)
            if bad is not None:
                row_sub(top, i, -1)  # row_top += row_i
                fixed = False
                break
        if not fixed:
            continue
        if piv < 0:
            for j in range(cols):
                m[top][j] = -m[top][j]
            for j in range(rows):
                u[top][j] = -u[top][j]
        top += 1
    d = [[m[i][j] if i == j else 0 for j in range(cols)] for i in range(rows)]
    # Keep any residue outside the processed block (rank-deficient tail is zero
    # by construction, but be defensive).
    for i in range(rows):
        for j in range(cols):
            if i != j and m[i][j] != 0:
                raise AssertionError("smith reduction left an off-diagonal entry")
    return d, u, v


def kernel_mod(mat: list[list[int]], modulus: int) -> list[list[int]]:
    """Generators (as columns) of {x : mat*x == 0 (mod modulus)}.

    Returns a list of column vectors spanning the kernel of the map
    (Z/modulus)^cols -> (Z/modulus)^rows.
    """
    rows = len(mat)
    cols = len(mat[0]) if rows else 0
    if cols == 0:
        return []
    if rows == 0:
        return [[1 if i == j else 0 for i in range(cols)] for j in range(cols)]
    d, _u, v = smith_with_transforms(mat)
    gens = []
    for j in range(cols):
        dj = d[j][j] if j < rows else 0
        # Least s >= 1 with s*dj == 0 (mod modulus); dj == 0 means y_j is free.
        scale = 1 if dj == 0 else modulus // _gcd(dj, modulus)
        col = [(v[i][j] * scale) % modulus for i in range(cols)]
        if any(col):
            gens.append(col)
    return gens


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return abs(a)


def solve_mod(mat: list[list[int]], target: list[int], modulus: int) -> list[int] | None:
    """One solution x of mat*x == target (mod modulus), or None."""
    rows = len(mat)
    cols = len(mat[0]) if rows else 0
    if rows == 0:
        return [0] * cols
    d, u, v = smith_with_transforms(mat)
    t = [sum(u[i][k] * target[k] for k in range(rows)) % modulus for i in range(rows)]
    y = [0] * cols
    for i in range(rows):
        di = d[i][i] if i < cols else 0
        if di == 0:
            if t[i] % modulus:
                return None
            continue
        g = _gcd(di, modulus)
        if t[i] % g:
            return None
        # Solve di * y == t[i] (mod modulus).
        di_g, m_g, t_g = di // g, modulus // g, t[i] // g
        y[i] = (t_g * pow(di_g, -1, m_g)) % m_g
    return [sum(v[i][k] * y[k] for k in range(cols)) % modulus for i in range(cols)]
