"""Dense exact linear algebra over the coefficient field.

Everything is row-major lists of Coefficients.  Pivoting takes the first
nonzero entry; divisions stay exact in the field, so no magnitude
heuristics are needed.  Systems here are small (invariant-form sectors),
so Gauss-Jordan without fraction-free tricks is fast enough.
"""

from __future__ import annotations

from .coefficients import Coefficient

Vector = list[Coefficient]
Matrix = list[Vector]


class SingularMatrix(ValueError):
    pass


def zeros(rows: int, cols: int) -> Matrix:
    return [[Coefficient.zero() for _ in range(cols)] for _ in range(rows)]


def identity(n: int) -> Matrix:
    out = zeros(n, n)
    for k in range(n):
        out[k][k] = Coefficient.one()
    return out


def mat_vec(a: Matrix, v: Vector) -> Vector:
    out = []
    for row in a:
        acc = Coefficient.zero()
        for entry, x in zip(row, v):
            if not (entry.is_zero() or x.is_zero()):
                acc = acc + entry * x
        out.append(acc)
    return out


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    cols = len(b[0]) if b else 0
    out = zeros(len(a), cols)
    for i, row in enumerate(a):
        for k, entry in enumerate(row):
            if entry.is_zero():
                continue
            for j in range(cols):
                if not b[k][j].is_zero():
                    out[i][j] = out[i][j] + entry * b[k][j]
    return out


def conj_transpose(a: Matrix) -> Matrix:
    if not a:
        return []
    return [
        [a[i][j].conjugate() for i in range(len(a))]
        for j in range(len(a[0]))
    ]


def _eliminate(rows: Matrix, width: int) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form restricted to the first width columns."""
    mat = [list(r) for r in rows]
    pivots: list[int] = []
    r = 0
    for col in range(width):
        pivot_row = None
        for i in range(r, len(mat)):
            if not mat[i][col].is_zero():
                pivot_row = i
                break
        if pivot_row is None:
            continue
        mat[r], mat[pivot_row] = mat[pivot_row], mat[r]
        inv = Coefficient.one() / mat[r][col]
        mat[r] = [entry * inv for entry in mat[r]]
        for i in range(len(mat)):
            if i != r and not mat[i][col].is_zero():
                factor = mat[i][col]
                mat[i] = [
                    entry - factor * other
                    for entry, other in zip(mat[i], mat[r])
                ]
        pivots.append(col)
        r += 1
        if r == len(mat):
            break
    return mat, pivots


def rank(a: Matrix) -> int:
    if not a or not a[0]:
        return 0
    _, pivots = _eliminate(a, len(a[0]))
    return len(pivots)


def solve(a: Matrix, b: Vector) -> Vector | None:
    """One solution of a x = b, or None when inconsistent."""
    rows = len(a)
    cols = len(a[0]) if a else 0
    if rows == 0:
        return [Coefficient.zero() for _ in range(cols)]
    aug = [list(row) + [b[i]] for i, row in enumerate(a)]
    mat, pivots = _eliminate(aug, cols)
    for i in range(len(pivots), rows):
        if not mat[i][cols].is_zero():
            return None
    x = [Coefficient.zero() for _ in range(cols)]
    for r, col in enumerate(pivots):
        x[col] = mat[r][cols]
    return x


def nullspace(a: Matrix) -> list[Vector]:
    rows = len(a)
    cols = len(a[0]) if a else 0
    if cols == 0:
        return []
    if rows == 0:
        return [
            [Coefficient.one() if i == j else Coefficient.zero()
             for i in range(cols)]
            for j in range(cols)
        ]
    mat, pivots = _eliminate(a, cols)
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = [Coefficient.zero() for _ in range(cols)]
        v[f] = Coefficient.one()
        for r, col in enumerate(pivots):
            v[col] = -mat[r][f]
        basis.append(v)
    return basis


def invert(a: Matrix) -> Matrix:
    n = len(a)
    if any(len(row) != n for row in a):
        raise SingularMatrix("matrix must be square")
    aug = [list(row) + ident_row for row, ident_row in zip(a, identity(n))]
    mat, pivots = _eliminate(aug, n)
    if len(pivots) != n:
        raise SingularMatrix("matrix is singular over the coefficient field")
    return [row[n:] for row in mat]


def solve_min_norm(a: Matrix, b: Vector) -> Vector | None:
    """Solution of a x = b orthogonal to ker(a) for the formal Hermitian
    pairing: x = a* z with (a a*) z = b.

    Falls back to a plain solve when the normal system is inconsistent
    even though the original one is not (possible at parameter loci where
    the formal pairing degenerates).
    """
    if not a:
        return []
    star = conj_transpose(a)
    gram = mat_mul(a, star)
    z = solve(gram, b)
    if z is not None:
        x = mat_vec(star, z)
        if _agrees(a, x, b):
            return x
    return solve(a, b)


def _agrees(a: Matrix, x: Vector, b: Vector) -> bool:
    for got, want in zip(mat_vec(a, x), b):
        if not (got - want).is_zero():
            return False
    return True


def coordinates_in_span(basis: list[Vector], v: Vector) -> Vector | None:
    """Coordinates of v in the given spanning set, or None if outside."""
    if not basis:
        return [] if all(entry.is_zero() for entry in v) else None
    cols = [list(col) for col in zip(*basis)]
    return solve(cols, v)


def extend_to_basis(inside: list[Vector], ambient: list[Vector]) -> list[Vector]:
    """Greedily extend an independent set to span ambient; returns the
    added vectors only."""
    added: list[Vector] = []
    current = [list(v) for v in inside]
    current_rank = rank(current) if current else 0
    for cand in ambient:
        trial = current + [list(cand)]
        r = rank(trial)
        if r > current_rank:
            current = trial
            current_rank = r
            added.append(list(cand))
    return added
