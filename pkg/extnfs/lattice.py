"""Integer lattices: exact LLL, 4x4 bases, determinants and the 4d cross product."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .errors import LatticeError

Vector4 = Tuple[int, int, int, int]

DELTA = Fraction(99, 100)
ETA = Fraction(51, 100)


def dot(u: Sequence[int], v: Sequence[int]) -> int:
    return sum(a * b for a, b in zip(u, v))


def det(rows: Sequence[Sequence[int]]) -> int:
    """Exact integer determinant (fraction-free Bareiss elimination)."""
    m = [list(row) for row in rows]
    n = len(m)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            pivot = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if pivot is None:
                return 0
            m[k], m[pivot] = m[pivot], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def lll(vectors: Sequence[Sequence[int]], delta: Fraction = DELTA,
        eta: Fraction = ETA) -> Tuple[List[List[int]], List[List[int]]]:
    """Integral LLL on independent vectors (Cohen's all-integer variant).

    Returns (reduced vectors, transform rows) with reduced[i] = sum_j transform[i][j] * vectors[j].
    """
    n = len(vectors)
    b: List[Optional[List[int]]] = [None] + [list(v) for v in vectors]
    H: List[Optional[List[int]]] = [None] + [[int(i == j) for j in range(n)] for i in range(n)]
    if n == 0:
        return [], []
    a_num, a_den = delta.numerator, delta.denominator
    e_num, e_den = eta.numerator, eta.denominator
    d = [0] * (n + 1)
    d[0] = 1
    d[1] = dot(b[1], b[1])
    if d[1] == 0:
        raise LatticeError("rank-deficient basis")
    lam = [[0] * (n + 1) for _ in range(n + 1)]

    def redi(k: int, l: int) -> None:
        if e_den * abs(lam[k][l]) <= e_num * d[l]:
            return
        q = (2 * lam[k][l] + d[l]) // (2 * d[l])
        b[k] = [x - q * y for x, y in zip(b[k], b[l])]
        H[k] = [x - q * y for x, y in zip(H[k], H[l])]
        lam[k][l] -= q * d[l]
        for i in range(1, l):
            lam[k][i] -= q * lam[l][i]

    def swapi(k: int, kmax: int) -> None:
        b[k], b[k - 1] = b[k - 1], b[k]
        H[k], H[k - 1] = H[k - 1], H[k]
        for j in range(1, k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        mu = lam[k][k - 1]
        big_b = (d[k - 2] * d[k] + mu * mu) // d[k - 1]
        for i in range(k + 1, kmax + 1):
            t = lam[i][k]
            lam[i][k] = (d[k] * lam[i][k - 1] - mu * t) // d[k - 1]
            lam[i][k - 1] = (big_b * t + mu * lam[i][k]) // d[k]
        d[k - 1] = big_b

    k, kmax = 2, 1
    while k <= n:
        if k > kmax:
            kmax = k
            for j in range(1, k + 1):
                u = dot(b[k], b[j])
                for i in range(1, j):
                    u = (d[i] * u - lam[k][i] * lam[j][i]) // d[i - 1]
                if j < k:
                    lam[k][j] = u
                else:
                    d[k] = u
                    if u == 0:
                        raise LatticeError("rank-deficient basis")
        redi(k, k - 1)
        if a_den * d[k] * d[k - 2] < a_num * d[k - 1] ** 2 - a_den * lam[k][k - 1] ** 2:
            swapi(k, kmax)
            k = max(2, k - 1)
            continue
        for l in range(k - 2, 0, -1):
            redi(k, l)
        k += 1
    return [v for v in b[1:]], [h for h in H[1:]]


@dataclass(frozen=True)
class Basis4:
    """4x4 integer basis stored as four columns."""

    columns: Tuple[Vector4, Vector4, Vector4, Vector4]

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]]) -> "Basis4":
        if len(columns) != 4 or any(len(c) != 4 for c in columns):
            raise LatticeError("a 4d basis needs four columns of length four")
        return cls(tuple(tuple(int(x) for x in c) for c in columns))  # type: ignore[arg-type]

    @classmethod
    def identity(cls, scale: int = 1) -> "Basis4":
        return cls.from_columns([[scale * int(i == j) for i in range(4)] for j in range(4)])

    def rows(self) -> List[List[int]]:
        return [[self.columns[j][i] for j in range(4)] for i in range(4)]

    def apply(self, z: Sequence[int]) -> Vector4:
        """B*z, the point with lattice coordinates z."""
        c = self.columns
        return tuple(c[0][i] * z[0] + c[1][i] * z[1] + c[2][i] * z[2] + c[3][i] * z[3]
                     for i in range(4))  # type: ignore[return-value]

    def det(self) -> int:
        return det(self.columns)

    def max_entry(self) -> int:
        return max(abs(x) for c in self.columns for x in c)

    def coordinates(self, point: Sequence[int]) -> Tuple[Fraction, ...]:
        """Solve B*z = point over Q."""
        m = [[Fraction(x) for x in row] + [Fraction(point[i])] for i, row in enumerate(self.rows())]
        for col in range(4):
            pivot = next((r for r in range(col, 4) if m[r][col] != 0), None)
            if pivot is None:
                raise LatticeError("rank-deficient basis")
            m[col], m[pivot] = m[pivot], m[col]
            for r in range(4):
                if r != col and m[r][col] != 0:
                    factor = m[r][col] / m[col][col]
                    m[r] = [x - factor * y for x, y in zip(m[r], m[col])]
        return tuple(m[i][4] / m[i][i] for i in range(4))

    def contains(self, point: Sequence[int]) -> bool:
        return all(z.denominator == 1 for z in self.coordinates(point))


def lll_reduce(basis: Basis4, delta: Fraction = DELTA) -> Basis4:
    """LLL-reduce the columns of a 4x4 basis."""
    reduced, _ = lll(basis.columns, delta)
    return Basis4.from_columns(reduced)


def cross4(u: Sequence[int], v: Sequence[int], w: Sequence[int]) -> Vector4:
    """Normal of the hyperplane spanned by u, v, w: N.x = det(u, v, w, x)."""
    rows = (u, v, w)
    out = []
    for i in range(4):
        keep = [j for j in range(4) if j != i]
        minor = det([[row[j] for j in keep] for row in rows])
        out.append(minor if i % 2 else -minor)
    return tuple(out)  # type: ignore[return-value]
