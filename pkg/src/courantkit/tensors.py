"""Small helpers for tensors whose entries are BaseCoeff polynomials."""

from __future__ import annotations

from fractions import Fraction
from itertools import permutations

from .basecoeff import BaseCoeff


def zeros(n: int, *shape) -> list:
    """Nested list of BaseCoeff.zero(n) with the given shape."""
    if not shape:
        return BaseCoeff.zero(n)
    head, *rest = shape
    return [zeros(n, *rest) for _ in range(head)]


def shape_of(t) -> tuple:
    s = []
    while isinstance(t, list):
        s.append(len(t))
        t = t[0]
    return tuple(s)


def tmap(fn, t):
    if isinstance(t, list):
        return [tmap(fn, u) for u in t]
    return fn(t)


def tensor_is_zero(t) -> bool:
    if isinstance(t, list):
        return all(tensor_is_zero(u) for u in t)
    return t.is_zero()


def tensor_is_constant(t) -> bool:
    if isinstance(t, list):
        return all(tensor_is_constant(u) for u in t)
    return t.is_constant()


def tensor_eq(a, b) -> bool:
    if isinstance(a, list) != isinstance(b, list):
        return False
    if isinstance(a, list):
        return len(a) == len(b) and all(tensor_eq(x, y) for x, y in zip(a, b))
    return a == b


def tensor_sub(a, b):
    if isinstance(a, list):
        return [tensor_sub(x, y) for x, y in zip(a, b)]
    return a - b


def is_symmetric(m) -> bool:
    r = len(m)
    return all(m[i][j] == m[j][i] for i in range(r) for j in range(r))


def is_antisymmetric(m) -> bool:
    r = len(m)
    return all(m[i][j] == -m[j][i] for i in range(r) for j in range(r))


def is_constant_matrix(m) -> bool:
    return all(e.is_constant() for row in m for e in row)


def identity_matrix(n_base: int, r: int) -> list:
    return [[BaseCoeff.one(n_base) if i == j else BaseCoeff.zero(n_base) for j in range(r)]
            for i in range(r)]


def mat_mul(a, b) -> list:
    ra, ca, cb = len(a), len(a[0]), len(b[0])
    out = []
    for i in range(ra):
        row = []
        for j in range(cb):
            s = a[i][0] * b[0][j]
            for k in range(1, ca):
                s = s + a[i][k] * b[k][j]
            row.append(s)
        out.append(row)
    return out


def invert_const_matrix(m) -> list:
    """Exact inverse of a constant BaseCoeff matrix; raises on singularity."""
    r = len(m)
    if not is_constant_matrix(m):
        raise ValueError("matrix is not constant; supply the inverse explicitly")
    n_base = m[0][0].n
    a = [[m[i][j].constant_value() for j in range(r)] + [Fraction(int(i == j)) for j in range(r)]
         for i in range(r)]
    for col in range(r):
        piv = next((row for row in range(col, r) if a[row][col]), None)
        if piv is None:
            raise ValueError("matrix is singular")
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [v * inv for v in a[col]]
        for row in range(r):
            if row != col and a[row][col]:
                f = a[row][col]
                a[row] = [v - f * w for v, w in zip(a[row], a[col])]
    return [[BaseCoeff.const(n_base, a[i][r + j]) for j in range(r)] for i in range(r)]


def check_total_antisymmetry(t, name: str = "tensor"):
    """Assert total antisymmetry of a cubic or quartic nested-list tensor."""
    shape = shape_of(t)
    k = len(shape)
    r = shape[0]
    idx_sets = [(i,) for i in range(r)]
    for _ in range(k - 1):
        idx_sets = [s + (i,) for s in idx_sets for i in range(r)]
    for idx in idx_sets:
        base = t
        for i in idx:
            base = base[i]
        for perm in permutations(range(k)):
            sign = perm_sign(perm)
            v = t
            for pos in perm:
                v = v[idx[pos]]
            if v != (base if sign == 1 else -base):
                raise ValueError(f"{name} is not totally antisymmetric at indices {idx}")


def perm_sign(perm) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def antisymmetrize3(t):
    """Total antisymmetrization (with 1/3! normalization) of a 3-index tensor."""
    r = len(t)
    n_base = t[0][0][0].n
    out = zeros(n_base, r, r, r)
    for a in range(r):
        for b in range(r):
            for c in range(r):
                s = BaseCoeff.zero(n_base)
                for perm in permutations((a, b, c)):
                    sign = perm_sign_of_map((a, b, c), perm)
                    v = t[perm[0]][perm[1]][perm[2]]
                    s = s + (v if sign == 1 else -v)
                out[a][b][c] = s.scale(Fraction(1, 6))
    return out


def perm_sign_of_map(src, dst) -> int:
    """Sign of the permutation taking tuple src to tuple dst (entries distinct or equal)."""
    # positions: dst is a rearrangement of src; build index permutation
    src = list(src)
    perm = []
    used = [False] * len(src)
    for d in dst:
        for i, s in enumerate(src):
            if not used[i] and s == d:
                used[i] = True
                perm.append(i)
                break
    return perm_sign(tuple(perm))
