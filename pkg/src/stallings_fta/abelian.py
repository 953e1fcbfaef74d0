"""Exact integer linear algebra over finitely generated abelian groups.

The ambient group is A = Z^m' x Z/d1 x ... x Z/dk with 2 <= d1 | d2 | ... | dk,
described by an AbelianSpec.  Elements are integer vectors of length
m = m' + k whose torsion coordinates work modulo the corresponding d_i.

Subgroups of A are stored as integer lattices in Z^m that contain the
torsion relation lattice R = <d_i * e_{m'+i}>, kept in row Hermite normal
form with zero rows removed.  With that normalization, value equality of
AbelianSubgroup coincides with equality of the subgroups they denote, and
every operation (sum, intersection, preimages, indices, transversals,
coset witnesses) is plain lattice arithmetic.

All arithmetic uses Python integers; intermediate entries in normal-form
computations can exceed machine words even for small inputs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

Vector = tuple[int, ...]
Matrix = tuple[Vector, ...]

INFINITY = float("inf")


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with g = gcd(a, b) >= 0 and g = x*a + y*b."""
    x, next_x = 1, 0
    y, next_y = 0, 1
    g, next_g = a, b
    while next_g:
        q = g // next_g
        x, next_x = next_x, x - q * next_x
        y, next_y = next_y, y - q * next_y
        g, next_g = next_g, g - q * next_g
    if g < 0:
        x, y, g = -x, -y, -g
    return g, x, y


def vec_add(u: Sequence[int], v: Sequence[int]) -> Vector:
    return tuple(a + b for a, b in zip(u, v))


def vec_sub(u: Sequence[int], v: Sequence[int]) -> Vector:
    return tuple(a - b for a, b in zip(u, v))


def vec_neg(u: Sequence[int]) -> Vector:
    return tuple(-a for a in u)


def vec_scale(k: int, u: Sequence[int]) -> Vector:
    return tuple(k * a for a in u)


def mat_identity(n: int) -> Matrix:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def mat_mul(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]]) -> Matrix:
    """Product of integer matrices given as sequences of rows."""
    b = [tuple(row) for row in b]
    cols = len(b[0]) if b else 0
    out = []
    for row in a:
        acc = [0] * cols
        for coeff, brow in zip(row, b):
            if coeff:
                for j in range(cols):
                    acc[j] += coeff * brow[j]
        out.append(tuple(acc))
    return tuple(out)


def vec_mat(v: Sequence[int], b: Sequence[Sequence[int]], width: int) -> Vector:
    """Row vector times matrix; width is the number of columns of b."""
    acc = [0] * width
    for coeff, brow in zip(v, b):
        if coeff:
            for j in range(width):
                acc[j] += coeff * brow[j]
    return tuple(acc)


def _row_sub(mat: list[list[int]], i: int, j: int, q: int) -> None:
    if q:
        ri, rj = mat[i], mat[j]
        for c in range(len(ri)):
            ri[c] -= q * rj[c]


def _hnf_inplace(mat: list[list[int]], width: int,
                 trans: Optional[list[list[int]]] = None) -> list[tuple[int, int]]:
    """Reduce mat to row Hermite normal form in place; return pivot positions.

    Pivots are positive, entries above each pivot lie in [0, pivot), and the
    pivot columns are strictly increasing.  If trans is given the same row
    operations are applied to it, so trans @ original == mat afterwards.
    """
    nrows = len(mat)
    r = 0
    pivots: list[tuple[int, int]] = []
    for col in range(width):
        while True:
            nz = [i for i in range(r, nrows) if mat[i][col]]
            if not nz:
                break
            # smallest absolute value, first occurrence on ties
            i0 = min(nz, key=lambda i: (abs(mat[i][col]), i))
            if i0 != r:
                mat[r], mat[i0] = mat[i0], mat[r]
                if trans is not None:
                    trans[r], trans[i0] = trans[i0], trans[r]
            clean = True
            for i in range(r + 1, nrows):
                if mat[i][col]:
                    q = mat[i][col] // mat[r][col]
                    _row_sub(mat, i, r, q)
                    if trans is not None:
                        _row_sub(trans, i, r, q)
                    if mat[i][col]:
                        clean = False
            if clean:
                break
        if not nz:
            continue
        if mat[r][col] < 0:
            mat[r] = [-a for a in mat[r]]
            if trans is not None:
                trans[r] = [-a for a in trans[r]]
        for i in range(r):
            q = mat[i][col] // mat[r][col]
            _row_sub(mat, i, r, q)
            if trans is not None:
                _row_sub(trans, i, r, q)
        pivots.append((r, col))
        r += 1
    return pivots


def hnf(rows: Sequence[Sequence[int]], width: Optional[int] = None) -> Matrix:
    """Canonical row Hermite normal form of the lattice spanned by rows.

    Zero rows are removed; the zero lattice yields the empty matrix.
    """
    mat = [list(r) for r in rows]
    if width is None:
        width = len(mat[0]) if mat else 0
    for r in mat:
        if len(r) != width:
            raise ValueError("ragged matrix")
    pivots = _hnf_inplace(mat, width)
    return tuple(tuple(r) for r in mat[: len(pivots)])


def hnf_with_transform(
    rows: Sequence[Sequence[int]], width: Optional[int] = None
) -> tuple[Matrix, Matrix, list[tuple[int, int]]]:
    """Return (H, U, pivots) with U unimodular, U @ rows == H (zero rows kept)."""
    mat = [list(r) for r in rows]
    if width is None:
        width = len(mat[0]) if mat else 0
    trans = [list(row) for row in mat_identity(len(mat))]
    pivots = _hnf_inplace(mat, width, trans)
    return (
        tuple(tuple(r) for r in mat),
        tuple(tuple(r) for r in trans),
        pivots,
    )


def kernel(rows: Sequence[Sequence[int]], width: Optional[int] = None) -> Matrix:
    """Basis of the left kernel {x : x @ rows == 0}, one row per basis vector."""
    _, trans, pivots = hnf_with_transform(rows, width)
    return trans[len(pivots):]


def solve_left(
    rows: Sequence[Sequence[int]], target: Sequence[int],
    width: Optional[int] = None,
) -> Optional[Vector]:
    """Some integer x with x @ rows == target, or None if unsolvable."""
    if width is None:
        width = len(rows[0]) if rows else len(target)
    h, trans, pivots = hnf_with_transform(rows, width)
    resid = list(target)
    coeff = [0] * len(h)
    for r, c in pivots:
        q, rem = divmod(resid[c], h[r][c])
        if rem:
            return None
        if q:
            coeff[r] = q
            for j in range(width):
                resid[j] -= q * h[r][j]
    if any(resid):
        return None
    return vec_mat(coeff, trans, len(rows))


@dataclass(frozen=True)
class SnfDecomposition:
    """Smith normal form P @ M @ Q == S with unimodular P, Q.

    deltas are the positive invariant factors delta_1 | delta_2 | ...;
    S is diagonal of the input's shape with the deltas on the diagonal.
    """

    deltas: Vector
    P: Matrix
    Q: Matrix
    S: Matrix

    @property
    def s(self) -> int:
        return len(self.deltas)

    def deltas_padded(self, r: int) -> Vector:
        """Invariant factors extended by zeros up to length r."""
        return self.deltas + (0,) * (r - len(self.deltas))


def snf(rows: Sequence[Sequence[int]], width: Optional[int] = None) -> SnfDecomposition:
    """Smith normal form of an integer matrix.

    Pivot choice: smallest absolute value, first occurrence in row-major
    order on ties.  Diagonal entries are normalized to be nonnegative.
    """
    mat = [list(r) for r in rows]
    k = len(mat)
    if width is None:
        width = len(mat[0]) if mat else 0
    p = [list(row) for row in mat_identity(k)]
    q = [list(row) for row in mat_identity(width)]

    def col_sub(j: int, t: int, factor: int) -> None:
        if factor:
            for i in range(k):
                mat[i][j] -= factor * mat[i][t]
            for i in range(width):
                q[i][j] -= factor * q[i][t]

    def col_swap(j: int, t: int) -> None:
        for i in range(k):
            mat[i][j], mat[i][t] = mat[i][t], mat[i][j]
        for i in range(width):
            q[i][j], q[i][t] = q[i][t], q[i][j]

    t = 0
    while t < k and t < width:
        # global pivot search in the trailing submatrix
        best = None
        for i in range(t, k):
            for j in range(t, width):
                v = mat[i][j]
                if v and (best is None or abs(v) < abs(mat[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        bi, bj = best
        if bi != t:
            mat[t], mat[bi] = mat[bi], mat[t]
            p[t], p[bi] = p[bi], p[t]
        if bj != t:
            col_swap(bj, t)
        dirty = False
        for i in range(t + 1, k):
            if mat[i][t]:
                quo = mat[i][t] // mat[t][t]
                _row_sub(mat, i, t, quo)
                _row_sub(p, i, t, quo)
                if mat[i][t]:
                    dirty = True
        for j in range(t + 1, width):
            if mat[t][j]:
                quo = mat[t][j] // mat[t][t]
                col_sub(j, t, quo)
                if mat[t][j]:
                    dirty = True
        if dirty:
            continue
        # row and column are clear; enforce divisibility of the rest
        viol = None
        for i in range(t + 1, k):
            for j in range(t + 1, width):
                if mat[i][j] % mat[t][t]:
                    viol = i
                    break
            if viol is not None:
                break
        if viol is not None:
            _row_sub(mat, t, viol, -1)
            _row_sub(p, t, viol, -1)
            continue
        if mat[t][t] < 0:
            mat[t] = [-a for a in mat[t]]
            p[t] = [-a for a in p[t]]
        t += 1

    deltas = tuple(mat[i][i] for i in range(t) if mat[i][i])
    return SnfDecomposition(
        deltas=deltas,
        P=tuple(tuple(r) for r in p),
        Q=tuple(tuple(r) for r in q),
        S=tuple(tuple(r) for r in mat),
    )


@dataclass(frozen=True)
class AbelianSpec:
    """Shape of the ambient group: Z^m_free x Z/d1 x ... (d1 | d2 | ...)."""

    m_free: int
    torsion: Vector = ()

    def __post_init__(self):
        object.__setattr__(self, "torsion", tuple(int(d) for d in self.torsion))
        if self.m_free < 0:
            raise ValueError("m_free must be nonnegative")
        prev = None
        for d in self.torsion:
            if d < 2:
                raise ValueError(f"torsion order {d} < 2")
            if prev is not None and d % prev:
                raise ValueError(f"torsion orders must divide in turn: {prev} | {d} fails")
            prev = d

    @property
    def m(self) -> int:
        return self.m_free + len(self.torsion)

    def zero(self) -> Vector:
        return (0,) * self.m

    def relation_rows(self) -> Matrix:
        """Generators d_i * e_{m'+i} of the torsion relation lattice R."""
        rows = []
        for i, d in enumerate(self.torsion):
            row = [0] * self.m
            row[self.m_free + i] = d
            rows.append(tuple(row))
        return tuple(rows)

    def canonicalize(self, vec: Sequence[int]) -> Vector:
        """Reduce torsion coordinates into [0, d_i)."""
        vec = tuple(vec)
        if len(vec) != self.m:
            raise ValueError(f"expected vector of length {self.m}, got {len(vec)}")
        head = vec[: self.m_free]
        tail = tuple(a % d for a, d in zip(vec[self.m_free:], self.torsion))
        return head + tail

    def elements(self) -> Iterator[Vector]:
        """All canonical elements, graded by sum of absolute values.

        Within a grade, vectors come in ascending order of the per-coordinate
        key (abs value, sign bit) read left to right, so e.g. in Z the order
        starts 0, 1, -1, 2, -2, ...
        """
        if self.m == 0:
            yield ()
            return
        max_torsion = sum(d - 1 for d in self.torsion)
        for weight in itertools.count():
            if self.m_free == 0 and weight > max_torsion:
                return
            yield from self._vectors_of_weight(0, weight)

    def _vectors_of_weight(self, pos: int, remaining: int) -> Iterator[Vector]:
        if pos == self.m:
            if remaining == 0:
                yield ()
            return
        if pos < self.m_free:
            for mag in range(remaining + 1):
                vals = (0,) if mag == 0 else (mag, -mag)
                for v in vals:
                    for rest in self._vectors_of_weight(pos + 1, remaining - mag):
                        yield (v,) + rest
        else:
            d = self.torsion[pos - self.m_free]
            for v in range(min(remaining, d - 1) + 1):
                for rest in self._vectors_of_weight(pos + 1, remaining - v):
                    yield (v,) + rest


@dataclass(frozen=True)
class AbelianSubgroup:
    """Subgroup of A as the canonical HNF basis of its lifted lattice in Z^m."""

    spec: AbelianSpec
    lattice_basis: Matrix = ()

    def __post_init__(self):
        rows = list(self.lattice_basis) + list(self.spec.relation_rows())
        object.__setattr__(self, "lattice_basis", hnf(rows, self.spec.m))

    @classmethod
    def from_generators(cls, spec: AbelianSpec, gens: Sequence[Sequence[int]]) -> "AbelianSubgroup":
        for g in gens:
            if len(g) != spec.m:
                raise ValueError(f"generator length {len(g)} != ambient length {spec.m}")
        return cls(spec, tuple(tuple(g) for g in gens))

    @classmethod
    def trivial(cls, spec: AbelianSpec) -> "AbelianSubgroup":
        return cls(spec, ())

    @classmethod
    def full(cls, spec: AbelianSpec) -> "AbelianSubgroup":
        return cls(spec, mat_identity(spec.m))

    def contains(self, vec: Sequence[int]) -> bool:
        """True iff vec represents an element of this subgroup of A."""
        if len(vec) != self.spec.m:
            raise ValueError("dimension mismatch")
        resid = list(vec)
        col_of_row = {c: r for r, c in self._pivots()}
        for col in range(self.spec.m):
            if resid[col] == 0:
                continue
            r = col_of_row.get(col)
            if r is None:
                return False
            q, rem = divmod(resid[col], self.lattice_basis[r][col])
            if rem:
                return False
            for j in range(col, self.spec.m):
                resid[j] -= q * self.lattice_basis[r][j]
        return True

    def _pivots(self) -> list[tuple[int, int]]:
        out = []
        for r, row in enumerate(self.lattice_basis):
            c = next(j for j, a in enumerate(row) if a)
            out.append((r, c))
        return out

    def generator_rows(self) -> Matrix:
        """Lattice rows with nontrivial image in A (drops pure relation rows)."""
        zero = self.spec.zero()
        return tuple(
            row for row in self.lattice_basis if self.spec.canonicalize(row) != zero
        )

    def reduce_mod(self, vec: Sequence[int]) -> Vector:
        """Canonical coset representative: floor-reduce at each HNF pivot."""
        if len(vec) != self.spec.m:
            raise ValueError("dimension mismatch")
        resid = list(vec)
        for r, c in self._pivots():
            q = resid[c] // self.lattice_basis[r][c]
            if q:
                for j in range(c, self.spec.m):
                    resid[j] -= q * self.lattice_basis[r][j]
        return tuple(resid)

    def sum(self, other: "AbelianSubgroup") -> "AbelianSubgroup":
        self._check_same_spec(other)
        return AbelianSubgroup(self.spec, self.lattice_basis + other.lattice_basis)

    def intersect(self, other: "AbelianSubgroup") -> "AbelianSubgroup":
        """Lattice intersection; correct on subgroups since both contain R."""
        self._check_same_spec(other)
        b1, b2 = self.lattice_basis, other.lattice_basis
        stacked = list(b1) + [vec_neg(r) for r in b2]
        ker = kernel(stacked, self.spec.m)
        rows = [vec_mat(k[: len(b1)], b1, self.spec.m) for k in ker]
        return AbelianSubgroup(self.spec, tuple(rows))

    def _check_same_spec(self, other: "AbelianSubgroup") -> None:
        if self.spec != other.spec:
            raise ValueError("mismatched ambient abelian groups")

    def index(self):
        """[A : L]; finite iff the lattice has full rank."""
        if len(self.lattice_basis) < self.spec.m:
            return INFINITY
        out = 1
        for r, c in self._pivots():
            out *= self.lattice_basis[r][c]
        return out

    def rank(self) -> int:
        """Minimal number of generators of this subgroup of A."""
        h = len(self.lattice_basis)
        if h == 0 or not self.spec.torsion:
            return h
        # express the relation lattice in the basis; kill unit invariant factors
        coeffs = []
        for row in self.spec.relation_rows():
            x = solve_left(self.lattice_basis, row, self.spec.m)
            coeffs.append(x)
        dec = snf(coeffs, h)
        return h - sum(1 for d in dec.deltas if d == 1)

    def transversal(self, budget: Optional[int] = None) -> Iterator[Vector]:
        """Coset representatives mod L, graded by sum of absolute values.

        Complete when the index is finite; pass a budget to truncate an
        infinite stream.
        """
        target = self.index()
        seen = set()
        emitted = 0
        for vec in self.spec.elements():
            rep = self.reduce_mod(vec)
            if rep in seen:
                continue
            seen.add(rep)
            yield vec
            emitted += 1
            if emitted == target:
                return
            if budget is not None and emitted >= budget:
                return

    def finite_index_completion(self) -> "AbelianSubgroup":
        """Smallest-effort L' with L a direct summand of L' and [A : L'] finite.

        Via SNF of the lattice basis: in the transformed coordinates the
        lattice is spanned by delta_i * e_i, so appending the remaining
        coordinate vectors (pulled back through Q^-1) completes it.
        """
        m = self.spec.m
        h = len(self.lattice_basis)
        if h == m:
            return self
        dec = snf(self.lattice_basis, m)
        # rows of Q^-1 = rows occurring in S Q^-1 ... compute inverse via solve
        q_inv = _unimodular_inverse(dec.Q)
        extra = [q_inv[i] for i in range(dec.s, m)]
        return AbelianSubgroup(self.spec, self.lattice_basis + tuple(extra))


def _unimodular_inverse(q: Matrix) -> Matrix:
    """Inverse of a unimodular integer matrix."""
    n = len(q)
    h, trans, pivots = hnf_with_transform(q, n)
    if len(pivots) != n or any(h[i][i] != 1 for i in range(n)):
        raise ValueError("matrix is not unimodular")
    return trans


def canonicalize(vec: Sequence[int], spec: AbelianSpec) -> Vector:
    """Module-level alias for AbelianSpec.canonicalize."""
    return spec.canonicalize(vec)


def coset_intersection_witness(
    a: Sequence[int],
    l1: AbelianSubgroup,
    b: Sequence[int],
    l2: AbelianSubgroup,
) -> Optional[Vector]:
    """Some c in (a + L1) & (b + L2), canonical mod L1 & L2; None iff empty.

    Nonempty exactly when b - a lies in L1 + L2.
    """
    if l1.spec != l2.spec:
        raise ValueError("mismatched ambient abelian groups")
    m = l1.spec.m
    if len(a) != m or len(b) != m:
        raise ValueError("dimension mismatch")
    b1, b2 = l1.lattice_basis, l2.lattice_basis
    stacked = list(b1) + [vec_neg(r) for r in b2]
    sol = solve_left(stacked, vec_sub(b, a), m)
    if sol is None:
        return None
    shift = vec_mat(sol[: len(b1)], b1, m)
    witness = vec_add(a, shift)
    return l1.intersect(l2).reduce_mod(witness)


def preimage_under_matrix(
    l: AbelianSubgroup, d_rows: Sequence[Sequence[int]], r: Optional[int] = None
) -> AbelianSubgroup:
    """The lattice (L)D^-1 = {v in Z^r : v @ D in L}, canonical in Z^r.

    D is an r x m integer matrix given by rows; the result always contains
    ker D and is returned as a subgroup of the free group Z^r.
    """
    if r is None:
        r = len(d_rows)
    m = l.spec.m
    for row in d_rows:
        if len(row) != m:
            raise ValueError("dimension mismatch")
    stacked = list(d_rows) + [vec_neg(row) for row in l.lattice_basis]
    ker = kernel(stacked, m)
    rows = [k[:r] for k in ker]
    return AbelianSubgroup.from_generators(AbelianSpec(r), rows)
