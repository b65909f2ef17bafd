"""The base algebra B = M_d(Q), B-B-bimodules with a specified B-vector state,
linear operators with the expectation E(T) = p(T xi), and left/right
multiplication operators L_b, R_b.

Everything is exact: scalars are fractions.Fraction, equality is entrywise.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from random import Random


def frac(x) -> Fraction:
    """Parse an exact rational from int, Fraction, or a 'p/q' string."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"not an exact rational: {x!r}")


def frac_str(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


class BElem:
    """An element of B = M_d(Q): a d x d matrix of exact rationals."""

    __slots__ = ("d", "rows")

    def __init__(self, rows):
        rows = tuple(tuple(frac(x) for x in row) for row in rows)
        d = len(rows)
        if any(len(r) != d for r in rows):
            raise ValueError("BElem must be square")
        self.d = d
        self.rows = rows

    @staticmethod
    def identity(d: int) -> "BElem":
        return BElem([[Fraction(int(i == j)) for j in range(d)] for i in range(d)])

    @staticmethod
    def zero(d: int) -> "BElem":
        return BElem([[Fraction(0)] * d for _ in range(d)])

    @staticmethod
    def unit(d: int, a: int, b: int) -> "BElem":
        """Matrix unit E_ab."""
        return BElem([[Fraction(int(i == a and j == b)) for j in range(d)] for i in range(d)])

    def __add__(self, other):
        self._check(other)
        return BElem([[x + y for x, y in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __sub__(self, other):
        self._check(other)
        return BElem([[x - y for x, y in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __neg__(self):
        return BElem([[-x for x in r] for r in self.rows])

    def __mul__(self, other):
        if isinstance(other, BElem):
            self._check(other)
            cols = list(zip(*other.rows))
            return BElem([[sum(x * y for x, y in zip(row, col)) for col in cols]
                          for row in self.rows])
        return BElem([[x * frac(other) for x in r] for r in self.rows])

    def __rmul__(self, other):
        return BElem([[frac(other) * x for x in r] for r in self.rows])

    def scale(self, c) -> "BElem":
        c = frac(c)
        return BElem([[c * x for x in r] for r in self.rows])

    def _check(self, other):
        if not isinstance(other, BElem) or other.d != self.d:
            raise ValueError("BElem dimension mismatch")

    def is_zero(self) -> bool:
        return all(x == 0 for r in self.rows for x in r)

    def __eq__(self, other):
        return isinstance(other, BElem) and self.d == other.d and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return "[" + "; ".join(",".join(frac_str(x) for x in r) for r in self.rows) + "]"

    def flat(self):
        """Row-major coordinates, length d*d."""
        return [x for r in self.rows for x in r]

    @staticmethod
    def from_flat(d, coords) -> "BElem":
        coords = list(coords)
        return BElem([coords[i * d:(i + 1) * d] for i in range(d)])

    def to_data(self):
        return [[frac_str(x) for x in r] for r in self.rows]

    @staticmethod
    def from_data(rows) -> "BElem":
        return BElem(rows)


# ---------------------------------------------------------------------------
# Plain exact linear algebra on list-of-list Fraction matrices.

def mat_identity(n):
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def mat_mul(a, b):
    bt = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def mat_vec(a, v):
    return [sum(x * y for x, y in zip(row, v)) for row in a]


def mat_add(a, b):
    return [[x + y for x, y in zip(r, s)] for r, s in zip(a, b)]


def mat_sub(a, b):
    return [[x - y for x, y in zip(r, s)] for r, s in zip(a, b)]


def mat_scale(a, c):
    return [[c * x for x in r] for r in a]


def mat_eq(a, b):
    return all(r == s for r, s in zip(a, b))


def mat_inv(a):
    """Exact inverse by Gauss-Jordan; raises ValueError if singular."""
    n = len(a)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            raise ValueError("singular matrix")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def nullspace(rows, ncols):
    """Basis of {v : M v = 0} for the matrix with the given rows (exact)."""
    m = [list(r) for r in rows]
    pivots = []
    rank = 0
    for col in range(ncols):
        piv = next((r for r in range(rank, len(m)) if m[r][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = 1 / m[rank][col]
        m[rank] = [x * inv for x in m[rank]]
        for r in range(len(m)):
            if r != rank and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[rank])]
        pivots.append(col)
        rank += 1
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -m[r][fc]
        basis.append(v)
    return basis


def _lmul_matrix(b: BElem):
    """Matrix of c -> b*c on row-major vec coordinates."""
    d = b.d
    n = d * d
    out = [[Fraction(0)] * n for _ in range(n)]
    for i in range(d):
        for j in range(d):
            for k in range(d):
                out[i * d + j][k * d + j] = b.rows[i][k]
    return out


def _rmul_matrix(b: BElem):
    """Matrix of c -> c*b on row-major vec coordinates."""
    d = b.d
    n = d * d
    out = [[Fraction(0)] * n for _ in range(n)]
    for i in range(d):
        for j in range(d):
            for k in range(d):
                out[i * d + j][i * d + k] = b.rows[k][j]
    return out


# ---------------------------------------------------------------------------


class LinOp:
    """A linear operator on a bimodule's total space, as a dense exact matrix.

    `side` is an optional certificate: 'l' (commutes with every R_b),
    'r' (commutes with every L_b), or None when unknown/neither.
    """

    __slots__ = ("space", "matrix", "side", "name")

    def __init__(self, space, matrix, side=None, name=""):
        self.space = space
        self.matrix = matrix
        self.side = side
        self.name = name

    def apply(self, vec):
        return mat_vec(self.matrix, vec)

    def compose(self, other) -> "LinOp":
        """self after other (matrix product self*other)."""
        side = self.side if self.side == other.side else None
        return LinOp(self.space, mat_mul(self.matrix, other.matrix), side=side)

    def __add__(self, other):
        side = self.side if self.side == other.side else None
        return LinOp(self.space, mat_add(self.matrix, other.matrix), side=side)

    def __sub__(self, other):
        side = self.side if self.side == other.side else None
        return LinOp(self.space, mat_sub(self.matrix, other.matrix), side=side)

    def scale(self, c) -> "LinOp":
        return LinOp(self.space, mat_scale(self.matrix, frac(c)), side=self.side)

    def __eq__(self, other):
        return isinstance(other, LinOp) and mat_eq(self.matrix, other.matrix)

    def __repr__(self):
        return f"LinOp({self.name or hex(id(self))}, side={self.side})"


class Bimodule:
    """A finite B-B-bimodule X = B (+) Xo with a specified B-vector state.

    Xo is a free right-B-module of rank `xo_dim`; the left action is a unital
    algebra embedding beta : M_d(Q) -> M_{m*d}(Q) acting on Xo coordinates.
    Coordinates: slot 0 holds the B-part, slots 1..m the Xo coefficients,
    each slot a row-major vec of a d x d rational matrix.
    """

    def __init__(self, d: int, xo_dim: int, beta_units=None, name="X"):
        self.d = d
        self.xo_dim = xo_dim
        self.name = name
        md = xo_dim * d
        if beta_units is None:
            # canonical block-diagonal embedding: beta(b) = diag(b, ..., b)
            beta_units = [[self._diag_embed(a, b) for b in range(d)] for a in range(d)]
        self.beta_units = beta_units
        if xo_dim:
            self._validate_beta(md)
        self.dim = d * d * (1 + xo_dim)
        self._lb_cache = {}
        self._rb_cache = {}
        self._commutant = {}

    def _diag_embed(self, a, b):
        m, d = self.xo_dim, self.d
        md = m * d
        out = [[Fraction(0)] * md for _ in range(md)]
        for blk in range(m):
            out[blk * d + a][blk * d + b] = Fraction(1)
        return out

    def _validate_beta(self, md):
        d = self.d
        one = mat_identity(md)
        total = [[Fraction(0)] * md for _ in range(md)]
        for a in range(d):
            total = mat_add(total, self.beta_units[a][a])
        if not mat_eq(total, one):
            raise ValueError("left structure is not unital")
        for a, b, c, e in itertools.product(range(d), repeat=4):
            prod = mat_mul(self.beta_units[a][b], self.beta_units[c][e])
            expect = self.beta_units[a][e] if b == c else [[Fraction(0)] * md] * md
            if not mat_eq(prod, [list(r) for r in expect]):
                raise ValueError("left structure is not an algebra homomorphism")

    # -- vectors ------------------------------------------------------------

    @property
    def xi(self):
        v = [Fraction(0)] * self.dim
        for i in range(self.d):
            v[i * self.d + i] = Fraction(1)
        return v

    def b_part(self, vec) -> BElem:
        return BElem.from_flat(self.d, vec[: self.d * self.d])

    def xo_part(self, vec):
        return vec[self.d * self.d:]

    def embed_b(self, b: BElem):
        v = [Fraction(0)] * self.dim
        v[: self.d * self.d] = b.flat()
        return v

    def beta(self, b: BElem):
        """The left-structure image of b as an (m*d) x (m*d) matrix."""
        md = self.xo_dim * self.d
        out = [[Fraction(0)] * md for _ in range(md)]
        for a in range(self.d):
            for c in range(self.d):
                x = b.rows[a][c]
                if x:
                    out = mat_add(out, mat_scale(self.beta_units[a][c], x))
        return out

    def beta_block(self, b: BElem, j: int, i: int) -> BElem:
        """beta_{ji}(b) in B: the (j,i) d-block of beta(b)."""
        bb = self.beta(b)
        d = self.d
        return BElem([[bb[j * d + r][i * d + c] for c in range(d)] for r in range(d)])

    # -- canonical operators --------------------------------------------------

    def lb(self, b: BElem) -> LinOp:
        key = b
        if key not in self._lb_cache:
            d, m = self.d, self.xo_dim
            n = self.dim
            out = [[Fraction(0)] * n for _ in range(n)]
            lm = _lmul_matrix(b)
            _paste(out, lm, 0, 0)
            if m:
                bb = self.beta(b)
                for j in range(m):
                    for i in range(m):
                        blk = BElem([[bb[j * d + r][i * d + c] for c in range(d)]
                                     for r in range(d)])
                        _paste(out, _lmul_matrix(blk), (1 + j) * d * d, (1 + i) * d * d)
            self._lb_cache[key] = LinOp(self, out, side="l", name=f"L_{b!r}")
        return self._lb_cache[key]

    def rb(self, b: BElem) -> LinOp:
        key = b
        if key not in self._rb_cache:
            d, m = self.d, self.xo_dim
            n = self.dim
            out = [[Fraction(0)] * n for _ in range(n)]
            rm = _rmul_matrix(b)
            for slot in range(1 + m):
                _paste(out, rm, slot * d * d, slot * d * d)
            self._rb_cache[key] = LinOp(self, out, side="r", name=f"R_{b!r}")
        return self._rb_cache[key]

    def one_b(self) -> BElem:
        return BElem.identity(self.d)

    # -- expectation ----------------------------------------------------------

    def expect_op(self, op) -> BElem:
        return self.b_part(op.apply(self.xi))

    def expect_product(self, ops) -> BElem:
        """E(T_1 ... T_n) = p(T_1(...(T_n xi))), exact."""
        v = self.xi
        for op in reversed(list(ops)):
            v = op.apply(v)
        return self.b_part(v)

    # -- left/right operator predicates ----------------------------------------

    def is_left_operator(self, op) -> bool:
        return all(mat_eq(mat_mul(op.matrix, self.rb(BElem.unit(self.d, a, b)).matrix),
                          mat_mul(self.rb(BElem.unit(self.d, a, b)).matrix, op.matrix))
                   for a in range(self.d) for b in range(self.d))

    def is_right_operator(self, op) -> bool:
        return all(mat_eq(mat_mul(op.matrix, self.lb(BElem.unit(self.d, a, b)).matrix),
                          mat_mul(self.lb(BElem.unit(self.d, a, b)).matrix, op.matrix))
                   for a in range(self.d) for b in range(self.d))

    # -- commutant sampling ----------------------------------------------------

    def commutant_basis(self, side: str):
        """Exact basis of L_l(X) (side='l') or L_r(X) (side='r')."""
        if side in self._commutant:
            return self._commutant[side]
        n = self.dim
        fixed = [self.rb(BElem.unit(self.d, a, b)).matrix if side == "l"
                 else self.lb(BElem.unit(self.d, a, b)).matrix
                 for a in range(self.d) for b in range(self.d)]
        rows = []
        # unknowns: T[i][j], row-major; constraint (T*F - F*T)[i][j] = 0
        for fmat in fixed:
            for i in range(n):
                for j in range(n):
                    row = [Fraction(0)] * (n * n)
                    for k in range(n):
                        row[i * n + k] += fmat[k][j]
                        row[k * n + j] -= fmat[i][k]
                    if any(row):
                        rows.append(row)
        basis = [LinOp(self, [v[i * n:(i + 1) * n] for i in range(n)], side=side)
                 for v in nullspace(rows, n * n)]
        self._commutant[side] = basis
        return basis

    def random_side_operator(self, side: str, rng: Random, name="") -> LinOp:
        basis = self.commutant_basis(side)
        n = self.dim
        out = [[Fraction(0)] * n for _ in range(n)]
        for op in basis:
            c = Fraction(rng.randint(-2, 2), rng.randint(1, 2))
            if c:
                out = mat_add(out, mat_scale(op.matrix, c))
        return LinOp(self, out, side=side, name=name)

    def random_operator(self, rng: Random, name="") -> LinOp:
        n = self.dim
        return LinOp(self, [[Fraction(rng.randint(-2, 2), rng.randint(1, 2))
                             for _ in range(n)] for _ in range(n)], side=None, name=name)

    def __repr__(self):
        return f"Bimodule({self.name}, d={self.d}, xo_dim={self.xo_dim})"


def _paste(big, small, r0, c0):
    for i, row in enumerate(small):
        br = big[r0 + i]
        for j, x in enumerate(row):
            if x:
                br[c0 + j] = x


class PairOfBFaces:
    """A pair of B-faces: families of left and right generators over one space."""

    def __init__(self, space, left_gens, right_gens, name=""):
        self.space = space
        self.left_gens = list(left_gens)
        self.right_gens = list(right_gens)
        self.name = name
        for op in self.left_gens:
            if op.side != "l":
                raise ValueError(f"left generator {op!r} lacks a left certificate")
        for op in self.right_gens:
            if op.side != "r":
                raise ValueError(f"right generator {op!r} lacks a right certificate")

    def __repr__(self):
        return (f"PairOfBFaces({self.name}, {len(self.left_gens)} left, "
                f"{len(self.right_gens)} right)")


def random_belem(d: int, rng: Random) -> BElem:
    return BElem([[Fraction(rng.randint(-2, 2), rng.randint(1, 2))
                   for _ in range(d)] for _ in range(d)])


def random_invertible(n: int, rng: Random):
    """Random exactly-invertible rational matrix (unit-triangular product)."""
    lo = mat_identity(n)
    up = mat_identity(n)
    for i in range(n):
        for j in range(i):
            lo[i][j] = Fraction(rng.randint(-1, 1))
            up[j][i] = Fraction(rng.randint(-1, 1))
    perm = list(range(n))
    rng.shuffle(perm)
    pm = [[Fraction(int(j == perm[i])) for j in range(n)] for i in range(n)]
    return mat_mul(mat_mul(lo, up), pm)


def random_bimodule(d: int, xo_dim: int, rng: Random, name="X") -> Bimodule:
    """A random bimodule: the block-diagonal left structure conjugated by a
    random invertible rational matrix, so the bimodule axioms hold exactly."""
    if xo_dim == 0:
        return Bimodule(d, 0, name=name)
    md = xo_dim * d
    s = random_invertible(md, rng)
    s_inv = mat_inv(s)
    canonical = Bimodule(d, xo_dim)
    units = [[mat_mul(mat_mul(s, canonical.beta_units[a][b]), s_inv)
              for b in range(d)] for a in range(d)]
    return Bimodule(d, xo_dim, beta_units=units, name=name)
