"""The incidence algebra on intervals of BNC(chi): delta, zeta, Moebius,
convolution, and partial Moebius inversion.

Two independent Moebius implementations ship: the fast path multiplies
full-interval values (-1)^(k-1) Catalan(k-1) over the canonical NC interval
factorization, and the oracle inverts zeta recursively.  They are
differential-tested against each other.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from .bnc import (BNCPartition, SideMap, _catalan, enumerate_bnc,
                  nc_kreweras_blocks, canonical_blocks, zero_bnc, one_bnc)


class BNCLattice:
    """BNC(chi) with cached order relations, for interval sums."""

    def __init__(self, chi: SideMap):
        self.chi = chi
        self.parts = enumerate_bnc(chi)
        self.index = {p.blocks: i for i, p in enumerate(self.parts)}
        n = len(self.parts)
        self.above = [0] * n  # bitmask of coarser-or-equal partitions
        for i, p in enumerate(self.parts):
            for j, q in enumerate(self.parts):
                if p.refines(q):
                    self.above[i] |= 1 << j

    def idx(self, p: BNCPartition) -> int:
        try:
            return self.index[p.blocks]
        except KeyError:
            raise ValueError(f"{p} is not in BNC({self.chi})") from None

    def leq(self, i: int, j: int) -> bool:
        return bool(self.above[i] >> j & 1)

    def interval(self, i: int, j: int):
        """Indices of {rho : sigma_i <= rho <= pi_j}."""
        mask = self.above[i]
        return [k for k in range(len(self.parts)) if (mask >> k & 1) and self.leq(k, j)]

    def comparable_pairs(self):
        for i in range(len(self.parts)):
            mask = self.above[i]
            for j in range(len(self.parts)):
                if mask >> j & 1:
                    yield i, j


@lru_cache(maxsize=64)
def lattice(chi: SideMap) -> BNCLattice:
    return BNCLattice(chi)


def delta(sigma: BNCPartition, pi: BNCPartition) -> Fraction:
    if sigma.chi != pi.chi:
        raise ValueError("side-map mismatch")
    return Fraction(int(sigma == pi))


def zeta(sigma: BNCPartition, pi: BNCPartition) -> Fraction:
    if sigma.chi != pi.chi:
        raise ValueError("side-map mismatch")
    return Fraction(int(sigma.refines(pi)))


def _mu_full(k: int) -> int:
    """mu_NC(0_k, 1_k) = (-1)^(k-1) Catalan(k-1)."""
    return (-1) ** (k - 1) * _catalan(k - 1)


def _mu_nc_to_one(tau_blocks, m: int) -> int:
    """mu_NC(tau, 1_m) through the Kreweras complement: the interval [tau, 1_m]
    factors into full intervals indexed by the blocks of K_NC(tau)."""
    if m == 0:
        return 1
    relabel = {x: i + 1 for i, x in enumerate(sorted(y for b in tau_blocks for y in b))}
    tau = canonical_blocks([[relabel[x] for x in b] for b in tau_blocks])
    out = 1
    for f in nc_kreweras_blocks(tau, m):
        out *= _mu_full(len(f))
    return out


def mobius_bnc(sigma: BNCPartition, pi: BNCPartition) -> Fraction:
    """mu_BNC(sigma, pi) = mu_NC(s^-1 sigma, s^-1 pi), by the product formula."""
    if sigma.chi != pi.chi:
        raise ValueError("side-map mismatch")
    if not sigma.refines(pi):
        raise ValueError(f"{sigma} does not refine {pi}")
    sig_nc = sigma.to_nc_blocks()
    pi_nc = pi.to_nc_blocks()
    owner = {x: i for i, b in enumerate(pi_nc) for x in b}
    out = 1
    for i, b in enumerate(pi_nc):
        inside = [blk for blk in sig_nc if owner[blk[0]] == i]
        out *= _mu_nc_to_one(inside, len(b))
    return Fraction(out)


def mobius_recursive(sigma: BNCPartition, pi: BNCPartition) -> Fraction:
    """Independent oracle: mu(sigma, pi) = -sum_{sigma <= rho < pi} mu(sigma, rho)."""
    if not sigma.refines(pi):
        raise ValueError(f"{sigma} does not refine {pi}")
    lat = lattice(sigma.chi)
    return _mob_rec(lat, lat.idx(sigma), lat.idx(pi))


def _mob_rec(lat: BNCLattice, i: int, j: int, memo=None) -> Fraction:
    if memo is None:
        memo = {}
    if (i, j) in memo:
        return memo[(i, j)]
    if i == j:
        return Fraction(1)
    total = Fraction(0)
    for k in lat.interval(i, j):
        if k != j:
            total += _mob_rec(lat, i, k, memo)
    memo[(i, j)] = -total
    return -total


class IntervalFunction:
    """A scalar function on comparable pairs of BNC(chi), dense over the
    lattice of one fixed chi.  Non-comparable pairs are implicitly zero."""

    def __init__(self, chi: SideMap, table=None):
        self.chi = chi
        self.lat = lattice(chi)
        self.table = {}
        if table:
            for (s, p), v in table.items():
                self[s, p] = v

    def __getitem__(self, pair):
        s, p = pair
        return self.table.get((self.lat.idx(s), self.lat.idx(p)), Fraction(0))

    def __setitem__(self, pair, value):
        s, p = pair
        i, j = self.lat.idx(s), self.lat.idx(p)
        if not self.lat.leq(i, j):
            raise ValueError(f"{s} does not refine {p}; table entries need comparable pairs")
        self.table[(i, j)] = Fraction(value)

    def get_idx(self, i, j):
        return self.table.get((i, j), Fraction(0))

    @staticmethod
    def delta_fn(chi: SideMap) -> "IntervalFunction":
        f = IntervalFunction(chi)
        for i in range(len(f.lat.parts)):
            f.table[(i, i)] = Fraction(1)
        return f

    @staticmethod
    def zeta_fn(chi: SideMap) -> "IntervalFunction":
        f = IntervalFunction(chi)
        for i, j in f.lat.comparable_pairs():
            f.table[(i, j)] = Fraction(1)
        return f

    @staticmethod
    def mobius_fn(chi: SideMap) -> "IntervalFunction":
        f = IntervalFunction(chi)
        lat = f.lat
        for i, j in lat.comparable_pairs():
            f.table[(i, j)] = mobius_bnc(lat.parts[i], lat.parts[j])
        return f

    def convolve(self, other: "IntervalFunction") -> "IntervalFunction":
        """(f*g)(pi, sigma) = sum over pi <= rho <= sigma of f(pi,rho) g(rho,sigma)."""
        if other.chi != self.chi:
            raise ValueError("side-map mismatch")
        out = IntervalFunction(self.chi)
        lat = self.lat
        for i, j in lat.comparable_pairs():
            total = Fraction(0)
            for k in lat.interval(i, j):
                total += self.get_idx(i, k) * other.get_idx(k, j)
            if total:
                out.table[(i, j)] = total
        return out

    def equals(self, other: "IntervalFunction") -> bool:
        keys = set(self.table) | set(other.table)
        return all(self.table.get(k, Fraction(0)) == other.table.get(k, Fraction(0))
                   for k in keys)


def partial_mobius_inversion_check(f, g, sigma: BNCPartition, pi: BNCPartition) -> bool:
    """Given tables f, g : BNC(chi) -> Q with f(pi) = sum_{rho <= pi} g(rho),
    verify  sum_{sigma<=tau<=pi} f(tau) mu(tau,pi) = sum_{omega v sigma = pi} g(omega).

    Raises if the summation precondition fails on any partition.
    """
    chi = sigma.chi
    if pi.chi != chi:
        raise ValueError("side-map mismatch")
    if not sigma.refines(pi):
        raise ValueError(f"{sigma} does not refine {pi}")
    lat = lattice(chi)

    def fval(p):
        return Fraction(f[p.blocks]) if not callable(f) else Fraction(f(p))

    def gval(p):
        return Fraction(g[p.blocks]) if not callable(g) else Fraction(g(p))

    for p in lat.parts:
        total = sum((gval(q) for q in lat.parts if q.refines(p)), Fraction(0))
        if fval(p) != total:
            raise ValueError(f"precondition f = g * zeta fails at {p}")
    lhs = sum((fval(lat.parts[k]) * mobius_bnc(lat.parts[k], pi)
               for k in lat.interval(lat.idx(sigma), lat.idx(pi))), Fraction(0))
    rhs = sum((gval(omega) for omega in lat.parts if omega.join(sigma) == pi),
              Fraction(0))
    return lhs == rhs


def interval_coefficient(pi: BNCPartition, eps_classes, lat: BNCLattice = None) -> Fraction:
    """sum of mu(pi, sigma) over sigma in BNC(chi) with pi <= sigma <= eps,
    where eps is given by its induced shading classes.  Zero when pi !<= eps."""
    lat = lat or lattice(pi.chi)
    owner = {}
    for i, cls in enumerate(eps_classes):
        for x in cls:
            owner[x] = i
    if any(len({owner[x] for x in b}) != 1 for b in pi.blocks):
        return Fraction(0)
    i = lat.idx(pi)
    total = Fraction(0)
    for j in range(len(lat.parts)):
        if lat.leq(i, j):
            sig = lat.parts[j]
            if all(len({owner[x] for x in b}) == 1 for b in sig.blocks):
                total += mobius_bnc(pi, sig)
    return total
