"""Bi-non-crossing partitions.

A side map chi assigns each position 1..n to the left or right face; chi
induces the permutation s_chi reading left positions in increasing order and
then right positions in decreasing order.  A partition pi is bi-non-crossing
for chi when s_chi^{-1} . pi is non-crossing, and BNC(chi) inherits its
lattice structure from NC(n) through that transport.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

LEFT = "l"
RIGHT = "r"

ENUM_LIMIT = 10  # Catalan(10) = 16796 keeps exhaustive sweeps fast
CATALAN = [1, 1, 2, 5, 14, 42, 132, 429, 1430, 4862, 16796, 58786, 208012]


class LimitError(ValueError):
    pass


class SideMap:
    """chi : {1..n} -> {l, r}; the empty map (n = 0) is allowed."""

    __slots__ = ("sides",)

    def __init__(self, sides):
        sides = tuple(sides)
        if any(s not in (LEFT, RIGHT) for s in sides):
            raise ValueError(f"sides must be '{LEFT}'/'{RIGHT}': {sides!r}")
        self.sides = sides

    @staticmethod
    def parse(text: str) -> "SideMap":
        return SideMap(tuple(text))

    @property
    def n(self):
        return len(self.sides)

    def side(self, k: int) -> str:
        """Side of position k (1-based)."""
        return self.sides[k - 1]

    def restrict(self, subset) -> "SideMap":
        return SideMap(tuple(self.sides[k - 1] for k in sorted(subset)))

    def drop(self, q: int) -> "SideMap":
        """chi restricted to {1..n} minus {q}."""
        return SideMap(self.sides[: q - 1] + self.sides[q:])

    def lefts(self):
        return [k for k in range(1, self.n + 1) if self.sides[k - 1] == LEFT]

    def rights(self):
        return [k for k in range(1, self.n + 1) if self.sides[k - 1] == RIGHT]

    def __eq__(self, other):
        return isinstance(other, SideMap) and self.sides == other.sides

    def __hash__(self):
        return hash(self.sides)

    def __repr__(self):
        return "".join(self.sides) or "(empty)"


class ShadingMap:
    """eps : {1..n} -> K; compared through the partition eps^{-1}(K) it induces."""

    __slots__ = ("shades",)

    def __init__(self, shades):
        self.shades = tuple(shades)

    @staticmethod
    def parse(text: str) -> "ShadingMap":
        return ShadingMap(tuple(x.strip() for x in text.split(",")) if text else ())

    @property
    def n(self):
        return len(self.shades)

    def shade(self, k: int):
        return self.shades[k - 1]

    def is_constant(self) -> bool:
        return len(set(self.shades)) <= 1

    def classes(self):
        """The induced partition of {1..n}, blocks sorted by minimum."""
        groups = {}
        for k, s in enumerate(self.shades, start=1):
            groups.setdefault(s, []).append(k)
        return sorted((tuple(v) for v in groups.values()), key=lambda b: b[0])

    def restrict(self, subset) -> "ShadingMap":
        return ShadingMap(tuple(self.shades[k - 1] for k in sorted(subset)))

    def __eq__(self, other):
        return isinstance(other, ShadingMap) and self.shades == other.shades

    def __hash__(self):
        return hash(self.shades)

    def __repr__(self):
        return ",".join(str(s) for s in self.shades)


class ChiPermutation:
    """s_chi as the image sequence s(1..n), with its inverse and the
    induced total order a <_chi b iff s^{-1}(a) < s^{-1}(b)."""

    __slots__ = ("images", "inverse")

    def __init__(self, images):
        self.images = tuple(images)
        n = len(self.images)
        if sorted(self.images) != list(range(1, n + 1)):
            raise ValueError("not a permutation of 1..n")
        inv = [0] * (n + 1)
        for k, v in enumerate(self.images, start=1):
            inv[v] = k
        self.inverse = tuple(inv[1:])

    def apply(self, k: int) -> int:
        return self.images[k - 1]

    def apply_inv(self, k: int) -> int:
        return self.inverse[k - 1]

    def chi_less(self, a: int, b: int) -> bool:
        return self.apply_inv(a) < self.apply_inv(b)

    def sort_chi(self, elems):
        return sorted(elems, key=self.apply_inv)

    def __eq__(self, other):
        return isinstance(other, ChiPermutation) and self.images == other.images

    def __hash__(self):
        return hash(self.images)

    def __repr__(self):
        return f"s{list(self.images)}"


def side_permutation(chi: SideMap) -> ChiPermutation:
    """Left nodes in increasing order, then right nodes in decreasing order."""
    return ChiPermutation(chi.lefts() + list(reversed(chi.rights())))


# ---------------------------------------------------------------------------
# Set partitions in canonical form.


def canonical_blocks(blocks):
    return tuple(sorted((tuple(sorted(b)) for b in blocks), key=lambda b: b[0]))


class SetPartition:
    """A partition of {1..n}; canonical form sorts blocks by minimum."""

    __slots__ = ("n", "blocks", "_owner")

    def __init__(self, n: int, blocks):
        blocks = canonical_blocks(blocks)
        seen = sorted(x for b in blocks for x in b)
        if seen != list(range(1, n + 1)):
            raise ValueError(f"blocks {blocks} do not partition 1..{n}")
        self.n = n
        self.blocks = blocks
        self._owner = None

    @staticmethod
    def parse(text: str, n=None) -> "SetPartition":
        blocks = [[int(x) for x in part.split(",")] for part in text.split("|")] if text else []
        size = max((x for b in blocks for x in b), default=0)
        return SetPartition(n if n is not None else size, blocks)

    def owner(self):
        """element -> block index lookup, cached."""
        if self._owner is None:
            owner = {}
            for i, b in enumerate(self.blocks):
                for x in b:
                    owner[x] = i
            self._owner = owner
        return self._owner

    def same_block(self, a: int, b: int) -> bool:
        o = self.owner()
        return o[a] == o[b]

    def block_of(self, k: int):
        return self.blocks[self.owner()[k]]

    @property
    def size(self):
        """|pi|, the number of blocks."""
        return len(self.blocks)

    def refines(self, other: "SetPartition") -> bool:
        if other.n != self.n:
            raise ValueError("arity mismatch")
        o = other.owner()
        return all(len({o[x] for x in b}) == 1 for b in self.blocks)

    def meet(self, other: "SetPartition") -> "SetPartition":
        o = other.owner()
        blocks = []
        for b in self.blocks:
            groups = {}
            for x in b:
                groups.setdefault(o[x], []).append(x)
            blocks.extend(groups.values())
        return SetPartition(self.n, blocks)

    def join_p(self, other: "SetPartition") -> "SetPartition":
        """Join in the full partition lattice P(n) (union-find closure)."""
        parent = list(range(self.n + 1))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for b in itertools.chain(self.blocks, other.blocks):
            for x in b[1:]:
                parent[find(x)] = find(b[0])
        groups = {}
        for x in range(1, self.n + 1):
            groups.setdefault(find(x), []).append(x)
        return SetPartition(self.n, groups.values())

    def is_noncrossing(self) -> bool:
        for i in range(len(self.blocks)):
            for j in range(i + 1, len(self.blocks)):
                if _blocks_cross(self.blocks[i], self.blocks[j]):
                    return False
        return True

    def relabel(self, mapping) -> "SetPartition":
        blocks = [[mapping[x] for x in b] for b in self.blocks]
        return SetPartition(len(mapping), blocks)

    def __eq__(self, other):
        return (isinstance(other, SetPartition) and self.n == other.n
                and self.blocks == other.blocks)

    def __hash__(self):
        return hash((self.n, self.blocks))

    def __repr__(self):
        return "|".join(",".join(str(x) for x in b) for b in self.blocks) or "(empty)"


# ---------------------------------------------------------------------------
# NC(n): enumeration, Kreweras complement, join.


@lru_cache(maxsize=None)
def enumerate_nc(n: int):
    """All non-crossing partitions of {1..n}, canonical, lexicographic order."""
    if n > ENUM_LIMIT + 2:
        raise LimitError(
            f"n = {n} exceeds the enumeration limit; NC(n) grows like the "
            f"Catalan numbers (Catalan({n}) = {_catalan(n)})")
    return tuple(sorted(_nc_blocks(tuple(range(1, n + 1))),
                        key=lambda bs: bs))


def _catalan(n):
    if n < len(CATALAN):
        return CATALAN[n]
    c = 1
    for i in range(n):
        c = c * 2 * (2 * i + 1) // (i + 2)
    return c


def _nc_blocks(elems):
    """Non-crossing partitions of an increasing tuple, as canonical blocks.

    The block containing the first element splits the remaining elements into
    independent gaps, each partitioned non-crossingly on its own.
    """
    if not elems:
        return [()]
    first, rest = elems[0], elems[1:]
    out = []
    for mask in itertools.chain.from_iterable(
            itertools.combinations(rest, k) for k in range(len(rest) + 1)):
        block = (first,) + mask
        chosen = set(mask)
        segments = [[]]
        for x in rest:
            if x in chosen:
                segments.append([])
            else:
                segments[-1].append(x)
        choices = [_nc_blocks(tuple(seg)) for seg in segments]
        for combo in itertools.product(*choices):
            blocks = [block]
            for part in combo:
                blocks.extend(part)
            out.append(canonical_blocks(blocks))
    return out


def nc_kreweras_blocks(blocks, n):
    """Kreweras complement of a non-crossing partition, via the cycle
    identity perm(K(pi)) = perm(pi)^{-1} composed with the full cycle."""
    succ = {}
    for b in blocks:
        for i, x in enumerate(b):
            succ[x] = b[(i + 1) % len(b)]
    inv = {v: k for k, v in succ.items()}
    out = []
    seen = set()
    for start in range(1, n + 1):
        if start in seen:
            continue
        cyc = []
        x = start
        while x not in seen:
            seen.add(x)
            cyc.append(x)
            x = inv[x % n + 1]
        out.append(cyc)
    return canonical_blocks(out)


def nc_join_blocks(b1, b2, n):
    """Join in NC(n): the P(n)-join followed by merging crossing blocks."""
    p = SetPartition(n, b1).join_p(SetPartition(n, b2))
    blocks = [set(b) for b in p.blocks]
    merged = True
    while merged:
        merged = False
        for i in range(len(blocks)):
            for j in range(i + 1, len(blocks)):
                if _blocks_cross(blocks[i], blocks[j]):
                    blocks[i] |= blocks[j]
                    del blocks[j]
                    merged = True
                    break
            if merged:
                break
    return canonical_blocks(blocks)


def _blocks_cross(x, y):
    """Two disjoint blocks cross iff their merged tag sequence alternates
    at least twice (pattern x..y..x..y)."""
    pts = [(v, 0) for v in x] + [(v, 1) for v in y]
    pts.sort()
    alternations = 1
    prev = pts[0][1]
    for _, t in pts[1:]:
        if t != prev:
            alternations += 1
            prev = t
    return alternations >= 4


# ---------------------------------------------------------------------------
# BNCPartition.


class BNCPartition:
    """A bi-non-crossing partition: a set partition plus its side map."""

    __slots__ = ("partition", "chi", "_perm")

    def __init__(self, partition: SetPartition, chi: SideMap, _trusted=False):
        if partition.n != chi.n:
            raise ValueError("arity mismatch between partition and side map")
        self.partition = partition
        self.chi = chi
        self._perm = None
        if not _trusted and not is_bi_noncrossing(partition, chi):
            raise ValueError(f"{partition} is not bi-non-crossing for chi={chi}")

    @staticmethod
    def parse(pi_text: str, chi: SideMap) -> "BNCPartition":
        return BNCPartition(SetPartition.parse(pi_text, chi.n), chi)

    @property
    def n(self):
        return self.chi.n

    @property
    def blocks(self):
        return self.partition.blocks

    @property
    def size(self):
        return self.partition.size

    def perm(self) -> ChiPermutation:
        if self._perm is None:
            self._perm = side_permutation(self.chi)
        return self._perm

    def to_nc_blocks(self):
        s = self.perm()
        return canonical_blocks([[s.apply_inv(x) for x in b] for b in self.blocks])

    def same_block(self, a, b):
        return self.partition.same_block(a, b)

    # -- lattice ------------------------------------------------------------

    def refines(self, other: "BNCPartition") -> bool:
        self._check(other)
        return self.partition.refines(other.partition)

    def _check(self, other):
        if other.chi != self.chi:
            raise ValueError("side-map mismatch")

    def meet(self, other: "BNCPartition") -> "BNCPartition":
        self._check(other)
        return BNCPartition(self.partition.meet(other.partition), self.chi, _trusted=True)

    def join(self, other: "BNCPartition") -> "BNCPartition":
        """Transport by s_chi^{-1}, join in NC(n), transport back."""
        self._check(other)
        joined = nc_join_blocks(self.to_nc_blocks(), other.to_nc_blocks(), self.n)
        return from_nc_blocks(joined, self.chi)

    def kreweras(self) -> "BNCPartition":
        k = nc_kreweras_blocks(self.to_nc_blocks(), self.n)
        return from_nc_blocks(k, self.chi)

    # -- structural operators -------------------------------------------------

    def restrict(self, subset) -> "BNCPartition":
        """pi|_S for S a union of blocks, relabeled to 1..|S|."""
        subset = set(subset)
        for b in self.blocks:
            inside = subset.intersection(b)
            if inside and len(inside) != len(b):
                raise ValueError(f"{sorted(subset)} is not a union of blocks of {self}")
        order = sorted(subset)
        mapping = {x: i + 1 for i, x in enumerate(order)}
        blocks = [[mapping[x] for x in b] for b in self.blocks if b[0] in subset]
        return BNCPartition(SetPartition(len(order), blocks),
                            self.chi.restrict(order), _trusted=True)

    def collapse(self, q: int) -> "BNCPartition":
        """pi|_{q=q+1}: identify q and q+1, drop q, relabel."""
        if not 1 <= q < self.n:
            raise ValueError(f"q = {q} out of range 1..{self.n - 1}")
        o = self.partition.owner()
        blocks = [set(b) for b in self.blocks]
        if o[q] != o[q + 1]:
            blocks[o[q]] |= blocks[o[q + 1]]
            del blocks[o[q + 1]]
        i = next(i for i, b in enumerate(blocks) if q in b)
        blocks[i].discard(q)
        if not blocks[i]:
            del blocks[i]
        mapping = {x: (x if x < q else x - 1) for x in range(1, self.n + 1) if x != q}
        relabeled = [[mapping[x] for x in b] for b in blocks]
        return BNCPartition(SetPartition(self.n - 1, relabeled), self.chi.drop(q))

    def __eq__(self, other):
        return (isinstance(other, BNCPartition) and self.chi == other.chi
                and self.partition == other.partition)

    def __hash__(self):
        return hash((self.partition, self.chi))

    def __repr__(self):
        return repr(self.partition)


def is_bi_noncrossing(pi: SetPartition, chi: SideMap) -> bool:
    if pi.n != chi.n:
        raise ValueError("arity mismatch")
    s = side_permutation(chi)
    transported = SetPartition(pi.n, [[s.apply_inv(x) for x in b] for b in pi.blocks])
    return transported.is_noncrossing()


def from_nc_blocks(nc_blocks, chi: SideMap) -> BNCPartition:
    s = side_permutation(chi)
    blocks = [[s.apply(x) for x in b] for b in nc_blocks]
    return BNCPartition(SetPartition(chi.n, blocks), chi, _trusted=True)


def zero_bnc(chi: SideMap) -> BNCPartition:
    return BNCPartition(SetPartition(chi.n, [[k] for k in range(1, chi.n + 1)]),
                        chi, _trusted=True)


def one_bnc(chi: SideMap) -> BNCPartition:
    blocks = [list(range(1, chi.n + 1))] if chi.n else []
    return BNCPartition(SetPartition(chi.n, blocks), chi, _trusted=True)


def enumerate_bnc(chi: SideMap, limit: int = ENUM_LIMIT):
    """All of BNC(chi) as the s_chi-transport of NC(n), deterministic order."""
    if chi.n > limit:
        raise LimitError(
            f"n = {chi.n} exceeds the enumeration limit {limit}; |BNC(chi)| "
            f"grows like the Catalan numbers (Catalan({chi.n}) = {_catalan(chi.n)})")
    out = [from_nc_blocks(bs, chi) for bs in enumerate_nc(chi.n)]
    out.sort(key=lambda p: p.blocks)
    return out


def all_set_partitions(n: int):
    """Every partition of {1..n} (restricted growth strings)."""
    if n == 0:
        yield SetPartition(0, [])
        return
    labels = [0] * n

    def rec(i, mx):
        if i == n:
            groups = {}
            for k, lab in enumerate(labels, start=1):
                groups.setdefault(lab, []).append(k)
            yield SetPartition(n, groups.values())
            return
        for lab in range(mx + 2):
            labels[i] = lab
            yield from rec(i + 1, max(mx, lab))

    yield from rec(0, -1)


# ---------------------------------------------------------------------------
# Lateral refinement and the hat embedding.


def is_lateral_refinement(pi: BNCPartition, sigma: BNCPartition) -> bool:
    """pi <=_lat sigma: pi refines sigma and, inside every sigma-block, the
    pi-blocks are consecutive runs of that block in natural order (the only
    splits a spine cut between ribs can produce)."""
    if pi.chi != sigma.chi:
        raise ValueError("side-map mismatch")
    if not pi.refines(sigma):
        return False
    owner = pi.partition.owner()
    for w in sigma.blocks:
        runs = []
        for x in w:
            if runs and owner[x] == runs[-1]:
                continue
            runs.append(owner[x])
        if len(runs) != len(set(runs)):
            return False
    return True


def lateral_refinements(sigma: BNCPartition):
    """All pi <=_lat sigma, by cutting each block independently into runs."""
    per_block = []
    for w in sigma.blocks:
        options = []
        gaps = len(w) - 1
        for mask in range(1 << gaps):
            runs = [[w[0]]]
            for i in range(gaps):
                if mask >> i & 1:
                    runs.append([])
                runs[-1].append(w[i + 1])
            options.append(runs)
        per_block.append(options)
    for combo in itertools.product(*per_block):
        blocks = [run for runs in combo for run in runs]
        yield BNCPartition(SetPartition(sigma.n, blocks), sigma.chi, _trusted=True)


def hat_embed(pi: BNCPartition, groups) -> BNCPartition:
    """The embedding of BNC(chi) into BNC(chi-hat): node p becomes the run
    k(p-1)+1 .. k(p).  `groups` is the sequence k(1) < ... < k(m) = n."""
    groups = list(groups)
    m = pi.n
    if len(groups) != m or any(not isinstance(k, int) for k in groups):
        raise ValueError("groups must list k(1)..k(m)")
    bounds = [0] + groups
    if any(a >= b for a, b in zip(bounds, bounds[1:])):
        raise ValueError(f"groups {groups} must be strictly increasing from k(0)=0")
    n = groups[-1]
    expanded_chi = []
    for p in range(1, m + 1):
        expanded_chi.extend([pi.chi.side(p)] * (bounds[p] - bounds[p - 1]))
    blocks = [[x for p in b for x in range(bounds[p - 1] + 1, bounds[p] + 1)]
              for b in pi.blocks]
    return BNCPartition(SetPartition(n, blocks), SideMap(expanded_chi))


def hat_zero(chi: SideMap, groups) -> BNCPartition:
    """hat(0_chi): blocks are exactly the groups."""
    return hat_embed(zero_bnc(chi), groups)


def open_spine_word(strings, chi: SideMap, upto: int):
    """Replay a diagram bottom-up and return the left-to-right word of open
    spines just before position `upto` is placed.

    `strings` holds (nodes, reaches_top) pairs; a string opens at its bottom
    node (left nodes slot in at the left end, right nodes at the right end)
    and closes at its top node unless it reaches the top of the diagram.
    """
    lookup = {}
    for s, top in strings:
        s = tuple(sorted(s))
        for x in s:
            lookup[x] = (s, top)
    word = []
    for k in sorted(lookup, reverse=True):
        if k == upto:
            return word
        s, top = lookup[k]
        if k == max(s) and (len(s) > 1 or top):
            word.insert(0, s) if chi.side(k) == LEFT else word.append(s)
        if k == min(s) and not top and s in word:
            word.remove(s)
    return word
