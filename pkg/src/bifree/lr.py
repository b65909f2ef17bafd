"""Shaded LR diagrams: the top-prepend recursion, strata by strings reaching
the top, lateral refinement by spine cuts, projection of the bottom stratum
onto bi-non-crossing partitions, and the two-sums identity.

A diagram is identified by its strings (node sets with a reaches-top flag);
the left-to-right order of the top strings is reconstructed by replaying the
recursion, so cut history never distinguishes equal pictures.
"""

from __future__ import annotations

import itertools

from .bnc import (BNCPartition, SetPartition, ShadingMap, SideMap, LimitError,
                  is_lateral_refinement, zero_bnc)
from .incidence import lattice, mobius_bnc

LR_LIMIT = 12


class InvalidDiagram(ValueError):
    pass


class LRDiagram:
    """Strings are disjoint monochromatic node sets; `tops` flags the strings
    whose spine reaches the top of the diagram."""

    __slots__ = ("chi", "eps", "strings", "tops", "_word")

    def __init__(self, chi: SideMap, eps: ShadingMap, strings, tops):
        if eps.n != chi.n:
            raise ValueError("side map and shading must have equal arity")
        order = sorted(range(len(strings)), key=lambda i: strings[i][0])
        self.chi = chi
        self.eps = eps
        self.strings = tuple(tuple(strings[i]) for i in order)
        self.tops = tuple(bool(tops[i]) for i in order)
        self._word = None
        seen = sorted(x for s in self.strings for x in s)
        if seen != list(range(1, chi.n + 1)):
            raise InvalidDiagram("strings must partition the node set")
        for s in self.strings:
            if len({eps.shade(x) for x in s}) > 1:
                raise InvalidDiagram(f"string {s} is not monochromatic")

    @property
    def n(self):
        return self.chi.n

    def stratum_index(self) -> int:
        return sum(self.tops)

    def string_of(self, k: int):
        for s, top in zip(self.strings, self.tops):
            if k in s:
                return s, top
        raise KeyError(k)

    def key(self):
        return (self.chi.sides, self.eps.shades, self.strings, self.tops)

    def __eq__(self, other):
        return isinstance(other, LRDiagram) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        body = " ".join(
            ",".join(str(x) for x in s) + ("^" if top else "")
            for s, top in zip(self.strings, self.tops))
        return f"<LR {body or 'empty'}>"

    # -- geometry reconstruction ---------------------------------------------

    def word_history(self):
        """Replay the construction bottom-up.  Returns (final_word, before)
        where before[k] is the left-to-right tuple of open strings just before
        node k is placed.  Raises InvalidDiagram when a node would join a
        string it cannot reach without crossing."""
        if self._word is not None:
            return self._word
        word = []
        before = {}
        for k in range(self.n, 0, -1):
            before[k] = tuple(word)
            s, top = self.string_of(k)
            side = self.chi.side(k)
            if k < max(s):
                # k joins the open string started below
                if s not in word:
                    raise InvalidDiagram(f"string {s} closed before node {k} joined")
                edge = word[0] if side == "l" else word[-1]
                if edge != s:
                    raise InvalidDiagram(
                        f"node {k} cannot reach string {s} past {edge}")
                if k == min(s) and not top:
                    word.remove(s)
            else:
                if len(s) > 1 or top:
                    if side == "l":
                        word.insert(0, s)
                    else:
                        word.append(s)
                if k == min(s) and not top and s in word:
                    word.remove(s)
        self._word = (tuple(word), before)
        return self._word

    def top_order(self):
        """Top strings in left-to-right spine order."""
        return self.word_history()[0]


def enumerate_lr(chi: SideMap, eps: ShadingMap, limit: int = LR_LIMIT):
    """All 2^n diagrams, built bottom-up: each new top node connects to the
    reachable same-shade top string when one exists, then chooses whether to
    extend to the new top."""
    if eps.n != chi.n:
        raise ValueError("side map and shading must have equal arity")
    if chi.n > limit:
        raise LimitError(f"n = {chi.n} exceeds the LR enumeration limit {limit} "
                         f"(|LR| = 2^n)")
    n = chi.n
    out = []
    current = [{"word": [], "strings": {}}]  # word: open string ids, l-to-r
    for k in range(n, 0, -1):
        side = chi.side(k)
        shade = eps.shade(k)
        nxt = []
        for st in current:
            word, strings = st["word"], st["strings"]
            edge = None
            if word:
                eid = word[0] if side == "l" else word[-1]
                if eps.shade(strings[eid][0]) == shade:
                    edge = eid
            for extend in (True, False):
                w = list(word)
                s = {i: list(v) for i, v in strings.items()}
                if edge is not None:
                    s[edge].append(k)
                    if not extend:
                        w.remove(edge)
                else:
                    new_id = len(s)  # ids are never deleted, so this is fresh
                    s[new_id] = [k]
                    if extend:
                        w.insert(0, new_id) if side == "l" else w.append(new_id)
                nxt.append({"word": w, "strings": s})
        current = nxt
    for st in current:
        open_ids = set(st["word"])
        strings = [tuple(sorted(v)) for v in st["strings"].values()]
        tops = [i in open_ids for i in st["strings"]]
        out.append(LRDiagram(chi, eps, strings, tops))
    out.sort(key=lambda d: (d.strings, d.tops))
    assert len(set(out)) == len(out) == 2 ** n
    return out


def stratum(diagrams, k: int):
    return [d for d in diagrams if d.stratum_index() == k]


def lr0_to_partition(d: LRDiagram) -> BNCPartition:
    """Strings become blocks; only defined on the bottom stratum."""
    if d.stratum_index() != 0:
        raise ValueError(f"{d!r} has strings reaching the top")
    return BNCPartition(SetPartition(d.n, [list(s) for s in d.strings]), d.chi)


def diagram_of_partition(pi: BNCPartition, eps: ShadingMap) -> LRDiagram:
    """The fully-cut picture of a partition (every string terminated)."""
    return LRDiagram(pi.chi, eps, [list(b) for b in pi.blocks],
                     [False] * len(pi.blocks))


def single_cuts(d: LRDiagram):
    """Diagrams obtained by one lateral cut: split one string between two
    consecutive ribs; the lower part no longer reaches the top."""
    for idx, (s, top) in enumerate(zip(d.strings, d.tops)):
        for cut in range(1, len(s)):
            strings = list(d.strings)
            tops = list(d.tops)
            upper, lower = s[:cut], s[cut:]
            strings[idx] = upper
            tops[idx] = top
            strings.append(lower)
            tops.append(False)
            yield LRDiagram(d.chi, d.eps, strings, tops)


def lateral_closure(diagrams):
    """Closure of the given diagrams under lateral cuts, deduplicated,
    deterministic order."""
    seen = set(diagrams)
    frontier = list(diagrams)
    while frontier:
        nxt = []
        for d in frontier:
            for c in single_cuts(d):
                if c not in seen:
                    seen.add(c)
                    nxt.append(c)
        frontier = nxt
    out = sorted(seen, key=lambda d: (d.strings, d.tops))
    return out


def diagram_geq_lat(coarse: LRDiagram, fine: LRDiagram) -> bool:
    """fine <=_lat coarse: every coarse string splits into consecutive runs,
    the topmost run keeping the flag and the rest losing it."""
    if (coarse.chi, coarse.eps) != (fine.chi, fine.eps):
        raise ValueError("diagrams live over different (chi, eps)")
    fine_of = {}
    for i, s in enumerate(fine.strings):
        for x in s:
            fine_of[x] = i
    for s, top in zip(coarse.strings, coarse.tops):
        runs = []
        for x in s:
            if runs and fine_of[x] == runs[-1]:
                continue
            runs.append(fine_of[x])
        if len(runs) != len(set(runs)):
            return False
        covered = [x for i in runs for x in fine.strings[i]]
        if sorted(covered) != list(s):
            return False
        for pos, i in enumerate(runs):
            expected_top = top if pos == 0 else False
            if fine.tops[i] != expected_top:
                return False
    return True


def two_sums_check(pi: BNCPartition, eps: ShadingMap):
    """Both sides of the identity
    sum over sigma in LR_0 laterally coarsening pi of (-1)^{|pi|-|sigma|}
      = sum over pi <= sigma <= eps of mu_BNC(pi, sigma).
    Returns (lhs, rhs, equal)."""
    chi = pi.chi
    classes = eps.classes()
    owner = {x: i for i, cls in enumerate(classes) for x in cls}
    if any(len({owner[x] for x in b}) != 1 for b in pi.blocks):
        raise ValueError(f"{pi} does not refine the shading {eps}")
    lhs = 0
    for d in stratum(enumerate_lr(chi, eps), 0):
        sigma = lr0_to_partition(d)
        if is_lateral_refinement(pi, sigma):
            lhs += (-1) ** (pi.size - sigma.size)
    rhs = 0
    lat = lattice(chi)
    i = lat.idx(pi)
    for j in range(len(lat.parts)):
        if lat.leq(i, j):
            sig = lat.parts[j]
            if all(len({owner[x] for x in b}) == 1 for b in sig.blocks):
                rhs += int(mobius_bnc(pi, sig))
    return lhs, rhs, lhs == rhs


def bnc_leq_eps(pi: BNCPartition, eps: ShadingMap) -> bool:
    owner = {x: i for i, cls in enumerate(eps.classes()) for x in cls}
    return all(len({owner[x] for x in b}) == 1 for b in pi.blocks)
