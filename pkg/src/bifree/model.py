"""The concrete amalgamated free product of bimodules, truncated to a finite
tensor depth: left/right representations lambda_k and rho_k, vectors over LR
diagrams, the expansion of products over diagrams, the Haar bi-unitary, and
the conjugation / commuting-faces constructions.

Vectors live in B (+) sum of alternating words Xo_{k_1} x_B ... x_B Xo_{k_m}
and are stored sparsely as {word: B-coefficient} with the coefficient pushed
to the right end of the word.  Operators are exact on every vector reachable
within the depth budget; going past the budget raises instead of truncating.
"""

from __future__ import annotations

import itertools

from .base_algebra import BElem, Bimodule
from .bnc import SideMap, BNCPartition, open_spine_word
from .lr import LRDiagram, enumerate_lr, lateral_closure, stratum, diagram_geq_lat


class TruncationError(RuntimeError):
    pass


class SideViolation(ValueError):
    pass


def vec_merge(out, word, coeff):
    if coeff.is_zero():
        return
    cur = out.get(word)
    if cur is None:
        out[word] = coeff
    else:
        s = cur + coeff
        if s.is_zero():
            del out[word]
        else:
            out[word] = s


def vec_add(a, b):
    out = dict(a)
    for w, c in b.items():
        vec_merge(out, w, c)
    return out


def vec_scale(a, c):
    return {w: x.scale(c) for w, x in a.items() if not x.scale(c).is_zero()}


def vec_eq(a, b):
    keys = set(a) | set(b)
    for k in keys:
        x, y = a.get(k), b.get(k)
        if x is None:
            x = BElem.zero(y.d)
        if y is None:
            y = BElem.zero(x.d)
        if x != y:
            return False
    return True


def _xo_slots(comp: Bimodule, flat):
    """Nonzero Xo coefficients of a component vector, as (index, BElem)."""
    dd = comp.d * comp.d
    out = []
    for i in range(comp.xo_dim):
        coeff = BElem.from_flat(comp.d, flat[(1 + i) * dd:(2 + i) * dd])
        if not coeff.is_zero():
            out.append((i, coeff))
    return out


def _embed_xo(comp: Bimodule, i: int, coeff: BElem):
    v = [x * 0 for x in comp.xi]
    dd = comp.d * comp.d
    v[(1 + i) * dd:(2 + i) * dd] = coeff.flat()
    return v


class TruncatedFreeProduct:
    """(*_B)_k X_k up to a fixed tensor word length."""

    def __init__(self, components, depth: int):
        components = list(components)
        if not components:
            raise ValueError("need at least one component")
        d = components[0].d
        if any(c.d != d for c in components):
            raise ValueError("components must share the same base algebra dimension")
        self.components = components
        self.depth = depth
        self.d = d
        self._beta_cache = {}

    # -- vectors --------------------------------------------------------------

    @property
    def xi(self):
        return {(): BElem.identity(self.d)}

    def b_part(self, vec) -> BElem:
        return vec.get((), BElem.zero(self.d))

    def words(self, maxlen=None):
        """Alternating basis words up to the given length, deterministic order."""
        maxlen = self.depth if maxlen is None else maxlen
        out = [()]
        frontier = [()]
        for _ in range(maxlen):
            nxt = []
            for w in frontier:
                last = w[-1][0] if w else None
                for k, comp in enumerate(self.components):
                    if k == last:
                        continue
                    for i in range(comp.xo_dim):
                        nxt.append(w + ((k, i),))
            out.extend(nxt)
            frontier = nxt
        return out

    def basis_vectors(self, maxlen=None):
        one = BElem.identity(self.d)
        return [{w: one} for w in self.words(maxlen)]

    # -- the B-B-bimodule structure --------------------------------------------

    def _beta_blocks(self, k, b: BElem):
        key = (k, b)
        if key not in self._beta_cache:
            comp = self.components[k]
            bb = comp.beta(b)
            d = self.d
            blocks = [[BElem([[bb[j * d + r][i * d + c] for c in range(d)]
                              for r in range(d)])
                       for i in range(comp.xo_dim)] for j in range(comp.xo_dim)]
            self._beta_cache[key] = blocks
        return self._beta_cache[key]

    def _left_word(self, b: BElem, word, coeff: BElem):
        """b . (word . coeff) in normal form, as a sparse vector."""
        if not word:
            prod = b * coeff
            return {} if prod.is_zero() else {(): prod}
        k, i = word[0]
        blocks = self._beta_blocks(k, b)
        out = {}
        for j in range(self.components[k].xo_dim):
            bji = blocks[j][i]
            if bji.is_zero():
                continue
            for sw, sc in self._left_word(bji, word[1:], coeff).items():
                vec_merge(out, ((k, j),) + sw, sc)
        return out

    def left_action(self, b: BElem, vec):
        out = {}
        for w, c in vec.items():
            for sw, sc in self._left_word(b, w, c).items():
                vec_merge(out, sw, sc)
        return out

    def right_action(self, vec, b: BElem):
        out = {}
        for w, c in vec.items():
            vec_merge(out, w, c * b)
        return out

    def lb(self, b: BElem):
        return FPLeftB(self, b)

    def rb(self, b: BElem):
        return FPRightB(self, b)

    def one_b(self) -> BElem:
        return BElem.identity(self.d)

    # -- expectation ------------------------------------------------------------

    def expect_product(self, ops) -> BElem:
        v = self.xi
        for op in reversed(list(ops)):
            v = op.apply(v)
        return self.b_part(v)

    def apply_word(self, ops):
        v = self.xi
        for op in reversed(list(ops)):
            v = op.apply(v)
        return v

    # -- representations ---------------------------------------------------------

    def lam(self, k: int, t) -> "FPLambda":
        return FPLambda(self, k, t)

    def rho(self, k: int, t) -> "FPRho":
        return FPRho(self, k, t)


class FPOperator:
    side = None

    def apply(self, vec):
        raise NotImplementedError

    def compose(self, other):
        return FPProduct([self, other])

    def __add__(self, other):
        return FPSum([self, other])


class FPLeftB(FPOperator):
    side = "l"

    def __init__(self, fp, b):
        self.fp, self.b = fp, b

    def apply(self, vec):
        return self.fp.left_action(self.b, vec)


class FPRightB(FPOperator):
    side = "r"

    def __init__(self, fp, b):
        self.fp, self.b = fp, b

    def apply(self, vec):
        return self.fp.right_action(vec, self.b)


class FPSum(FPOperator):
    def __init__(self, ops):
        self.ops = list(ops)
        sides = {op.side for op in self.ops}
        self.side = sides.pop() if len(sides) == 1 else None

    def apply(self, vec):
        out = {}
        for op in self.ops:
            out = vec_add(out, op.apply(vec))
        return out


class FPProduct(FPOperator):
    """Operator product; factors apply right to left."""

    def __init__(self, factors):
        self.factors = list(factors)
        sides = {op.side for op in self.factors}
        self.side = sides.pop() if len(sides) == 1 else None

    def apply(self, vec):
        for op in reversed(self.factors):
            vec = op.apply(vec)
        return vec


class FPScaled(FPOperator):
    def __init__(self, op, c):
        self.op, self.c = op, c
        self.side = op.side

    def apply(self, vec):
        return vec_scale(self.op.apply(vec), self.c)


class FPLambda(FPOperator):
    """lambda_k(T): acts on the leftmost tensor factor."""

    def __init__(self, fp, k, t):
        self.fp, self.k, self.t = fp, k, t
        self.comp = fp.components[k]
        self.et = self.comp.expect_product([t])
        tside = getattr(t, "side", None) or ""
        self.side = "l" if "l" in tside else None

    def apply(self, vec):
        fp, comp, k, t = self.fp, self.comp, self.k, self.t
        out = {}
        for word, c in vec.items():
            if not word:
                vec_merge(out, (), self.et * c)
                u = t.apply(comp.embed_b(c))
                resid = comp.b_part(u) - self.et * c
                if not resid.is_zero():
                    raise SideViolation(
                        "lambda of an operator that is not right-B-linear")
                for i, coeff in _xo_slots(comp, u):
                    vec_merge(out, ((k, i),), coeff)
            elif word[0][0] == k:
                i = word[0][1]
                suffix = word[1:]
                u = t.apply(_embed_xo(comp, i, BElem.identity(fp.d)))
                bpart = comp.b_part(u)
                for sw, sc in fp._left_word(bpart, suffix, c).items():
                    vec_merge(out, sw, sc)
                for j, coeff in _xo_slots(comp, u):
                    for sw, sc in fp._left_word(coeff, suffix, c).items():
                        vec_merge(out, ((k, j),) + sw, sc)
            else:
                for sw, sc in fp._left_word(self.et, word, c).items():
                    vec_merge(out, sw, sc)
                if len(word) + 1 > fp.depth:
                    raise TruncationError(
                        f"word length {len(word) + 1} exceeds depth {fp.depth}")
                u = t.apply(comp.embed_b(BElem.identity(fp.d)))
                for j, coeff in _xo_slots(comp, u):
                    for sw, sc in fp._left_word(coeff, word, c).items():
                        vec_merge(out, ((k, j),) + sw, sc)
        return out


class FPRho(FPOperator):
    """rho_k(T): acts on the rightmost tensor factor."""

    def __init__(self, fp, k, t):
        self.fp, self.k, self.t = fp, k, t
        self.comp = fp.components[k]
        self.et = self.comp.expect_product([t])
        tside = getattr(t, "side", None) or ""
        self.side = "r" if "r" in tside else None

    def apply(self, vec):
        fp, comp, k, t = self.fp, self.comp, self.k, self.t
        out = {}
        for word, c in vec.items():
            if not word:
                vec_merge(out, (), c * self.et)
                u = t.apply(comp.embed_b(c))
                resid = comp.b_part(u) - c * self.et
                if not resid.is_zero():
                    raise SideViolation(
                        "rho of an operator that is not left-B-linear")
                for j, coeff in _xo_slots(comp, u):
                    vec_merge(out, ((k, j),), coeff)
            elif word[-1][0] == k:
                i = word[-1][1]
                prefix = word[:-1]
                u = t.apply(_embed_xo(comp, i, c))
                vec_merge(out, prefix, comp.b_part(u))
                for j, coeff in _xo_slots(comp, u):
                    vec_merge(out, prefix + ((k, j),), coeff)
            else:
                vec_merge(out, word, c * self.et)
                if len(word) + 1 > fp.depth:
                    raise TruncationError(
                        f"word length {len(word) + 1} exceeds depth {fp.depth}")
                u = t.apply(comp.embed_b(BElem.identity(fp.d)))
                for j, coeff in _xo_slots(comp, u):
                    single = self._move_coeff(k, j, coeff, c)
                    for (letter, moved) in single:
                        vec_merge(out, word + (letter,), moved)
        return out

    def _move_coeff(self, k, j, coeff, c):
        """(x_n . c) (x) (f_j . coeff) = x_n (x) c.(f_j . coeff): push the old
        trailing coefficient through the appended letter."""
        blocks = self.fp._beta_blocks(k, c)
        out = []
        for h in range(self.comp.xo_dim):
            chj = blocks[h][j]
            if not chj.is_zero():
                val = chj * coeff
                if not val.is_zero():
                    out.append((((k, h)), val))
        return out


# ---------------------------------------------------------------------------
# Haar bi-unitary.


class ShiftOp:
    """The two-sided shift delta_j -> delta_{j+s} on a window of l^2(Z, B);
    commutes with both B-actions, so it is simultaneously left and right."""

    side = "lr"

    def __init__(self, window_bimodule: Bimodule, window: int, step: int):
        self.bim = window_bimodule
        self.window = window
        self.step = step

    def _slot(self, j):
        # slot 0 is B.delta_0; Xo basis order: delta_{-m}..delta_{-1},delta_1..delta_m
        m = self.window
        if j == 0:
            return 0
        return (j + m if j < 0 else m + j - 1) + 1

    def apply(self, flat):
        m = self.window
        dd = self.bim.d * self.bim.d
        out = [x * 0 for x in flat]
        for j in range(-m, m + 1):
            src = self._slot(j)
            coeff = flat[src * dd:(src + 1) * dd]
            if all(x == 0 for x in coeff):
                continue
            tgt_j = j + self.step
            if abs(tgt_j) > m:
                raise TruncationError(
                    f"shift leaves the window: delta_{j} -> delta_{tgt_j}, "
                    f"window {m}")
            tgt = self._slot(tgt_j)
            out[tgt * dd:(tgt + 1) * dd] = coeff
        return out


class HaarModel:
    """A concrete B-valued Haar bi-unitary on a finite window of l^2(Z, B)."""

    def __init__(self, d: int, window: int):
        self.d = d
        self.window = window
        self.bimodule = Bimodule(d, 2 * window, name=f"l2window{window}")
        self.u = ShiftOp(self.bimodule, window, +1)
        self.u_inv = ShiftOp(self.bimodule, window, -1)

    def moment(self, exponents) -> BElem:
        """E(U^{e_1} U^{e_2} ...) for integer exponents, via the shift."""
        ops = []
        for e in exponents:
            ops.extend([self.u if e > 0 else self.u_inv] * abs(e))
        return self.bimodule.expect_product(ops)


# ---------------------------------------------------------------------------
# Vectors over LR diagrams.


def e_d(fp: TruncatedFreeProduct, diagram: LRDiagram, comp_ops, comp_of=None):
    """The vector assigned to a (laterally refined) LR diagram: absorb the
    strings that never reach the top exactly as the moment recursion does,
    then tensor the surviving strings left to right.

    comp_ops[k-1] is the component-level operator at position k; comp_of maps
    shading labels to component indices (labels parse as ints by default).
    """
    chi, eps = diagram.chi, diagram.eps
    if comp_of is None:
        comp_of = {lab: int(lab) for lab in set(eps.shades)}
    opmap = {k: [comp_ops[k - 1]] for k in range(1, diagram.n + 1)}
    work = [(tuple(s), top) for s, top in zip(diagram.strings, diagram.tops)]

    while True:
        open_strings = [(s, top) for s, top in work if top]
        closed = [s for s, top in work if not top]
        if not closed:
            break
        v = max(closed, key=min)
        comp_v = fp.components[comp_of[eps.shade(min(v))]]
        value = comp_v.expect_product(
            [op for pos in sorted(v) for op in opmap[pos]])
        remaining = sorted(x for s, _ in work for x in s)
        rest = [x for x in remaining if x not in v]
        if not rest:
            return {(): value} if not value.is_zero() else {}
        side = chi.side(min(v))
        tail = [x for x in remaining if x >= min(v)]
        if tail == sorted(v):
            k = max(x for x in rest if x < min(v))
            comp_k = fp.components[comp_of[eps.shade(k)]]
            ins = comp_k.lb(value) if side == "l" else comp_k.rb(value)
            opmap[k] = opmap[k] + [ins]
        else:
            word = open_spine_word(work, chi, min(v))
            others = [s for s in word if s != tuple(sorted(v))]
            if not others:
                raise AssertionError(f"no spine adjacent to string {v}")
            w = others[0] if side == "l" else others[-1]
            k = min(x for x in w if x > min(v))
            comp_k = fp.components[comp_of[eps.shade(k)]]
            ins = comp_k.lb(value) if side == "l" else comp_k.rb(value)
            opmap[k] = [ins] + opmap[k]
        work = [(s, top) for s, top in work if s != tuple(sorted(v))]

    # tensor phase: strings in left-to-right spine order
    order = diagram.top_order()
    if not order:
        return dict(fp.xi)
    factors = []
    for s in order:
        comp_idx = comp_of[eps.shade(min(s))]
        comp = fp.components[comp_idx]
        vflat = comp.xi
        for op in reversed([op for pos in sorted(s) for op in opmap[pos]]):
            vflat = op.apply(vflat)
        factors.append((comp_idx, _xo_slots(comp, vflat)))
    if len(factors) > fp.depth:
        raise TruncationError(f"{len(factors)} tensor factors exceed depth {fp.depth}")
    result = None
    for comp_idx, slots in reversed(factors):
        if result is None:
            result = {}
            for j, coeff in slots:
                vec_merge(result, ((comp_idx, j),), coeff)
        else:
            nxt = {}
            for j, coeff in slots:
                for sw, sc in fp.left_action(coeff, result).items():
                    if sw and sw[0][0] == comp_idx:
                        raise AssertionError(
                            "adjacent tensor factors from the same component")
                    vec_merge(nxt, ((comp_idx, j),) + sw, sc)
            result = nxt
    return result


def lr_expansion_sides(fp: TruncatedFreeProduct, chi: SideMap, eps, comp_ops,
                       comp_of=None):
    """Both sides of the diagram expansion of mu_1(T_1)...mu_n(T_n) xi:
    the direct vector on the left, the signed sum over laterally refined
    diagrams on the right.  Returns (lhs, rhs, equal)."""
    if comp_of is None:
        comp_of = {lab: int(lab) for lab in set(eps.shades)}
    mu_ops = []
    for k in range(1, chi.n + 1):
        comp_idx = comp_of[eps.shade(k)]
        t = comp_ops[k - 1]
        mu_ops.append(fp.lam(comp_idx, t) if chi.side(k) == "l"
                      else fp.rho(comp_idx, t))
    lhs = fp.apply_word(mu_ops)
    rhs = {}
    diagrams = enumerate_lr(chi, eps)
    for k in range(chi.n + 1):
        plain = stratum(diagrams, k)
        for d in lateral_closure(plain):
            coeff = sum((-1) ** (len(d.strings) - len(dp.strings))
                        for dp in plain if diagram_geq_lat(dp, d))
            if coeff:
                rhs = vec_add(rhs, vec_scale(e_d(fp, d, comp_ops, comp_of), coeff))
    return lhs, rhs, vec_eq(lhs, rhs)


# ---------------------------------------------------------------------------
# The regular bimodule of an operator algebra, for the commuting-faces
# construction: vectors are algebra elements kept as composable words.


class AlgebraElement:
    """An element of the inner operator algebra, as a composition word."""

    __slots__ = ("inner", "factors")

    def __init__(self, inner, factors=()):
        self.inner = inner
        self.factors = tuple(factors)

    def expectation(self) -> BElem:
        return self.inner.expect_product(self.factors)


class RegLeftMul:
    """Left multiplication by an inner-algebra element: a pure left operator
    on the regular bimodule."""

    side = "l"

    def __init__(self, factors):
        self.factors = tuple(factors)

    def apply(self, elem: AlgebraElement):
        return AlgebraElement(elem.inner, self.factors + elem.factors)


class RegRightMul:
    side = "r"

    def __init__(self, factors):
        self.factors = tuple(factors)

    def apply(self, elem: AlgebraElement):
        return AlgebraElement(elem.inner, elem.factors + self.factors)


class AlgebraRegularSpace:
    """The algebra generated by the inner free-product operators, viewed as a
    B-B-bimodule with state E; left faces act by left multiplication and
    right faces by right multiplication, so left/right faces commute and
    every right generator agrees with a left one on the vacuum."""

    def __init__(self, inner: TruncatedFreeProduct):
        self.inner = inner
        self.d = inner.d

    @property
    def xi(self):
        return AlgebraElement(self.inner, ())

    def lb(self, b: BElem):
        return RegLeftMul((self.inner.lb(b),))

    def rb(self, b: BElem):
        # the right action multiplies by the same algebra element on the right
        return RegRightMul((self.inner.lb(b),))

    def one_b(self) -> BElem:
        return BElem.identity(self.d)

    def expect_product(self, ops) -> BElem:
        v = self.xi
        for op in reversed(list(ops)):
            v = op.apply(v)
        return v.expectation()

    def left_mul(self, factors) -> RegLeftMul:
        return RegLeftMul(tuple(factors))

    def right_mul(self, factors) -> RegRightMul:
        return RegRightMul(tuple(factors))

    def vacuum_agrees(self, right_op: RegRightMul, left_op: RegLeftMul) -> bool:
        """Hypothesis: T xi = S xi for T the right and S the left version."""
        rv = right_op.apply(self.xi)
        lv = left_op.apply(self.xi)
        if rv.factors == lv.factors:
            return True
        # fall back to comparing the vectors in the inner space
        return vec_eq(self.inner.apply_word(rv.factors),
                      self.inner.apply_word(lv.factors))

    def commute_on_probes(self, left_op, right_op, probes) -> bool:
        for p in probes:
            a = right_op.apply(left_op.apply(p))
            b = left_op.apply(right_op.apply(p))
            if not vec_eq(self.inner.apply_word(a.factors),
                          self.inner.apply_word(b.factors)):
                return False
        return True


# ---------------------------------------------------------------------------
# Conjugation by the Haar bi-unitary.


def build_conjugation_model(pair_bimodule, left_gens, right_gens, window, depth):
    """Realize a pair of B-faces bi-freely from the Haar pair and conjugate.

    The right face conjugates through the inverse shift (U_r T U_r^{-1}): the
    two-sided sandwiches delta_{-1} (x) ... (x) delta_{+1} then nest the same
    way on both faces, which is what makes the conjugated copy bi-free from
    the original with the same distribution.
    Returns (fp, families) with families mapping 'orig'/'conj' to generator
    dicts suitable for the cumulant sweeps.
    """
    d = pair_bimodule.d
    haar = HaarModel(d, window)
    fp = TruncatedFreeProduct([pair_bimodule, haar.bimodule], depth)
    ul, ul_inv = fp.lam(1, haar.u), fp.lam(1, haar.u_inv)
    ur, ur_inv = fp.rho(1, haar.u), fp.rho(1, haar.u_inv)
    orig_left = {name: fp.lam(0, t) for name, t in left_gens.items()}
    orig_right = {name: fp.rho(0, s) for name, s in right_gens.items()}
    conj_left = {name: FPProduct([ul_inv, op, ul]) for name, op in orig_left.items()}
    conj_right = {name: FPProduct([ur, op, ur_inv]) for name, op in orig_right.items()}
    families = {"orig": (orig_left, orig_right), "conj": (conj_left, conj_right)}
    return fp, families


def conjugation_check(pair_bimodule, left_gens, right_gens, order_bound,
                      window=8, depth=8):
    """Verify the Haar-conjugation theorem: (a) the conjugated pair has the
    original's joint distribution word by word, and (b) mixed cumulants
    between the original and the conjugated pair vanish.  Returns a list of
    (kind, key, lhs-or-value, rhs, equal) records."""
    import itertools as it
    fp, families = build_conjugation_model(pair_bimodule, left_gens,
                                           right_gens, window, depth)
    orig_left, orig_right = families["orig"]
    conj_left, conj_right = families["conj"]
    letters = ([("l", n) for n in sorted(orig_left)]
               + [("r", n) for n in sorted(orig_right)])
    records = []
    for order in range(1, order_bound + 1):
        for word in it.product(letters, repeat=order):
            lhs = fp.expect_product(
                [orig_left[n] if s == "l" else orig_right[n] for s, n in word])
            rhs = fp.expect_product(
                [conj_left[n] if s == "l" else conj_right[n] for s, n in word])
            records.append(("distribution", word, repr(lhs), repr(rhs), lhs == rhs))
    from .moment_cumulant import mixed_cumulant_records
    for chi, eps, wname, val in mixed_cumulant_records(fp, families, order_bound):
        records.append(("mixed-cumulant", (repr(chi), eps, wname),
                        repr(val), "0", val.is_zero()))
    return records


# ---------------------------------------------------------------------------
# Commuting faces: left faces by left multiplication, right faces by right
# multiplication on the algebra generated by a free-product realization.


def build_commuting_faces(inner_components, gens_per_face, rng, depth,
                          dependent=False):
    """A shipped construction for the commuting-faces equivalence: C_k acts by
    left multiplication and D_k by right multiplication by elements of the
    k-th free-product algebra, on the regular bimodule of that algebra.

    With `dependent`, every family multiplies by elements of the same inner
    algebra, so the faces are neither free nor bi-free.
    """
    inner = TruncatedFreeProduct(inner_components, depth)
    space = AlgebraRegularSpace(inner)
    families = {}
    for k in range(len(inner_components)):
        src = 0 if dependent else k
        elems = {}
        for g in range(gens_per_face):
            t = inner_components[src].random_side_operator("l", rng)
            elems[f"a{k}{g}"] = inner.lam(src, t)
        left = {name: space.left_mul([el]) for name, el in elems.items()}
        right = {name: space.right_mul([el]) for name, el in elems.items()}
        families[str(k)] = (left, right)
    return space, families


def commuting_faces_check(space, families, order_bound):
    """Verify the hypotheses of the commuting-faces construction and compare
    the lefts-only freeness report with the full bi-freeness report.

    Returns (hypothesis_records, free_records, bifree_records): freeness uses
    only all-left side maps; both sweeps must agree on emptiness.
    """
    import itertools as it
    from .moment_cumulant import mixed_cumulant_records
    probes = [space.xi]
    for label, (left, right) in sorted(families.items()):
        for name, op in sorted(left.items()):
            probes.append(op.apply(space.xi))
    hyp = []
    for label, (left, right) in sorted(families.items()):
        for name in sorted(left):
            lop, rop = left[name], right[name]
            hyp.append(("vacuum-agreement", (label, name), "", "",
                        space.vacuum_agrees(rop, lop)))
            for label2, (left2, right2) in sorted(families.items()):
                for name2 in sorted(right2):
                    ok = space.commute_on_probes(left[name], right2[name2], probes)
                    hyp.append(("commutation", (label, name, label2, name2),
                                "", "", ok))
    all_left = {n: [tuple("l" * n)] for n in range(1, order_bound + 1)}
    free = [(("free-cumulant"), (repr(chi), eps, wname), repr(val), "0", val.is_zero())
            for chi, eps, wname, val in
            mixed_cumulant_records(space, families, order_bound, chis=all_left)]
    bifree = [(("bifree-cumulant"), (repr(chi), eps, wname), repr(val), "0", val.is_zero())
              for chi, eps, wname, val in
              mixed_cumulant_records(space, families, order_bound)]
    return hyp, free, bifree
