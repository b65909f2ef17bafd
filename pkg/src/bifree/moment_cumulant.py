"""The recursive operator-valued moment function E_pi, the cumulant function
kappa = E * mu_BNC, bi-multiplicativity property checks, universal moment
polynomials, product cumulants, and moment/cumulant series.

E_pi absorbs the block terminating closest to the bottom (largest minimum):
a natural suffix is folded into its predecessor as T_k L_b (or R_b), and any
other block is spliced as L_b T_k / R_b T_k at the first element of the
adjacent spine below where the block terminates.  The adjacent spine is found
by transporting to NC coordinates and taking the innermost straddling block.
Everything here works against any space exposing expect_product/lb/rb, so the
same recursion runs on dense matrices, free-product actions, and symbols.
"""

from __future__ import annotations

from fractions import Fraction

from .bnc import (BNCPartition, SideMap, enumerate_bnc, open_spine_word,
                  side_permutation, zero_bnc, one_bnc)
from .incidence import lattice, mobius_bnc, interval_coefficient


class SideMismatchError(ValueError):
    pass


class OperatorTuple:
    """Operators T_1..T_n over one space, T_k left when chi(k) = l and right
    when chi(k) = r (checked against each operator's side certificate)."""

    def __init__(self, chi: SideMap, ops, space, validate=True):
        ops = list(ops)
        if len(ops) != chi.n:
            raise ValueError("arity mismatch")
        if validate:
            for k, op in enumerate(ops, start=1):
                side = getattr(op, "side", None)
                if side is not None and chi.side(k) not in side:
                    raise SideMismatchError(
                        f"operator at position {k} has side {side!r}, chi wants "
                        f"{chi.side(k)!r}")
        self.chi = chi
        self.ops = ops
        self.space = space

    @property
    def n(self):
        return len(self.ops)

    def opmap(self):
        return {k: [op] for k, op in enumerate(self.ops, start=1)}

    def restrict(self, subset) -> "OperatorTuple":
        order = sorted(subset)
        return OperatorTuple(self.chi.restrict(order),
                             [self.ops[k - 1] for k in order], self.space,
                             validate=False)


# ---------------------------------------------------------------------------
# The E_pi recursion.


def e_pi(pi: BNCPartition, t: OperatorTuple, assert_lr: bool = True):
    """E_pi(T_1,...,T_n), exact.  With assert_lr, every bottom-suffix
    absorption is evaluated with both L and R insertions and the two values
    are required to agree."""
    if pi.n != t.n:
        raise ValueError("arity mismatch")
    return _e_rec(t.space, t.chi, list(pi.blocks), t.opmap(), assert_lr)


def e_pi_lists(space, chi: SideMap, blocks, opmap, assert_lr: bool = True):
    """E_pi on per-position operator lists (products already split by slot)."""
    return _e_rec(space, chi, list(blocks), dict(opmap), assert_lr)


def _product_of(opmap, positions):
    return [op for pos in sorted(positions) for op in opmap[pos]]


def _e_rec(space, chi, blocks, opmap, assert_lr):
    if len(blocks) == 1:
        return space.expect_product(_product_of(opmap, blocks[0]))
    v = max(blocks, key=min)
    rest = [b for b in blocks if b != v]
    remaining = sorted(x for b in blocks for x in b)
    value = _e_rec(space, chi, [v], {p: opmap[p] for p in v}, assert_lr)
    side = chi.side(min(v))
    tail = [x for x in remaining if x >= min(v)]
    if tail == sorted(v):
        # bottom suffix: fold into the predecessor as T_k C_b
        k = max(x for x in remaining if x < min(v))
        out = _absorb(space, chi, rest, opmap, k, value, side, after=True,
                      assert_lr=assert_lr)
    else:
        w, k = _adjacent_spine(chi, blocks, v)
        out = _absorb(space, chi, rest, opmap, k, value, side, after=False,
                      assert_lr=assert_lr)
    return out


def _absorb(space, chi, blocks, opmap, k, value, side, after, assert_lr):
    ins = space.lb(value) if side == "l" else space.rb(value)
    newmap = dict(opmap)
    newmap[k] = opmap[k] + [ins] if after else [ins] + opmap[k]
    out = _e_rec(space, chi, blocks, newmap, assert_lr)
    if after and assert_lr:
        alt = space.lb(value) if side == "r" else space.rb(value)
        altmap = dict(opmap)
        altmap[k] = opmap[k] + [alt]
        other = _e_rec(space, chi, blocks, altmap, assert_lr)
        if other != out:
            raise AssertionError(
                f"L/R choice changed the bottom-suffix absorption at position {k}")
    return out


def _adjacent_spine(chi, blocks, v):
    """The block W whose spine is adjacent to min(V), and the insertion
    position k = min{w in W : w > min(V)}.

    The spines open at min(V)'s height are exactly the blocks straddling it;
    replaying the diagram bottom-up puts them in left-to-right order, and the
    adjacent one is the nearest on min(V)'s side.
    """
    word = open_spine_word([(b, False) for b in blocks], chi, min(v))
    others = [s for s in word if s != tuple(v)]
    if not others:
        raise AssertionError(f"no spine adjacent to block {v}")
    best = others[0] if chi.side(min(v)) == "l" else others[-1]
    k = min(x for x in best if x > min(v))
    return best, k


# ---------------------------------------------------------------------------
# Cumulants.


def kappa_pi(pi: BNCPartition, t: OperatorTuple, assert_lr: bool = False):
    """kappa_pi = sum over sigma <= pi of E_sigma mu_BNC(sigma, pi)."""
    lat = lattice(pi.chi)
    j = lat.idx(pi)
    out = None
    for i in range(len(lat.parts)):
        if lat.leq(i, j):
            term = e_pi(lat.parts[i], t, assert_lr=assert_lr)
            term = term.scale(mobius_bnc(lat.parts[i], pi))
            out = term if out is None else out + term
    return out


def kappa_lists(space, chi, pi: BNCPartition, opmap, assert_lr: bool = False,
                table=None):
    lat = lattice(chi)
    j = lat.idx(pi)
    out = None
    for i in range(len(lat.parts)):
        if lat.leq(i, j):
            if table is not None:
                if i not in table:
                    table[i] = e_pi_lists(space, chi, lat.parts[i].blocks,
                                          opmap, assert_lr)
                term = table[i]
            else:
                term = e_pi_lists(space, chi, lat.parts[i].blocks, opmap, assert_lr)
            term = term.scale(mobius_bnc(lat.parts[i], pi))
            out = term if out is None else out + term
    return out


def moment_from_cumulants(pi: BNCPartition, t: OperatorTuple):
    """sum over sigma <= pi of kappa_sigma; inverts kappa_pi back to E_pi."""
    lat = lattice(pi.chi)
    j = lat.idx(pi)
    out = None
    for i in range(len(lat.parts)):
        if lat.leq(i, j):
            term = kappa_pi(lat.parts[i], t)
            out = term if out is None else out + term
    return out


def universal_rhs(chi: SideMap, eps, t: OperatorTuple, assert_lr: bool = False):
    """The universal moment polynomial
    sum over pi of [sum over pi <= sigma <= eps of mu(pi, sigma)] E_pi."""
    if eps.n != chi.n:
        raise ValueError("arity mismatch")
    lat = lattice(chi)
    classes = eps.classes()
    out = None
    for pi in lat.parts:
        coeff = interval_coefficient(pi, classes, lat)
        if coeff:
            term = e_pi(pi, t, assert_lr=assert_lr).scale(coeff)
            out = term if out is None else out + term
    return out


# ---------------------------------------------------------------------------
# Bi-multiplicativity properties (i)-(iv).


def _with_op(t: OperatorTuple, k, ops):
    newmap = t.opmap()
    newmap[k] = ops
    return newmap


def _chi_order(chi: SideMap):
    return side_permutation(chi)


def bimult_property_i(phi, t: OperatorTuple, b, pi: BNCPartition = None):
    """Phi_pi(T_1,..,T_n C) = slide b to the last opposite-side slot, or
    multiply on the appropriate side of the output when there is none."""
    chi, space, n = t.chi, t.space, t.n
    pi = pi or one_bnc(chi)
    last = chi.side(n)
    ins_last = space.lb(b) if last == "l" else space.rb(b)
    lhs = phi(pi, _with_op(t, n, [t.ops[n - 1], ins_last]))
    opp = [k for k in range(1, n + 1) if chi.side(k) != last]
    if opp:
        q = max(opp)
        ins_q = space.rb(b) if last == "l" else space.lb(b)
        rhs = phi(pi, _with_op(t, q, [t.ops[q - 1], ins_q]))
    else:
        base = phi(pi, t.opmap())
        rhs = base * b if last == "l" else b * base
    return lhs == rhs, lhs, rhs


def bimult_property_ii(phi, t: OperatorTuple, b, p: int, pi: BNCPartition = None):
    """Phi_pi(.., C T_p, ..) = slide b to the previous same-side slot, or
    multiply the output when there is none."""
    chi, space, n = t.chi, t.space, t.n
    pi = pi or one_bnc(chi)
    side = chi.side(p)
    ins = space.lb(b) if side == "l" else space.rb(b)
    lhs = phi(pi, _with_op(t, p, [ins, t.ops[p - 1]]))
    same = [k for k in range(1, p) if chi.side(k) == side]
    if same:
        q = max(same)
        rhs = phi(pi, _with_op(t, q, [t.ops[q - 1], ins]))
    else:
        base = phi(pi, t.opmap())
        rhs = b * base if side == "l" else base * b
    return lhs == rhs, lhs, rhs


def _validate_chi_interval(chi, subset):
    s = side_permutation(chi)
    coords = sorted(s.apply_inv(x) for x in subset)
    if coords != list(range(coords[0], coords[-1] + 1)):
        raise ValueError(f"{sorted(subset)} is not a chi-interval")
    return coords[0]


def bimult_property_iii(phi, t: OperatorTuple, pi: BNCPartition, intervals):
    """Phi_pi = product of Phi over the chi-interval pieces, in chi order."""
    chi = t.chi
    seen = sorted(x for v in intervals for x in v)
    if seen != list(range(1, t.n + 1)):
        raise ValueError("intervals must partition 1..n")
    keyed = sorted(intervals, key=lambda v: _validate_chi_interval(chi, v))
    owner = pi.partition.owner()
    for v in keyed:
        vset = set(v)
        for b in pi.blocks:
            if set(b) & vset and not set(b) <= vset:
                raise ValueError(f"{sorted(v)} is not a union of blocks of {pi}")
    lhs = phi(pi, t.opmap())
    rhs = None
    for v in keyed:
        piece = phi(pi.restrict(v), t.restrict(v).opmap(), chi_override=chi.restrict(sorted(v)))
        rhs = piece if rhs is None else rhs * piece
    return lhs == rhs, lhs, rhs


def bimult_property_iv(phi, t: OperatorTuple, pi: BNCPartition, v_set, w_set):
    """Phi_pi = Phi over W with Phi over V inserted beside theta (and beside
    gamma); all stated forms must agree."""
    chi, space = t.chi, t.space
    v_set, w_set = sorted(v_set), sorted(w_set)
    if sorted(v_set + w_set) != list(range(1, t.n + 1)):
        raise ValueError("V and W must partition 1..n")
    _validate_chi_interval(chi, v_set)
    s = side_permutation(chi)
    whole = list(range(1, t.n + 1))
    lo = min(whole, key=s.apply_inv)
    hi = max(whole, key=s.apply_inv)
    if lo not in w_set or hi not in w_set:
        raise ValueError("the chi-extremes must lie in W")
    for b in pi.blocks:
        if set(b) & set(v_set) and not set(b) <= set(v_set):
            raise ValueError("V is not a union of blocks")
    vmin = min(v_set, key=s.apply_inv)
    vmax = max(v_set, key=s.apply_inv)
    theta = max((k for k in w_set if s.chi_less(k, vmin)), key=s.apply_inv)
    gamma = min((k for k in w_set if s.chi_less(vmax, k)), key=s.apply_inv)

    inner = phi(pi.restrict(v_set), t.restrict(v_set).opmap(),
                chi_override=chi.restrict(v_set))
    lhs = phi(pi, t.opmap())
    pi_w = pi.restrict(w_set)
    chi_w = chi.restrict(w_set)

    def w_eval(pos, ops):
        sub = {k: [t.ops[k - 1]] for k in w_set}
        sub[pos] = ops
        order = sorted(w_set)
        relabeled = {i + 1: sub[x] for i, x in enumerate(order)}
        return phi(pi_w, relabeled, chi_override=chi_w)

    forms = []
    if chi.side(theta) == "l":
        forms.append(w_eval(theta, [t.ops[theta - 1], space.lb(inner)]))
    else:
        forms.append(w_eval(theta, [space.rb(inner), t.ops[theta - 1]]))
    if chi.side(gamma) == "l":
        forms.append(w_eval(gamma, [space.lb(inner), t.ops[gamma - 1]]))
    else:
        forms.append(w_eval(gamma, [t.ops[gamma - 1], space.rb(inner)]))
    ok = all(f == lhs for f in forms)
    return ok, lhs, forms


class PhiMoment:
    """E as a bi-multiplicative candidate: callable on (pi, opmap)."""

    def __init__(self, space, chi, assert_lr=False):
        self.space, self.chi, self.assert_lr = space, chi, assert_lr

    def __call__(self, pi, opmap, chi_override=None):
        return e_pi_lists(self.space, chi_override or self.chi, pi.blocks, opmap,
                          self.assert_lr)


class PhiCumulant:
    """kappa as a bi-multiplicative candidate."""

    def __init__(self, space, chi):
        self.space, self.chi = space, chi

    def __call__(self, pi, opmap, chi_override=None):
        return kappa_lists(self.space, chi_override or self.chi, pi, opmap)


def bimult_property_check(which: str, phi_name: str, t: OperatorTuple, *,
                          b=None, p=None, pi=None, intervals=None,
                          v_set=None, w_set=None):
    """Evaluate one of the four bi-multiplicativity properties for E or kappa.

    phi_name is 'moment' or 'cumulant'; the remaining keywords supply the
    property's data.  Returns (equal, lhs, rhs).
    """
    phi = (PhiMoment(t.space, t.chi) if phi_name == "moment"
           else PhiCumulant(t.space, t.chi))
    if which == "i":
        return bimult_property_i(phi, t, b, pi=pi)
    if which == "ii":
        return bimult_property_ii(phi, t, b, p, pi=pi)
    if which == "iii":
        return bimult_property_iii(phi, t, pi or one_bnc(t.chi), intervals)
    if which == "iv":
        return bimult_property_iv(phi, t, pi or one_bnc(t.chi), v_set, w_set)
    raise ValueError(f"unknown property {which!r}")


# ---------------------------------------------------------------------------
# Bi-moment / bi-cumulant relations at an adjacent same-side pair.


def moment_collapse_check(pi: BNCPartition, t: OperatorTuple, q: int):
    """E_pi(..., T_q, T_{q+1}, ...) = E_{pi|q=q+1}(..., T_q T_{q+1}, ...)
    when chi(q) = chi(q+1) and q ~ q+1 in pi."""
    chi = t.chi
    if chi.side(q) != chi.side(q + 1):
        raise ValueError(f"chi({q}) != chi({q + 1}): collapse hypothesis violated")
    if not pi.same_block(q, q + 1):
        raise ValueError(f"{q} and {q + 1} are not in one block of {pi}")
    lhs = e_pi(pi, t, assert_lr=False)
    rhs = _fused_eval(e_pi_lists, pi.collapse(q), t, q)
    return lhs == rhs, lhs, rhs


def cumulant_expansion_check(pi_small: BNCPartition, t: OperatorTuple, q: int):
    """kappa_pi(..., T_q T_{q+1}, ...) = sum of kappa_sigma over sigma with
    sigma|_{q=q+1} = pi, for pi in BNC(chi minus q)."""
    chi = t.chi
    if chi.side(q) != chi.side(q + 1):
        raise ValueError(f"chi({q}) != chi({q + 1}): expansion hypothesis violated")
    lhs = _fused_eval(lambda space, c, blocks, opmap, _a=False, pi=pi_small:
                      kappa_lists(space, c, pi, opmap), pi_small, t, q)
    rhs = None
    table = {}
    opmap = t.opmap()
    for sigma in enumerate_bnc(chi):
        if sigma.collapse(q) == pi_small:
            term = kappa_lists(t.space, chi, sigma, opmap, table=table)
            rhs = term if rhs is None else rhs + term
    return lhs == rhs, lhs, rhs


def _fused_eval(fn, pi_small, t, q):
    """Evaluate fn on the tuple with slots q, q+1 fused into one product."""
    chi_small = t.chi.drop(q)
    opmap = {}
    for k in range(1, q):
        opmap[k] = [t.ops[k - 1]]
    opmap[q] = [t.ops[q - 1], t.ops[q]]
    for k in range(q + 2, t.n + 1):
        opmap[k - 1] = [t.ops[k - 1]]
    return fn(t.space, chi_small, pi_small.blocks, opmap, False)


# ---------------------------------------------------------------------------
# Cumulants of products (hat embedding) and the scalar multiplicative
# convolution.


def product_cumulant_rhs(pi: BNCPartition, groups, t: OperatorTuple):
    """sum of kappa_sigma(T_1..T_n) over sigma joining hat(0_chi) to hat(pi)."""
    from .bnc import hat_embed, hat_zero
    hat_pi = hat_embed(pi, groups)
    hat_zero_pi = hat_zero(pi.chi, groups)
    if t.chi != hat_pi.chi:
        raise ValueError("tuple side map does not match the expanded side map")
    out = None
    table = {}
    opmap = t.opmap()
    for sigma in enumerate_bnc(t.chi):
        if sigma.join(hat_zero_pi) == hat_pi:
            term = kappa_lists(t.space, t.chi, sigma, opmap, table=table)
            out = term if out is None else out + term
    return out


def product_cumulant_lhs(pi: BNCPartition, groups, t: OperatorTuple):
    """kappa_pi of the grouped products T_{k(p-1)+1} ... T_{k(p)}."""
    bounds = [0] + list(groups)
    opmap = {}
    for p in range(1, pi.n + 1):
        opmap[p] = [t.ops[k - 1] for k in range(bounds[p - 1] + 1, bounds[p] + 1)]
    return kappa_lists(t.space, pi.chi, pi, opmap)


class TwoFacedFamily:
    """A pair of B-faces presented by generators: z = ((z_i)_I, (z_j)_J)."""

    def __init__(self, space, left_gens: dict, right_gens: dict, name=""):
        self.space = space
        self.left = dict(left_gens)
        self.right = dict(right_gens)
        self.name = name

    def gen(self, side, key):
        return self.left[key] if side == "l" else self.right[key]

    def chi_alpha(self, alpha) -> SideMap:
        return SideMap([side for side, _ in alpha])


def _series_opmap(z: TwoFacedFamily, alpha, b_insertions):
    n = len(alpha)
    if len(b_insertions) != n - 1:
        raise ValueError(f"need {n - 1} B-insertions, got {len(b_insertions)}")
    opmap = {}
    for k, (side, key) in enumerate(alpha, start=1):
        ops = [z.gen(side, key)]
        if k < n:
            b = b_insertions[k - 1]
            ops.append(z.space.lb(b) if side == "l" else z.space.rb(b))
        opmap[k] = ops
    return opmap


def moment_series(z: TwoFacedFamily, alpha, b_insertions):
    """mu^z_alpha(b_1..b_{n-1}) = E_{1_chi}(z_a(1) C_{b_1}, ..., z_a(n))."""
    chi = z.chi_alpha(alpha)
    return e_pi_lists(z.space, chi, one_bnc(chi).blocks,
                      _series_opmap(z, alpha, b_insertions), False)


def cumulant_series(z: TwoFacedFamily, alpha, b_insertions):
    chi = z.chi_alpha(alpha)
    return kappa_lists(z.space, chi, one_bnc(chi),
                       _series_opmap(z, alpha, b_insertions))


def multiplicative_convolution_scalar(alpha, z1: TwoFacedFamily, z2: TwoFacedFamily):
    """Scalar-only product formula: kappa of z'_i z''_i (and z''_j z'_j on the
    right) equals the sum over pi of kappa_pi(z') kappa_{K(pi)}(z'').
    Returns (lhs, rhs)."""
    space = z1.space
    if space.d != 1:
        raise ValueError("the multiplicative convolution formula holds only for d = 1")
    chi = z1.chi_alpha(alpha)
    opmap = {}
    for k, (side, key) in enumerate(alpha, start=1):
        zp, zpp = z1.gen(side, key), z2.gen(side, key)
        opmap[k] = [zp, zpp] if side == "l" else [zpp, zp]
    lhs = kappa_lists(space, chi, one_bnc(chi), opmap)
    rhs = None
    map1 = {k: [z1.gen(s, key)] for k, (s, key) in enumerate(alpha, start=1)}
    map2 = {k: [z2.gen(s, key)] for k, (s, key) in enumerate(alpha, start=1)}
    tab1, tab2 = {}, {}
    for pi in enumerate_bnc(chi):
        term = (kappa_lists(space, chi, pi, map1, table=tab1)
                * kappa_lists(space, chi, pi.kreweras(), map2, table=tab2))
        rhs = term if rhs is None else rhs + term
    return lhs, rhs


# ---------------------------------------------------------------------------
# Mixed-cumulant sweep.


def mixed_cumulant_records(space, families: dict, order_bound: int,
                           budget_per_order: int = 5000,
                           chis=None):
    """Evaluate kappa_{1_chi} over all chi, all non-constant shadings over the
    family labels, and all generator words up to the order bound.

    families maps label -> (left generator dict, right generator dict).
    Yields (chi, eps_labels, word_names, value) for every evaluated word.
    """
    import itertools as it
    labels = sorted(families)

    def words_of_order(n):
        count = 0
        side_choices = chis[n] if chis else it.product("lr", repeat=n)
        for sides in side_choices:
            chi = SideMap(sides)
            for eps in it.product(labels, repeat=n):
                if len(set(eps)) == 1:
                    continue
                gen_options = []
                for k in range(n):
                    left, right = families[eps[k]]
                    options = sorted(left) if sides[k] == "l" else sorted(right)
                    gen_options.append([(eps[k], sides[k], name) for name in options])
                for word in it.product(*gen_options):
                    if count >= budget_per_order:
                        return
                    count += 1
                    yield chi, eps, word

    for n in range(2, order_bound + 1):
        for chi, eps, word in words_of_order(n):
            ops = [families[fam][0][name] if side == "l" else families[fam][1][name]
                   for fam, side, name in word]
            t = OperatorTuple(chi, ops, space, validate=False)
            value = kappa_pi(one_bnc(chi), t)
            yield chi, eps, word, value
