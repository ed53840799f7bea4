"""Bracket families on the vacuum complexes, relation checkers, and
homotopy transfer.

Everything here lives in the shifted convention: an arity-a bracket has
degree +1 for every a, is graded symmetric, and Koszul signs are taken
from the complex degree mod 2.  The generalized Jacobi identity is then
the plain unshuffle sum

    J_n = sum over i+j = n+1, (i, n-i)-unshuffles s of
          eps(s) * b_j(b_i(x_{s(1..i)}), x_{s(i+1..n)})

with eps the Koszul sign of the unshuffle and no further prefactors.

The structural brackets are not transcribed by hand.  The interaction
terms of the action are assembled as a polynomial in supercommuting
coordinates, one coordinate per basis vector, and the brackets are read
off by differentiating the associated homological vector field.  Getting
every sign from one tiny polynomial calculus keeps the odd sectors
honest; the only convention left is the orientation of the polarization,
which is pinned by requiring that the quadratic vertex reproduce the
differential of the complex exactly (asserted at build time).
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, combinations_with_replacement, product
import random

from .graded import (ConfigError, StructureError, GradedLinearMap,
                     ShiftedSymplecticPairing, verify_retract)
from .invforms import InvariantFormModel
from .linalg import SparseMatrix, invert_dense

F = Fraction


def _parity(deg):
    # python keeps -1 % 2 == 1, so ghosts come out odd as they must
    return deg % 2


def _sort_sign(args):
    """Stable-sort a tuple of (degree, index) labels, tracking the Koszul
    sign of the permutation used."""
    items = list(args)
    sign = 1
    for i in range(1, len(items)):
        j = i
        while j > 0 and items[j - 1] > items[j]:
            if items[j - 1][0] % 2 and items[j][0] % 2:
                sign = -sign
            items[j - 1], items[j] = items[j], items[j - 1]
            j -= 1
    return tuple(items), sign


def _perm_sign(order, parities):
    """Koszul sign of reordering a tuple so that slot t receives the
    element from position order[t]."""
    s = 1
    for a in range(len(order)):
        for b in range(a + 1, len(order)):
            if (order[a] > order[b] and parities[order[a]]
                    and parities[order[b]]):
                s = -s
    return s


class _Poly:
    """Polynomial in supercommuting coordinates.

    Monomials are ascending index tuples with Koszul-normalized
    coefficients; squares of odd coordinates vanish on insertion.
    """

    __slots__ = ("par", "terms")

    def __init__(self, par, terms=None):
        self.par = par
        self.terms = dict(terms) if terms else {}

    def add(self, coeff, mono_in_order):
        if not coeff:
            return
        mono = list(mono_in_order)
        sign = 1
        for i in range(1, len(mono)):
            j = i
            while j > 0 and mono[j - 1] > mono[j]:
                if self.par[mono[j - 1]] and self.par[mono[j]]:
                    sign = -sign
                mono[j - 1], mono[j] = mono[j], mono[j - 1]
                j -= 1
        for i in range(1, len(mono)):
            if mono[i] == mono[i - 1] and self.par[mono[i]]:
                return
        key = tuple(mono)
        v = self.terms.get(key, F(0)) + sign * coeff
        if v:
            self.terms[key] = v
        else:
            self.terms.pop(key, None)

    def left_deriv(self, var):
        out = _Poly(self.par)
        pv = self.par[var]
        for mono, c in self.terms.items():
            passed = 0
            for t, m in enumerate(mono):
                if m == var:
                    sgn = -1 if (pv and passed % 2) else 1
                    rest = mono[:t] + mono[t + 1:]
                    v = out.terms.get(rest, F(0)) + sgn * c
                    if v:
                        out.terms[rest] = v
                    else:
                        out.terms.pop(rest, None)
                if self.par[m]:
                    passed += 1
        return out

    def right_deriv(self, var):
        out = _Poly(self.par)
        pv = self.par[var]
        for mono, c in self.terms.items():
            tail = sum(self.par[m] for m in mono)
            seen = 0
            for t, m in enumerate(mono):
                if self.par[m]:
                    seen += 1
                if m == var:
                    following = tail - seen if pv else 0
                    sgn = -1 if following % 2 else 1
                    rest = mono[:t] + mono[t + 1:]
                    v = out.terms.get(rest, F(0)) + sgn * c
                    if v:
                        out.terms[rest] = v
                    else:
                        out.terms.pop(rest, None)
        return out

    def scale(self, c):
        out = _Poly(self.par)
        if c:
            out.terms = {m: c * v for m, v in self.terms.items()}
        return out

    def constant(self):
        return self.terms.get((), F(0))


@dataclass(frozen=True)
class RelationResidual:
    """Worst defect of one generalized Jacobi identity."""
    n: int
    value: object
    witness: tuple = None


class LInfinityStructure:
    """Bracket package over a cochain complex.

    Arity 1 is the differential of the complex; higher brackets are
    produced by an evaluator on sorted basis tuples and cached, so graded
    symmetry holds by construction and callers with unordered inputs pay
    only the Koszul resort sign.  The caches double as the sparse
    coefficient tensors of the structure.
    """

    def __init__(self, complex, arities, evaluate, support=None, meta=None):
        self.complex = complex
        self.space = complex.space
        self.arities = tuple(sorted(a for a in arities if a >= 2))
        self._evaluate = evaluate
        self._cache = {a: {} for a in self.arities}
        self._dcols = {}
        self.support = support
        self.meta = meta if meta is not None else {}

    @property
    def max_arity(self):
        return self.arities[-1] if self.arities else 1

    def basis(self):
        for deg in self.space.degrees():
            for i in range(self.space.dim(deg)):
                yield (deg, i)

    def _d_column(self, label):
        col = self._dcols.get(label)
        if col is None:
            deg, i = label
            col = {}
            for (r, c), v in self.complex.d.block(deg).data.items():
                if c == i:
                    col[(deg + 1, r)] = v
            self._dcols[label] = col
        return col

    def bracket(self, a, args):
        args = tuple(args)
        if len(args) != a:
            raise ConfigError("arity %d bracket got %d arguments"
                              % (a, len(args)))
        if a == 1:
            return dict(self._d_column(args[0]))
        if a not in self._cache:
            return {}
        key, sign = _sort_sign(args)
        got = self._cache[a].get(key)
        if got is None:
            got = self._evaluate(a, key)
            self._cache[a][key] = got
        if sign == 1:
            return dict(got)
        return {k: -v for k, v in got.items()}

    def perturbed(self, a, args, label, delta):
        """Copy of the structure with one bracket coefficient shifted;
        fault injection for the relation checkers."""
        key, sgn = _sort_sign(tuple(args))
        bump = F(delta) * sgn
        inner = self._evaluate

        def evaluate(b, t):
            out = inner(b, t)
            if b == a and t == key:
                out = dict(out)
                v = out.get(label, F(0)) + bump
                if v:
                    out[label] = v
                else:
                    out.pop(label, None)
            return out

        meta = dict(self.meta)
        meta["perturbed"] = (a, key, label)
        return LInfinityStructure(self.complex, self.arities, evaluate,
                                  support=None, meta=meta)


def _allowed_multisets(L, n):
    """Degree multisets on which some term of J_n can be nonzero, or None
    when the structure declares no support information."""
    sup = L.support
    if sup is None:
        return None
    space = L.space
    degs = sorted(d for d in space.degrees() if space.dim(d))
    arities = set(L.arities) | {1}
    out = []
    for ms in combinations_with_replacement(degs, n):
        fires = False
        for i in sorted(arities):
            j = n + 1 - i
            if j not in arities:
                continue
            for sub in {tuple(sorted(c)) for c in combinations(ms, i)}:
                if i > 1 and sub not in sup.get(i, ()):
                    continue
                od = sum(sub) + 1
                if space.dim(od) == 0:
                    continue
                rest = list(ms)
                for d in sub:
                    rest.remove(d)
                if j == 1 or tuple(sorted(rest + [od])) in sup.get(j, ()):
                    fires = True
                    break
            if fires:
                break
        if fires:
            out.append(ms)
    return out


def _tuples_for(L, n, multisets):
    bydeg = {}
    for lab in L.basis():
        bydeg.setdefault(lab[0], []).append(lab)
    if multisets is None:
        allb = [lab for d in sorted(bydeg) for lab in bydeg[d]]
        yield from combinations_with_replacement(allb, n)
        return
    for ms in multisets:
        groups = []
        for d in sorted(set(ms)):
            groups.append(list(
                combinations_with_replacement(bydeg[d], ms.count(d))))
        for combo in product(*groups):
            yield sum(combo, ())


def _jacobi(L, t, splits):
    pars = [d % 2 for d, _ in t]
    n = len(t)
    acc = {}
    for i, j in splits:
        for sel in combinations(range(n), i):
            rest = [p for p in range(n) if p not in sel]
            eps = _perm_sign(list(sel) + rest, pars)
            inner = L.bracket(i, tuple(t[p] for p in sel))
            if not inner:
                continue
            rest_args = tuple(t[p] for p in rest)
            for lab, cv in inner.items():
                for lab2, ov in L.bracket(j, (lab,) + rest_args).items():
                    v = acc.get(lab2, F(0)) + eps * cv * ov
                    if v:
                        acc[lab2] = v
                    else:
                        acc.pop(lab2, None)
    return acc


def linf_residual(L, n, dense_limit=64, samples=10000, seed=7):
    """Max-norm defect of the arity-n generalized Jacobi identity over
    basis tuples, dense when every degree is small enough and sampled
    with a fixed seed otherwise."""
    if n < 1:
        raise ConfigError("pre: n >= 1")
    if n > 2 * L.max_arity - 1:
        raise ConfigError("pre: n <= %d, higher identities have no terms"
                          % (2 * L.max_arity - 1))
    arities = set(L.arities) | {1}
    splits = [(i, n + 1 - i) for i in sorted(arities)
              if (n + 1 - i) in arities]
    worst = F(0)
    witness = None
    if not splits:
        return RelationResidual(n, worst, witness)
    space = L.space
    dense = max(space.dim(d) for d in space.degrees()) <= dense_limit
    if dense:
        gen = _tuples_for(L, n, _allowed_multisets(L, n))
    else:
        rng = random.Random(seed)
        allb = list(L.basis())
        gen = (tuple(sorted(rng.choice(allb) for _ in range(n)))
               for _ in range(samples))
    for t in gen:
        acc = _jacobi(L, t, splits)
        if not acc:
            continue
        m = max(abs(v) for v in acc.values())
        if m > worst:
            worst, witness = m, t
    return RelationResidual(n, worst, witness)


def _omega_pair(omega, vec, lab):
    dy, iy = lab
    tot = F(0)
    for (d, i), v in vec.items():
        if d + dy == 1:
            tot += v * omega.block(d).data.get((i, iy), F(0))
    return tot


def cyclicity_residual(L, omega, a, dense_limit=64, samples=10000, seed=11):
    """Worst violation of the rotation law of the pairing slot.

    Brackets that come from a single generating function S satisfy

        <b_a(x1..xa), x0> = eps * <b_a(x0..x_{a-1}), xa>

    because both sides are the same full derivative of S up to
    reordering.  Writing p_i for the parity of x_i,

        eps = (-1) ** (p_0 + p_a + p_a * (p_0 + ... + p_{a-1}))

    the last term is the plain Koszul cost of carrying x_a past the
    other arguments, and the extra p_0 + p_a converts the one right
    derivative that changes hands (S is even, so a right derivative by
    z is (-1)**p_z times the left one).  The abelian quadratic sector
    is a quick hand check: all-even tuples give eps = +1 and both
    sides reduce to symmetric matrices.

    The scan runs over sorted tuples and applies the rotation all the
    way around the cycle, comparing every slot: for each position k,

        <b_a(x_0 .. no x_k .. x_a), x_k> * (-1) ** (p_k * (1 + p_0 + ... + p_{k-1}))

    must be independent of k.  Checking only the two end slots would let
    a fault hide in a middle slot whenever the pairing partner it needs
    cannot reach either end of a sorted tuple.

    The law only holds for the orientation of the pairing that the
    polarization actually used; pass ``cyclic_pairing(theory)`` for
    structures built by ``build_linf``, not the stored pairing, whose
    scalar pair is oriented the other way.
    """
    if a < 2 or a > L.max_arity:
        raise ConfigError("pre: 2 <= a <= %d" % L.max_arity)
    space = L.space
    worst = F(0)
    witness = None
    degs = sorted(d for d in space.degrees() if space.dim(d))
    dense = max(space.dim(d) for d in degs) <= dense_limit
    if dense:
        msets = None
        if L.support is not None:
            sup = L.support.get(a, set())
            msets = []
            for ms in combinations_with_replacement(degs, a + 1):
                if sum(ms) != 0:
                    continue
                if any(tuple(sorted(ms[:k] + ms[k + 1:])) in sup
                       for k in range(a + 1)):
                    msets.append(ms)
        gen = _tuples_for(L, a + 1, msets)
    else:
        rng = random.Random(seed)
        allb = list(L.basis())
        gen = (tuple(sorted(rng.choice(allb) for _ in range(a + 1)))
               for _ in range(samples))
    for t in gen:
        pars = [_parity(d) for d, _ in t]
        vals = []
        pre = 0
        for k in range(a + 1):
            ck = _omega_pair(omega, L.bracket(a, t[:k] + t[k + 1:]), t[k])
            if pars[k] and (1 + pre) % 2:
                ck = -ck
            vals.append(ck)
            pre += pars[k]
        r = max(abs(v - vals[0]) for v in vals[1:])
        if r > worst:
            worst, witness = r, t
    return RelationResidual(a, worst, witness)


def _col_table(gmap):
    t = {}
    for deg in gmap.source.degrees():
        cols = {}
        for (row, col), v in gmap.block(deg).data.items():
            cols.setdefault(col, []).append((row, v))
        t[deg] = cols
    return t


def _apply_cols(table, shift, vec):
    out = {}
    for (deg, i), v in vec.items():
        for row, mv in table.get(deg, {}).get(i, ()):
            lab = (deg + shift, row)
            w = out.get(lab, F(0)) + mv * v
            if w:
                out[lab] = w
            else:
                out.pop(lab, None)
    return out


def _bracket_on_vectors(L, a, vecs):
    out = {}
    items = [sorted(v.items()) for v in vecs]
    if not all(items):
        return out
    for combo in product(*items):
        coeff = F(1)
        for _, c in combo:
            coeff *= c
        labels = tuple(lab for lab, _ in combo)
        for lab, bv in L.bracket(a, labels).items():
            w = out.get(lab, F(0)) + coeff * bv
            if w:
                out[lab] = w
            else:
                out.pop(lab, None)
    return out


def _set_partitions(n, k):
    """Partitions of range(n) into k blocks, each block ascending, blocks
    ordered by smallest element."""
    blocks = []

    def rec(i):
        if i == n:
            if len(blocks) == k:
                yield [tuple(b) for b in blocks]
            return
        for b in blocks:
            b.append(i)
            yield from rec(i + 1)
            b.pop()
        if len(blocks) < k:
            blocks.append([i])
            yield from rec(i + 1)
            blocks.pop()

    yield from rec(0)


def homotopy_transfer(L, r, cap=4):
    """Transferred brackets on the small side of a deformation retract.

    Sum over rooted trees in the blockwise form: arguments are grouped by
    set partitions, each block is pushed up through the recursion with
    the homotopy on top, and the root is projected.  The morphism
    components theta_n computed along the way are parity even, so the
    only signs are the Koszul signs of regrouping the arguments; higher
    morphism components beyond the brackets are not exposed.
    """
    if cap < 2:
        raise ConfigError("pre: cap >= 2, arity 1 is never transferred")
    if r.big.space.dims != L.space.dims:
        raise ConfigError("pre: the structure lives on the big complex")
    icols = _col_table(r.incl)
    pcols = _col_table(r.proj)
    hcols = _col_table(r.homotopy)
    tmemo = {}

    def theta(args):
        key, sgn = _sort_sign(args)
        vec = tmemo.get(key)
        if vec is None:
            if len(key) == 1:
                deg, i = key[0]
                vec = {(deg, row): v
                       for row, v in icols.get(deg, {}).get(i, ())}
            else:
                vec = _apply_cols(hcols, -1, _tree_sum(key))
            tmemo[key] = vec
        if sgn == 1:
            return vec
        return {lab: -v for lab, v in vec.items()}

    def _tree_sum(args):
        pars = [d % 2 for d, _ in args]
        acc = {}
        for k in range(2, min(len(args), L.max_arity) + 1):
            for part in _set_partitions(len(args), k):
                order = [p for b in part for p in b]
                eps = _perm_sign(order, pars)
                vecs = [theta(tuple(args[p] for p in b)) for b in part]
                term = _bracket_on_vectors(L, k, vecs)
                for lab, v in term.items():
                    w = acc.get(lab, F(0)) + eps * v
                    if w:
                        acc[lab] = w
                    else:
                        acc.pop(lab, None)
        return acc

    def evaluate(a, args):
        return _apply_cols(pcols, 0, _tree_sum(args))

    meta = {"cap": cap,
            "source_arities": L.arities,
            "side_conditions": {k: v for k, v in verify_retract(r).items()
                                if k.startswith("side_")}}
    return LInfinityStructure(r.small, range(2, cap + 1), evaluate,
                              support=None, meta=meta)


def brute_force_transfer(L, r, a):
    """Unrolled transfer at arities 2 and 3, coded term by term as an
    independent route for the tree enumerator.  Returns the dense tensor
    as a dict over sorted basis tuples of the small complex."""
    if a not in (2, 3):
        raise ConfigError("pre: a in {2, 3}")
    icols = _col_table(r.incl)
    pcols = _col_table(r.proj)
    hcols = _col_table(r.homotopy)

    def inc(lab):
        deg, i = lab
        return {(deg, row): v for row, v in icols.get(deg, {}).get(i, ())}

    small = []
    for deg in r.small.space.degrees():
        small.extend((deg, i) for i in range(r.small.space.dim(deg)))
    out = {}
    for key in combinations_with_replacement(small, a):
        if a == 2:
            vec = _bracket_on_vectors(L, 2, [inc(key[0]), inc(key[1])])
        else:
            v1, v2, v3 = (inc(k) for k in key)
            p2, p3 = key[1][0] % 2, key[2][0] % 2
            vec = _bracket_on_vectors(L, 3, [v1, v2, v3]) if L.max_arity >= 3 \
                else {}
            trees = [
                (1, v3, v1, v2),
                (-1 if (p2 and p3) else 1, v2, v1, v3),
                (1, v1, v2, v3),
            ]
            for eps, outer, ia, ib in trees:
                innerv = _apply_cols(
                    hcols, -1, _bracket_on_vectors(L, 2, [ia, ib]))
                for lab, v in _bracket_on_vectors(
                        L, 2, [innerv, outer]).items():
                    w = vec.get(lab, F(0)) + eps * v
                    if w:
                        vec[lab] = w
                    else:
                        vec.pop(lab, None)
        out[key] = _apply_cols(pcols, 0, vec)
    return out


def cyclic_pairing(theory):
    """The stored pairing with the scalar pair in the uniform orientation.

    The stored form orients the scalar pair opposite to the gauge and
    ghost pairs; that relative sign makes omega(dx, y) + omega(x, dy) = 0
    hold unsigned, which is the law the breaking retract transports.  The
    bracket family is polarized against the uniform orientation instead,
    which obeys the parity-signed version of the same law (the arity-one
    case of the rotation law), so this is the form under which
    cyclicity_residual vanishes.  The two laws agree on even inputs and
    part ways in the ghost sector, which is why each law picks out its
    own scalar-corner sign.
    """
    lay = theory.layout
    try:
        s0 = lay.slot(0, "scalar")
        s1 = lay.slot(1, "scalar*")
    except (KeyError, StopIteration):
        raise ConfigError("pre: layout carries a scalar pair")
    rows = range(s0.offset, s0.offset + s0.dim)
    cols = range(s1.offset, s1.offset + s1.dim)
    b0 = theory.pairing.block(0)
    flip = SparseMatrix(b0.rows, b0.cols)
    for (i, j), v in b0.data.items():
        flip.data[(i, j)] = -v if (i in rows and j in cols) else v
    return ShiftedSymplecticPairing(
        theory.complex.space, {-1: theory.pairing.block(-1), 0: flip},
        theory.pairing.sign)


def build_linf(theory):
    """Bracket family of a coupled gauge plus scalar theory on the
    invariant-form backend.

    The action is assembled as a supercommutative polynomial in one
    coordinate per basis vector: mass and current terms from the covariant
    scalar kinetic term, the quartic potential, the quartic curvature
    term, and the ghost couplings.  Brackets are Taylor coefficients of
    the homological vector field obtained by contracting the right
    derivative of the action with an inverse pairing.

    The scalar pair enters the stored pairing with the opposite
    orientation, and no single sign rule polarizes against that form
    directly.  Instead the polarization runs against the uniform
    orientation (cyclic_pairing), the action is taken at the reflected
    vacuum, and the resulting field is conjugated by the reflection of
    the scalar pair.  The reflection is orthogonal for the uniform
    orientation, so the conjugation preserves every Jacobi identity, and
    the quadratic vertex is required to land exactly on the differential
    block for block.
    """
    model = theory.model
    if not isinstance(model, InvariantFormModel):
        raise ConfigError("pre: brackets are defined on the invariant-form "
                          "backend only")
    if theory.lie is None or theory.vacuum is None:
        raise ConfigError("pre: theory carries Lie data and a vacuum")
    lay = theory.layout
    needed = {-1: ["ghost"], 0: ["gauge", "scalar"],
              1: ["gauge*", "scalar*"], 2: ["ghost*"]}
    for deg, names in needed.items():
        for name in names:
            try:
                lay.slot(deg, name)
            except (KeyError, StopIteration):
                raise ConfigError("pre: layout misses the %s sector" % name)

    lie = theory.lie
    vac = theory.vacuum
    g, rdim = lie.dim_g, lie.dim_r
    P, kap = lie.rep_pairing, lie.killing
    sig = vac.sigma
    phi0 = [F(x) for x in vac.phi0]
    n = model.n
    pot = F(theory.pot_sign)

    space = theory.complex.space
    degrees = sorted(space.degrees())
    off = {}
    nvars = 0
    for d in degrees:
        off[d] = nvars
        nvars += space.dim(d)
    labels = [None] * nvars
    par = [0] * nvars
    for d in degrees:
        for i in range(space.dim(d)):
            labels[off[d] + i] = (d, i)
            par[off[d] + i] = _parity(d)

    def var(deg, slot_name, form_idx, internal_idx):
        s = lay.slot(deg, slot_name)
        return off[deg] + s.offset + form_idx * s.internal + internal_idx

    s0 = lay.slot(0, "scalar")
    s1 = lay.slot(1, "scalar*")
    scalar_vars = set(range(off[0] + s0.offset, off[0] + s0.offset + s0.dim))
    scalar_vars |= set(range(off[1] + s1.offset, off[1] + s1.offset + s1.dim))

    # polarize against the uniform orientation of the pairing
    uni = cyclic_pairing(theory)
    W = SparseMatrix(nvars, nvars)
    for d in degrees:
        blk = uni.block(d)
        if 1 - d not in off:
            if blk.data:
                raise StructureError("pairing pairs degree %d out of range"
                                     % d)
            continue
        for (i, j), v in blk.data.items():
            W.data[(off[d] + i, off[1 - d] + j)] = v
    omega_inv = invert_dense(W)

    # reflection of the scalar pair; orthogonal for the reference form
    refl = [1] * nvars
    for i in scalar_vars:
        refl[i] = -1

    # form factors
    fs1 = model.pairing_matrix(1) @ model.star_matrix(1)
    f0 = (model.pairing_matrix(0) @ model.star_matrix(0)).data.get(
        (0, 0), F(0))
    pn1 = model.pairing_matrix(n - 1)
    w2 = model.wedge_matrix(1, 1)
    g2 = w2.transpose() @ (model.pairing_matrix(2) @ model.star_matrix(2)) \
        @ w2
    f1 = model.form_dim(1)

    # internal factors
    spT = sig.transpose() @ P
    km = spT @ sig
    pphi = P.apply(phi0)
    norm2 = sum(a * b for a, b in zip(phi0, pphi))
    defect = F(1, 2) * (norm2 - F(theory.m) ** 2)
    rho = lie.generators
    fk = [[[F(0)] * g for _ in range(g)] for _ in range(g)]
    for a in range(g):
        for b in range(g):
            row = lie.structure[a][b]
            for m_, coeff in enumerate(row):
                if not coeff:
                    continue
                for (mm, l), kv in kap.data.items():
                    if mm == m_:
                        fk[a][b][l] += F(coeff) * kv

    S = _Poly(par)

    # gauge mass term, half the square of the frozen scalar current
    for (w, v), fv in fs1.data.items():
        for (i, j), kv in km.data.items():
            S.add(F(1, 2) * fv * kv,
                  (var(0, "gauge", w, i), var(0, "gauge", v, j)))
    # scalar mass term, the second variation of the potential
    for s in range(rdim):
        for t in range(rdim):
            c = pot * f0 * (F(1, 2) * pphi[s] * pphi[t]
                            + F(1, 2) * defect * P.data.get((s, t), F(0)))
            if c:
                S.add(c, (var(0, "scalar", 0, s), var(0, "scalar", 0, t)))
    # antifield source of the frozen gauge orbit, at the reflected vacuum
    psig = P @ sig
    for (u, j), v in psig.data.items():
        S.add(-v, (var(1, "scalar*", 0, u), var(-1, "ghost", 0, j)))

    # cubic current: reflected frozen leg against a moving scalar leg
    for (w, v), fv in fs1.data.items():
        for j in range(g):
            m_ = spT @ rho[j]
            for (i, s), mv in m_.data.items():
                S.add(-fv * mv, (var(0, "gauge", w, i),
                                 var(0, "gauge", v, j),
                                 var(0, "scalar", 0, s)))
    # cubic potential, odd in the vacuum
    for s in range(rdim):
        if not pphi[s]:
            continue
        for (t, u), pv in P.data.items():
            S.add(-F(1, 2) * pot * f0 * pphi[s] * pv,
                  (var(0, "scalar", 0, s), var(0, "scalar", 0, t),
                   var(0, "scalar", 0, u)))
    # ghost rotation of the gauge field, sourced on its antifield; sign
    # pinned like the ghost self-bracket, by the adjoint arity-3 relation
    for (v, w), pv in pn1.data.items():
        for i in range(g):
            for j in range(g):
                for l in range(g):
                    c = pv * fk[i][j][l]
                    if c:
                        S.add(-c, (var(1, "gauge*", v, l),
                                   var(0, "gauge", w, i),
                                   var(-1, "ghost", 0, j)))
    # ghost rotation of the scalar, sourced on its antifield
    for j in range(g):
        pr = P @ rho[j]
        for (u, s), pv in pr.data.items():
            S.add(pv, (var(1, "scalar*", 0, u), var(-1, "ghost", 0, j),
                       var(0, "scalar", 0, s)))
    # ghost self-bracket on its antifield; the sign is pinned by the
    # arity-2 relation against the ghost action on the scalar
    for i in range(g):
        for j in range(g):
            for l in range(g):
                c = fk[i][j][l]
                if c:
                    S.add(-F(1, 2) * c, (var(2, "ghost*", 0, l),
                                         var(-1, "ghost", 0, i),
                                         var(-1, "ghost", 0, j)))

    # quartic curvature term
    ffk = {}
    for i in range(g):
        for j in range(g):
            for k in range(g):
                for l in range(g):
                    c = sum(fk[i][j][b] * F(lie.structure[k][l][b])
                            for b in range(g))
                    if c:
                        ffk[(i, j, k, l)] = c
    if ffk:
        for (p_, q_), gv in g2.data.items():
            w, v = divmod(p_, f1)
            u, z = divmod(q_, f1)
            for (i, j, k, l), c in ffk.items():
                S.add(F(1, 16) * gv * c,
                      (var(0, "gauge", w, i), var(0, "gauge", v, j),
                       var(0, "gauge", u, k), var(0, "gauge", z, l)))
    # quartic seagull
    for (w, v), fv in fs1.data.items():
        for i in range(g):
            for j in range(g):
                rr = rho[i].transpose() @ P @ rho[j]
                for (s, t), rv in rr.data.items():
                    S.add(F(1, 2) * fv * rv,
                          (var(0, "gauge", w, i), var(0, "scalar", 0, s),
                           var(0, "gauge", v, j), var(0, "scalar", 0, t)))
    # quartic potential
    for (s, t), pv in P.data.items():
        for (u, v_), qv in P.data.items():
            S.add(F(1, 8) * pot * f0 * pv * qv,
                  (var(0, "scalar", 0, s), var(0, "scalar", 0, t),
                   var(0, "scalar", 0, u), var(0, "scalar", 0, v_)))

    # homological vector field: contract the right derivative with the
    # inverse pairing, then conjugate by the scalar reflection
    derivs = {}
    for j in range(nvars):
        dj = S.right_deriv(j)
        if dj.terms:
            derivs[j] = dj
    qfield = {}
    for k in range(nvars):
        acc = _Poly(par)
        for j, dj in derivs.items():
            c = omega_inv.data.get((k, j))
            if not c:
                continue
            for mono, v in dj.terms.items():
                w = acc.terms.get(mono, F(0)) + c * v
                if w:
                    acc.terms[mono] = w
                else:
                    acc.terms.pop(mono, None)
        if acc.terms:
            out = _Poly(par)
            for mono, v in acc.terms.items():
                sgn = refl[k]
                for m in mono:
                    sgn *= refl[m]
                out.terms[mono] = sgn * v
            qfield[k] = out

    # the quadratic vertex must reproduce the differential exactly
    blocks = {}
    for k, poly in qfield.items():
        dk, ik = labels[k]
        for mono, v in poly.terms.items():
            if len(mono) != 1:
                continue
            dj, ij = labels[mono[0]]
            if dj + 1 != dk:
                raise StructureError(
                    "quadratic vertex shifts degree %d to %d" % (dj, dk))
            blocks.setdefault(dj, SparseMatrix(
                space.dim(dj + 1), space.dim(dj))).data[(ik, ij)] = v
    derived = GradedLinearMap(space, space, 1, blocks)
    if not derived.same_blocks(theory.complex.d):
        raise StructureError("quadratic vertex disagrees with the "
                             "differential; polarization orientation broken")

    support = {}
    for k, poly in qfield.items():
        for mono, _v in poly.terms.items():
            a = len(mono)
            if a >= 2:
                support.setdefault(a, set()).add(
                    tuple(sorted(labels[m][0] for m in mono)))
    arities = sorted(support)

    def evaluate(a, args):
        out = {}
        D = sum(d for d, _ in args) + 1
        if D not in off or space.dim(D) == 0:
            return out
        vs = [off[d] + i for d, i in args]
        for i in range(space.dim(D)):
            poly = qfield.get(off[D] + i)
            if poly is None:
                continue
            for vv in vs:
                poly = poly.left_deriv(vv)
                if not poly.terms:
                    break
            c = poly.constant()
            if c:
                out[(D, i)] = c
        return out

    meta = {"conventions": [
        "brackets are graded symmetric of degree +1 with Koszul signs "
        "from the complex degree mod 2",
        "the relation checker uses the plain unshuffle sum with no "
        "arity-dependent prefactors",
        "polarization: right derivative of the reflected-vacuum action "
        "against the uniform pairing orientation (cyclic_pairing), "
        "conjugated by the scalar-pair reflection; pinned by the "
        "quadratic vertex matching the differential",
    ]}
    return LInfinityStructure(theory.complex, arities, evaluate,
                              support=support, meta=meta)
