"""Bracket families, relation checkers, the rotation law, and homotopy
transfer.

Frozen expectations and where they come from:

* the abelian ghost acts on the scalar doublet by the weight-one
  rotation, so b2(c, eta0) = eta1 and b2(c, eta1) = -eta0;
* cubic potential brackets at the vacuum (1, 0): the third derivative
  of the radial quartic sends (eta0, eta0) to 3 phi*_0 and
  (eta0, eta1) to phi*_1 (the radial direction collects the full
  triple product, the transverse one a single factor);
* the cubic gauge bracket is a quarter of the S3 sum of
  [A ^ star[A ^ A]], recomputed here from wedge, star, and structure
  constants without going through the action polynomial;
* the stored pairing orients the scalar pair opposite to the gauge and
  ghost pairs, so the rotation law holds for cyclic_pairing and fails
  for the stored form, worst residual 4 = twice the doubled corner
  coefficient of the radial cubic vertex;
* a single bumped coefficient gives relation and rotation residuals of
  exactly 1, including the bump that only a middle pairing slot of a
  sorted tuple can see;
* transfer comparisons (identity retract, hand-enumerated trees, the
  reduced-model differential) are exact dictionary equalities.
"""
from fractions import Fraction
from itertools import combinations_with_replacement, permutations

import pytest
from hypothesis import given, settings, strategies as st

from bvhiggs.graded import (
    ConfigError, DeformationRetract, GradedLinearMap, StructureError,
)
from bvhiggs.invforms import build_invariant_model
from bvhiggs.lattice import build_lattice
from bvhiggs.liealg import named_algebra
from bvhiggs.linalg import SparseMatrix
from bvhiggs.linf import (
    LInfinityStructure, brute_force_transfer, build_linf, cyclic_pairing,
    cyclicity_residual, homotopy_transfer, linf_residual,
)
from bvhiggs.theories import (
    attach_brackets, build_retract_maps, build_ymh,
)

F = Fraction

# built once; every consumer treats them as read-only
_CACHE = {}


def theory(which):
    if which not in _CACHE:
        if which == "u1":
            th = build_ymh(build_invariant_model(2), named_algebra("u1"),
                           1, [1, 0])
        else:
            th = build_ymh(build_invariant_model(3), named_algebra("su2"),
                           2, [0, 0, 2, 0])
        _CACHE[which] = (th, build_linf(th))
    return _CACHE[which]


def identity_retract(cx):
    sp = cx.space
    eye = {k: SparseMatrix(sp.dim(k), sp.dim(k),
                           {(i, i): F(1) for i in range(sp.dim(k))})
           for k in sp.degrees()}
    return DeformationRetract(
        big=cx, small=cx,
        incl=GradedLinearMap(sp, sp, 0, dict(eye)),
        proj=GradedLinearMap(sp, sp, 0, dict(eye)),
        homotopy=GradedLinearMap(sp, sp, -1, {}))


# u1 basis labels in degree order: ghost; gauge 0-1, scalar 2-3;
# gauge* 0-1, scalar* 2-3; ghost*
C = (-1, 0)
A0, A1, E0, E1 = (0, 0), (0, 1), (0, 2), (0, 3)


# ----------------------------------------------------------------------
# quadratic brackets against direct representation data


class TestQuadratic:
    def test_ghost_rotation_abelian(self):
        _, L = theory("u1")
        assert L.bracket(2, (C, E0)) == {E1: F(1)}
        assert L.bracket(2, (C, E1)) == {E0: F(-1)}

    def test_potential_cubic_abelian(self):
        _, L = theory("u1")
        assert L.bracket(2, (E0, E0)) == {(1, 2): F(3)}
        assert L.bracket(2, (E0, E1)) == {(1, 3): F(1)}
        # even arguments commute on the nose
        assert L.bracket(2, (E1, E0)) == L.bracket(2, (E0, E1))

    def test_ghost_ghost_nonabelian(self):
        th, L = theory("su2")
        lie = th.lie
        for a in range(3):
            for b in range(3):
                got = L.bracket(2, ((-1, a), (-1, b)))
                want = {(-1, c): F(v)
                        for c, v in enumerate(lie.structure[a][b]) if v}
                assert got == want

    def test_ghost_gauge_nonabelian(self):
        th, L = theory("su2")
        lie = th.lie
        g = lie.dim_g
        s = th.layout.slot(0, "gauge")
        for w in range(th.model.form_dim(1)):
            for a in range(g):
                for b in range(g):
                    got = L.bracket(2, ((-1, a), (0, s.offset + w * g + b)))
                    want = {(0, s.offset + w * g + c): F(v)
                            for c, v in enumerate(lie.structure[a][b]) if v}
                    assert got == want

    def test_lie_legs_vanish_abelian(self):
        _, L = theory("u1")
        assert L.bracket(2, (C, A0)) == {}
        assert L.bracket(2, (C, A1)) == {}
        assert L.bracket(3, (A0, A0, A1)) == {}
        assert L.bracket(3, (A0, A1, E0)) == {}


# ----------------------------------------------------------------------
# the cubic gauge bracket against the wedge calculus


def wedge_cubic(th, picks):
    """Quarter of the S3 sum of [A1 ^ star[A2 ^ A3]] on (form, internal)
    pairs, straight from wedge, star, and structure constants."""
    model, lie = th.model, th.lie
    f1 = model.form_dim(1)
    w11 = model.wedge_matrix(1, 1)
    star2 = model.star_matrix(2)

    def wedge_lie(x, y):
        out = {}
        for (fx, cx), vx in x.items():
            for (fy, cy), vy in y.items():
                for (row, col), wv in w11.data.items():
                    if col != fx * f1 + fy:
                        continue
                    for c, s in enumerate(lie.structure[cx][cy]):
                        if s:
                            k = (row, c)
                            out[k] = out.get(k, F(0)) + vx * vy * wv * F(s)
        return {k: v for k, v in out.items() if v}

    acc = {}
    for t1, t2, t3 in permutations(picks):
        inner = wedge_lie({t2: F(1)}, {t3: F(1)})
        starred = {}
        for (fi, c), v in inner.items():
            for (row, col), sv in star2.data.items():
                if col == fi:
                    k = (row, c)
                    starred[k] = starred.get(k, F(0)) + v * sv
        for k, v in wedge_lie({t1: F(1)}, starred).items():
            acc[k] = acc.get(k, F(0)) + F(1, 4) * v
    return {k: v for k, v in acc.items() if v}


class TestCubic:
    def test_gauge_cubic_matches_wedge_oracle(self):
        th, L = theory("su2")
        g = th.lie.dim_g
        s0 = th.layout.slot(0, "gauge")
        s1 = th.layout.slot(1, "gauge*")
        gauge = [(f, i) for f in range(th.model.form_dim(1))
                 for i in range(g)]
        for picks in combinations_with_replacement(gauge, 3):
            args = tuple((0, s0.offset + f * g + i) for f, i in picks)
            want = {(1, s1.offset + f * g + c): v
                    for (f, c), v in wedge_cubic(th, picks).items()}
            assert L.bracket(3, args) == want


# ----------------------------------------------------------------------
# generalized Jacobi relations


class TestRelations:
    @pytest.mark.parametrize("which", ["u1", "su2"])
    def test_all_relations_vanish(self, which):
        _, L = theory(which)
        for n in range(1, 6):
            r = linf_residual(L, n)
            assert r.n == n
            assert r.value == 0
            assert r.witness is None

    def test_arity_window_is_checked(self):
        _, L = theory("u1")
        with pytest.raises(ConfigError):
            linf_residual(L, 0)
        with pytest.raises(ConfigError):
            linf_residual(L, 6)

    def test_sampled_path_agrees(self):
        _, L = theory("u1")
        r = linf_residual(L, 3, dense_limit=1, samples=200, seed=5)
        assert r.value == 0

    def test_bumped_coefficient_is_caught(self):
        _, L = theory("u1")
        P = L.perturbed(2, (E0, E1), (1, 2), 1)
        assert P.meta["perturbed"] == (2, (E0, E1), (1, 2))
        assert linf_residual(P, 2).value == 1
        assert linf_residual(P, 3).value == 2


# ----------------------------------------------------------------------
# rotation law of the pairing slot


class TestRotation:
    @pytest.mark.parametrize("which", ["u1", "su2"])
    def test_rotation_law_holds(self, which):
        th, L = theory(which)
        om = cyclic_pairing(th)
        for a in (2, 3):
            assert cyclicity_residual(L, om, a).value == 0

    def test_stored_orientation_is_not_the_cyclic_one(self):
        th, L = theory("u1")
        assert cyclicity_residual(L, th.pairing, 2).value == 4

    def test_bumped_quadratic_is_caught(self):
        th, L = theory("u1")
        P = L.perturbed(2, (E0, E1), (1, 2), 1)
        assert cyclicity_residual(P, cyclic_pairing(th), 2).value == 1

    def test_bumped_cubic_caught_in_a_middle_slot(self):
        # the pairing partner of this bump cannot reach either end of a
        # sorted tuple, so the end-to-end comparison alone would miss it
        th, L = theory("u1")
        P = L.perturbed(3, (A0, A1, E0), (1, 0), 1)
        r = cyclicity_residual(P, cyclic_pairing(th), 3)
        assert r.value == 1
        assert r.witness == (A0, A1, A1, E0)

    def test_arity_bounds(self):
        th, L = theory("u1")
        om = cyclic_pairing(th)
        with pytest.raises(ConfigError):
            cyclicity_residual(L, om, 1)
        with pytest.raises(ConfigError):
            cyclicity_residual(L, om, 4)


# ----------------------------------------------------------------------
# graded symmetry as a property


def _pools():
    if "pools" not in _CACHE:
        _, L = theory("su2")
        basis = list(L.basis())
        pool = [(2, t) for t in combinations_with_replacement(basis, 2)
                if L.bracket(2, t)]
        pool += [(3, t) for t in combinations_with_replacement(basis, 3)
                 if L.bracket(3, t)]
        _CACHE["pools"] = pool
    return _CACHE["pools"]


def _independent_sign(order, pars):
    sign = 1
    for i in range(len(order)):
        for j in range(i + 1, len(order)):
            if order[i] > order[j] and pars[order[i]] and pars[order[j]]:
                sign = -sign
    return sign


class TestSymmetry:
    @settings(max_examples=60, deadline=None)
    @given(data=st.data())
    def test_permuting_arguments_costs_the_koszul_sign(self, data):
        _, L = theory("su2")
        a, t = data.draw(st.sampled_from(_pools()))
        order = data.draw(st.permutations(range(a)))
        pars = [d % 2 for d, _ in t]
        sign = _independent_sign(list(order), pars)
        base = L.bracket(a, t)
        got = L.bracket(a, tuple(t[k] for k in order))
        assert got == {k: sign * v for k, v in base.items()}


# ----------------------------------------------------------------------
# homotopy transfer


class TestTransfer:
    def test_identity_retract_returns_the_structure(self):
        th, L = theory("u1")
        T = homotopy_transfer(L, identity_retract(th.complex), cap=3)
        basis = list(L.basis())
        for a in (2, 3):
            for t in combinations_with_replacement(basis, a):
                assert T.bracket(a, t) == L.bracket(a, t)

    @pytest.mark.parametrize("which", ["u1", "su2"])
    def test_matches_hand_enumerated_trees(self, which):
        th, L = theory(which)
        r = build_retract_maps(th)
        T = homotopy_transfer(L, r, cap=3)
        for a in (2, 3):
            for key, vec in brute_force_transfer(L, r, a).items():
                assert T.bracket(a, key) == vec

    @pytest.mark.parametrize("which", ["u1", "su2"])
    def test_transferred_differential_is_the_reduced_one(self, which):
        th, L = theory(which)
        r = build_retract_maps(th)
        T = homotopy_transfer(L, r, cap=4)
        d = r.meta["small_theory"].complex.d
        for deg, i in T.basis():
            want = {(deg + 1, row): v
                    for (row, col), v in d.block(deg).data.items()
                    if col == i}
            assert T.bracket(1, ((deg, i),)) == want

    @pytest.mark.parametrize("which", ["u1", "su2"])
    def test_transferred_relations_vanish(self, which):
        th, L = theory(which)
        T = homotopy_transfer(L, build_retract_maps(th), cap=4)
        for n in range(1, 5):
            assert linf_residual(T, n).value == 0

    def test_side_conditions_reported(self):
        th, L = theory("u1")
        T = homotopy_transfer(L, build_retract_maps(th), cap=2)
        assert T.meta["side_conditions"] == {"side_proj_h": 0.0,
                                             "side_h_incl": 0.0}
        assert T.meta["cap"] == 2
        assert T.meta["source_arities"] == (2, 3)

    def test_cap_and_space_guards(self):
        th, L = theory("u1")
        th2, L2 = theory("su2")
        r = build_retract_maps(th)
        with pytest.raises(ConfigError):
            homotopy_transfer(L, r, cap=1)
        with pytest.raises(ConfigError):
            homotopy_transfer(L2, r, cap=3)

    def test_cap_sets_the_arities(self):
        th, L = theory("u1")
        T = homotopy_transfer(L, build_retract_maps(th), cap=4)
        assert tuple(T.arities) == (2, 3, 4)

    def test_brute_force_arity_guard(self):
        th, L = theory("u1")
        with pytest.raises(ConfigError):
            brute_force_transfer(L, build_retract_maps(th), 4)

    def test_brute_force_without_cubic_or_homotopy(self):
        th, L = theory("u1")
        quad = LInfinityStructure(
            th.complex, (2,),
            lambda a, t: dict(L.bracket(2, t)) if a == 2 else {})
        B = brute_force_transfer(quad, identity_retract(th.complex), 3)
        assert all(not vec for vec in B.values())


# ----------------------------------------------------------------------
# assembling brackets onto a theory


class TestAttach:
    def test_attach_validates_and_stores(self):
        th = build_ymh(build_invariant_model(2), named_algebra("u1"),
                       1, [1, 0])
        out = attach_brackets(th, [1, 0])
        assert out is th
        assert th.brackets is not None
        assert th.brackets.max_arity == 3
        assert tuple(th.brackets.arities) == (2, 3)

    def test_vacuum_mismatch_rejected(self):
        th = build_ymh(build_invariant_model(2), named_algebra("u1"),
                       1, [1, 0])
        with pytest.raises(ConfigError):
            attach_brackets(th, [0, 1])

    def test_lattice_backend_rejected(self):
        th = build_ymh(build_lattice(2, 2), named_algebra("u1"), 1, [1, 0])
        with pytest.raises(ConfigError):
            attach_brackets(th)

    def test_tampered_differential_is_refused(self):
        # the quadratic vertex must land exactly on the differential;
        # scaling one block entry has to break the build
        th = build_ymh(build_invariant_model(2), named_algebra("u1"),
                       1, [1, 0])
        blk = th.complex.d.block(-1)
        key, val = next(iter(blk.data.items()))
        blk.data[key] = val * 2
        with pytest.raises(StructureError):
            build_linf(th)
