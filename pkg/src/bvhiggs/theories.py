"""Linearized gauge-theory complexes around a vacuum, as block matrices.

Each builder lays out a graded space from (sector, form degree, internal
dimension) slots over a geometry backend (lattice or invariant forms),
fills in the differential blocks, and machine-checks d^2 = 0 before
handing anything back.  The sign conventions of the cross blocks are not
taken on faith: build_ymh assembles every candidate in a small declared
family and keeps the one that squares to zero, recording whether the data
determined it uniquely.

The broken model, the regrouping change of basis, the deformation retract
between the two, and the interpolating family all live here too, each one
cross-checked against an independently computed partner.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.linalg

from .graded import (
    CochainComplex, ConfigError, DeformationRetract, GradedLinearMap,
    GradedVectorSpace, ShiftedSymplecticPairing, StructureError,
    check_complex, conjugate_complex, perturb_retract,
)
from .lattice import LatticeTorusModel, plane_wave_symbol
from .linalg import SparseMatrix, invert_dense
from .liealg import LieTheoryData, VacuumData, vacuum_decompose
from .linf import build_linf, cyclic_pairing, cyclicity_residual, \
    linf_residual

F = Fraction


@dataclass(frozen=True)
class Slot:
    name: str
    form_deg: int
    internal: int
    dim: int
    offset: int


class Layout:
    """Per-degree slot bookkeeping: names, form degrees, offsets."""

    def __init__(self, model, spec: dict):
        self.model = model
        self.slots = {}
        for deg, entries in spec.items():
            out = []
            off = 0
            for name, form_deg, internal in entries:
                dim = model.form_dim(form_deg) * internal
                out.append(Slot(name, form_deg, internal, dim, off))
                off += dim
            self.slots[deg] = out

    def degrees(self):
        return sorted(self.slots)

    def dim(self, deg) -> int:
        return sum(s.dim for s in self.slots.get(deg, ()))

    def slot(self, deg, name) -> Slot:
        for s in self.slots[deg]:
            if s.name == name:
                return s
        raise KeyError("no slot %r in degree %d" % (name, deg))

    def sector_of(self, deg, i) -> str:
        for s in self.slots[deg]:
            if s.offset <= i < s.offset + s.dim:
                return s.name
        raise IndexError("index %d out of range in degree %d" % (i, deg))

    def space(self) -> GradedVectorSpace:
        return GradedVectorSpace({deg: self.dim(deg) for deg in self.slots})

    def assemble(self, deg_src: int, entries: dict) -> SparseMatrix:
        """Block matrix from degree deg_src to deg_src + 1 out of
        (target slot, source slot) -> SparseMatrix pieces."""
        out = SparseMatrix(self.dim(deg_src + 1), self.dim(deg_src))
        for (tname, sname), blk in entries.items():
            t = self.slot(deg_src + 1, tname)
            s = self.slot(deg_src, sname)
            if (blk.rows, blk.cols) != (t.dim, s.dim):
                raise ValueError("block %s<-%s is %dx%d, slot wants %dx%d"
                                 % (tname, sname, blk.rows, blk.cols,
                                    t.dim, s.dim))
            for (i, j), v in blk.data.items():
                out.data[(t.offset + i, s.offset + j)] = v
        return out


def sector_group(name: str) -> str:
    """Pairing sector of a slot: strip the dual star and any subspace
    suffix, e.g. gauge_perp* -> gauge."""
    return name.rstrip("*").split("_")[0]


@dataclass
class BVTheory:
    kind: str
    model: object
    layout: Layout
    complex: CochainComplex
    pairing: ShiftedSymplecticPairing = None
    lie: LieTheoryData = None
    vacuum: VacuumData = None
    m: Fraction = None
    pot_sign: int = 1
    brackets: object = None
    meta: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.model.n

    def sector_of(self, deg, i):
        return self.layout.sector_of(deg, i)


def _check_square(layout, cx, what):
    res = check_complex(cx)
    if res:
        worst = (cx.d @ cx.d).argmax()
        deg, i, j = worst
        raise StructureError(
            "%s: d^2 fails (residual %g) on the composite %s <- %s "
            "starting at degree %d" % (what, res,
                                       layout.sector_of(deg + 2, i),
                                       layout.sector_of(deg, j), deg))


def _identity(n):
    return SparseMatrix.identity(n)


def _form_ops(model):
    """The composed form-side operators every builder needs."""
    n = model.n
    d0 = model.d_matrix(0)
    d_top = model.d_matrix(n - 1)
    star1 = model.star_matrix(1)
    star0 = model.star_matrix(0)
    # one-form flow d star d : degree 1 -> n-1, and its scalar analogue
    dsd1 = model.d_matrix(n - 2) @ model.star_matrix(2) @ model.d_matrix(1)
    dsd0 = d_top @ star1 @ d0
    return {"d0": d0, "d_top": d_top, "star1": star1, "star0": star0,
            "dsd1": dsd1, "dsd0": dsd0,
            "id0": _identity(model.form_dim(0)),
            "idn": _identity(model.form_dim(n))}


def _hessian(phi0, pairing, m, pot_sign):
    """Second variation of the quartic potential at phi0: the radial
    projector plus the sphere defect term, with the declared overall sign."""
    r = len(phi0)
    pphi = pairing.apply(phi0)
    norm2 = sum(x * y for x, y in zip(phi0, pphi))
    defect = F(1, 2) * (norm2 - F(m) * F(m))
    out = SparseMatrix(r, r)
    for i in range(r):
        for j in range(r):
            v = phi0[i] * pphi[j]
            if i == j:
                v = v + defect
            if v:
                out.data[(i, j)] = F(pot_sign) * v
    return out


def _require_critical(phi0, pairing, m):
    if all(x == 0 for x in phi0):
        return True
    pphi = pairing.apply(phi0)
    norm2 = sum(x * y for x, y in zip(phi0, pphi))
    if norm2 != F(m) * F(m):
        raise ConfigError(
            "vacuum candidate does not solve the stationarity equations: "
            "|phi0|^2 = %s but m^2 = %s" % (norm2, F(m) * F(m)))
    return False


def build_gl(model, m, phi0, pot_sign: int = -1) -> BVTheory:
    """Scalar Landau theory: fluctuation operator of the quartic well,
    with only a global symmetry to break."""
    phi0 = [F(x) for x in phi0]
    r = len(phi0)
    if r == 0:
        raise ConfigError("scalar theory needs at least one field component")
    pairing = _identity(r)
    degenerate = _require_critical(phi0, pairing, m)
    ops = _form_ops(model)
    n = model.n
    layout = Layout(model, {0: [("scalar", 0, r)], 1: [("scalar*", n, r)]})
    hess = _hessian(phi0, pairing, m, pot_sign)
    d0 = layout.assemble(0, {("scalar*", "scalar"):
                             ops["dsd0"].kron(_identity(r))
                             + ops["star0"].kron(hess)})
    sp = layout.space()
    cx = CochainComplex(sp, GradedLinearMap(sp, sp, 1, {0: d0}))
    # scalar antifield block carries the opposite sign from a gauge-sector
    # block; forced by omega(dx,y) + omega(x,dy) = 0, uniform across builders
    om = ShiftedSymplecticPairing(
        sp, {0: model.pairing_matrix(0).kron(_identity(r)).scale(F(-1))})
    meta = {"degenerate_vacuum": degenerate,
            "conventions": [
                "scalar flow: d star d plus star times the potential "
                "Hessian at the vacuum",
            ]}
    return BVTheory(kind="gl", model=model, layout=layout, complex=cx,
                    pairing=om, m=F(m), pot_sign=pot_sign, meta=meta)


def build_ym_pure(model, lie: LieTheoryData, background=None) -> BVTheory:
    """Pure gauge theory around a flat constant background connection.

    background is a list of n coefficient vectors in the algebra; their
    pairwise brackets must vanish (a curvature obstruction is a hard
    error), which makes the twisted coboundary square to zero.
    """
    g = lie.dim_g
    n = model.n
    ops = _form_ops(model)
    ads = []
    if background is not None:
        if len(background) != n:
            raise ConfigError("background needs one component per axis")
        coeffs = [[F(x) for x in c] for c in background]
        for i in range(n):
            for j in range(i + 1, n):
                br = lie.bracket(coeffs[i], coeffs[j])
                if any(br):
                    raise ConfigError(
                        "background is not flat: axes %d and %d have a "
                        "nonvanishing bracket" % (i, j))
        ads = [lie.ad_matrix(c) for c in coeffs]

    def twisted(k):
        d = model.d_matrix(k).kron(_identity(g))
        for j, ad in enumerate(ads):
            if ad.is_zero():
                continue
            axis = [F(1) if idx == j else F(0) for idx in range(n)]
            d = d + _const_one_form(model, axis, k).kron(ad)
        return d

    layout = Layout(model, {
        -1: [("ghost", 0, g)], 0: [("gauge", 1, g)],
        1: [("gauge*", n - 1, g)], 2: [("ghost*", n, g)],
    })
    star2 = model.star_matrix(2).kron(_identity(g))
    dm1 = twisted(0)
    dmid = twisted(n - 2) @ star2 @ twisted(1)
    dtop = twisted(n - 1)
    sp = layout.space()
    cx = CochainComplex(sp, GradedLinearMap(sp, sp, 1,
                                            {-1: dm1, 0: dmid, 1: dtop}))
    _check_square(layout, cx, "pure gauge model")
    om = ShiftedSymplecticPairing(sp, {
        -1: model.pairing_matrix(0).kron(lie.killing),
        0: model.pairing_matrix(1).kron(lie.killing),
    })
    meta = {"background": background is not None,
            "conventions": [
                "covariant coboundary: plain coboundary plus constant "
                "one-form multiplication in the adjoint",
            ]}
    return BVTheory(kind="ym", model=model, layout=layout, complex=cx,
                    pairing=om, lie=lie, meta=meta)


def _const_one_form(model, axis_coeffs, k) -> SparseMatrix:
    """Left multiplication by a translation-invariant one-form on either
    backend, as a matrix on degree-k forms."""
    if isinstance(model, LatticeTorusModel):
        return model.cup_const_matrix(axis_coeffs, 1, k)
    dk = model.form_dim(k)
    w = model.wedge_matrix(1, k)
    out = SparseMatrix(model.form_dim(k + 1), dk)
    for (row, col), v in w.data.items():
        j, i = divmod(col, dk)
        c = axis_coeffs[j]
        if c:
            out.data[(row, i)] = out.data.get((row, i), F(0)) + v * c
    return out


def _ymh_layout(model, g, r):
    n = model.n
    return Layout(model, {
        -1: [("ghost", 0, g)],
        0: [("gauge", 1, g), ("scalar", 0, r)],
        1: [("gauge*", n - 1, g), ("scalar*", n, r)],
        2: [("ghost*", n, g)],
    })


def _ymh_differential(layout, ops, vac, hess, c2, c3):
    g = vac.data.dim_g
    r = vac.data.dim_r
    ig, ir = _identity(g), _identity(r)
    dm1 = layout.assemble(-1, {
        ("gauge", "ghost"): ops["d0"].kron(ig),
        ("scalar", "ghost"): ops["id0"].kron(vac.sigma),
    })
    d0 = layout.assemble(0, {
        ("gauge*", "gauge"): ops["dsd1"].kron(ig)
        + ops["star1"].kron(vac.m_sigma),
        ("gauge*", "scalar"): (ops["star1"] @ ops["d0"]).kron(vac.alpha)
        .scale(F(c2)),
        ("scalar*", "gauge"): (ops["d_top"] @ ops["star1"]).kron(vac.sigma)
        .scale(F(c3)),
        ("scalar*", "scalar"): ops["dsd0"].kron(ir) + ops["star0"].kron(hess),
    })
    d1 = layout.assemble(1, {
        ("ghost*", "gauge*"): ops["d_top"].kron(ig),
        ("ghost*", "scalar*"): ops["idn"].kron(vac.alpha),
    })
    return {-1: dm1, 0: d0, 1: d1}


def build_ymh(model, lie: LieTheoryData, m, vacuum,
              pot_sign: int = 1) -> BVTheory:
    """Gauge theory with a charged scalar around a critical vacuum.

    The two cross-block signs and the support of the scalar mass block are
    assembled in all candidate combinations from a declared family; d^2 = 0
    selects the surviving convention, and the search outcome is logged.  A
    zero vacuum gives the symmetric-phase model with a degenerate flag.
    """
    phi0 = [F(x) for x in vacuum]
    degenerate = _require_critical(phi0, lie.rep_pairing, m)
    vac = vacuum_decompose(lie, phi0, m)
    ops = _form_ops(model)
    layout = _ymh_layout(model, lie.dim_g, lie.dim_r)
    sp = layout.space()

    hess = _hessian(phi0, lie.rep_pairing, m, pot_sign)
    broken_mass = vac.proj_r0.scale(F(m) * F(m) * F(pot_sign))
    candidates = {}
    for c2 in (-1, 1):
        for c3 in (-1, 1):
            for support, mass in (("transverse", hess),
                                  ("broken", broken_mass)):
                blocks = _ymh_differential(layout, ops, vac, mass, c2, c3)
                d = GradedLinearMap(sp, sp, 1, blocks)
                candidates[(c2, c3, support)] = (d, (d @ d).max_residual())

    passing = sorted(key for key, (_, res) in candidates.items() if res == 0.0)
    canonical = (-1, -1, "transverse")
    d, res = candidates[canonical]
    if res:
        cx_bad = CochainComplex(sp, d)
        _check_square(layout, cx_bad, "coupled model")
    cx = CochainComplex(sp, d)

    om = ShiftedSymplecticPairing(sp, {
        -1: model.pairing_matrix(0).kron(lie.killing),
        0: layout_pairing_block(layout, model, {
            ("gauge", "gauge*"): lie.killing,
            # minus sign forced by omega(dx,y) + omega(x,dy) = 0 against
            # the scalar-gauge cross blocks of the differential
            ("scalar", "scalar*"): lie.rep_pairing.scale(F(-1)),
        }),
    })
    meta = {
        "degenerate_vacuum": degenerate,
        "vacuum_warnings": list(vac.warnings),
        "convention_search": {
            "family": "cross signs in {+1,-1}^2 and scalar mass supported "
                      "on the transverse line or the broken directions",
            "selected": canonical,
            "passing": passing,
            "unique": len(passing) == 1,
        },
        "conventions": [
            "ghost flow: exact gauge transformations and the vacuum shift",
            "both cross blocks carry minus signs, forced against the "
            "adjunction alpha sigma = m_sigma",
            "scalar mass block: potential Hessian, supported transverse "
            "to the broken directions",
        ],
    }
    return BVTheory(kind="ymh", model=model, layout=layout, complex=cx,
                    pairing=om, lie=lie, vacuum=vac, m=F(m),
                    pot_sign=pot_sign, meta=meta)


def layout_pairing_block(layout, model, internal: dict) -> SparseMatrix:
    """Degree-0 pairing: slot-diagonal blocks integral(e_i cup e_j) tensor
    an internal form, assembled so slots pair with their duals."""
    rows = layout.dim(0)
    cols = layout.dim(1)
    out = SparseMatrix(rows, cols)
    for (sname, tname), mat in internal.items():
        s = layout.slot(0, sname)
        t = layout.slot(1, tname)
        blk = model.pairing_matrix(s.form_deg).kron(mat)
        if (blk.rows, blk.cols) != (s.dim, t.dim):
            raise ValueError("pairing block shape mismatch for %s" % sname)
        for (i, j), v in blk.data.items():
            out.data[(s.offset + i, t.offset + j)] = v
    return out


def attach_brackets(theory: BVTheory, vacuum=None) -> BVTheory:
    """Assemble the bracket family on the theory and prove it on the spot.

    The quadratic and cubic brackets are read off from the action
    polynomial and validated before anything is stored: every generalized
    Jacobi sum that can be nonzero for a cubic family, and the rotation
    law of the pairing slot at both arities.  A nonzero residual is a
    hard failure naming the offending tuple, not a report entry, so a
    theory that carries brackets is safe to transfer from.
    """
    if vacuum is not None:
        if [F(x) for x in vacuum] != list(theory.vacuum.phi0):
            raise ConfigError("pre: vacuum disagrees with the theory's")
    L = build_linf(theory)
    for n in range(1, 2 * L.max_arity):
        r = linf_residual(L, n)
        if r.value:
            raise StructureError(
                "bracket relation %d fails (residual %r) on %r"
                % (n, r.value, r.witness))
    om = cyclic_pairing(theory)
    for a in L.arities:
        r = cyclicity_residual(L, om, a)
        if r.value:
            raise StructureError(
                "rotation law fails at arity %d (residual %r) on %r"
                % (a, r.value, r.witness))
    theory.brackets = L
    return theory


# ----------------------------------------------------------------------
# broken model, regrouping, retract, interpolation


def _require_reducible(vac: VacuumData):
    if vac.degenerate:
        raise ConfigError("the reduced model needs a symmetry-breaking "
                          "vacuum, not the degenerate one")
    if vac.dim_rperp != 1:
        raise ConfigError("the reduction assumes a one-dimensional "
                          "transverse scalar sector")


def _broken_layout(model, vac):
    n = model.n
    h, p = vac.dim_h, vac.dim_hperp
    return Layout(model, {
        -1: [("ghost_h", 0, h)],
        0: [("gauge_h", 1, h), ("gauge_perp", 1, p), ("scalar", 0, 1)],
        1: [("gauge_h*", n - 1, h), ("gauge_perp*", n - 1, p),
            ("scalar*", n, 1)],
        2: [("ghost_h*", n, h)],
    })


def build_broken(model, lie: LieTheoryData, m, vacuum) -> BVTheory:
    """The reduced model after symmetry breaking: residual gauge theory,
    massive vector bosons, one massive scalar; no trace of the eaten
    directions."""
    phi0 = [F(x) for x in vacuum]
    if all(x == 0 for x in phi0):
        raise ConfigError("the broken model is undefined at the symmetric "
                          "point: pass a nonzero vacuum")
    _require_critical(phi0, lie.rep_pairing, m)
    vac = vacuum_decompose(lie, phi0, m)
    _require_reducible(vac)
    ops = _form_ops(model)
    layout = _broken_layout(model, vac)
    sp = layout.space()
    h, p = vac.dim_h, vac.dim_hperp
    ih, ip, i1 = _identity(h), _identity(p), _identity(1)
    m2 = F(m) * F(m)

    dm1 = layout.assemble(-1, {("gauge_h", "ghost_h"): ops["d0"].kron(ih)})
    d0 = layout.assemble(0, {
        ("gauge_h*", "gauge_h"): ops["dsd1"].kron(ih),
        ("gauge_perp*", "gauge_perp"): ops["dsd1"].kron(ip)
        + ops["star1"].kron(vac.m_tilde),
        ("scalar*", "scalar"): (ops["dsd0"] + ops["star0"].scale(m2))
        .kron(i1).scale(F(-1)),
    })
    d1 = layout.assemble(1, {("ghost_h*", "gauge_h*"): ops["d_top"].kron(ih)})
    cx = CochainComplex(sp, GradedLinearMap(sp, sp, 1,
                                            {-1: dm1, 0: d0, 1: d1}))
    _check_square(layout, cx, "reduced model")

    kh = vac.h_basis.transpose() @ lie.killing @ vac.h_basis
    kp = vac.hperp_basis.transpose() @ lie.killing @ vac.hperp_basis
    om = ShiftedSymplecticPairing(sp, {
        -1: model.pairing_matrix(0).kron(kh),
        0: layout_pairing_block(layout, model, {
            ("gauge_h", "gauge_h*"): kh,
            ("gauge_perp", "gauge_perp*"): kp,
            ("scalar", "scalar*"): i1.scale(F(-1)),
        }),
    })
    meta = {
        "pairing_rescale": {"gauge": F(1), "ghost": F(1),
                            "scalar": F(-1) / m2},
        "conventions": [
            "residual sector blocks are Gram-weighted so gauge and ghost "
            "pairings transport with factor one",
            "the scalar block is plain up to the sector sign, so its "
            "transport factor is the inverse square of the vacuum with a "
            "minus sign",
        ],
    }
    return BVTheory(kind="broken", model=model, layout=layout, complex=cx,
                    pairing=om, lie=lie, vacuum=vac, m=F(m), meta=meta)


def _family_layout(model, vac):
    n = model.n
    h, p = vac.dim_h, vac.dim_hperp
    return Layout(model, {
        -1: [("ghost_h", 0, h), ("ghost_perp", 0, p)],
        0: [("gauge_h", 1, h), ("gauge_perp", 1, p),
            ("scalar_r0", 0, p), ("scalar_rperp", 0, 1)],
        1: [("gauge_h*", n - 1, h), ("gauge_perp*", n - 1, p),
            ("scalar_r0*", n, p), ("scalar_rperp*", n, 1)],
        2: [("ghost_h*", n, h), ("ghost_perp*", n, p)],
    })


def regroup_maps(theory: BVTheory):
    """Change of basis separating the unbroken/broken and eaten/transverse
    directions, per degree, together with its inverse and the target
    layout.  The scalar columns are scaled by the vacuum so that the eaten
    coordinate is literally the sigma image and the transverse one sits on
    the vacuum line over m^2."""
    if theory.kind != "ymh":
        raise ConfigError("regrouping applies to the coupled model")
    vac = theory.vacuum
    _require_reducible(vac)
    model = theory.model
    m2 = F(theory.m) * F(theory.m)
    h_cols = vac.h_basis
    b_cols = vac.hperp_basis
    g_dim = vac.data.dim_g
    r_dim = vac.data.dim_r

    # algebra-valued slots split [H | B]; scalar slots split
    # [sigma B | +-phi0 / m^2]
    alg = _hstack(h_cols, b_cols)
    phi_over = SparseMatrix(r_dim, 1)
    for i, x in enumerate(vac.phi0):
        if x:
            phi_over.data[(i, 0)] = x / m2
    scal0 = _hstack(vac.r0_basis, phi_over)
    scal1 = _hstack(vac.r0_basis, phi_over.scale(F(-1)))

    fam = _family_layout(model, vac)
    src = theory.layout
    plans = {
        -1: [("ghost", alg, [("ghost_h", vac.dim_h),
                             ("ghost_perp", vac.dim_hperp)])],
        0: [("gauge", alg, [("gauge_h", vac.dim_h),
                            ("gauge_perp", vac.dim_hperp)]),
            ("scalar", scal0, [("scalar_r0", vac.dim_hperp),
                               ("scalar_rperp", 1)])],
        1: [("gauge*", alg, [("gauge_h*", vac.dim_h),
                             ("gauge_perp*", vac.dim_hperp)]),
            ("scalar*", scal1, [("scalar_r0*", vac.dim_hperp),
                                ("scalar_rperp*", 1)])],
        2: [("ghost*", alg, [("ghost_h*", vac.dim_h),
                             ("ghost_perp*", vac.dim_hperp)])],
    }
    g_maps, ginv_maps = {}, {}
    for deg, plan in plans.items():
        gmat = SparseMatrix(fam.dim(deg), src.dim(deg))
        ginv = SparseMatrix(src.dim(deg), fam.dim(deg))
        for sname, cols, targets in plan:
            s = src.slot(deg, sname)
            inv = invert_dense(cols)
            cells = s.dim // s.internal
            col_base = 0
            for tname, tdim in targets:
                t = fam.slot(deg, tname)
                for cell in range(cells):
                    for j in range(tdim):
                        for i in range(s.internal):
                            v = inv.data.get((col_base + j, i))
                            if v:
                                gmat.data[(t.offset + cell * tdim + j,
                                           s.offset + cell * s.internal + i)] = v
                            w = cols.data.get((i, col_base + j))
                            if w:
                                ginv.data[(s.offset + cell * s.internal + i,
                                           t.offset + cell * tdim + j)] = w
                col_base += tdim
        g_maps[deg] = gmat
        ginv_maps[deg] = ginv
    return g_maps, ginv_maps, fam


def _hstack(a: SparseMatrix, b: SparseMatrix) -> SparseMatrix:
    out = SparseMatrix(a.rows, a.cols + b.cols)
    out.data.update(a.data)
    for (i, j), v in b.data.items():
        out.data[(i, a.cols + j)] = v
    return out


def build_retract_maps(theory: BVTheory) -> DeformationRetract:
    """Deformation retract from the coupled model onto the reduced one.

    The eaten scalar and its antifield partner form two isomorphism arrows
    in regrouped coordinates; contracting them and transferring the rest of
    the differential through the perturbation series reproduces, exactly,
    the independently assembled reduced model.  Every retract law is
    verified on the way and the result is conjugated back to the original
    coordinates.
    """
    g_maps, ginv_maps, fam = regroup_maps(theory)
    reg = conjugate_complex(theory.complex, g_maps, ginv_maps)
    vac = theory.vacuum
    model = theory.model
    p = vac.dim_hperp
    fid0 = _identity(model.form_dim(0) * p)
    fidn_m = _identity(model.form_dim(model.n)).kron(vac.m_tilde)

    sp = reg.space
    d0 = GradedLinearMap(sp, sp, 1, {
        -1: fam.assemble(-1, {("scalar_r0", "ghost_perp"): fid0}),
        1: fam.assemble(1, {("ghost_perp*", "scalar_r0*"): fidn_m}),
    })
    h0 = GradedLinearMap(sp, sp, -1, {
        0: _place(fam, 0, -1, "ghost_perp", "scalar_r0", fid0.scale(F(-1))),
        2: _place(fam, 2, 1, "scalar_r0*", "ghost_perp*",
                  _identity(model.form_dim(model.n))
                  .kron(invert_dense(vac.m_tilde)).scale(F(-1))),
    })
    retained = {}
    drop = {-1: ("ghost_perp",), 0: ("scalar_r0",),
            1: ("scalar_r0*",), 2: ("ghost_perp*",)}
    for deg in fam.degrees():
        dead = set()
        for name in drop.get(deg, ()):
            s = fam.slot(deg, name)
            dead.update(range(s.offset, s.offset + s.dim))
        retained[deg] = [i for i in range(fam.dim(deg)) if i not in dead]

    r = perturb_retract(reg, d0, h0, retained)

    broken = build_broken(model, theory.lie, theory.m,
                          theory.vacuum.phi0)
    if not r.small.d.same_blocks(broken.complex.d):
        diff = r.small.d - broken.complex.d
        raise StructureError(
            "transferred differential disagrees with the reduced model "
            "(worst entry %r)" % (diff.argmax(),))

    big = theory.complex
    small = broken.complex
    incl = GradedLinearMap(small.space, big.space, 0, {
        k: ginv_maps[k] @ r.incl.block(k) for k in small.space.degrees()})
    proj = GradedLinearMap(big.space, small.space, 0, {
        k: r.proj.block(k) @ g_maps[k] for k in big.space.degrees()})
    hom = GradedLinearMap(big.space, big.space, -1, {
        k: ginv_maps[k - 1] @ r.homotopy.block(k) @ g_maps[k]
        for k in big.space.degrees() if big.space.dim(k - 1)})
    out = DeformationRetract(
        big=big, small=small, incl=incl, proj=proj, homotopy=hom,
        meta={"pairing_rescale": broken.meta["pairing_rescale"],
              "small_theory": broken, "big_theory": theory})
    return out


def _place(fam, deg_src, deg_tgt, tname, sname, blk) -> SparseMatrix:
    out = SparseMatrix(fam.dim(deg_tgt), fam.dim(deg_src))
    t = fam.slot(deg_tgt, tname)
    s = fam.slot(deg_src, sname)
    for (i, j), v in blk.data.items():
        out.data[(t.offset + i, s.offset + j)] = v
    return out


def build_interpolating(model, lie: LieTheoryData, m, vacuum, t,
                        validate: bool = True) -> BVTheory:
    """One-parameter family joining the coupled model in regrouped
    coordinates (t = 1) to the reduced model plus two isomorphism arrows
    (t = 0).

    The eaten-sector arrows scale with t and t^2 exactly as the squared
    differential demands; the masses do not scale at all, which keeps the
    endpoint complexes honest.  Values outside [0, 1] are permitted but
    flagged, since the family is a diagonal conjugation for every t != 0.
    """
    t = F(t)
    phi0 = [F(x) for x in vacuum]
    _require_critical(phi0, lie.rep_pairing, m)
    vac = vacuum_decompose(lie, phi0, m)
    _require_reducible(vac)
    ops = _form_ops(model)
    fam = _family_layout(model, vac)
    sp = fam.space()
    h, p = vac.dim_h, vac.dim_hperp
    ih, ip, i1 = _identity(h), _identity(p), _identity(1)
    m2 = F(m) * F(m)

    dm1 = fam.assemble(-1, {
        ("gauge_h", "ghost_h"): ops["d0"].kron(ih),
        ("gauge_perp", "ghost_perp"): ops["d0"].kron(ip).scale(t),
        ("scalar_r0", "ghost_perp"): ops["id0"].kron(ip),
    })
    d0 = fam.assemble(0, {
        ("gauge_h*", "gauge_h"): ops["dsd1"].kron(ih),
        ("gauge_perp*", "gauge_perp"): ops["dsd1"].kron(ip)
        + ops["star1"].kron(vac.m_tilde),
        ("gauge_perp*", "scalar_r0"): (ops["star1"] @ ops["d0"])
        .kron(vac.m_tilde).scale(-t),
        ("scalar_r0*", "gauge_perp"): (ops["d_top"] @ ops["star1"])
        .kron(ip).scale(-t),
        ("scalar_r0*", "scalar_r0"): ops["dsd0"].kron(ip).scale(t * t),
        ("scalar_rperp*", "scalar_rperp"): (ops["dsd0"]
                                            + ops["star0"].scale(m2))
        .kron(i1).scale(F(-1)),
    })
    d1 = fam.assemble(1, {
        ("ghost_h*", "gauge_h*"): ops["d_top"].kron(ih),
        ("ghost_perp*", "gauge_perp*"): ops["d_top"].kron(ip).scale(t),
        ("ghost_perp*", "scalar_r0*"): ops["idn"].kron(vac.m_tilde),
    })
    cx = CochainComplex(sp, GradedLinearMap(sp, sp, 1,
                                            {-1: dm1, 0: d0, 1: d1}))
    _check_square(fam, cx, "interpolating family")

    meta = {"t": t, "conventions": [
        "eaten-sector gauge arrows scale with t, the eaten kinetic term "
        "with t^2; masses and the two isomorphism arrows do not scale",
    ]}
    if not (0 <= t <= 1):
        meta["out_of_range"] = True

    theory = BVTheory(kind="family", model=model, layout=fam, complex=cx,
                      lie=lie, vacuum=vac, m=F(m), meta=meta)
    if validate and t == 1:
        base = build_ymh(model, lie, m, vacuum)
        g_maps, ginv_maps, _ = regroup_maps(base)
        reg = conjugate_complex(base.complex, g_maps, ginv_maps)
        if not cx.d.same_blocks(reg.d):
            raise StructureError("family endpoint t=1 disagrees with the "
                                 "regrouped coupled model")
    return theory


# ----------------------------------------------------------------------
# zero-momentum spectra


def mass_spectrum(theory: BVTheory) -> dict:
    """Generalized eigenvalues of each diagonal degree-0 sector block
    against its star weight, at zero momentum.

    Reported as (mass squared, raw eigenvalue) pairs with mass squared the
    magnitude, since a sector assembled with an overall minus carries its
    physical masses on negated eigenvalues.
    """
    model = theory.model
    layout = theory.layout
    if 0 not in layout.slots or 1 not in layout.slots:
        raise ConfigError("spectrum needs field and antifield degrees")
    d0 = theory.complex.d.block(0)
    out = {}
    for s in layout.slots[0]:
        try:
            tslot = layout.slot(1, s.name + "*")
        except KeyError:
            continue
        if s.dim == 0:
            out[s.name] = []
            continue
        blk = d0.submatrix(range(tslot.offset, tslot.offset + tslot.dim),
                           range(s.offset, s.offset + s.dim))
        weight = model.star_matrix(s.form_deg).kron(_identity(s.internal))
        if isinstance(model, LatticeTorusModel):
            zero = (0,) * model.n
            dsym = plane_wave_symbol(model, blk, s.form_deg,
                                     tslot.form_deg, zero,
                                     int_in=s.internal, int_out=s.internal)
            wsym = plane_wave_symbol(model, weight, s.form_deg,
                                     tslot.form_deg, zero,
                                     int_in=s.internal, int_out=s.internal)
        else:
            dsym = blk.to_numpy()
            wsym = weight.to_numpy()
        vals = scipy.linalg.eig(dsym, wsym)[0]
        if np.max(np.abs(vals.imag)) > 1e-9 * max(1.0, np.max(np.abs(vals))):
            raise StructureError("sector %r has a non-real zero-momentum "
                                 "spectrum" % s.name)
        lam = sorted(float(v) for v in vals.real)
        out[s.name] = [(abs(v), v) for v in lam]
    return out
