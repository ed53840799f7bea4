"""Compact Lie algebra data in matrix form, and vacuum decompositions.

Every model is given by real matrices over the rationals: representation
generators rho(t_a), structure constants, an invariant positive form kappa
on the algebra and an invariant inner product P on the representation.
validate_lie machine-checks all the defining identities.

vacuum_decompose splits algebra and representation space around a chosen
vacuum vector: unbroken subalgebra h = ker sigma, its kappa-complement,
the broken directions R0 = sigma(h-perp) inside the representation and
their P-complement, together with the transposed map alpha and the mass
square m_sigma = alpha sigma with its partial inverse.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .graded import ConfigError, StructureError
from .linalg import SparseMatrix, exact_nullspace, invert_dense

F = Fraction


def _cols(vectors, rows) -> SparseMatrix:
    m = SparseMatrix(rows, len(vectors))
    for j, v in enumerate(vectors):
        for i, x in enumerate(v):
            if x:
                m.data[(i, j)] = x
    return m


@dataclass
class LieTheoryData:
    name: str
    generators: list
    structure: list
    killing: SparseMatrix
    rep_pairing: SparseMatrix
    meta: dict = field(default_factory=dict)

    @property
    def dim_g(self) -> int:
        return len(self.generators)

    @property
    def dim_r(self) -> int:
        return self.generators[0].rows if self.generators else 0

    def rho(self, coeffs) -> SparseMatrix:
        out = SparseMatrix.zeros(self.dim_r, self.dim_r)
        for a, c in enumerate(coeffs):
            if c:
                out = out + self.generators[a].scale(c)
        return out

    def bracket(self, u, v):
        out = [F(0)] * self.dim_g
        for a, x in enumerate(u):
            if not x:
                continue
            for b, y in enumerate(v):
                if not y:
                    continue
                for c, f in enumerate(self.structure[a][b]):
                    if f:
                        out[c] += x * y * f
        return out

    def ad_matrix(self, coeffs) -> SparseMatrix:
        m = SparseMatrix(self.dim_g, self.dim_g)
        for a, x in enumerate(coeffs):
            if not x:
                continue
            for b in range(self.dim_g):
                for c, f in enumerate(self.structure[a][b]):
                    if f:
                        m.data[(c, b)] = m.data.get((c, b), F(0)) + x * f
        return m


def validate_lie(data: LieTheoryData) -> dict:
    """Residuals of the defining identities; all exactly zero for a
    consistent model."""
    g = data.dim_g
    res = {"antisymmetry": 0.0, "jacobi": 0.0, "closure": 0.0,
           "killing_invariance": 0.0, "pairing_invariance": 0.0}
    for a in range(g):
        for b in range(g):
            for c in range(g):
                res["antisymmetry"] = max(
                    res["antisymmetry"],
                    abs(float(data.structure[a][b][c] + data.structure[b][a][c])))
    basis = [[F(1) if i == a else F(0) for i in range(g)] for a in range(g)]
    for a in range(g):
        for b in range(g):
            for c in range(g):
                jac = data.bracket(basis[a], data.bracket(basis[b], basis[c]))
                jbc = data.bracket(basis[b], data.bracket(basis[c], basis[a]))
                jca = data.bracket(basis[c], data.bracket(basis[a], basis[b]))
                tot = [x + y + z for x, y, z in zip(jac, jbc, jca)]
                res["jacobi"] = max(res["jacobi"],
                                    max((abs(float(t)) for t in tot), default=0.0))
    for a in range(g):
        ra = data.generators[a]
        ada = data.ad_matrix(basis[a])
        res["killing_invariance"] = max(
            res["killing_invariance"],
            (ada.transpose() @ data.killing + data.killing @ ada).max_abs())
        res["pairing_invariance"] = max(
            res["pairing_invariance"],
            (ra.transpose() @ data.rep_pairing + data.rep_pairing @ ra).max_abs())
        for b in range(g):
            comm = data.generators[a] @ data.generators[b] \
                - data.generators[b] @ data.generators[a]
            lin = data.rho(data.structure[a][b])
            res["closure"] = max(res["closure"], (comm - lin).max_abs())
    return res


def _zero_structure(g):
    return [[[F(0)] * g for _ in range(g)] for _ in range(g)]


def _eps_block(structure, offset):
    """Install epsilon structure constants on a consecutive su(2) triple."""
    for a, b, c, s in [(0, 1, 2, 1), (1, 2, 0, 1), (2, 0, 1, 1),
                       (1, 0, 2, -1), (2, 1, 0, -1), (0, 2, 1, -1)]:
        structure[offset + a][offset + b][offset + c] = F(s)


_J2 = [[0, -1], [1, 0]]


def u1_charged(weight: int = 1) -> LieTheoryData:
    """One-dimensional algebra acting on the real plane with the given
    integer charge."""
    w = F(weight)
    gen = SparseMatrix.from_dense([[F(0), -w], [w, F(0)]])
    return LieTheoryData(
        name="u1", generators=[gen], structure=_zero_structure(1),
        killing=SparseMatrix.identity(1), rep_pairing=SparseMatrix.identity(2),
        meta={"weight": int(weight)})


def _su2_generators():
    half = F(1, 2)
    t1 = SparseMatrix.from_dense([[0, 0, 0, half], [0, 0, -half, 0],
                                  [0, half, 0, 0], [-half, 0, 0, 0]])
    t2 = SparseMatrix.from_dense([[0, 0, -half, 0], [0, 0, 0, -half],
                                  [half, 0, 0, 0], [0, half, 0, 0]])
    t3 = SparseMatrix.from_dense([[0, half, 0, 0], [-half, 0, 0, 0],
                                  [0, 0, 0, -half], [0, 0, half, 0]])
    return [t1, t2, t3]


def su2_fundamental() -> LieTheoryData:
    """su(2) on the realified fundamental, coordinates
    (Re z1, Im z1, Re z2, Im z2)."""
    structure = _zero_structure(3)
    _eps_block(structure, 0)
    return LieTheoryData(
        name="su2", generators=_su2_generators(), structure=structure,
        killing=SparseMatrix.identity(3), rep_pairing=SparseMatrix.identity(4))


def electroweak() -> LieTheoryData:
    """u(1) + su(2) on the realified doublet.  The invariant form is the
    positively normalized trace form, orthonormal in this basis."""
    t0 = SparseMatrix.from_dense(
        [[F(x) for x in row] + [F(0), F(0)] for row in _J2]
        + [[F(0), F(0)] + [F(x) for x in row] for row in _J2])
    structure = _zero_structure(4)
    _eps_block(structure, 1)
    return LieTheoryData(
        name="electroweak", generators=[t0] + _su2_generators(),
        structure=structure, killing=SparseMatrix.identity(4),
        rep_pairing=SparseMatrix.identity(4))


def _quaternion_tables():
    # basis (1, i, j, k); columns of L_q are q * e_b, of R_q are e_b * q
    li = [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]]
    lj = [[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]]
    lk = [[0, 0, 0, -1], [0, 0, -1, 0], [0, 1, 0, 0], [1, 0, 0, 0]]
    ri = [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]]
    rj = [[0, 0, -1, 0], [0, 0, 0, -1], [1, 0, 0, 0], [0, 1, 0, 0]]
    rk = [[0, 0, 0, -1], [0, 0, 1, 0], [0, -1, 0, 0], [1, 0, 0, 0]]
    return [li, lj, lk], [ri, rj, rk]


def su2su2_bifundamental() -> LieTheoryData:
    """su(2) + su(2) acting on the quaternions by (x, y) . M = xM - My;
    the diagonal survives at the identity vacuum."""
    left, right = _quaternion_tables()
    half = F(1, 2)
    gens = [SparseMatrix.from_dense([[F(x) for x in row] for row in L]).scale(half)
            for L in left]
    gens += [SparseMatrix.from_dense([[F(x) for x in row] for row in R]).scale(-half)
             for R in right]
    structure = _zero_structure(6)
    _eps_block(structure, 0)
    _eps_block(structure, 3)
    return LieTheoryData(
        name="su2su2", generators=gens, structure=structure,
        killing=SparseMatrix.identity(6), rep_pairing=SparseMatrix.identity(4))


def named_algebra(name: str, weight: int = 1) -> LieTheoryData:
    builders = {"u1": lambda: u1_charged(weight), "su2": su2_fundamental,
                "electroweak": electroweak, "su2su2": su2su2_bifundamental}
    if name not in builders:
        raise ConfigError("unknown algebra %r (have %s)"
                          % (name, ", ".join(sorted(builders))))
    return builders[name]()


@dataclass
class VacuumData:
    data: LieTheoryData
    phi0: list
    sigma: SparseMatrix
    h_basis: SparseMatrix        # columns span the unbroken subalgebra
    hperp_basis: SparseMatrix    # kappa-orthogonal complement
    r0_basis: SparseMatrix       # sigma images of the hperp basis
    rperp_basis: SparseMatrix    # P-orthogonal complement of R0
    alpha: SparseMatrix          # kappa^-1 sigma^T P
    m_sigma: SparseMatrix        # alpha sigma
    m_tilde: SparseMatrix        # m_sigma in hperp coordinates
    m_sigma_pinv: SparseMatrix   # inverse on hperp, zero on h
    proj_h: SparseMatrix
    proj_hperp: SparseMatrix
    proj_r0: SparseMatrix
    proj_rperp: SparseMatrix
    degenerate: bool
    warnings: list = field(default_factory=list)

    @property
    def dim_h(self):
        return self.h_basis.cols

    @property
    def dim_hperp(self):
        return self.hperp_basis.cols

    @property
    def dim_rperp(self):
        return self.rperp_basis.cols


def _gram_projector(basis: SparseMatrix, form: SparseMatrix, dim: int):
    """Projector onto the span of the columns, orthogonal for the form."""
    if basis.cols == 0:
        return SparseMatrix.zeros(dim, dim)
    gram = basis.transpose() @ form @ basis
    return basis @ invert_dense(gram) @ basis.transpose() @ form


def vacuum_decompose(data: LieTheoryData, phi0, m=None) -> VacuumData:
    """Split algebra and representation around the vacuum vector phi0.

    phi0 = 0 is allowed and flagged as degenerate: the whole algebra is
    unbroken and every representation direction counts as transverse.  A
    nonzero phi0 off the sphere of radius m only earns a warning, so that
    non-critical configurations can still be inspected.
    """
    phi0 = [F(x) for x in phi0]
    if len(phi0) != data.dim_r:
        raise ConfigError("vacuum vector has length %d, expected %d"
                          % (len(phi0), data.dim_r))
    g, r = data.dim_g, data.dim_r
    sigma = _cols([gen.apply(phi0) for gen in data.generators], r)
    degenerate = sigma.is_zero()

    h_basis = _cols(exact_nullspace(sigma), g)
    hperp_basis = _cols(exact_nullspace(h_basis.transpose() @ data.killing), g)
    r0_basis = sigma @ hperp_basis
    rperp_basis = _cols(exact_nullspace(r0_basis.transpose() @ data.rep_pairing), r)

    alpha = invert_dense(data.killing) @ sigma.transpose() @ data.rep_pairing
    m_sigma = alpha @ sigma

    if hperp_basis.cols:
        gram = hperp_basis.transpose() @ data.killing @ hperp_basis
        gram_inv = invert_dense(gram)
        m_tilde = gram_inv @ hperp_basis.transpose() @ data.killing \
            @ m_sigma @ hperp_basis
        m_sigma_pinv = hperp_basis @ invert_dense(m_tilde) @ gram_inv \
            @ hperp_basis.transpose() @ data.killing
    else:
        m_tilde = SparseMatrix.zeros(0, 0)
        m_sigma_pinv = SparseMatrix.zeros(g, g)

    proj_h = _gram_projector(h_basis, data.killing, g)
    proj_hperp = SparseMatrix.identity(g) - proj_h
    proj_r0 = _gram_projector(r0_basis, data.rep_pairing, r)
    proj_rperp = SparseMatrix.identity(r) - proj_r0

    vac = VacuumData(
        data=data, phi0=phi0, sigma=sigma, h_basis=h_basis,
        hperp_basis=hperp_basis, r0_basis=r0_basis, rperp_basis=rperp_basis,
        alpha=alpha, m_sigma=m_sigma, m_tilde=m_tilde,
        m_sigma_pinv=m_sigma_pinv, proj_h=proj_h, proj_hperp=proj_hperp,
        proj_r0=proj_r0, proj_rperp=proj_rperp, degenerate=degenerate)

    _validate_vacuum(vac)

    if m is not None:
        norm2 = sum(x * y for x, y in
                    zip(phi0, data.rep_pairing.apply(phi0)))
        if norm2 != F(m) * F(m):
            vac.warnings.append(
                "vacuum norm squared %s differs from m^2 = %s"
                % (norm2, F(m) * F(m)))
    return vac


def _validate_vacuum(vac: VacuumData):
    checks = {
        "sigma kills h":
            (vac.sigma @ vac.h_basis).max_abs(),
        "hperp is kappa orthogonal to h":
            (vac.hperp_basis.transpose() @ vac.data.killing
             @ vac.h_basis).max_abs(),
        "alpha is the P-kappa transpose of sigma":
            (vac.data.killing @ vac.alpha
             - vac.sigma.transpose() @ vac.data.rep_pairing).max_abs(),
        "alpha kills the vacuum line":
            max((abs(float(x)) for x in vac.alpha.apply(vac.phi0)),
                default=0.0),
        "h projector idempotent":
            (vac.proj_h @ vac.proj_h - vac.proj_h).max_abs(),
        "h projector kappa self adjoint":
            (vac.data.killing @ vac.proj_h
             - vac.proj_h.transpose() @ vac.data.killing).max_abs(),
        "R0 projector idempotent":
            (vac.proj_r0 @ vac.proj_r0 - vac.proj_r0).max_abs(),
        "partial inverse on hperp":
            (vac.m_sigma_pinv @ vac.m_sigma - vac.proj_hperp).max_abs(),
        "projection of alpha range":
            (vac.proj_h @ vac.alpha).max_abs(),
    }
    for law, residual in checks.items():
        if residual:
            raise StructureError("vacuum decomposition: %s fails (residual %g)"
                                 % (law, residual))
