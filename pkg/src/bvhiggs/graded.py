"""Graded vector spaces, cochain complexes, retracts and shifted pairings.

Everything is finite dimensional and block-sparse: a graded map stores one
SparseMatrix per source degree.  Residuals of structural laws (d^2 = 0,
chain-map equations, retract identities, pairing compatibility) are returned
as max-magnitude numbers, which are exactly 0.0 when the scalars are exact.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .linalg import SparseMatrix, _as_float, exact_rank, float_rank


class ConfigError(ValueError):
    """Raised for malformed configuration or rule data; the CLI maps it to
    its own exit code."""


class StructureError(AssertionError):
    """A structural law that the build process guarantees failed to hold."""


@dataclass(frozen=True)
class GradedVectorSpace:
    """Degree-indexed finite-dimensional vector space.

    dims maps degree -> dimension (zero dims are dropped); labels optionally
    names each basis vector per degree.
    """
    dims: dict
    labels: dict = None

    def __post_init__(self):
        clean = {int(k): int(v) for k, v in self.dims.items() if v}
        object.__setattr__(self, "dims", clean)
        if self.labels is not None:
            for k, names in self.labels.items():
                if k in clean and len(names) != clean[k]:
                    raise ValueError("degree %d has %d labels for dim %d"
                                     % (k, len(names), clean[k]))

    def degrees(self):
        return sorted(self.dims)

    def dim(self, k: int) -> int:
        return self.dims.get(k, 0)

    def total_dim(self) -> int:
        return sum(self.dims.values())

    def label(self, k, i):
        if self.labels and k in self.labels:
            return self.labels[k][i]
        return "deg%d[%d]" % (k, i)


class GradedLinearMap:
    """Degree-homogeneous linear map between graded spaces.

    blocks[k] sends source degree k to target degree k + degree; missing
    blocks are zero.
    """

    __slots__ = ("source", "target", "degree", "blocks")

    def __init__(self, source, target, degree, blocks=None):
        self.source = source
        self.target = target
        self.degree = degree
        self.blocks = {}
        for k, b in (blocks or {}).items():
            want_r = target.dim(k + degree)
            want_c = source.dim(k)
            if (b.rows, b.cols) != (want_r, want_c):
                raise ValueError("block %d is %dx%d, expected %dx%d"
                                 % (k, b.rows, b.cols, want_r, want_c))
            if not b.is_zero():
                self.blocks[k] = b

    @classmethod
    def zero(cls, source, target, degree):
        return cls(source, target, degree)

    @classmethod
    def identity(cls, space):
        return cls(space, space, 0,
                   {k: SparseMatrix.identity(space.dim(k)) for k in space.degrees()})

    def block(self, k) -> SparseMatrix:
        b = self.blocks.get(k)
        if b is None:
            return SparseMatrix.zeros(self.target.dim(k + self.degree), self.source.dim(k))
        return b

    def compose(self, other: "GradedLinearMap") -> "GradedLinearMap":
        """self after other."""
        if other.target is not self.source and other.target.dims != self.source.dims:
            raise ValueError("composition space mismatch")
        deg = self.degree + other.degree
        blocks = {}
        for k in other.source.degrees():
            b = self.block(k + other.degree) @ other.block(k)
            if not b.is_zero():
                blocks[k] = b
        return GradedLinearMap(other.source, self.target, deg, blocks)

    def __matmul__(self, other):
        return self.compose(other)

    def _binary(self, other, op):
        if self.degree != other.degree:
            raise ValueError("degree mismatch")
        keys = set(self.blocks) | set(other.blocks)
        return GradedLinearMap(self.source, self.target, self.degree,
                               {k: op(self.block(k), other.block(k)) for k in keys})

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b)

    def __neg__(self):
        return self.scale(Fraction(-1))

    def scale(self, c):
        return GradedLinearMap(self.source, self.target, self.degree,
                               {k: b.scale(c) for k, b in self.blocks.items()})

    def map_entries(self, fn):
        return GradedLinearMap(self.source, self.target, self.degree,
                               {k: b.map_entries(fn) for k, b in self.blocks.items()})

    def max_residual(self) -> float:
        if not self.blocks:
            return 0.0
        return max(b.max_abs() for b in self.blocks.values())

    def argmax(self):
        """(degree, row, col) of the largest-magnitude entry, or None."""
        best, where = 0.0, None
        for k, b in self.blocks.items():
            pos = b.argmax_abs()
            if pos is None:
                continue
            v = abs(_as_float(b.data[pos]))
            if v > best:
                best, where = v, (k, pos[0], pos[1])
        return where

    def is_zero(self):
        return all(b.is_zero() for b in self.blocks.values())

    def same_blocks(self, other) -> bool:
        if self.degree != other.degree:
            return False
        keys = set(self.blocks) | set(other.blocks)
        return all(self.block(k) == other.block(k) for k in keys)

    def __repr__(self):
        return "GradedLinearMap(degree=%+d, blocks=%s)" % (
            self.degree, sorted(self.blocks))


@dataclass
class CochainComplex:
    space: GradedVectorSpace
    d: GradedLinearMap
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.d.degree != 1:
            raise ValueError("differential must have degree +1")


def check_complex(C: CochainComplex) -> float:
    """Residual of d(d(x)) over all degrees; exactly 0.0 when d^2 = 0."""
    return (C.d @ C.d).max_residual()


@dataclass
class CohomologyReport:
    dims: dict
    ranks: dict
    mode: str
    tolerance: float
    ill_conditioned: dict = field(default_factory=dict)

    def dim(self, k):
        return self.dims.get(k, 0)


def cohomology_dims(C: CochainComplex, mode: str = "rational",
                    tolerance: float = 1e-9) -> CohomologyReport:
    """Degreewise cohomology dimensions.

    dim H^k = dim C^k - rank d_k - rank d_{k-1}.  Float mode uses an SVD
    threshold relative to the largest singular value and flags any degree
    whose decision rested on a singular value within a decade of it.
    """
    ranks, flags = {}, {}
    for k in C.space.degrees():
        blk = C.d.block(k)
        if mode == "rational":
            ranks[k] = exact_rank(blk)
            flags[k] = False
        elif mode == "float":
            r, ill, _, _ = float_rank(blk, tolerance)
            ranks[k] = r
            flags[k] = ill
        else:
            raise ConfigError("unknown rank mode %r" % (mode,))
    dims = {}
    warn = {}
    for k in C.space.degrees():
        dims[k] = C.space.dim(k) - ranks.get(k, 0) - ranks.get(k - 1, 0)
        warn[k] = flags.get(k, False) or flags.get(k - 1, False)
        if dims[k] < 0:
            raise StructureError("negative cohomology dimension at degree %d" % k)
    return CohomologyReport(dims=dims, ranks=ranks, mode=mode,
                            tolerance=tolerance, ill_conditioned=warn)


def verify_chain_map(f: GradedLinearMap, C: CochainComplex,
                     D: CochainComplex) -> float:
    """Residual of d_D f - f d_C for a degree-0 map f: C -> D."""
    if f.degree != 0:
        raise ValueError("chain map check expects a degree-0 map")
    return (D.d @ f - f @ C.d).max_residual()


def shift_complex(C: CochainComplex, k: int) -> CochainComplex:
    """Shift degrees: the new complex in degree d holds C^{d+k}.

    The differential picks up the sign (-1)^k, recorded in meta; shifting
    by k and then -k returns the original blocks.
    """
    dims = {d - k: C.space.dim(d) for d in C.space.degrees()}
    labels = None
    if C.space.labels:
        labels = {d - k: C.space.labels[d] for d in C.space.labels}
    sp = GradedVectorSpace(dims, labels)
    sign = Fraction(-1) ** (k % 2)
    blocks = {d - k: C.d.block(d).scale(sign) for d in C.space.degrees()}
    dmap = GradedLinearMap(sp, sp, 1, blocks)
    meta = dict(C.meta)
    meta["shift"] = meta.get("shift", 0) + k
    meta["shift_sign"] = "d[k] = (-1)^k d"
    return CochainComplex(sp, dmap, meta)


def conjugate_complex(C: CochainComplex, g: dict, g_inv: dict,
                      labels=None) -> CochainComplex:
    """Basis change d' = g d g^{-1} with per-degree invertible matrices.

    g and g_inv are dicts degree -> SparseMatrix; the caller supplies both
    (they are usually assembled from small per-sector inverses) and we check
    they really are inverse to each other.
    """
    for k in C.space.degrees():
        gk, gik = g[k], g_inv[k]
        if not (gk @ gik) == SparseMatrix.identity(C.space.dim(k)):
            raise StructureError("basis change at degree %d is not invertible" % k)
    sp = GradedVectorSpace(dict(C.space.dims), labels)
    blocks = {}
    for k in C.space.degrees():
        if C.space.dim(k + 1):
            blocks[k] = g[k + 1] @ C.d.block(k) @ g_inv[k]
    return CochainComplex(sp, GradedLinearMap(sp, sp, 1, blocks), dict(C.meta))


@dataclass
class DeformationRetract:
    big: CochainComplex
    small: CochainComplex
    incl: GradedLinearMap      # small -> big
    proj: GradedLinearMap      # big -> small
    homotopy: GradedLinearMap  # big -> big, degree -1
    meta: dict = field(default_factory=dict)


def verify_retract(r: DeformationRetract) -> dict:
    """Residuals of the four retract laws, plus the side conditions.

    Keys: chain_maps, proj_incl, homotopy, homotopy_sq (the contract), and
    side_proj_h, side_h_incl (annihilation conditions, reported alongside).
    """
    id_small = GradedLinearMap.identity(r.small.space)
    id_big = GradedLinearMap.identity(r.big.space)
    res = {}
    res["chain_maps"] = max(verify_chain_map(r.incl, r.small, r.big),
                            verify_chain_map(r.proj, r.big, r.small))
    res["proj_incl"] = (r.proj @ r.incl - id_small).max_residual()
    dh = r.big.d @ r.homotopy + r.homotopy @ r.big.d
    res["homotopy"] = (r.incl @ r.proj - id_big - dh).max_residual()
    res["homotopy_sq"] = (r.homotopy @ r.homotopy).max_residual()
    res["side_proj_h"] = (r.proj @ r.homotopy).max_residual()
    res["side_h_incl"] = (r.homotopy @ r.incl).max_residual()
    return res


@dataclass
class ShiftedSymplecticPairing:
    """Degree -1 pairing: block k pairs C^k with C^{1-k}.

    The transpose convention is uniform: block(1-k) = sign * block(k)^T with
    sign = -1, i.e. the pairing is antisymmetric under swapping the two
    inputs in this shifted sense.  The flag is stored rather than hardwired
    so reports can state the convention.
    """
    space: GradedVectorSpace
    blocks: dict
    sign: int = -1

    def block(self, k) -> SparseMatrix:
        b = self.blocks.get(k)
        if b is not None:
            return b
        other = self.blocks.get(1 - k)
        if other is not None:
            return other.transpose().scale(Fraction(self.sign))
        return SparseMatrix.zeros(self.space.dim(k), self.space.dim(1 - k))

    def validate(self, mode="rational", tolerance=1e-9) -> dict:
        """Symmetry residual and nondegeneracy check for every degree pair."""
        sym = 0.0
        nondeg = True
        for k in self.space.degrees():
            bk = self.block(k)
            sym = max(sym, (bk - self.block(1 - k).transpose().scale(
                Fraction(self.sign))).max_abs())
            if self.space.dim(k) != self.space.dim(1 - k):
                nondeg = False
                continue
            if self.space.dim(k):
                r = exact_rank(bk) if mode == "rational" else float_rank(bk, tolerance)[0]
                nondeg = nondeg and (r == self.space.dim(k))
        return {"symmetry": sym, "nondegenerate": nondeg, "sign": self.sign}


def verify_pairing_invariance(C: CochainComplex,
                              pairing: ShiftedSymplecticPairing) -> float:
    """Residual of omega(dx, y) + omega(x, dy) = 0 over all degrees.

    This is the compatibility that makes the differential the arity-one
    bracket of a cyclic structure; it pins the relative signs of the
    pairing blocks, which d^2 = 0 alone does not see.
    """
    res = 0.0
    for k in C.space.degrees():
        lhs = C.d.block(k).transpose() @ pairing.block(k + 1)
        rhs = pairing.block(k) @ C.d.block(-k)
        res = max(res, (lhs + rhs).max_abs())
    return res


def verify_pairing_compat(r: DeformationRetract,
                          big_pairing: ShiftedSymplecticPairing,
                          small_pairing: ShiftedSymplecticPairing,
                          rescale: dict,
                          sector_of) -> float:
    """Residual of pairing transport through a retract.

    The law: omega_big(incl x, incl y) = factor * omega_small(x, y), where
    factor depends on the sector of x through the rescale rule (gauge and
    ghost sectors 1, scalar sector the declared factor), and the dual law
    through proj.  sector_of(degree, index) names the sector of a small
    basis vector; an unknown sector in the rule is a configuration error.
    """
    res = 0.0
    for k in r.small.space.degrees():
        ik = r.incl.block(k)
        ike = r.incl.block(1 - k)
        big_k = ik.transpose() @ big_pairing.block(k) @ ike
        small_k = small_pairing.block(k)
        exp = SparseMatrix(small_k.rows, small_k.cols)
        for (i, j), v in small_k.data.items():
            si = sector_of(k, i)
            sj = sector_of(1 - k, j)
            if si not in rescale or sj not in rescale:
                raise ConfigError("no rescale factor for sector %r"
                                  % (si if si not in rescale else sj,))
            if rescale[si] != rescale[sj]:
                raise ConfigError(
                    "pairing couples sectors %r and %r with different factors"
                    % (si, sj))
            w = rescale[si] * v
            if w:
                exp.data[(i, j)] = w
        res = max(res, (big_k - exp).max_abs())
        # dual transport through proj: omega_small-rescaled(p x, y) agrees
        # with omega_big(x, incl y)
        pk = r.proj.block(k)
        lhs = pk.transpose() @ exp
        rhs = big_pairing.block(k) @ ike
        res = max(res, (lhs - rhs).max_abs())
    return res


class RetractBuildError(StructureError):
    pass


def perturb_retract(C: CochainComplex, d0: GradedLinearMap,
                    h0: GradedLinearMap, retained: dict,
                    small_labels=None, max_terms: int = 16,
                    checks: bool = True):
    """Transfer a contraction of (C, d0) through the perturbation d - d0.

    d0 must consist of isolated acyclic two-term pieces: h0 is its partial
    inverse, and the contraction laws d0 h0 + h0 d0 = incl0 proj0 - id,
    h0^2 = 0 are verified before perturbing.  retained maps degree -> sorted
    index list of the complement of those pieces.  The perturbation series
    terminates because (delta h0)^j eventually vanishes; we cap the number
    of terms and fail loudly otherwise.

    Returns a DeformationRetract whose small complex carries the transferred
    differential.  Every law is re-checked exactly unless checks=False.
    """
    sp = C.space
    small_dims = {k: len(ix) for k, ix in retained.items()}
    small = GradedVectorSpace(small_dims, small_labels)

    iblocks, pblocks = {}, {}
    for k, ix in retained.items():
        n_big = sp.dim(k)
        inc = SparseMatrix(n_big, len(ix))
        for col, i in enumerate(ix):
            inc.data[(i, col)] = Fraction(1)
        iblocks[k] = inc
        pblocks[k] = inc.transpose()
    incl0 = GradedLinearMap(small, sp, 0, iblocks)
    proj0 = GradedLinearMap(sp, small, 0, pblocks)

    id_big = GradedLinearMap.identity(sp)
    gap = incl0 @ proj0 - id_big
    law0 = (d0 @ h0 + h0 @ d0 - gap).max_residual()
    if law0:
        raise RetractBuildError(
            "initial contraction law d0 h0 + h0 d0 = incl proj - id fails "
            "(residual %g)" % law0)
    if (h0 @ h0).max_residual():
        raise RetractBuildError("initial homotopy does not square to zero")
    if (d0 @ d0).max_residual():
        raise RetractBuildError("d0 is not a differential")

    delta = C.d - d0
    # X = sum_j (delta h0)^j delta, truncated at the nilpotency order
    a = delta @ h0
    x = delta
    term = delta
    for _ in range(max_terms):
        term = a @ term
        if term.is_zero():
            break
        x = x + term
    else:
        raise RetractBuildError("perturbation series did not terminate "
                                "within %d terms" % max_terms)

    d_small = proj0 @ (d0 + x) @ incl0
    small_cx = CochainComplex(small, d_small)

    incl = incl0 + h0 @ x @ incl0
    proj = proj0 + proj0 @ x @ h0
    htop = h0 + h0 @ x @ h0

    r = DeformationRetract(big=C, small=small_cx, incl=incl, proj=proj,
                           homotopy=htop,
                           meta={"series_terms": "truncated nilpotent"})
    if checks:
        res = verify_retract(r)
        for law in ("chain_maps", "proj_incl", "homotopy", "homotopy_sq"):
            if res[law]:
                raise RetractBuildError("retract law %s fails with residual %g"
                                        % (law, res[law]))
    return r
