"""Discrete exterior calculus on the n-dimensional periodic lattice.

Cochains of degree k live on (site, sorted axis subset) pairs, indexed
subset-major: index = subset_index * N^n + site_index with sites enumerated
lexicographically.  The coboundary carries 1/a per step, the star carries
the continuum weight a^(n-2k) together with the complement-permutation
sign, and the codifferential is the inner-product adjoint a^-2 d^T.
Integration of a top cochain is the plain site sum.

The star and coboundary calibrations are each anchored to their own
continuum normalization; spectra quoted at unit spacing are unaffected and
momentum-scaling exponents do not depend on a at all.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import comb

import numpy as np

from .graded import ConfigError, StructureError
from .invforms import complement, perm_sign_concat, subsets_of
from .linalg import SparseMatrix


@dataclass
class LatticeTorusModel:
    n: int
    N: int
    a: Fraction = Fraction(1)
    subsets: dict = field(default_factory=dict, repr=False)
    index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.a = Fraction(self.a)
        for k in range(self.n + 1):
            subs = subsets_of(self.n, k)
            self.subsets[k] = subs
            self.index[k] = {s: i for i, s in enumerate(subs)}
        self.n_sites = self.N ** self.n
        self._sites = list(product(range(self.N), repeat=self.n))
        self._site_index = {x: i for i, x in enumerate(self._sites)}

    # indexing -----------------------------------------------------------
    def site_index(self, x) -> int:
        return self._site_index[tuple(v % self.N for v in x)]

    def cell_index(self, k: int, x, S) -> int:
        return self.index[k][tuple(S)] * self.n_sites + self.site_index(x)

    def form_dim(self, k: int) -> int:
        if 0 <= k <= self.n:
            return comb(self.n, k) * self.n_sites
        return 0

    def shift_site(self, x, S):
        y = list(x)
        for j in S:
            y[j] = (y[j] + 1) % self.N
        return tuple(y)

    # operators ----------------------------------------------------------
    def coboundary(self, k: int) -> SparseMatrix:
        """d: degree k -> k+1.  On a site delta 0-cochain the result is
        +1/a on each outgoing edge and -1/a on each incoming one."""
        m = SparseMatrix(self.form_dim(k + 1), self.form_dim(k))
        if k + 1 > self.n:
            return m
        inv_a = 1 / self.a
        for T in self.subsets[k + 1]:
            for pos, j in enumerate(T):
                rest = tuple(t for t in T if t != j)
                sgn = inv_a if pos % 2 == 0 else -inv_a
                for x in self._sites:
                    row = self.cell_index(k + 1, x, T)
                    m.data[(row, self.cell_index(k, x, rest))] = \
                        m.data.get((row, self.cell_index(k, x, rest)), 0) + sgn
                    xp = self.shift_site(x, (j,))
                    col = self.cell_index(k, xp, rest)
                    m.data[(row, col)] = m.data.get((row, col), 0) - sgn
        m.data = {key: v for key, v in m.data.items() if v}
        return m

    d_matrix = coboundary

    def hodge(self, k: int) -> SparseMatrix:
        """Star: signed complement permutation with weight a^(n-2k).

        The complement cell is taken at the same site.  This keeps star
        involutive up to sign and the induced quadratic forms positive;
        the price is that u cup star v symmetrizes only after averaging
        over translations, an artifact of one-sided cup products."""
        m = SparseMatrix(self.form_dim(self.n - k), self.form_dim(k))
        if not 0 <= k <= self.n:
            return m
        w = self.a ** (self.n - 2 * k)
        for S in self.subsets[k]:
            sc = complement(S, self.n)
            sgn = perm_sign_concat(S, sc)
            base_out = self.index[self.n - k][sc] * self.n_sites
            base_in = self.index[k][S] * self.n_sites
            for s in range(self.n_sites):
                m.data[(base_out + s, base_in + s)] = sgn * w
        return m

    star_matrix = hodge

    def codifferential(self, k: int) -> SparseMatrix:
        """Adjoint of d for the scaled inner product: a^-2 d^T."""
        return self.coboundary(k - 1).transpose().scale(self.a ** -2)

    def laplacian(self, k: int) -> SparseMatrix:
        top = self.codifferential(k + 1) @ self.coboundary(k) \
            if k < self.n else SparseMatrix.zeros(self.form_dim(k), self.form_dim(k))
        bot = self.coboundary(k - 1) @ self.codifferential(k) \
            if k > 0 else SparseMatrix.zeros(self.form_dim(k), self.form_dim(k))
        return top + bot

    def inner_product(self, k: int, u, v):
        w = self.a ** (self.n - 2 * k)
        return w * sum(x * y for x, y in zip(u, v))

    def integrate(self, top):
        return sum(top[:self.n_sites], Fraction(0)) if top else Fraction(0)

    # cup product --------------------------------------------------------
    def cup(self, u, k: int, v, l: int):
        """(u cup v)(x, T) = sum over splittings S | T-S with the shuffle
        sign, the right factor read at the S-shifted site."""
        out = [Fraction(0)] * self.form_dim(k + l)
        if k + l > self.n:
            return out
        for T in self.subsets[k + l]:
            for S in self.subsets[k]:
                if not set(S) <= set(T):
                    continue
                rest = tuple(t for t in T if t not in S)
                sgn = perm_sign_concat(S, rest)
                for x in self._sites:
                    a = u[self.cell_index(k, x, S)]
                    if not a:
                        continue
                    b = v[self.cell_index(l, self.shift_site(x, S), rest)]
                    if b:
                        out[self.cell_index(k + l, x, T)] += sgn * a * b
        return out

    def cup_const_matrix(self, coeffs, kc: int, k: int) -> SparseMatrix:
        """Left cup with a translation-invariant kc-form given by its
        per-subset coefficients; exact Leibniz partner of the coboundary."""
        m = SparseMatrix(self.form_dim(kc + k), self.form_dim(k))
        if kc + k > self.n:
            return m
        for T in self.subsets[kc + k]:
            for ic, S in enumerate(self.subsets[kc]):
                c = coeffs[ic]
                if not c or not set(S) <= set(T):
                    continue
                rest = tuple(t for t in T if t not in S)
                sgn = perm_sign_concat(S, rest)
                for x in self._sites:
                    row = self.cell_index(kc + k, x, T)
                    col = self.cell_index(k, self.shift_site(x, S), rest)
                    m.data[(row, col)] = m.data.get((row, col), 0) + sgn * c
        m.data = {key: v for key, v in m.data.items() if v}
        return m

    def pairing_matrix(self, k: int) -> SparseMatrix:
        """integral(e_i cup e_j): a signed permutation pairing degree k
        against degree n-k."""
        m = SparseMatrix(self.form_dim(k), self.form_dim(self.n - k))
        for S in self.subsets[k]:
            sc = complement(S, self.n)
            sgn = Fraction(perm_sign_concat(S, sc))
            for x in self._sites:
                m.data[(self.cell_index(k, x, S),
                        self.cell_index(self.n - k, self.shift_site(x, S), sc))] = sgn
        return m

    def translation(self, k: int, v, internal: int = 1) -> SparseMatrix:
        """Pullback by the lattice shift x -> x + v on degree-k cochains,
        tensored with an identity internal factor."""
        dim = self.form_dim(k) * internal
        m = SparseMatrix(dim, dim)
        for S in self.subsets[k]:
            base = self.index[k][S] * self.n_sites
            for x in self._sites:
                src = base + self.site_index(tuple(a + b for a, b in zip(x, v)))
                dst = base + self.site_index(x)
                for i in range(internal):
                    m.data[(dst * internal + i, src * internal + i)] = Fraction(1)
        return m


def build_lattice(n: int, N: int, a=1) -> LatticeTorusModel:
    n, N = int(n), int(N)
    if n < 1:
        raise ConfigError("lattice dimension must be >= 1")
    if N < 2:
        raise ConfigError("lattice extent must be >= 2")
    a = Fraction(a)
    if a <= 0:
        raise ConfigError("lattice spacing must be positive")
    return LatticeTorusModel(n, N, a)


def laplacian_spectrum(model: LatticeTorusModel, k: int):
    """All eigenvalues of the degree-k Hodge Laplacian, sorted, as floats."""
    dense = model.laplacian(k).to_numpy()
    return sorted(np.linalg.eigvalsh(np.real(dense)).tolist())


def lattice_momentum(model: LatticeTorusModel, j: int) -> float:
    """Magnitude 2 sin(pi j / N) / a of the mode-j lattice momentum."""
    return 2.0 * np.sin(np.pi * j / model.N) / float(model.a)


def plane_wave_symbol(model: LatticeTorusModel, op: SparseMatrix,
                      k_in: int, k_out: int, j,
                      int_in: int = 1, int_out: int = 1,
                      seed: int = 0, validate: bool = True):
    """Fourier symbol of a translation-invariant operator at mode j.

    Returns the complex block B_j acting on (subset, internal) coordinates:
    B_j[b', b] = sum_x op[(x, b'), (0, b)] exp(-2 pi i j.x / N).

    Before extracting, one random translation-commutation check is run, and
    afterwards the full operator is reassembled from all modes by FFT and
    compared against direct application to a random vector; either failure
    raises, since a symbol of a non-invariant operator is meaningless.
    """
    j = tuple(j)
    if len(j) != model.n:
        raise ConfigError("momentum mode needs %d components" % model.n)
    bin_in = comb(model.n, k_in)
    bin_out = comb(model.n, k_out)
    if op.cols != bin_in * model.n_sites * int_in or \
            op.rows != bin_out * model.n_sites * int_out:
        raise ConfigError("operator shape does not match the stated degrees")

    rng = np.random.default_rng(seed)
    if validate:
        v = tuple(int(t) for t in rng.integers(0, model.N, size=model.n))
        t_in = model.translation(k_in, v, int_in)
        t_out = model.translation(k_out, v, int_out)
        res = (op @ t_in - t_out @ op).max_abs()
        if res > 1e-12:
            raise StructureError(
                "operator fails translation invariance (residual %g)" % res)

    # gather the kernel G(x) from the site-0 columns, then transform
    ns = model.n_sites
    shape = (model.N,) * model.n
    g = np.zeros((bin_out * int_out, bin_in * int_in) + shape, dtype=complex)
    for (row, col), val in op.data.items():
        cell_c, i_c = divmod(col, int_in)
        s_c, x_c = divmod(cell_c, ns)
        if x_c != 0:
            continue
        cell_r, i_r = divmod(row, int_out)
        s_r, x_r = divmod(cell_r, ns)
        g[(s_r * int_out + i_r, s_c * int_in + i_c)
          + model._sites[x_r]] += complex(val)
    symbols = np.fft.fftn(g, axes=tuple(range(2, 2 + model.n)))

    if validate:
        u = rng.standard_normal(bin_in * int_in * ns)
        y = np.zeros(bin_out * int_out * ns)
        for (row, col), val in op.data.items():
            y[row] += float(val) * u[col]
        # mode-by-mode multiplication must reassemble the operator
        u_arr = u.reshape(bin_in, ns, int_in).transpose(0, 2, 1).reshape(
            (bin_in * int_in,) + shape)
        u_hat = np.fft.fftn(u_arr, axes=tuple(range(1, 1 + model.n)))
        y_hat = np.einsum("ab...,b...->a...", symbols, u_hat)
        y_arr = np.real(np.fft.ifftn(y_hat, axes=tuple(range(1, 1 + model.n))))
        y_chk = y_arr.reshape(bin_out, int_out, ns).transpose(0, 2, 1).ravel()
        if np.max(np.abs(y - y_chk)) > 1e-9 * max(1.0, np.max(np.abs(y))):
            raise StructureError("FFT reassembly mismatch for the symbol")

    mode_idx = tuple(int(t) % model.N for t in j)
    return np.array(symbols[(slice(None), slice(None)) + mode_idx])
