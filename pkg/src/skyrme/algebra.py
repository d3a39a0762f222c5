"""Compact Lie algebras with explicit matrix bases.

Families: su(n) for 2 <= n <= 5, spin(m) for 3 <= m <= 9 (even Clifford
products as basis, spinor representation of dimension 2^floor(m/2)),
sp(n) for 1 <= n <= 3 (quaternionic unitary realization as 2n x 2n
complex matrices), the 7 x 7 realization of g2, the partial
spin(9) (+) Delta_9 realization of f4, u(1), and so(3) in its vector
representation.  Direct sums of these are supported for the fields that
need product groups.

Algebra elements are real coordinate vectors in the stored basis; the
norm is |X|^2 = -(1/8) Tr(ad X ad X), computed from structure-constant
tables.  Normalizing constants K are certified as exact rationals from
the Killing trace of the image of v = diag(i, -i) under a primitive
su(2) embedding.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import clifford
from .errors import (
    CertificationError,
    ConstructionError,
    LogRangeError,
    PartialBracketError,
    UnsupportedAlgebraError,
)

__all__ = [
    "LieAlgebra",
    "Factor",
    "Su2Embedding",
    "build_algebra",
    "parse_algebra",
    "direct_sum",
    "killing_pairing",
    "algebra_norm_sq",
    "primitive_su2",
    "normalizing_constant",
    "theta_density",
    "project_factor",
    "group_exp",
    "group_log",
    "certification_report",
    "table_constant",
    "SUPPORTED_SPECS",
]

_CLOSURE_TOL = 1e-10
_JACOBI_TOL = 1e-10
_TRACE_INT_TOL = 1e-9

# atomic specs certified by `constants`; u1/so3 join for field-level work
SUPPORTED_SPECS = (
    "su2", "su3", "su4", "su5",
    "spin3", "spin4", "spin5", "spin6", "spin7", "spin8", "spin9",
    "sp1", "sp2", "sp3",
    "g2", "f4",
)


@dataclass(frozen=True)
class Factor:
    """Simple factor of the algebra: a contiguous block of basis indices."""

    name: str
    start: int
    stop: int

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.start, self.stop)


@dataclass(frozen=True)
class Su2Embedding:
    """Images of the fixed su(2) basis (i sigma_1, i sigma_2, i sigma_3)
    under a homomorphism generating the third homotopy group."""

    parent: "LieAlgebra"
    images: np.ndarray  # (3, dim) coordinates
    residual: float

    @property
    def image_of_v(self) -> np.ndarray:
        """Image of v = diag(i, -i) = i sigma_3."""
        return self.images[2]


class LieAlgebra:
    """Immutable compact Lie algebra with adjoint and Killing tables.

    Attributes
    ----------
    name : identifier such as "su3", "g2", or "su2+u1"
    dim : algebra dimension
    rep_dim : size N of the stored N x N matrix basis
    basis : (dim, N, N) complex, anti-Hermitian except the f4 spinor part
    structure_constants : f[a, b, c] with [e_a, e_b] = sum_c f[a,b,c] e_c
    killing_matrix : B[a, b] = Tr(ad e_a ad e_b); NaN outside the
        ad-complete block when the bracket is partial
    factors : simple-factor blocks (empty for u1)
    partial_bracket : True for f4 (spinor x spinor brackets not stored)
    """

    def __init__(self, name, family, basis, *, factors, pi1="trivial",
                 group_kind="special_unitary", blocks=(), f_table=None,
                 ad_complete=None, partial_bracket=False):
        self.name = name
        self.family = family
        self.basis = np.asarray(basis, dtype=complex)
        self.dim = self.basis.shape[0]
        self.rep_dim = self.basis.shape[1]
        self.factors = tuple(factors)
        self.pi1 = pi1  # "trivial" | "integers" | "order2" (atomic algebras)
        self.group_kind = group_kind
        self.blocks = tuple(blocks)
        self.partial_bracket = partial_bracket
        if ad_complete is None:
            ad_complete = np.ones(self.dim, dtype=bool)
        self.ad_complete = np.asarray(ad_complete, dtype=bool)

        if self.partial_bracket:
            if f_table is None:
                raise ConstructionError("partial algebras need a prebuilt bracket table")
            self.structure_constants = f_table
            self._gram = None
            self._gram_inv = None
        else:
            self._gram = np.real(np.einsum("aji,bij->ab", self.basis.conj().transpose(0, 2, 1),
                                           self.basis))
            cond = np.linalg.cond(self._gram)
            if not np.isfinite(cond) or cond > 1e8:
                raise ConstructionError(f"{name}: ill-conditioned basis gram (cond={cond:.1e})")
            self._gram_inv = np.linalg.inv(self._gram)
            if f_table is not None:
                self.structure_constants = f_table
            else:
                self.structure_constants = self._structure_from_basis()

        f = self.structure_constants
        self.killing_matrix = self._killing_from_table(f)
        # norm gram: |X|^2 = -(1/8) x^T B x, positive semidefinite
        kb = np.where(np.isnan(self.killing_matrix), 0.0, self.killing_matrix)
        self.norm_gram = -kb / 8.0
        self._validate()
        self._k_cache: dict[int, Fraction] = {}
        self._su2_cache: Su2Embedding | None = None

    # ----- construction helpers -----

    def _structure_from_basis(self) -> np.ndarray:
        d = self.dim
        f = np.zeros((d, d, d))
        worst = 0.0
        for a in range(d):
            for b in range(a + 1, d):
                c = self.basis[a] @ self.basis[b] - self.basis[b] @ self.basis[a]
                coef, res = self._matrix_coords(c)
                worst = max(worst, res)
                f[a, b] = coef
                f[b, a] = -coef
        if worst > _CLOSURE_TOL:
            raise ConstructionError(f"{self.name}: bracket closure residual {worst:.2e}")
        return f

    def _killing_from_table(self, f) -> np.ndarray:
        if not self.partial_bracket:
            return np.real(np.einsum("aqc,bcq->ab", f, f))
        # partial case: only pairs with complete ad have a defined entry
        B = np.full((self.dim, self.dim), np.nan)
        idx = np.where(self.ad_complete)[0]
        for a in idx:
            ada = f[a].T  # ad(e_a)[c, b] = f[a, b, c]
            for b in idx:
                B[a, b] = np.real(np.trace(ada @ f[b].T))
        return B

    def _validate(self) -> None:
        f = self.structure_constants
        anti = np.abs(f + f.transpose(1, 0, 2)).max()
        if anti > 1e-12:
            raise ConstructionError(f"{self.name}: antisymmetry violated ({anti:.2e})")
        self._check_jacobi()
        # compact semisimple blocks: Killing negative definite (restricted to
        # the ad-complete part when the bracket is partial)
        for fac in self.factors:
            idx = fac.indices[self.ad_complete[fac.indices]]
            blk = self.killing_matrix[np.ix_(idx, idx)]
            w = np.linalg.eigvalsh((blk + blk.T) / 2)
            if w.max() >= 0:
                raise ConstructionError(f"{self.name}: Killing form not negative definite on {fac.name}")
        if not self.partial_bracket:
            herm = np.abs(self.basis + self.basis.conj().transpose(0, 2, 1)).max()
            if herm > 1e-12:
                raise ConstructionError(f"{self.name}: basis not anti-Hermitian ({herm:.2e})")

    def _check_jacobi(self) -> None:
        # equivalent form: ad[e_a, e_b] = [ad e_a, ad e_b] on the complete domain
        f = self.structure_constants
        idx = np.where(self.ad_complete)[0]
        worst = 0.0
        for a in idx:
            ada = f[a].T
            for b in idx:
                lhs = ada @ f[b].T - f[b].T @ ada
                rhs = np.tensordot(f[a, b], f.transpose(0, 2, 1), axes=(0, 0))
                worst = max(worst, np.abs(lhs - rhs).max())
        if worst > _JACOBI_TOL:
            raise ConstructionError(f"{self.name}: Jacobi residual {worst:.2e}")

    # ----- elements -----

    def zero(self) -> np.ndarray:
        return np.zeros(self.dim)

    def basis_vector(self, a: int) -> np.ndarray:
        v = np.zeros(self.dim)
        v[a] = 1.0
        return v

    def to_matrix(self, coords) -> np.ndarray:
        """Coordinates (..., dim) -> representation matrices (..., N, N)."""
        return np.einsum("...a,anm->...nm", np.asarray(coords), self.basis)

    def _matrix_coords(self, M):
        rhs = np.real(np.einsum("aij,...ij->...a", self.basis.conj(), M))
        coef = rhs @ self._gram_inv.T
        res = np.abs(self.to_matrix(coef) - M).max()
        return coef, float(res)

    def to_coords(self, M, span_tol: float | None = None):
        """Project matrices onto the basis span.

        Returns (coords, residual); raises when the residual exceeds
        span_tol (pass None to skip the gate).
        """
        if self._gram_inv is None:
            raise PartialBracketError(f"{self.name}: no matrix-coordinate chart")
        coords, res = self._matrix_coords(np.asarray(M, dtype=complex))
        if span_tol is not None and res > span_tol:
            raise LogRangeError(f"{self.name}: element outside basis span (residual {res:.2e})")
        return coords, res

    def bracket(self, X, Y) -> np.ndarray:
        """[X, Y] in coordinates; gates the partial-bracket domain."""
        X = np.asarray(X)
        Y = np.asarray(Y)
        if self.partial_bracket:
            bad = ~self.ad_complete
            if np.abs(X[..., bad]).max(initial=0.0) > 1e-12 and \
               np.abs(Y[..., bad]).max(initial=0.0) > 1e-12:
                raise PartialBracketError(f"{self.name}: partial bracket: ad undefined")
        out = np.einsum("...a,...b,abc->...c", X, Y, self.structure_constants)
        return np.real(out) if not np.iscomplexobj(self.structure_constants) else out

    def ad_matrix(self, X) -> np.ndarray:
        """Matrix of ad(X) acting on coordinates, rows = output index."""
        self._require_ad(X)
        return np.einsum("a,abc->cb", np.asarray(X), self.structure_constants)

    def _require_ad(self, X) -> None:
        if self.partial_bracket:
            X = np.asarray(X)
            if np.abs(X[..., ~self.ad_complete]).max(initial=0.0) > 1e-12:
                raise PartialBracketError(f"{self.name}: partial bracket: ad undefined")

    # ----- group realization -----

    @property
    def has_group_chart(self) -> bool:
        return not self.partial_bracket

    def group_identity(self) -> np.ndarray:
        return np.eye(self.rep_dim, dtype=complex)

    def check_group_elements(self, g, tol: float = 1e-10) -> float:
        """Max deviation from the group's defining constraints (unitarity,
        plus realness for so(3) and unit determinant for determinant-1 kinds)."""
        g = np.asarray(g, dtype=complex)
        eye = np.eye(self.rep_dim)
        dev = np.abs(np.einsum("...ji,...jk->...ik", g.conj(), g) - eye).max()
        if self.group_kind == "special_orthogonal":
            dev = max(dev, np.abs(g.imag).max())
        if self.group_kind in ("special_unitary", "special_orthogonal", "symplectic"):
            dev = max(dev, np.abs(np.linalg.det(g) - 1.0).max())
        if dev > tol:
            raise LogRangeError(f"{self.name}: matrices fail group constraints ({dev:.2e})")
        return float(dev)


# ----------------------------------------------------------------------
# family constructors
# ----------------------------------------------------------------------

def _su_basis(n: int) -> np.ndarray:
    out = []
    for p in range(n):
        for q in range(p + 1, n):
            sym = np.zeros((n, n), dtype=complex)
            sym[p, q] = sym[q, p] = 1j
            asym = np.zeros((n, n), dtype=complex)
            asym[p, q] = 1.0
            asym[q, p] = -1.0
            out += [sym, asym]
    for p in range(n - 1):
        d = np.zeros((n, n), dtype=complex)
        d[p, p] = 1j
        d[p + 1, p + 1] = -1j
        out.append(d)
    return np.stack(out)


def _pauli() -> np.ndarray:
    return np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex)


def _gamma_matrices(m: int) -> np.ndarray:
    """Hermitian gammas with {g_a, g_b} = 2 delta_ab in dimension 2^floor(m/2)."""
    k = m // 2
    sx, sy, sz = _pauli()
    eye = np.eye(2, dtype=complex)

    def kron_chain(mats):
        out = np.array([[1.0 + 0j]])
        for M in mats:
            out = np.kron(out, M)
        return out

    gammas = []
    for j in range(1, k + 1):
        pre = [sz] * (j - 1)
        post = [eye] * (k - j)
        gammas.append(kron_chain(pre + [sx] + post))
        gammas.append(kron_chain(pre + [sy] + post))
    if m % 2 == 1:
        gammas.append(kron_chain([sz] * k))
    gammas = np.stack(gammas[:m])
    dim = 2 ** k
    for a in range(m):
        for b in range(m):
            acom = gammas[a] @ gammas[b] + gammas[b] @ gammas[a]
            target = 2 * np.eye(dim) if a == b else np.zeros((dim, dim))
            if np.abs(acom - target).max() > 1e-12:
                raise ConstructionError(f"spin({m}): gamma anticommutator failure")
    return gammas


def _spin_pairs(m: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(1, m + 1) for j in range(i + 1, m + 1)]


def _spin_basis(m: int) -> np.ndarray:
    g = _gamma_matrices(m)
    # e_i = i gamma_i, so e_i e_j = -gamma_i gamma_j
    return np.stack([-(g[i - 1] @ g[j - 1]) for i, j in _spin_pairs(m)])


def _quat_block(a: float, b: float, c: float, d: float) -> np.ndarray:
    """a + bi + cj + dk as a 2 x 2 complex matrix."""
    return np.array([[a + 1j * b, c + 1j * d], [-c + 1j * d, a - 1j * b]])


def _sp_basis(n: int) -> np.ndarray:
    units = [(0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)]
    out = []
    for p in range(n):
        for u in units:
            M = np.zeros((2 * n, 2 * n), dtype=complex)
            M[2 * p:2 * p + 2, 2 * p:2 * p + 2] = _quat_block(*u)
            out.append(M)
    for p in range(n):
        for q in range(p + 1, n):
            for u in [(1, 0, 0, 0)] + units:
                M = np.zeros((2 * n, 2 * n), dtype=complex)
                blk = _quat_block(*u)
                M[2 * p:2 * p + 2, 2 * q:2 * q + 2] = blk
                M[2 * q:2 * q + 2, 2 * p:2 * p + 2] = -blk.conj().T
                out.append(M)
    return np.stack(out)


# 7 x 7 family: rows/columns follow the explicit matrix; the 14 parameters
# are ordered (l2..l7, m3..m7, n5, n6, n7).
def _g2_matrix(p) -> np.ndarray:
    l2, l3, l4, l5, l6, l7, m3, m4, m5, m6, m7, n5, n6, n7 = p
    return np.array([
        [0, -l2, -l3, -l4, -l5, -l6, -l7],
        [l2, 0, -m3, -m4, -m5, -m6, -m7],
        [l3, m3, 0, m5 - l6, -l7 - m4, l4 - m7, l5 + m6],
        [l4, m4, l6 - m5, 0, -n5, -n6, -n7],
        [l5, m5, l7 + m4, n5, 0, -l2 - n7, n6 - l3],
        [l6, m6, -l4 + m7, n6, l2 + n7, 0, -m3 - n5],
        [l7, m7, -l5 - m6, n7, l3 - n6, m3 + n5, 0],
    ], dtype=complex)


def _g2_basis() -> np.ndarray:
    return np.stack([_g2_matrix(np.eye(14)[i]) for i in range(14)])


G2_V_INDEX = 11  # the n5 = 1 basis element


def _so3_basis() -> np.ndarray:
    L = np.zeros((3, 3, 3), dtype=complex)
    L[0, 1, 2], L[0, 2, 1] = -1.0, 1.0
    L[1, 2, 0], L[1, 0, 2] = -1.0, 1.0
    L[2, 0, 1], L[2, 1, 0] = -1.0, 1.0
    return L


def _u1_basis() -> np.ndarray:
    return np.array([[[1j]]])


def _blades_to_matrix(elem: clifford.CliffordElement, gam: np.ndarray) -> np.ndarray:
    """Blade element -> matrix in the representation e_i = i gamma_i."""
    dim = gam.shape[1]
    out = np.zeros((dim, dim), dtype=complex)
    for mask, c in elem.coeffs.items():
        M = np.eye(dim, dtype=complex)
        i = 0
        while mask:
            if mask & 1:
                M = M @ (1j * gam[i])
            mask >>= 1
            i += 1
        out += c * M
    return out


def _delta9_basis() -> list[clifford.CliffordElement]:
    """The 16 spinor basis elements built from eps_j = 1 - e_{2j-1}e_{2j} (x) i
    and omega_j = e_{2j-1} + e_{2j} (x) i inside complexified CL(10)."""
    m = 10

    def eps(j):
        return clifford.CliffordElement(m, {0: 1.0}) + (-1j) * clifford.blade(m, 2 * j - 1, 2 * j)

    def omg(j):
        return clifford.generator(m, 2 * j - 1) + 1j * clifford.generator(m, 2 * j)

    out = []
    for r in (0, 2, 4):
        for S in itertools.combinations(range(1, 6), r):
            prod = clifford.CliffordElement(m, {0: 1.0})
            for j in range(1, 6):
                prod = prod * (omg(j) if j in S else eps(j))
            out.append(prod)
    return out


def _clifford_vec(elem: clifford.CliffordElement, m: int) -> np.ndarray:
    v = np.zeros(1 << m, dtype=complex)
    for mask, c in elem.coeffs.items():
        v[mask] = c
    return v


def _build_f4() -> LieAlgebra:
    """f4 = spin(9) (+) Delta_9 with brackets limited to the spin(9) action.

    The spin(9)-internal bracket is the blade commutator; the mixed bracket
    [a, v] = a v is left Clifford multiplication on the 16-dimensional
    spinor block.  Spinor x spinor brackets are not constructed, so ad is
    complete only for spin(9) elements.
    """
    m = 10
    clifford.check_relations(m)
    spin_blades = [clifford.blade(m, i, j) for i, j in _spin_pairs(9)]
    delta = _delta9_basis()
    n_s, n_d = len(spin_blades), len(delta)
    dim = n_s + n_d  # 36 + 16 = 52

    # verify the spinor block: membership relation and linear independence
    for j in range(1, 6):
        op = 1j * clifford.blade(m, 2 * j - 1, 2 * j)
        for v in delta:
            if not (v * op + v).is_zero(1e-10):
                raise ConstructionError("f4: spinor block fails its defining relation")
    D = np.stack([_clifford_vec(v, m) for v in delta], axis=1)
    if np.linalg.matrix_rank(D) != n_d:
        raise ConstructionError("f4: spinor basis not independent")
    spin_masks = {next(iter(b.coeffs)): k for k, b in enumerate(spin_blades)}

    f = np.zeros((dim, dim, dim), dtype=complex)
    for a, ba in enumerate(spin_blades):
        # spin(9) x spin(9): blade commutators stay in the blade span
        for b, bb in enumerate(spin_blades):
            if a == b:
                continue
            comm = ba.commutator(bb)
            for mask, c in comm.coeffs.items():
                if mask not in spin_masks:
                    raise ConstructionError("f4: spin(9) bracket left the blade span")
                f[a, b, spin_masks[mask]] = c
        # spin(9) x Delta_9: left multiplication, expanded in the spinor basis
        for b, v in enumerate(delta):
            prod = _clifford_vec(ba * v, m)
            coef, res, *_ = np.linalg.lstsq(D, prod, rcond=None)
            if np.linalg.norm(D @ coef - prod) > 1e-9:
                raise ConstructionError("f4: spinor block not invariant under spin(9)")
            f[a, n_s + b, n_s:] = coef
            f[n_s + b, a, n_s:] = -coef

    gam = _gamma_matrices(m)
    basis = np.stack([_blades_to_matrix(b, gam) for b in spin_blades]
                     + [_blades_to_matrix(v, gam) for v in delta])
    ad_complete = np.zeros(dim, dtype=bool)
    ad_complete[:n_s] = True
    return LieAlgebra(
        "f4", "f4", basis,
        factors=[Factor("f4", 0, dim)],
        group_kind="none",
        f_table=f,
        ad_complete=ad_complete,
        partial_bracket=True,
    )


@lru_cache(maxsize=None)
def _build_atomic(family: str, param: int | None) -> LieAlgebra:
    if family == "su":
        if not 2 <= param <= 5:
            raise UnsupportedAlgebraError(f"unsupported algebra: su({param})")
        name = f"su{param}"
        return LieAlgebra(name, "su", _su_basis(param), factors=[Factor(name, 0, param * param - 1)])
    if family == "spin":
        if not 3 <= param <= 9:
            raise UnsupportedAlgebraError(f"unsupported algebra: spin({param})")
        name = f"spin{param}"
        d = param * (param - 1) // 2
        return LieAlgebra(name, "spin", _spin_basis(param), factors=[Factor(name, 0, d)])
    if family == "sp":
        if not 1 <= param <= 3:
            raise UnsupportedAlgebraError(f"unsupported algebra: sp({param})")
        name = f"sp{param}"
        return LieAlgebra(name, "sp", _sp_basis(param),
                          factors=[Factor(name, 0, param * (2 * param + 1))],
                          group_kind="symplectic")
    if family == "g2":
        return LieAlgebra("g2", "g2", _g2_basis(), factors=[Factor("g2", 0, 14)],
                          group_kind="special_orthogonal")
    if family == "f4":
        return _build_f4()
    if family == "u1":
        return LieAlgebra("u1", "u1", _u1_basis(), factors=[], pi1="integers",
                          group_kind="unitary")
    if family == "so3":
        return LieAlgebra("so3", "so3", _so3_basis(), factors=[Factor("so3", 0, 3)],
                          pi1="order2", group_kind="special_orthogonal")
    raise UnsupportedAlgebraError(f"unsupported algebra: {family}")


def build_algebra(family: str, param: int | None = None) -> LieAlgebra:
    """Construct one of the supported compact algebras.

    family in {"su", "spin", "sp", "g2", "f4", "u1", "so3"}; su/spin/sp
    take their size as `param`.
    """
    if family in ("g2", "f4", "u1", "so3"):
        if param is not None:
            raise UnsupportedAlgebraError(f"unsupported algebra: {family}({param})")
        return _build_atomic(family, None)
    if family in ("su", "spin", "sp"):
        if param is None:
            raise UnsupportedAlgebraError(f"unsupported algebra: {family} needs a size")
        return _build_atomic(family, int(param))
    raise UnsupportedAlgebraError(f"unsupported algebra: {family}")


def parse_algebra(spec: str) -> LieAlgebra:
    """Parse "su3", "spin7+u1", ... into an algebra (sums are direct sums)."""
    parts = [p.strip() for p in spec.split("+")]
    algs = []
    for p in parts:
        if p in ("g2", "f4", "u1", "so3"):
            algs.append(build_algebra(p))
            continue
        fam = p.rstrip("0123456789")
        tail = p[len(fam):]
        if fam in ("su", "spin", "sp") and tail:
            algs.append(build_algebra(fam, int(tail)))
        else:
            raise UnsupportedAlgebraError(f"unsupported algebra: {p!r}")
    return algs[0] if len(algs) == 1 else direct_sum(*algs)


def direct_sum(*algs: LieAlgebra) -> LieAlgebra:
    """Block-diagonal direct sum; factors and lift data concatenate."""
    if any(a.partial_bracket for a in algs):
        raise UnsupportedAlgebraError("direct sums of partial algebras not supported")
    dim = sum(a.dim for a in algs)
    rep = sum(a.rep_dim for a in algs)
    basis = np.zeros((dim, rep, rep), dtype=complex)
    f = np.zeros((dim, dim, dim))
    factors = []
    do, ro = 0, 0
    for a in algs:
        basis[do:do + a.dim, ro:ro + a.rep_dim, ro:ro + a.rep_dim] = a.basis
        f[do:do + a.dim, do:do + a.dim, do:do + a.dim] = a.structure_constants
        for fac in a.factors:
            factors.append(Factor(f"{a.name}:{fac.name}", do + fac.start, do + fac.stop))
        do += a.dim
        ro += a.rep_dim
    kind = "special_unitary" if all(a.group_kind == "special_unitary" for a in algs) else "unitary"
    name = "+".join(a.name for a in algs)
    return LieAlgebra(name, "sum", basis, factors=factors, group_kind=kind,
                      blocks=algs, f_table=f)


# ----------------------------------------------------------------------
# Killing data, embeddings, constants
# ----------------------------------------------------------------------

def killing_pairing(alg: LieAlgebra, X, Y) -> float:
    """Tr(ad X ad Y) from the adjoint tables; symmetric bilinear."""
    X = np.asarray(X)
    Y = np.asarray(Y)
    alg._require_ad(X)
    alg._require_ad(Y)
    B = np.where(np.isnan(alg.killing_matrix), 0.0, alg.killing_matrix)
    return float(np.einsum("...a,ab,...b->...", X, B, Y))


def algebra_norm_sq(alg: LieAlgebra, X) -> float:
    """|X|^2 = -(1/8) Tr(ad X ad X)."""
    return -killing_pairing(alg, X, X) / 8.0


def _su2_triple_from_v(alg: LieAlgebra, V: np.ndarray) -> np.ndarray:
    """Complete V to images (X1, X2, V) of (i s1, i s2, i s3): find the
    two-dimensional eigenspace of ad(V)^2 with eigenvalue -4 and scale."""
    adv = alg.ad_matrix(V)
    M = np.real(adv @ adv) + 4.0 * np.eye(alg.dim)
    _, s, vh = np.linalg.svd(M)
    null = vh[s < 1e-8 * max(1.0, s.max())]
    if null.shape[0] != 2:
        raise ConstructionError(f"{alg.name}: su(2) completion eigenspace has dim {null.shape[0]}")
    Y = null[0]
    X2 = -0.5 * np.real(adv @ Y)
    num = killing_pairing(alg, alg.bracket(Y, X2), V)
    den = killing_pairing(alg, V, V)
    c0 = num / den  # [Y, -ad(V)Y/2] = c0 V + orthogonal remainder
    if abs(c0) < 1e-12:
        raise ConstructionError(f"{alg.name}: degenerate su(2) completion")
    lam = np.sqrt(2.0 / abs(c0))
    X1 = lam * Y
    X2 = lam * X2
    if c0 > 0:
        X1 = -X1
    return np.stack([X1, -0.5 * np.real(adv @ X1), V])


def primitive_su2(alg: LieAlgebra, tol: float = 1e-10) -> Su2Embedding:
    """A homomorphic su(2) image generating the primitive 3-sphere class."""
    if alg._su2_cache is not None:
        return alg._su2_cache
    d = alg.dim

    def coords_of(M):
        c, res = alg.to_coords(M)
        if res > 1e-9:
            raise ConstructionError(f"{alg.name}: embedding image not in basis span")
        return c

    if alg.family == "su":
        sx, sy, sz = _pauli()
        n = alg.rep_dim
        images = []
        for s in (sx, sy, sz):
            M = np.zeros((n, n), dtype=complex)
            M[:2, :2] = 1j * s
            images.append(coords_of(M))
        images = np.stack(images)
    elif alg.family == "sp":
        n = alg.rep_dim // 2
        images = []
        for u in ((0, 0, 0, 1), (0, 0, 1, 0), (0, 1, 0, 0)):  # k, j, i
            M = np.zeros((2 * n, 2 * n), dtype=complex)
            M[:2, :2] = _quat_block(*u)
            images.append(coords_of(M))
        images = np.stack(images)
    elif alg.family in ("spin", "f4"):
        pairs = _spin_pairs(9 if alg.family == "f4" else int(alg.name[4:]))
        images = np.zeros((3, d))
        images[0, pairs.index((2, 3))] = 1.0
        images[1, pairs.index((1, 3))] = 1.0
        images[2, pairs.index((1, 2))] = 1.0
    elif alg.family == "so3":
        images = -2.0 * np.eye(3)
    elif alg.family == "g2":
        V = np.zeros(14)
        V[G2_V_INDEX] = 1.0
        images = _su2_triple_from_v(alg, V)
    else:
        raise UnsupportedAlgebraError(f"no primitive su(2) for {alg.name}")

    # homomorphism residual: [h(x_a), h(x_b)] = h([x_a, x_b]) with
    # [i s_a, i s_b] = -2 eps_abc i s_c
    res = 0.0
    for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        lhs = alg.bracket(images[a], images[b])
        res = max(res, np.abs(lhs + 2.0 * images[c]).max())
    if res > tol:
        raise ConstructionError(f"{alg.name}: su(2) homomorphism residual {res:.2e}")
    emb = Su2Embedding(alg, images, float(res))
    alg._su2_cache = emb
    return emb


def normalizing_constant(alg: LieAlgebra) -> Fraction:
    """Exact rational K = (-8) / Tr(ad(h(v))^2) for a simple algebra."""
    if len(alg.factors) != 1 or alg.blocks:
        raise UnsupportedAlgebraError(f"{alg.name}: normalizing constant needs a simple algebra")
    return factor_constant(alg, 0)


def factor_constant(alg: LieAlgebra, k: int) -> Fraction:
    """Normalizing constant of simple factor k, certified and cached."""
    if k in alg._k_cache:
        return alg._k_cache[k]
    fac = alg.factors[k]
    if alg.blocks:
        # locate the block owning this factor and certify there
        do = 0
        for blk in alg.blocks:
            if do <= fac.start < do + blk.dim:
                K = normalizing_constant(blk)
                break
            do += blk.dim
        else:  # pragma: no cover
            raise ConstructionError("factor outside all blocks")
    else:
        emb = primitive_su2(alg)
        tr = killing_pairing(alg, emb.image_of_v, emb.image_of_v)
        if abs(tr - round(tr)) > _TRACE_INT_TOL:
            raise CertificationError(f"{alg.name}: non-integral Killing trace {tr!r}")
        K = Fraction(-8, round(tr))
    alg._k_cache[k] = K
    return K


def killing_trace_of_v(alg: LieAlgebra) -> int:
    """Integer-certified Tr(ad(h(v))^2) used by the constants report."""
    emb = primitive_su2(alg)
    tr = killing_pairing(alg, emb.image_of_v, emb.image_of_v)
    if abs(tr - round(tr)) > _TRACE_INT_TOL:
        raise CertificationError(f"{alg.name}: non-integral Killing trace {tr!r}")
    return round(tr)


def table_constant(spec: str) -> Fraction:
    """Closed-form normalizing constant for a supported atomic spec."""
    fixed = {"g2": Fraction(1, 2), "f4": Fraction(1, 9), "so3": Fraction(1, 1)}
    if spec in fixed:
        return fixed[spec]
    fam = spec.rstrip("0123456789")
    tail = spec[len(fam):]
    if fam == "su":
        return Fraction(2, int(tail))
    if fam == "spin":
        return Fraction(1, int(tail) - 2)
    if fam == "sp":
        return Fraction(2, int(tail) + 1)
    raise UnsupportedAlgebraError(f"no table constant for {spec!r}")


def project_factor(alg: LieAlgebra, k: int, X) -> np.ndarray:
    """Killing-orthogonal projection onto simple factor k (a coordinate mask
    for block-diagonal bases)."""
    fac = alg.factors[k]
    out = np.zeros_like(np.asarray(X, dtype=float))
    out[..., fac.start:fac.stop] = np.asarray(X)[..., fac.start:fac.stop]
    return out


def theta_density(alg: LieAlgebra, k: int, X, Y, Z) -> float:
    """Value of the normalized bi-invariant 3-form on factor k:

        -(K_k / 32 pi^2) Tr(ad [X^, Y^] ad Z^)

    with ^ the Killing-orthogonal projection onto the factor.  Fully
    antisymmetric in (X, Y, Z)."""
    K = float(factor_constant(alg, k))
    Xp = project_factor(alg, k, X)
    Yp = project_factor(alg, k, Y)
    Zp = project_factor(alg, k, Z)
    val = killing_pairing(alg, alg.bracket(Xp, Yp), Zp)
    return -(K / (32.0 * np.pi ** 2)) * val


# ----------------------------------------------------------------------
# exponential and principal logarithm
# ----------------------------------------------------------------------

def group_exp(alg: LieAlgebra, X) -> np.ndarray:
    """exp of algebra coordinates into the matrix group, batched."""
    if not alg.has_group_chart:
        raise PartialBracketError(f"{alg.name}: no group realization")
    M = alg.to_matrix(np.asarray(X))
    w, V = np.linalg.eigh(-1j * M)  # Hermitian for anti-Hermitian M
    phase = np.exp(1j * w)
    return np.einsum("...ab,...b,...cb->...ac", V, phase, V.conj())


def group_log(alg: LieAlgebra, g, threshold: float = 1.0,
              span_tol: float = 1e-9):
    """Principal matrix log projected to the algebra basis span.

    Returns (coords, residual) where residual is the worst projection
    defect over the batch.  Raises LogRangeError when any matrix has an
    eigenvalue farther than `threshold` from 1 (outside the safe branch).
    """
    if not alg.has_group_chart:
        raise PartialBracketError(f"{alg.name}: no group realization")
    g = np.asarray(g, dtype=complex)
    w, V = np.linalg.eig(g)
    far = np.abs(w - 1.0).max()
    if far >= threshold:
        raise LogRangeError(f"{alg.name}: log out of range (|lambda - 1| = {far:.3f})")
    lw = 1j * np.angle(w)
    # V diag(lw) V^-1 without forming the inverse: solve against V^T on the right
    VD = np.einsum("...ab,...b->...ab", V, lw)
    L = np.swapaxes(np.linalg.solve(np.swapaxes(V, -1, -2), np.swapaxes(VD, -1, -2)), -1, -2)
    coords, res = alg.to_coords(L, span_tol=span_tol)
    return coords, res


# ----------------------------------------------------------------------
# certification report
# ----------------------------------------------------------------------

def certification_report(specs=SUPPORTED_SPECS):
    """Certify normalizing constants; returns (lines, all_match).

    Line format: ``algebra=<name> dim=<d> trace=<t> K=<p>/<q>``.
    """
    lines = []
    ok = True
    for spec in specs:
        alg = parse_algebra(spec)
        tr = killing_trace_of_v(alg)
        K = normalizing_constant(alg)
        match = K == table_constant(spec)
        ok = ok and match
        lines.append(f"algebra={alg.name} dim={alg.dim} trace={tr} "
                     f"K={K.numerator}/{K.denominator}")
        if not match:
            lines[-1] += " MISMATCH"
    return lines, ok
