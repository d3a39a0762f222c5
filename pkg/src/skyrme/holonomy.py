"""Developing maps, edge-path holonomy, and gauge reconstruction.

A flat potential is integrated over cubes by an axis-ordered sweep of
one-step transports for u' = u a: last axis first from the cube corner,
then the middle axis per slice, then the first axis filling the volume.
Per-link steps stay exactly on the group:

    link-sampled a:  g <- g exp(h a_i(x))           (exact on log derivatives)
    site-sampled a:  g <- g exp(q + h^2/12 [a0,a1]) (4-point quadrature q)

The holonomy of the torus is read off a cubical cover: one chart per
coarse vertex, constant edge labels g_[p,q] estimated on star overlaps,
and generator loops multiplied along circuits that close through the
single non-tree edge of each axis.  Two flat potentials with the same
holonomy are gauge equivalent; the reconstruction aligns the second
atlas at the base vertex, propagates corrections down a maximal tree,
verifies the circuit labels, and glues (u^1)^-1 u^2 into a global gauge.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import LieAlgebra, group_exp
from .errors import AtlasError, FlatnessError, HolonomyMismatchError
from .lattice import AlgebraOneForm, GroupField, TorusLattice, flatness_residual

__all__ = [
    "CubicalCover",
    "CubeChart",
    "DevelopingAtlas",
    "HolonomyRep",
    "develop_cube",
    "path_transport",
    "build_atlas",
    "holonomy_rep",
    "gauge_from_holonomy",
]

DEFAULT_FLATNESS_FACTOR = 10.0  # gate: residual <= factor * max spacing
DEFAULT_ATLAS_TOL = 1e-6


# ----------------------------------------------------------------------
# cover combinatorics
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class CubicalCover:
    """Coarse vertex sublattice with stars of side 2s sites and a rooted tree.

    Vertices are coarse index triples; the star of v is the closed cube of
    2s+1 fine sites centered on it, so adjacent stars overlap in a slab of
    s+1 sites.  Each torus generator circuit runs along one axis and uses
    exactly one non-tree (wrap-around) edge.
    """

    lattice: TorusLattice
    spacing: int

    def __post_init__(self):
        s = self.spacing
        if s < 2:
            raise ValueError("cover spacing must be at least 2 sites")
        for n in self.lattice.dims:
            if n % s != 0:
                raise ValueError(f"cover spacing {s} must divide lattice dims {self.lattice.dims}")
            if n // s < 2:
                raise ValueError("need at least 2 cover vertices per axis")

    @classmethod
    def for_lattice(cls, lattice: TorusLattice, spacing: int | None = None) -> "CubicalCover":
        if spacing is None:
            spacing = max(2, lattice.dims[0] // 4)
            while lattice.dims[0] % spacing or any(n % spacing for n in lattice.dims):
                spacing -= 1
                if spacing < 2:
                    raise ValueError(f"no valid cover spacing for dims {lattice.dims}")
        return cls(lattice, int(spacing))

    @property
    def shape(self) -> tuple[int, int, int]:
        return tuple(n // self.spacing for n in self.lattice.dims)

    @property
    def base(self) -> tuple[int, int, int]:
        return (0, 0, 0)

    def vertices(self):
        return list(np.ndindex(self.shape))

    def star_corner(self, v) -> tuple[int, int, int]:
        return tuple((v[i] * self.spacing - self.spacing) % self.lattice.dims[i]
                     for i in range(3))

    @property
    def star_shape(self) -> tuple[int, int, int]:
        return (2 * self.spacing + 1,) * 3

    def neighbor(self, v, axis: int):
        w = list(v)
        w[axis] = (w[axis] + 1) % self.shape[axis]
        return tuple(w)

    def edges(self):
        """Oriented edges (v, axis): v -> v + e_axis on the coarse grid."""
        return [(v, ax) for v in self.vertices() for ax in range(3)]

    def tree_parent(self, v):
        """Parent of v in the maximal tree rooted at the base, as
        (parent, axis) with edge parent -> v, or None at the root."""
        if v[2] > 0:
            return (v[0], v[1], v[2] - 1), 2
        if v[1] > 0:
            return (v[0], v[1] - 1, 0), 1
        if v[0] > 0:
            return (v[0] - 1, 0, 0), 0
        return None

    def tree_order(self):
        """Vertices in root-first order (parents before children)."""
        return sorted(self.vertices(), key=lambda v: (v[0], v[1], v[2]))

    def circuit(self, axis: int):
        """Generator loop along `axis` through the base: oriented edge list."""
        n = self.shape[axis]
        out = []
        v = self.base
        for _ in range(n):
            out.append((v, axis))
            v = self.neighbor(v, axis)
        return out

    def overlap_slices(self, v, axis: int):
        """Local index slices of st(v) and st(v+e_axis) covering their overlap."""
        s = self.spacing
        full = slice(0, 2 * s + 1)
        sl_p = [full, full, full]
        sl_q = [full, full, full]
        sl_p[axis] = slice(s, 2 * s + 1)
        sl_q[axis] = slice(0, s + 1)
        return tuple(sl_p), tuple(sl_q)


# ----------------------------------------------------------------------
# cube development
# ----------------------------------------------------------------------

@dataclass
class CubeChart:
    """Group elements on a cube of sites anchored at `corner` (wrapped)."""

    lattice: TorusLattice
    algebra: LieAlgebra
    corner: tuple[int, int, int]
    values: np.ndarray  # (n1, n2, n3, N, N)


def _extract_cube(a: AlgebraOneForm, corner, shape) -> np.ndarray:
    idx = [np.arange(corner[i], corner[i] + shape[i]) % a.lattice.dims[i] for i in range(3)]
    return a.coeffs[:, idx[0]][:, :, idx[1]][:, :, :, idx[2]]


def _cube_flatness(a: AlgebraOneForm, cube: np.ndarray) -> float:
    """Curvature L2 norm over the cube interior, in the discretization the
    sweep actually uses.

    Site-sampled data: forward-difference d_i a_j - d_j a_i + [a_i, a_j].
    Link-sampled data: plaquette defect of the per-link transports,
    log(T_i(x) T_j(x+e_i) (T_j(x) T_i(x+e_j))^-1) / (h_i h_j), which is
    identically zero for a log derivative however steep the field.
    """
    alg = a.algebra
    h = a.lattice.spacings
    f = alg.structure_constants
    total = 0.0
    inner = tuple(slice(0, n - 1) for n in cube.shape[1:4])
    if a.sampling == "link":
        from .algebra import group_log

        T = [group_exp(alg, h[i] * cube[i]) for i in range(3)]
        for i, j in ((1, 2), (2, 0), (0, 1)):
            left = np.einsum("...ab,...bc->...ac", T[i], np.roll(T[j], -1, axis=i))
            right = np.einsum("...ab,...bc->...ac", T[j], np.roll(T[i], -1, axis=j))
            plaq = np.einsum("...ab,...cb->...ac", left, right.conj())
            coords, _ = group_log(alg, plaq, threshold=1.99)
            F = coords[inner] / (h[i] * h[j])
            total += np.einsum("...a,ab,...b->...", F, alg.norm_gram, F).sum()
    else:
        for i, j in ((1, 2), (2, 0), (0, 1)):
            di_aj = (np.roll(cube[j], -1, axis=i) - cube[j]) / h[i]
            dj_ai = (np.roll(cube[i], -1, axis=j) - cube[i]) / h[j]
            br = np.einsum("...a,...b,abc->...c", cube[i], cube[j], f)
            F = (di_aj - dj_ai + br)[inner]
            total += np.einsum("...a,ab,...b->...", F, alg.norm_gram, F).sum()
    return float(np.sqrt(a.lattice.cell_volume * total))


def _line_steps(alg: LieAlgebra, comps: np.ndarray, h: float, sampling: str) -> np.ndarray:
    """Per-link transport exponents along one axis of a (non-periodic) line.

    comps has the line axis first: (n, ..., dim); returns (n-1, ..., N, N)
    step matrices for the hops k -> k+1.
    """
    f = alg.structure_constants
    a0 = comps[:-1]
    a1 = comps[1:]
    if sampling == "link":
        om = h * a0
    else:
        comm = np.einsum("...a,...b,abc->...c", a0, a1, f)
        om = h * (a0 + a1) / 2.0 + (h * h / 12.0) * comm
        if comps.shape[0] >= 4:
            # interior links get the 4-point quadrature (third-order sweep)
            q = (h / 24.0) * (-comps[:-3] + 13.0 * comps[1:-2] + 13.0 * comps[2:-1] - comps[3:])
            om[1:-1] = q + (h * h / 12.0) * comm[1:-1]
    return group_exp(alg, om)


def develop_cube(a: AlgebraOneForm, corner, shape,
                 flatness_gate: float | None = None) -> CubeChart:
    """Integrate u' = u a over a cube with u(corner) = 1.

    The sweep fills the last axis from the corner, then the middle axis on
    each slice, then the first axis through the volume.  Requires the
    restriction to pass the flatness gate (default 10 * max spacing);
    path dependence would otherwise make the sweep meaningless.
    """
    alg = a.algebra
    corner = tuple(int(c) for c in corner)
    shape = tuple(int(n) for n in shape)
    cube = _extract_cube(a, corner, shape)
    if flatness_gate is None:
        flatness_gate = DEFAULT_FLATNESS_FACTOR * max(a.lattice.spacings)
    resid = _cube_flatness(a, cube)
    if resid > flatness_gate:
        raise FlatnessError(f"connection not flat on cube (residual {resid:.3e} > {flatness_gate:.3e})")

    h = a.lattice.spacings
    n1, n2, n3 = shape
    N = alg.rep_dim
    u = np.empty(shape + (N, N), dtype=complex)
    u[0, 0, 0] = np.eye(N)

    steps3 = _line_steps(alg, cube[2, 0, 0, :], h[2], a.sampling)  # (n3-1, N, N)
    for z in range(1, n3):
        u[0, 0, z] = u[0, 0, z - 1] @ steps3[z - 1]
    steps2 = _line_steps(alg, cube[1, 0], h[1], a.sampling)  # (n2-1, n3, N, N)
    for y in range(1, n2):
        u[0, y] = np.einsum("zij,zjk->zik", u[0, y - 1], steps2[y - 1])
    steps1 = _line_steps(alg, cube[0], h[0], a.sampling)  # (n1-1, n2, n3, N, N)
    for x in range(1, n1):
        u[x] = np.einsum("...ij,...jk->...ik", u[x - 1], steps1[x - 1])
    return CubeChart(a.lattice, alg, corner, u)


def path_transport(a: AlgebraOneForm, path) -> np.ndarray:
    """Ordered product of one-step transports along a lattice polyline.

    `path` is a sequence of site index triples; consecutive sites must
    differ by one step along a single axis (periodic wrap allowed).
    """
    alg = a.algebra
    dims = a.lattice.dims
    h = a.lattice.spacings
    g = np.eye(alg.rep_dim, dtype=complex)
    f = alg.structure_constants
    for k in range(len(path) - 1):
        p = tuple(int(v) % dims[i] for i, v in enumerate(path[k]))
        q = tuple(int(v) % dims[i] for i, v in enumerate(path[k + 1]))
        delta = [(q[i] - p[i]) % dims[i] for i in range(3)]
        moves = [(i, d) for i, d in enumerate(delta) if d != 0]
        if len(moves) != 1 or moves[0][1] not in (1, dims[moves[0][0]] - 1):
            raise ValueError(f"path hop {p} -> {q} is not a single link")
        ax, d = moves[0]
        forward = d == 1
        tail = p if forward else q
        head = q if forward else p
        if a.sampling == "link":
            om = h[ax] * a.coeffs[(ax,) + tail]
        else:
            a0 = a.coeffs[(ax,) + tail]
            a1 = a.coeffs[(ax,) + head]
            comm = np.einsum("a,b,abc->c", a0, a1, f)
            om = h[ax] * (a0 + a1) / 2.0 + (h[ax] ** 2 / 12.0) * comm
        step = group_exp(alg, om)
        g = g @ step if forward else g @ step.conj().T
    return g


# ----------------------------------------------------------------------
# atlas and holonomy
# ----------------------------------------------------------------------

def _project_group(alg: LieAlgebra, M: np.ndarray) -> np.ndarray:
    """Nearest group element to M: polar factor, det-normalized when needed."""
    if alg.group_kind == "special_orthogonal":
        M = M.real.astype(complex)
    W, _, Vh = np.linalg.svd(M)
    g = W @ Vh
    if alg.group_kind in ("special_unitary", "symplectic"):
        det = np.linalg.det(g)
        g = g * np.exp(-1j * np.angle(det) / alg.rep_dim)
    elif alg.group_kind == "special_orthogonal":
        if np.linalg.det(g.real).real < 0:
            raise AtlasError("overlap mean projected onto the wrong orthogonal component")
        g = g.real.astype(complex)
    return g


@dataclass
class DevelopingAtlas:
    """Charts per cover vertex with constant edge labels on overlaps."""

    cover: CubicalCover
    algebra: LieAlgebra
    charts: dict
    edge_labels: dict   # (v, axis) -> group element g_[v, v+e_axis]
    edge_scores: dict   # (v, axis) -> sup deviation of u_p u_q^-1 from g
    tol: float

    def label(self, v, axis: int) -> np.ndarray:
        return self.edge_labels[(tuple(v), axis)]

    def pair_label(self, p, q) -> tuple[np.ndarray, float]:
        """Constant g with u_p = g u_q on st(p) cap st(q), for any two
        vertices whose stars overlap (not only axis neighbors)."""
        cov = self.cover
        s = cov.spacing
        sl_p, sl_q = [], []
        for i in range(3):
            d = (q[i] - p[i]) % cov.shape[i]
            if d == 0:
                sl_p.append(slice(0, 2 * s + 1))
                sl_q.append(slice(0, 2 * s + 1))
            elif d == 1:
                sl_p.append(slice(s, 2 * s + 1))
                sl_q.append(slice(0, s + 1))
            elif d == cov.shape[i] - 1:
                sl_p.append(slice(0, s + 1))
                sl_q.append(slice(s, 2 * s + 1))
            else:
                raise ValueError(f"stars of {p} and {q} do not overlap")
        up = self.charts[tuple(p)][tuple(sl_p)]
        uq = self.charts[tuple(q)][tuple(sl_q)]
        prod = np.einsum("...ij,...kj->...ik", up, uq.conj())
        g = _project_group(self.algebra, prod.reshape(-1, *prod.shape[-2:]).mean(axis=0))
        score = np.abs(prod - g).max()
        return g, float(score)


@dataclass
class HolonomyRep:
    """Generator-loop holonomies anchored at the cover's base vertex."""

    base: tuple[int, int, int]
    elements: np.ndarray  # (3, N, N)

    @property
    def traces(self) -> np.ndarray:
        return np.einsum("lii->l", self.elements)

    def commutator_defect(self) -> float:
        d = 0.0
        for i in range(3):
            for j in range(i + 1, 3):
                d = max(d, np.abs(self.elements[i] @ self.elements[j]
                                  - self.elements[j] @ self.elements[i]).max())
        return float(d)


def build_atlas(a: AlgebraOneForm, cover: CubicalCover,
                tol: float = DEFAULT_ATLAS_TOL,
                flatness_gate: float | None = None) -> DevelopingAtlas:
    """Develop every star and estimate the constant edge labels.

    The label of an oriented edge [p, q] is the overlap mean of
    u_p(x) u_q(x)^-1 projected back to the group; its recorded score is
    the sup deviation from constancy and must stay below `tol`.
    """
    charts = {}
    for v in cover.vertices():
        chart = develop_cube(a, cover.star_corner(v), cover.star_shape,
                             flatness_gate=flatness_gate)
        charts[v] = chart.values
    labels, scores = {}, {}
    for v, ax in cover.edges():
        q = cover.neighbor(v, ax)
        sl_p, sl_q = cover.overlap_slices(v, ax)
        up = charts[v][sl_p]
        uq = charts[q][sl_q]
        prod = np.einsum("...ij,...kj->...ik", up, uq.conj())
        g = _project_group(a.algebra, prod.reshape(-1, *prod.shape[-2:]).mean(axis=0))
        score = float(np.abs(prod - g).max())
        if score > tol:
            raise AtlasError(f"overlap constancy violated on edge {v}+e{ax + 1} "
                             f"(score {score:.3e} > {tol:.1e})")
        labels[(v, ax)] = g
        scores[(v, ax)] = score
    return DevelopingAtlas(cover, a.algebra, charts, labels, scores, tol)


def holonomy_rep(a: AlgebraOneForm, cover: CubicalCover | None = None,
                 atlas: DevelopingAtlas | None = None, **kwargs) -> HolonomyRep:
    """Holonomy of each torus generator as the ordered product of edge labels."""
    if atlas is None:
        if cover is None:
            cover = CubicalCover.for_lattice(a.lattice)
        atlas = build_atlas(a, cover, **kwargs)
    els = []
    for ax in range(3):
        g = np.eye(a.algebra.rep_dim, dtype=complex)
        for v, eax in atlas.cover.circuit(ax):
            g = g @ atlas.label(v, eax)
        els.append(g)
    return HolonomyRep(atlas.cover.base, np.stack(els))


# ----------------------------------------------------------------------
# gauge reconstruction from equal holonomy
# ----------------------------------------------------------------------

def _align_constant(alg: LieAlgebra, rho1: np.ndarray, rho2: np.ndarray,
                    tol: float) -> np.ndarray:
    """Group element C with C rho2_l C^-1 = rho1_l for all generators.

    Solved as the null space of the stacked Sylvester operators, then
    projected to the group; raises on failure (holonomies not conjugate).
    """
    N = alg.rep_dim
    eye = np.eye(N)
    rows = []
    for r1, r2 in zip(rho1, rho2):
        rows.append(np.kron(eye, r2.T) - np.kron(r1, eye))
    M = np.concatenate(rows, axis=0)
    _, svals, Vh = np.linalg.svd(M)
    null = Vh.conj()[svals < 1e-8 * max(1.0, svals.max())]
    if null.shape[0] == 0:
        null = Vh.conj()[-1:]  # best effort: smallest singular vector
    candidates = [vec.reshape(N, N) for vec in null]
    # prefer the null-space representative closest to the identity
    proj_id = sum((vec.conj() @ eye.reshape(-1)) * vec for vec in null).reshape(N, N)
    candidates.insert(0, proj_id)
    best, best_err = None, np.inf
    for cand in candidates:
        if np.linalg.norm(cand) < 1e-12:
            continue
        try:
            C = _project_group(alg, cand)
        except AtlasError:
            continue
        err = max(np.abs(C @ r2 @ C.conj().T - r1).max() for r1, r2 in zip(rho1, rho2))
        if err < best_err:
            best, best_err = C, err
    if best is None or best_err > tol:
        raise HolonomyMismatchError(f"holonomies differ (conjugacy defect {best_err:.3e})")
    return best


def gauge_from_holonomy(a1: AlgebraOneForm, a2: AlgebraOneForm,
                        cover: CubicalCover | None = None,
                        tol: float = 1e-6,
                        flatness_gate: float | None = None) -> GroupField:
    """Reconstruct u with a2 = gauge_transform(a1, u) from equal holonomy.

    Both potentials are developed over the cover; the second atlas is
    aligned at the base vertex, corrected down the maximal tree so its
    tree labels match the first atlas, and the non-tree circuit labels are
    compared: any defect beyond `tol` means the holonomies differ (never a
    field).  The glued gauge is (u^1_p)^-1 k_p u^2_p, chart-assembled.
    """
    if cover is None:
        cover = CubicalCover.for_lattice(a1.lattice)
    A1 = build_atlas(a1, cover, tol=max(tol, DEFAULT_ATLAS_TOL), flatness_gate=flatness_gate)
    A2 = build_atlas(a2, cover, tol=max(tol, DEFAULT_ATLAS_TOL), flatness_gate=flatness_gate)
    rho1 = holonomy_rep(a1, atlas=A1).elements
    rho2 = holonomy_rep(a2, atlas=A2).elements
    tr_gap = np.abs(rho1.trace(axis1=1, axis2=2) - rho2.trace(axis1=1, axis2=2)).max()
    if tr_gap > 10 * tol:
        raise HolonomyMismatchError(f"holonomies differ (trace gap {tr_gap:.3e})")
    C = _align_constant(a1.algebra, rho1, rho2, tol=10 * tol)

    # tree correction: k_child = g1_e^-1 k_parent g2_e along parent -> child
    k = {cover.base: C}
    for v in cover.tree_order():
        par = cover.tree_parent(v)
        if par is None:
            continue
        p, ax = par
        g1 = A1.label(p, ax)
        g2 = A2.label(p, ax)
        k[v] = g1.conj().T @ k[p] @ g2

    # all corrected labels must now match; non-tree edges test the holonomy
    worst = 0.0
    for v, ax in cover.edges():
        q = cover.neighbor(v, ax)
        gbar = k[v] @ A2.label(v, ax) @ k[q].conj().T
        worst = max(worst, float(np.abs(gbar - A1.label(v, ax)).max()))
    if worst > 50 * tol:
        raise HolonomyMismatchError(f"holonomies differ (circuit defect {worst:.3e})")

    # glue (u^1)^-1 k u^2 from the chart of the nearest vertex
    dims = cover.lattice.dims
    s = cover.spacing
    N = a1.algebra.rep_dim
    out = np.empty(dims + (N, N), dtype=complex)
    gauges = {v: np.einsum("...ji,jk,...kl->...il", A1.charts[v].conj(), k[v], A2.charts[v])
              for v in cover.vertices()}
    owner_written = np.zeros(dims, dtype=bool)
    overlap_dev = 0.0
    # ownership: the central s x s x s block of each star tiles the torus
    lo, hi = s - s // 2, s - s // 2 + s
    for v in cover.vertices():
        corner = cover.star_corner(v)
        idx = [np.arange(corner[i], corner[i] + 2 * s + 1) % dims[i] for i in range(3)]
        tgt = np.ix_(idx[0][lo:hi], idx[1][lo:hi], idx[2][lo:hi])
        out[tgt] = gauges[v][lo:hi, lo:hi, lo:hi]
        owner_written[tgt] = True
    if not owner_written.all():
        raise AtlasError("atlas inconsistent: ownership tiling left gaps")
    # overlap agreement: compare every chart against the assembled field
    for v in cover.vertices():
        corner = cover.star_corner(v)
        idx = [np.arange(corner[i], corner[i] + 2 * s + 1) % dims[i] for i in range(3)]
        ref = out[np.ix_(*idx)]
        overlap_dev = max(overlap_dev, float(np.abs(ref - gauges[v]).max()))
    if overlap_dev > 50 * tol:
        raise AtlasError(f"atlas inconsistent (overlap deviation {overlap_dev:.3e})")
    return GroupField(cover.lattice, a1.algebra, out)
