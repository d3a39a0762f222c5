"""Discretized flat 3-torus, group-valued fields, and the two energies.

A `GroupField` stores one representation matrix per lattice site.  The
logarithmic derivative is the link form

    L_i(x) = (1/h_i) log( u(x)^-1 u(x + e_i) ),

an algebra-valued 1-form sampled on links (midpoints), and the two
Skyrme energies

    E(u)  = sum_x vol ( 1/2 |L|^2 + 1/4 |L ^ L|^2 )
    E[a]  = sum_x vol ( 1/2 |a|^2 + 1/16 |[a, a]|^2 )

agree identically through a = L because [a, a]_{ij} = 2 [a_i, a_j].
Norms come from -(1/8) Tr(ad . ad .).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.ndimage import gaussian_filter

from .algebra import LieAlgebra, group_exp, group_log, primitive_su2
from .errors import GeneratorError, LogRangeError

__all__ = [
    "TorusLattice",
    "GroupField",
    "AlgebraOneForm",
    "AlgebraTwoForm",
    "PLANES",
    "log_derivative",
    "wedge_bracket",
    "skyrme_energy_map",
    "skyrme_energy_connection",
    "flatness_residual",
    "gauge_transform",
    "make_hedgehog",
    "make_winding",
    "make_random",
    "constant_field",
    "zero_one_form",
    "multiply",
    "right_translate",
    "inverse_field",
]

# two-form plane p holds the (i, j) component
PLANES = ((1, 2), (2, 0), (0, 1))

# Link logs demand every eigenvalue of the link within this distance of 1.
# The principal branch is unambiguous below 2; the default keeps a 0.9
# safety fraction of that, wide enough for the coarse closed-form fields
# (a once-winding loop at N = 3 sits at |lambda - 1| = sqrt(3)).
LINK_LOG_THRESHOLD = 1.8


@dataclass(frozen=True)
class TorusLattice:
    """Periodic grid: dims sites per axis, lengths physical periods."""

    dims: tuple[int, int, int]
    lengths: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        if len(self.dims) != 3 or any(int(n) < 3 for n in self.dims):
            raise ValueError("need three axes with at least 3 sites each")
        if len(self.lengths) != 3 or any(l <= 0 for l in self.lengths):
            raise ValueError("lengths must be positive")
        object.__setattr__(self, "dims", tuple(int(n) for n in self.dims))
        object.__setattr__(self, "lengths", tuple(float(l) for l in self.lengths))

    @property
    def spacings(self) -> tuple[float, float, float]:
        return tuple(l / n for l, n in zip(self.lengths, self.dims))

    @property
    def cell_volume(self) -> float:
        h = self.spacings
        return h[0] * h[1] * h[2]

    def coordinates(self):
        """Physical site coordinates, three (N1,N2,N3) arrays."""
        axes = [np.arange(n) * h for n, h in zip(self.dims, self.spacings)]
        return np.meshgrid(*axes, indexing="ij")


@dataclass
class GroupField:
    """Group elements on lattice sites: values[(x1,x2,x3)] is N x N."""

    lattice: TorusLattice
    algebra: LieAlgebra
    values: np.ndarray

    def __post_init__(self):
        expect = self.lattice.dims + (self.algebra.rep_dim, self.algebra.rep_dim)
        if self.values.shape != expect:
            raise ValueError(f"field shape {self.values.shape} != {expect}")

    def validate(self, tol: float = 1e-10) -> float:
        return self.algebra.check_group_elements(self.values, tol=tol)

    def copy(self) -> "GroupField":
        return GroupField(self.lattice, self.algebra, self.values.copy())


@dataclass
class AlgebraOneForm:
    """Three grids of algebra coordinates, units 1/length.

    `sampling` records where the components live: "site" for values at
    lattice sites, "link" for link-midpoint data such as log derivatives.
    Transport integrators pick their stencil accordingly.
    """

    lattice: TorusLattice
    algebra: LieAlgebra
    coeffs: np.ndarray  # (3, N1, N2, N3, dim)
    sampling: str = "site"

    def __post_init__(self):
        expect = (3,) + self.lattice.dims + (self.algebra.dim,)
        if self.coeffs.shape != expect:
            raise ValueError(f"one-form shape {self.coeffs.shape} != {expect}")
        if self.sampling not in ("site", "link"):
            raise ValueError(f"unknown sampling {self.sampling!r}")

    def copy(self) -> "AlgebraOneForm":
        return replace(self, coeffs=self.coeffs.copy())

    def is_zero(self, tol: float = 0.0) -> bool:
        return np.abs(self.coeffs).max() <= tol


@dataclass
class AlgebraTwoForm:
    """Plane components ((2,3), (3,1), (1,2) in 1-based axes), units 1/length^2."""

    lattice: TorusLattice
    algebra: LieAlgebra
    coeffs: np.ndarray  # (3, N1, N2, N3, dim)


def _norm_sq_density(alg: LieAlgebra, coords: np.ndarray) -> np.ndarray:
    """Pointwise |X|^2 over trailing coordinate axis."""
    return np.einsum("...a,ab,...b->...", coords, alg.norm_gram, coords)


def _bracket_grid(alg: LieAlgebra, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    return np.einsum("...a,...b,abc->...c", X, Y, alg.structure_constants)


# ----------------------------------------------------------------------
# log derivative and energies
# ----------------------------------------------------------------------

def log_derivative(u: GroupField, threshold: float = LINK_LOG_THRESHOLD) -> AlgebraOneForm:
    """Link logarithm form L_i(x) = (1/h_i) log(u(x)^-1 u(x+e_i)).

    Fails with LogRangeError when any link leaves the principal branch
    margin (the field is too rough for this lattice).
    """
    alg = u.algebra
    h = u.lattice.spacings
    comps = []
    for ax in range(3):
        up = np.roll(u.values, -1, axis=ax)
        link = np.einsum("...ji,...jk->...ik", u.values.conj(), up)
        try:
            coords, _ = group_log(alg, link, threshold=threshold)
        except LogRangeError as exc:
            raise LogRangeError(f"field too rough for this lattice (axis {ax + 1}): {exc}") from exc
        comps.append(coords / h[ax])
    return AlgebraOneForm(u.lattice, alg, np.stack(comps), sampling="link")


def wedge_bracket(L: AlgebraOneForm) -> AlgebraTwoForm:
    """Site-local plane components [L_i, L_j] for (i,j) in PLANES."""
    out = np.stack([_bracket_grid(L.algebra, L.coeffs[i], L.coeffs[j]) for i, j in PLANES])
    return AlgebraTwoForm(L.lattice, L.algebra, out)


def _energy_from_components(alg: LieAlgebra, coeffs: np.ndarray, cellvol: float) -> float:
    quad = 0.5 * _norm_sq_density(alg, coeffs).sum()
    quart = 0.0
    for i, j in PLANES:
        br = _bracket_grid(alg, coeffs[i], coeffs[j])
        quart += 0.25 * _norm_sq_density(alg, br).sum()
    return float(cellvol * (quad + quart))


def skyrme_energy_map(u: GroupField, threshold: float = LINK_LOG_THRESHOLD) -> float:
    """E(u); zero iff every link increment is the identity."""
    L = log_derivative(u, threshold=threshold)
    return _energy_from_components(u.algebra, L.coeffs, u.lattice.cell_volume)


def skyrme_energy_connection(a: AlgebraOneForm) -> float:
    """E[a] with the 1/16 |[a,a]|^2 quartic term; equals E(u) when a = Du."""
    return _energy_from_components(a.algebra, a.coeffs, a.lattice.cell_volume)


def flatness_residual(a: AlgebraOneForm) -> tuple[AlgebraTwoForm, float]:
    """Curvature F_ij = d_i a_j - d_j a_i + [a_i, a_j] with forward differences.

    Returns the plane components and their cell-volume-weighted L2 norm.
    """
    alg = a.algebra
    h = a.lattice.spacings

    def fwd(comp, ax):
        return (np.roll(comp, -1, axis=ax) - comp) / h[ax]

    planes = []
    total = 0.0
    for i, j in PLANES:
        F = fwd(a.coeffs[j], i) - fwd(a.coeffs[i], j) + _bracket_grid(alg, a.coeffs[i], a.coeffs[j])
        planes.append(F)
        total += _norm_sq_density(alg, F).sum()
    scalar = float(np.sqrt(a.lattice.cell_volume * total))
    return AlgebraTwoForm(a.lattice, alg, np.stack(planes)), scalar


def gauge_transform(b: AlgebraOneForm, u: GroupField,
                    threshold: float = LINK_LOG_THRESHOLD) -> AlgebraOneForm:
    """b |-> u^-1 b u + u^-1 du, componentwise on the lattice."""
    alg = b.algebra
    L = log_derivative(u, threshold=threshold)
    if b.is_zero():
        return replace(L, sampling="link")
    comps = np.empty_like(b.coeffs)
    for i in range(3):
        Bm = alg.to_matrix(b.coeffs[i])
        conj = np.einsum("...ji,...jk,...kl->...il", u.values.conj(), Bm, u.values)
        coords, res = alg.to_coords(conj)
        if res > 1e-9:
            raise LogRangeError(f"conjugated component left the basis span ({res:.2e})")
        comps[i] = coords + L.coeffs[i]
    return AlgebraOneForm(b.lattice, alg, comps, sampling=b.sampling)


# ----------------------------------------------------------------------
# field generators
# ----------------------------------------------------------------------

def constant_field(lattice: TorusLattice, alg: LieAlgebra, g=None) -> GroupField:
    if g is None:
        g = alg.group_identity()
    vals = np.broadcast_to(np.asarray(g, dtype=complex),
                           lattice.dims + (alg.rep_dim, alg.rep_dim)).copy()
    return GroupField(lattice, alg, vals)


def zero_one_form(lattice: TorusLattice, alg: LieAlgebra, sampling: str = "site") -> AlgebraOneForm:
    return AlgebraOneForm(lattice, alg, np.zeros((3,) + lattice.dims + (alg.dim,)), sampling)


def multiply(u: GroupField, w: GroupField) -> GroupField:
    """Pointwise product (u w)(x) = u(x) w(x)."""
    return GroupField(u.lattice, u.algebra,
                      np.einsum("...ij,...jk->...ik", u.values, w.values))


def right_translate(u: GroupField, g) -> GroupField:
    return GroupField(u.lattice, u.algebra, u.values @ np.asarray(g, dtype=complex))


def inverse_field(u: GroupField) -> GroupField:
    return GroupField(u.lattice, u.algebra, u.values.conj().swapaxes(-1, -2))


def _quintic_step(t: np.ndarray) -> np.ndarray:
    """C^2 monotone step: 0 -> 0, 1 -> 1, flat at both ends."""
    t = np.clip(t, 0.0, 1.0)
    return t ** 3 * (10.0 - 15.0 * t + 6.0 * t ** 2)


def make_hedgehog(lattice: TorusLattice, alg: LieAlgebra, radius: float,
                  charge: int = 1, center=None) -> GroupField:
    """Radial profile field exp(f(r) n.(images of i sigma)) supported in a
    ball; f(0) = charge * pi, f(r >= radius) = 0.  A degree-`charge`
    representative through the primitive su(2).
    """
    if radius >= min(lattice.lengths) / 2:
        raise GeneratorError(f"profile radius {radius} must be < min period / 2")
    emb = primitive_su2(alg)
    xs = lattice.coordinates()
    center = tuple(l / 2 for l in lattice.lengths) if center is None else center
    # displacement on the torus: wrap into [-L/2, L/2)
    disp = []
    for x, c, l in zip(xs, center, lattice.lengths):
        d = x - c
        disp.append(d - l * np.round(d / l))
    dx = np.stack(disp, axis=-1)
    r = np.linalg.norm(dx, axis=-1)
    prof = charge * np.pi * _quintic_step(1.0 - r / radius)
    # unit direction; at r = 0 pin the third axis so exp(f * image) is exact
    nhat = np.where(r[..., None] > 1e-12, dx / np.maximum(r, 1e-12)[..., None],
                    np.array([0.0, 0.0, 1.0]))
    coords = prof[..., None] * np.einsum("...k,ka->...a", nhat, emb.images)
    return GroupField(lattice, alg, group_exp(alg, coords))


def make_winding(lattice: TorusLattice, alg: LieAlgebra, m, axis=None,
                 tol: float = 1e-9) -> GroupField:
    """u(x) = exp(2 pi sum_l m_l x^l / L_l * X_axis), periodic because
    exp(2 pi X_axis) = 1 (checked)."""
    m = tuple(int(v) for v in m)
    if axis is None:
        if alg.family == "u1":
            axis = np.array([1.0])
        elif alg.family == "so3":
            axis = alg.basis_vector(2)  # z rotations generate the order-2 class
        else:
            axis = primitive_su2(alg).image_of_v
    axis = np.asarray(axis, dtype=float)
    closure = group_exp(alg, 2.0 * np.pi * axis)
    if np.abs(closure - alg.group_identity()).max() > tol:
        raise GeneratorError("axis does not close: exp(2 pi X) != 1")
    xs = lattice.coordinates()
    phase = sum(mi * x / l for mi, x, l in zip(m, xs, lattice.lengths))
    coords = (2.0 * np.pi * phase)[..., None] * axis
    return GroupField(lattice, alg, group_exp(alg, coords))


def make_random(lattice: TorusLattice, alg: LieAlgebra, seed: int,
                smoothness: float = 2.0, amplitude: float = 0.5) -> GroupField:
    """Smoothed algebra-valued noise, exponentiated; deterministic per seed."""
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(lattice.dims + (alg.dim,))
    for a in range(alg.dim):
        noise[..., a] = gaussian_filter(noise[..., a], sigma=smoothness, mode="wrap")
    sup = np.sqrt(_norm_sq_density(alg, noise).max())
    if sup > 0:
        noise *= amplitude / sup
    return GroupField(lattice, alg, group_exp(alg, noise))
