"""Sector invariants: per-factor topological charge and the 1-d holonomy
coordinates.

The charge of a map u relative to a reference v is

    c^k = -(K_k / 192 pi^2) sum_x vol sum_{perm} eps^{ijl}
              Tr( ad[Lb_i^, Lb_j^] ad Lb_l^ )

where Lb is the site-symmetrized log derivative of w = u v^-1, the hat
is Killing projection onto factor k, and the 192 = 6 * 32 pairs the
six-term antisymmetrization with the 3-form normalization.  Site
symmetrization (the mean of the two adjacent link logs per axis) keeps
the product consistently centered; without it the staggered midpoints
cost an order of accuracy on composite fields.

The 1-d invariant lifts each torus generator loop to the covering group:
U(1) unwinds phases to an integer, SO(3) tracks the +-1 ambiguity of the
unit-quaternion lift, and simply connected groups contribute zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import LieAlgebra, factor_constant, group_log
from .errors import LogRangeError, NoLiftError, SectorError
from .lattice import (
    GroupField,
    TorusLattice,
    constant_field,
    inverse_field,
    log_derivative,
    multiply,
)

__all__ = [
    "SectorInvariants",
    "ReferenceMaps",
    "topological_charge",
    "one_dim_invariant",
    "reference_map",
    "sector_of",
    "invariant_of_connection",
    "pi1_orders",
]

DEFAULT_SECTOR_TOL = 0.25

_EPS3 = [(0, 1, 2, +1), (1, 2, 0, +1), (2, 0, 1, +1),
         (2, 1, 0, -1), (0, 2, 1, -1), (1, 0, 2, -1)]


@dataclass(frozen=True)
class SectorInvariants:
    """Holonomy coordinates mod their orders plus rounded factor charges."""

    alpha: tuple
    alpha_orders: tuple
    charges_raw: tuple
    charges: tuple
    residuals: tuple

    def report_line(self) -> str:
        a = ",".join(str(v) for v in self.alpha)
        craw = ",".join(f"{v:.6f}" for v in self.charges_raw)
        c = ",".join(str(v) for v in self.charges)
        r = ",".join(f"{v:.6f}" for v in self.residuals)
        return f"alpha=({a}) c~=({craw}) c=({c}) residual=({r})"

    def same_sector(self, other: "SectorInvariants") -> bool:
        return self.alpha == other.alpha and self.charges == other.charges


def _lift_channels(alg: LieAlgebra):
    """(rep_offset, block) for every block with nontrivial fundamental group."""
    out = []
    blocks = alg.blocks if alg.blocks else (alg,)
    off = 0
    for blk in blocks:
        if blk.pi1 == "integers":
            out.append((off, blk, 0))
        elif blk.pi1 == "order2":
            out.append((off, blk, 2))
        elif blk.pi1 != "trivial":
            raise NoLiftError(f"no lift table for group {blk.name}")
        off += blk.rep_dim
    return out


def pi1_orders(alg: LieAlgebra) -> tuple:
    """Cyclic orders r of the holonomy coordinates (0 meaning infinite)."""
    return tuple(r for _, _, r in _lift_channels(alg))


# ----------------------------------------------------------------------
# topological charge
# ----------------------------------------------------------------------

def _symmetrized_log_derivative(u: GroupField) -> np.ndarray:
    L = log_derivative(u).coeffs
    return np.stack([0.5 * (L[i] + np.roll(L[i], 1, axis=i)) for i in range(3)])


def topological_charge(u: GroupField, v_ref: GroupField | None = None) -> np.ndarray:
    """Unrounded per-factor charges of u relative to v_ref (identity if None)."""
    alg = u.algebra
    w = u if v_ref is None else multiply(u, inverse_field(v_ref))
    Lb = _symmetrized_log_derivative(w)
    f = alg.structure_constants
    B = np.where(np.isnan(alg.killing_matrix), 0.0, alg.killing_matrix)
    out = []
    for k, fac in enumerate(alg.factors):
        idx = slice(fac.start, fac.stop)
        T = np.einsum("abc,cd->abd", f[idx, idx, idx], B[idx, idx])
        dens = 0.0
        comps = [Lb[i][..., idx] for i in range(3)]
        for i, j, l, sgn in _EPS3:
            dens = dens + sgn * np.einsum("...a,...b,...d,abd->...",
                                          comps[i], comps[j], comps[l], T)
        K = float(factor_constant(alg, k))
        out.append(-(K / (192.0 * np.pi ** 2)) * u.lattice.cell_volume * dens.sum())
    return np.array(out)


# ----------------------------------------------------------------------
# one-dimensional invariant
# ----------------------------------------------------------------------

def _axis_line(values: np.ndarray, axis: int) -> np.ndarray:
    """Group elements along the generator line through the base site."""
    if axis == 0:
        return values[:, 0, 0]
    if axis == 1:
        return values[0, :, 0]
    return values[0, 0, :]


def _winding_u1(line: np.ndarray) -> int:
    phases = np.angle(line[..., 0, 0])
    steps = np.diff(np.append(phases, phases[0]))
    steps = (steps + np.pi) % (2 * np.pi) - np.pi
    if np.abs(np.abs(steps) - np.pi).min() < 1e-9:
        raise LogRangeError("field too rough: half-turn link defeats the U(1) lift")
    total = steps.sum() / (2 * np.pi)
    n = int(round(total))
    if abs(total - n) > 1e-6:
        raise LogRangeError(f"U(1) winding not integral ({total})")
    return n


def _lift_sign_so3(line: np.ndarray, block: LieAlgebra) -> int:
    """Parity of the unit-quaternion lift of a closed SO(3) loop."""
    n = line.shape[0]
    links = np.einsum("xji,xjk->xik", np.conj(line), np.roll(line, -1, axis=0))
    coords, _ = group_log(block, links, threshold=1.9)
    angles = np.linalg.norm(coords, axis=-1)
    if angles.max() >= np.pi / 2:
        raise LogRangeError("field too rough: SO(3) link outside half the injectivity radius")
    # lift each link to SU(2) near 1: rotation by theta about n -> exp(theta/2 n.isig)
    half = 0.5 * coords
    th = np.linalg.norm(half, axis=-1)
    q = np.empty((n, 2, 2), dtype=complex)
    cos = np.cos(th)
    sinc = np.where(th > 1e-300, np.sin(th) / np.maximum(th, 1e-300), 1.0)
    sig = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex)
    axis_part = np.einsum("xa,aij->xij", half * sinc[:, None], 1j * sig)
    q = cos[:, None, None] * np.eye(2) + axis_part
    total = np.eye(2, dtype=complex)
    for k in range(n):
        total = total @ q[k]
    tr = total[0, 0] + total[1, 1]
    if abs(abs(tr.real) - 2.0) > 1e-6 or abs(tr.imag) > 1e-6:
        raise LogRangeError("SO(3) lift did not close on a deck element")
    return 0 if tr.real > 0 else 1


def one_dim_invariant(u: GroupField) -> tuple:
    """Holonomy coordinates per torus generator; entries exact integers.

    Single lift channel gives a 3-tuple of ints (the common case); direct
    sums with several nontrivial blocks give a 3-tuple of int tuples.
    """
    channels = _lift_channels(u.algebra)
    per_axis = []
    for ax in range(3):
        line = _axis_line(u.values, ax)
        vals = []
        for off, blk, r in channels:
            sub = line[..., off:off + blk.rep_dim, off:off + blk.rep_dim]
            if r == 0:
                vals.append(_winding_u1(sub))
            else:
                vals.append(_lift_sign_so3(sub, blk))
        if not channels:
            per_axis.append(0)
        elif len(channels) == 1:
            per_axis.append(vals[0])
        else:
            per_axis.append(tuple(vals))
    return tuple(per_axis)


# ----------------------------------------------------------------------
# reference maps
# ----------------------------------------------------------------------

class ReferenceMaps:
    """Fixed generator maps v_l per torus direction and their compositions.

    v_l winds the distinguished circle subgroup once along direction l;
    products prod_l v_l^{a_l} are cached per (reduced) alpha.
    """

    def __init__(self, lattice: TorusLattice, algebra: LieAlgebra):
        self.lattice = lattice
        self.algebra = algebra
        self._cache: dict[tuple, GroupField] = {}

    def _reduced(self, alpha) -> tuple:
        channels = _lift_channels(self.algebra)
        red = []
        for entry in alpha:
            vals = entry if isinstance(entry, tuple) else (entry,)
            if len(vals) != max(len(channels), 1) and channels:
                raise SectorError(f"alpha entry {entry!r} does not match lift channels")
            if not channels:
                if any(v != 0 for v in vals):
                    raise SectorError("nonzero alpha for a simply connected group")
                red.append(0 if not isinstance(entry, tuple) else tuple(0 for _ in vals))
                continue
            outs = []
            for v, (_, _, r) in zip(vals, channels):
                outs.append(int(v) if r == 0 else int(v) % r)
            red.append(outs[0] if not isinstance(entry, tuple) and len(channels) == 1 else tuple(outs))
        return tuple(red)

    def generator(self, ell: int) -> GroupField:
        alpha = tuple((1 if ax == ell else 0) for ax in range(3))
        return self.map_for(alpha)

    def map_for(self, alpha) -> GroupField:
        alpha = self._reduced(alpha)
        if alpha in self._cache:
            return self._cache[alpha]
        alg = self.algebra
        channels = _lift_channels(alg)
        vals = constant_field(self.lattice, alg).values
        if channels and any(a != 0 if not isinstance(a, tuple) else any(a) for a in alpha):
            xs = self.lattice.coordinates()
            for c, (off, blk, r) in enumerate(channels):
                phase = 0.0
                for ax in range(3):
                    entry = alpha[ax]
                    a_val = entry[c] if isinstance(entry, tuple) else entry
                    phase = phase + 2.0 * np.pi * a_val * xs[ax] / self.lattice.lengths[ax]
                sl = slice(off, off + blk.rep_dim)
                if r == 0:  # U(1) block
                    vals[..., sl, sl] = np.exp(1j * phase)[..., None, None]
                else:       # SO(3) block: rotations about the z axis
                    cs, sn = np.cos(phase), np.sin(phase)
                    rot = np.zeros(phase.shape + (3, 3), dtype=complex)
                    rot[..., 0, 0] = cs
                    rot[..., 0, 1] = -sn
                    rot[..., 1, 0] = sn
                    rot[..., 1, 1] = cs
                    rot[..., 2, 2] = 1.0
                    vals[..., sl, sl] = rot
        field = GroupField(self.lattice, alg, vals)
        self._cache[alpha] = field
        return field


_REF_CACHE: dict[tuple, ReferenceMaps] = {}


def reference_map(lattice: TorusLattice, algebra: LieAlgebra, alpha) -> GroupField:
    """The fixed representative with the given holonomy coordinates."""
    key = (lattice, algebra.name)
    if key not in _REF_CACHE:
        _REF_CACHE[key] = ReferenceMaps(lattice, algebra)
    return _REF_CACHE[key].map_for(alpha)


# ----------------------------------------------------------------------
# sector assignment
# ----------------------------------------------------------------------

def sector_of(u: GroupField, tol: float = DEFAULT_SECTOR_TOL) -> SectorInvariants:
    """Full invariant tuple of a lattice map; rejects unresolved charges."""
    alpha = one_dim_invariant(u)
    v = reference_map(u.lattice, u.algebra, alpha)
    raw = topological_charge(u, v_ref=v)
    rounded = np.round(raw).astype(int)
    resid = np.abs(raw - rounded)
    if resid.size and resid.max() >= tol:
        raise SectorError(f"lattice too coarse to resolve sector (residual {resid.max():.3f})")
    return SectorInvariants(
        alpha=alpha,
        alpha_orders=pi1_orders(u.algebra),
        charges_raw=tuple(float(v) for v in raw),
        charges=tuple(int(v) for v in rounded),
        residuals=tuple(float(v) for v in resid),
    )


def invariant_of_connection(a, b, cover=None, tol: float = DEFAULT_SECTOR_TOL,
                            **gauge_kwargs) -> SectorInvariants:
    """Invariants of a flat potential a relative to the reference b.

    Reconstructs u with a = gauge_transform(b, u) from equal holonomy and
    reports the invariants of u; fails when a and b sit in different
    holonomy strata.
    """
    from .errors import HolonomyMismatchError
    from .holonomy import CubicalCover, gauge_from_holonomy

    if cover is None:
        cover = CubicalCover.for_lattice(a.lattice)
    try:
        u = gauge_from_holonomy(b, a, cover, **gauge_kwargs)
    except HolonomyMismatchError as exc:
        raise HolonomyMismatchError(f"not in the same holonomy stratum: {exc}") from exc
    return sector_of(u, tol=tol)
