"""Sector-preserving energy descent for lattice maps and flat potentials.

The update is the right variation u <- u exp(-tau G) with G the exact
first variation of the lattice energy.  Differentiating the link log
l = log(u(x)^-1 u(x+e)) under u(x) -> u(x) exp(t X), u(x+e) -> u(x+e)
exp(t Y) gives

    dl/dt = B(ad_l) Y - B(-ad_l) X,      B(z) = z / (1 - e^-z),

so each link scatters its energy gradient to both endpoint sites through
the (Bernoulli-series) transpose of B.  Armijo backtracking keeps the
energy monotone; the sector invariants are recomputed at fixed intervals
and any drift aborts the run.

Flat potentials are minimized through the gauge parameterization
a = u^-1 b u + u^-1 du over maps u, which fixes the holonomy stratum of
the reference b and adds a site-local commutator term to the gradient.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .algebra import LieAlgebra, group_exp
from .errors import FlatnessError, LineSearchError, LogRangeError, SectorError
from .invariants import SectorInvariants, reference_map, sector_of
from .lattice import (
    AlgebraOneForm,
    GroupField,
    TorusLattice,
    flatness_residual,
    gauge_transform,
    log_derivative,
    make_hedgehog,
    multiply,
    skyrme_energy_connection,
    zero_one_form,
)

__all__ = [
    "MinimizeOptions",
    "MinimizeTrace",
    "lattice_gradient",
    "minimize_map",
    "minimize_connection",
    "seed_field",
]

# B(z) = z/(1 - e^-z) = 1 + z/2 + sum B_2k z^2k / (2k)!; truncation error
# below 1e-10 for |z| <= 2, well past the link-log range
_B_SERIES = {
    0: 1.0,
    1: 0.5,
    2: 1.0 / 12.0,
    4: -1.0 / 720.0,
    6: 1.0 / 30240.0,
    8: -1.0 / 1209600.0,
    10: 1.0 / 47900160.0,
    12: -691.0 / 1307674368000.0,
    14: 1.0 / 74724249600.0,
}
_B_ORDER = 14


@dataclass
class MinimizeOptions:
    max_iters: int = 1000
    grad_tol: float = 1e-6
    initial_step: float = 0.5
    shrink: float = 0.5
    armijo_c: float = 1e-4
    grow: float = 1.5
    max_backtracks: int = 40
    sector_interval: int = 25
    sector_tol: float = 0.25
    max_rotation: float = 0.4  # cap on |tau G| per site, keeps trials in log range

    def __post_init__(self):
        if not 0.0 < self.shrink < 1.0:
            raise ValueError("shrink must lie in (0, 1)")
        if not 0.0 < self.armijo_c <= 0.5:
            raise ValueError("sufficient-decrease constant must lie in (0, 0.5]")


@dataclass
class MinimizeTrace:
    """Per-iteration descent record; energies are non-increasing."""

    energies: list = field(default_factory=list)
    grad_norms: list = field(default_factory=list)
    steps: list = field(default_factory=list)
    sectors: list = field(default_factory=list)  # (iteration, SectorInvariants)
    termination: str = ""

    def append(self, energy, grad_norm, step):
        self.energies.append(float(energy))
        self.grad_norms.append(float(grad_norm))
        self.steps.append(float(step))

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("iter,energy,grad_norm,step,alpha,c_rounded,c_residual\n")
        snap = {it: s for it, s in self.sectors}
        last = None
        for i, (e, g, s) in enumerate(zip(self.energies, self.grad_norms, self.steps)):
            last = snap.get(i, last)
            if last is None:
                a = c = r = ""
            else:
                a = "(" + " ".join(str(v) for v in last.alpha) + ")"
                c = "(" + " ".join(str(v) for v in last.charges) + ")"
                r = "(" + " ".join(f"{v:.4f}" for v in last.residuals) + ")"
            out.write(f"{i},{e:.12e},{g:.6e},{s:.6e},{a},{c},{r}\n")
        return out.getvalue()


def _apply_B(alg: LieAlgebra, ell: np.ndarray, v: np.ndarray, sign: float) -> np.ndarray:
    """B(sign * ad_ell) v via the Bernoulli series, batched over sites."""
    f = alg.structure_constants
    out = _B_SERIES[0] * v
    cur = v
    for k in range(1, _B_ORDER + 1):
        cur = sign * np.einsum("...a,...b,abc->...c", ell, cur, f)
        coef = _B_SERIES.get(k)
        if coef is not None:
            out = out + coef * cur
    return out


def _energy_gradient_terms(alg: LieAlgebra, comps: np.ndarray) -> np.ndarray:
    """P_i = dE-density/d(component i): a_i + 1/2 sum_j [a_j, [a_i, a_j]]."""
    f = alg.structure_constants
    P = np.empty_like(comps)
    for i in range(3):
        P[i] = comps[i]
        for j in range(3):
            if j == i:
                continue
            inner = np.einsum("...a,...b,abc->...c", comps[i], comps[j], f)
            P[i] += 0.5 * np.einsum("...a,...b,abc->...c", comps[j], inner, f)
    return P


def _gradient(u: GroupField, conj_b: np.ndarray | None = None) -> np.ndarray:
    """Site gradient of E (or of E[u^-1 b u + u^-1 du] when conj_b is the
    conjugated reference u^-1 b u), as algebra coordinates per site."""
    alg = u.algebra
    h = u.lattice.spacings
    cellvol = u.lattice.cell_volume
    L = log_derivative(u).coeffs
    a = L if conj_b is None else conj_b + L
    P = _energy_gradient_terms(alg, a)
    G = np.zeros(u.lattice.dims + (alg.dim,))
    for i in range(3):
        ell = h[i] * L[i]
        G -= (cellvol / h[i]) * _apply_B(alg, ell, P[i], +1.0)
        G += (cellvol / h[i]) * np.roll(_apply_B(alg, ell, P[i], -1.0), 1, axis=i)
    if conj_b is not None:
        f = alg.structure_constants
        for i in range(3):
            G += cellvol * np.einsum("...a,...b,abc->...c", P[i], conj_b[i], f)
    return G


def lattice_gradient(u: GroupField) -> np.ndarray:
    """First variation of E(u) under u(x) -> u(x) exp(t X_x), per site.

    Returns algebra coordinates of shape dims + (dim,); the descent
    direction is the negative of this field.
    """
    return _gradient(u)


def _grad_norm(alg: LieAlgebra, G: np.ndarray) -> float:
    return float(np.sqrt(np.einsum("...a,ab,...b->...", G, alg.norm_gram, G).sum()))


def _descend(u: GroupField, energy_fn, grad_fn, opts: MinimizeOptions,
             sector_fn) -> tuple[GroupField, MinimizeTrace]:
    trace = MinimizeTrace()
    sector0 = sector_fn(u)
    trace.sectors.append((0, sector0))
    E = energy_fn(u)
    step = opts.initial_step
    alg = u.algebra
    for it in range(opts.max_iters):
        G = grad_fn(u)
        gnorm = _grad_norm(alg, G)
        trace.append(E, gnorm, step)
        if gnorm <= opts.grad_tol:
            trace.termination = "converged"
            return u, trace
        decrease = -gnorm ** 2
        site_sup = np.sqrt(np.einsum("...a,ab,...b->...", G, alg.norm_gram, G).max())
        tau = min(step, opts.max_rotation / max(site_sup, 1e-300))
        for _ in range(opts.max_backtracks):
            trial = GroupField(u.lattice, alg,
                               np.einsum("...ij,...jk->...ik", u.values,
                                         group_exp(alg, -tau * G)))
            try:
                E_t = energy_fn(trial)
            except LogRangeError:
                tau *= opts.shrink  # trial left the link-log range: reject
                continue
            if E_t <= E + opts.armijo_c * tau * decrease:
                break
            tau *= opts.shrink
        else:
            trace.termination = "stalled"
            raise LineSearchError(f"stalled: no Armijo step after {opts.max_backtracks} halvings")
        u, E = trial, E_t
        step = min(tau * opts.grow, opts.initial_step * 8)
        if (it + 1) % opts.sector_interval == 0:
            snap = sector_fn(u)
            trace.sectors.append((it + 1, snap))
            if not snap.same_sector(sector0):
                trace.termination = "sector drift"
                raise SectorError(f"sector drift at iteration {it + 1}: "
                                  f"{snap.report_line()} != {sector0.report_line()}")
    trace.termination = "max_iters"
    return u, trace


def minimize_map(u0: GroupField, opts: MinimizeOptions | None = None):
    """Armijo gradient descent on E(u); the sector is checked and conserved."""
    opts = opts or MinimizeOptions()
    from .lattice import skyrme_energy_map

    final, trace = _descend(
        u0, skyrme_energy_map, lattice_gradient, opts,
        lambda u: sector_of(u, tol=opts.sector_tol))
    snap = sector_of(final, tol=opts.sector_tol)
    trace.sectors.append((len(trace.energies), snap))
    if not snap.same_sector(trace.sectors[0][1]):
        raise SectorError("sector drift detected at termination")
    return final, trace


def seed_field(lattice: TorusLattice, alg: LieAlgebra, sector: SectorInvariants,
               radius_fraction: float = 0.46) -> GroupField:
    """A representative map with the requested invariants: the fixed
    reference for alpha times one profile lump per charged factor."""
    if len(sector.charges) != len(alg.factors):
        raise SectorError(f"no seed field for sector: {len(sector.charges)} charges "
                          f"for {len(alg.factors)} simple factors of {alg.name}")
    u = reference_map(lattice, alg, sector.alpha)
    radius = radius_fraction * min(lattice.lengths)
    for k, c in enumerate(sector.charges):
        if c == 0:
            continue
        if alg.blocks:
            # build the lump inside the owning block and embed it
            off_d, off_r = 0, 0
            for blk in alg.blocks:
                owns = any(off_d <= fac.start < off_d + blk.dim
                           for fac in (alg.factors[k],))
                if owns:
                    lump = make_hedgehog(lattice, blk, radius, charge=int(c))
                    vals = u.values.copy()
                    sl = slice(off_r, off_r + blk.rep_dim)
                    vals[..., sl, sl] = np.einsum("...ij,...jk->...ik",
                                                  vals[..., sl, sl], lump.values)
                    u = GroupField(lattice, alg, vals)
                    break
                off_d += blk.dim
                off_r += blk.rep_dim
        else:
            u = multiply(u, make_hedgehog(lattice, alg, radius, charge=int(c)))
    got = sector_of(u)
    if not (got.alpha == sector.alpha and got.charges == tuple(sector.charges)):
        raise SectorError(f"no seed field for sector {sector.alpha};{sector.charges} "
                          f"(got {got.alpha};{got.charges})")
    return u


def minimize_connection(b: AlgebraOneForm, sector: SectorInvariants,
                        opts: MinimizeOptions | None = None,
                        flatness_gate: float | None = None):
    """Minimize E[a] over the gauge orbit a = u^-1 b u + u^-1 du of the flat
    reference b, within the requested sector.

    Returns (a_final, trace); the reported energies are the map-side
    objective values, which equal E[a_final] by construction.
    """
    opts = opts or MinimizeOptions()
    if flatness_gate is None:
        flatness_gate = 10.0 * max(b.lattice.spacings)
    _, resid = flatness_residual(b)
    if resid > flatness_gate:
        raise FlatnessError(f"reference potential not flat (residual {resid:.3e})")
    alg = b.algebra
    u0 = seed_field(b.lattice, alg, sector)

    b_is_zero = b.is_zero()

    def conj_b(u: GroupField) -> np.ndarray | None:
        if b_is_zero:
            return None
        out = np.empty_like(b.coeffs)
        for i in range(3):
            Bm = alg.to_matrix(b.coeffs[i])
            conj = np.einsum("...ji,...jk,...kl->...il", u.values.conj(), Bm, u.values)
            out[i], _ = alg.to_coords(conj)
        return out

    def energy_fn(u: GroupField) -> float:
        return skyrme_energy_connection(gauge_transform(b, u))

    def grad_fn(u: GroupField) -> np.ndarray:
        return _gradient(u, conj_b=conj_b(u))

    final_u, trace = _descend(u0, energy_fn, grad_fn, opts,
                              lambda u: sector_of(u, tol=opts.sector_tol))
    return gauge_transform(b, final_u), trace
