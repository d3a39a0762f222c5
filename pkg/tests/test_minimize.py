import numpy as np
import pytest

from skyrme import algebra as al
from skyrme import invariants as inv
from skyrme import lattice as lat
from skyrme import minimize as mz
from skyrme.errors import LineSearchError, SectorError


def test_options_validation():
    with pytest.raises(ValueError):
        mz.MinimizeOptions(shrink=1.0)
    with pytest.raises(ValueError):
        mz.MinimizeOptions(armijo_c=0.7)


def test_gradient_constant_zero(su2, lat8):
    G = mz.lattice_gradient(lat.constant_field(lat8, su2))
    assert np.abs(G).max() == 0.0


def test_gradient_geodesic_critical(su2, lat8):
    u = lat.make_winding(lat8, su2, (1, 0, 0))
    assert np.abs(mz.lattice_gradient(u)).max() < 1e-8


def test_gradient_matches_finite_differences(su2):
    L = lat.TorusLattice((6, 6, 6))
    u = lat.make_random(L, su2, seed=9, smoothness=1.5, amplitude=0.6)
    G = mz.lattice_gradient(u)
    rng = np.random.default_rng(1)
    t = 1e-5
    for _ in range(12):
        s = tuple(rng.integers(0, 6, 3))
        d = rng.integers(0, 3)
        X = np.zeros(3)
        X[d] = 1.0
        up = u.copy()
        up.values[s] = u.values[s] @ al.group_exp(su2, t * X)
        um = u.copy()
        um.values[s] = u.values[s] @ al.group_exp(su2, -t * X)
        fd = (lat.skyrme_energy_map(up) - lat.skyrme_energy_map(um)) / (2 * t)
        assert abs(fd - G[s][d]) <= 1e-6 * max(abs(fd), 1e-9)


def test_negative_gradient_is_descent_direction(su2, lat8):
    u = lat.make_random(lat8, su2, seed=3, amplitude=0.5)
    G = mz.lattice_gradient(u)
    t = 1e-6
    step = al.group_exp(su2, -t * G)
    trial = lat.GroupField(lat8, su2, np.einsum("...ij,...jk->...ik", u.values, step))
    assert lat.skyrme_energy_map(trial) < lat.skyrme_energy_map(u)


def test_minimize_constant_returns_immediately(su2, lat8):
    u0 = lat.constant_field(lat8, su2)
    final, trace = mz.minimize_map(u0)
    assert trace.termination == "converged"
    assert len(trace.energies) == 1
    assert np.array_equal(final.values, u0.values)


def test_minimize_perturbed_constant_reaches_floor(su2, lat8):
    u0 = lat.make_random(lat8, su2, seed=5, smoothness=2.0, amplitude=0.1)
    opts = mz.MinimizeOptions(max_iters=4000, grad_tol=1e-12)
    final, trace = mz.minimize_map(u0, opts)
    assert trace.energies[-1] <= 1e-8
    diffs = np.diff(trace.energies)
    assert (diffs <= 1e-14).all()
    assert all(s.same_sector(trace.sectors[0][1]) for _, s in trace.sectors)


def test_minimize_hedgehog_monotone_with_sector(su2, lat16):
    u0 = lat.make_hedgehog(lat16, su2, 0.45)
    opts = mz.MinimizeOptions(max_iters=25, sector_interval=5)
    final, trace = mz.minimize_map(u0, opts)
    assert (np.diff(trace.energies) <= 1e-12).all()
    for _, s in trace.sectors:
        assert s.charges == (1,)
        assert abs(s.charges_raw[0] - 1.0) < 0.1


def test_line_search_stall_raises(su2, lat8):
    u0 = lat.make_random(lat8, su2, seed=6, amplitude=0.3)
    with pytest.raises(LineSearchError, match="stalled"):
        mz.minimize_map(u0, mz.MinimizeOptions(max_backtracks=0))


def test_trace_csv_format(su2, lat8):
    u0 = lat.make_random(lat8, su2, seed=5, smoothness=2.0, amplitude=0.05)
    final, trace = mz.minimize_map(u0, mz.MinimizeOptions(max_iters=8))
    csv = trace.to_csv()
    lines = csv.strip().splitlines()
    assert lines[0] == "iter,energy,grad_norm,step,alpha,c_rounded,c_residual"
    assert len(lines) == len(trace.energies) + 1
    assert lines[1].startswith("0,")


def test_seed_field_matches_sector(su2, lat16):
    sector = inv.sector_of(lat.make_hedgehog(lat16, su2, 0.45))
    seed = mz.seed_field(lat16, su2, sector)
    assert inv.sector_of(seed).same_sector(sector)


def test_seed_field_rejects_unrepresentable(u1, lat8):
    bad = inv.SectorInvariants(alpha=(0, 0, 0), alpha_orders=(0,),
                               charges_raw=(1.0,), charges=(1,), residuals=(0.0,))
    with pytest.raises(SectorError, match="no seed field"):
        mz.seed_field(lat8, u1, bad)


def test_minimize_connection_trivial_sector(su2, lat8):
    b = lat.zero_one_form(lat8, su2)
    sector = inv.sector_of(lat.constant_field(lat8, su2))
    a_final, trace = mz.minimize_connection(b, sector,
                                            mz.MinimizeOptions(max_iters=50))
    assert trace.energies[-1] <= 1e-8
    assert lat.skyrme_energy_connection(a_final) == pytest.approx(
        trace.energies[-1], abs=1e-10)


def test_minimize_connection_matches_map_side(su2, lat12):
    # with the trivial reference the two objectives are the same function,
    # and the runs must report identical energies
    sector = inv.sector_of(lat.make_hedgehog(lat12, su2, 0.45))
    opts = mz.MinimizeOptions(max_iters=15, sector_interval=50)
    b = lat.zero_one_form(lat12, su2)
    a_final, trace_conn = mz.minimize_connection(b, sector, opts)
    u0 = mz.seed_field(lat12, su2, sector)
    _, trace_map = mz.minimize_map(u0, opts)
    assert len(trace_conn.energies) == len(trace_map.energies)
    assert np.abs(np.array(trace_conn.energies) - np.array(trace_map.energies)).max() <= 1e-10


def test_minimize_connection_preserves_holonomy(su2, lat8):
    from skyrme import holonomy as hol

    sector = inv.sector_of(lat.constant_field(lat8, su2))
    b = lat.zero_one_form(lat8, su2)
    a_final, _ = mz.minimize_connection(b, sector, mz.MinimizeOptions(max_iters=20))
    cover = hol.CubicalCover.for_lattice(lat8)
    rep = hol.holonomy_rep(a_final, cover)
    assert np.abs(rep.traces - 2.0).max() < 1e-8


def test_minimize_connection_nonzero_flat_reference(su2, lat8):
    # abelian flat reference: descent still monotone, energies consistent
    b = lat.zero_one_form(lat8, su2)
    b.coeffs[0, ..., 2] = 0.5
    sector = inv.sector_of(lat.constant_field(lat8, su2))
    a_final, trace = mz.minimize_connection(b, sector, mz.MinimizeOptions(max_iters=30))
    assert (np.diff(trace.energies) <= 1e-12).all()
    assert lat.skyrme_energy_connection(a_final) == pytest.approx(
        trace.energies[-1], abs=1e-10)
