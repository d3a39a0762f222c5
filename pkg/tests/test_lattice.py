import numpy as np
import pytest

from skyrme import algebra as al
from skyrme import lattice as lat
from skyrme.errors import GeneratorError, LogRangeError


def test_lattice_validation():
    with pytest.raises(ValueError):
        lat.TorusLattice((2, 8, 8))
    with pytest.raises(ValueError):
        lat.TorusLattice((8, 8, 8), (1.0, -1.0, 1.0))
    L = lat.TorusLattice((8, 4, 16), (2.0, 1.0, 4.0))
    assert L.spacings == (0.25, 0.25, 0.25)
    assert L.cell_volume == pytest.approx(0.25 ** 3)


def test_log_derivative_constant_and_winding(su2, lat8):
    const = lat.constant_field(lat8, su2)
    assert np.abs(lat.log_derivative(const).coeffs).max() == 0.0
    for n in (3, 8):
        L = lat.TorusLattice((n, n, n))
        u = lat.make_winding(L, su2, (1, 0, 0))
        D = lat.log_derivative(u)
        expect = np.zeros_like(D.coeffs)
        expect[0, ..., 2] = 2 * np.pi
        assert np.abs(D.coeffs - expect).max() < 1e-12
        assert D.sampling == "link"


def test_log_derivative_rough_field_raises(su2, lat8):
    vals = np.empty(lat8.dims + (2, 2), dtype=complex)
    parity = (np.indices(lat8.dims).sum(axis=0)) % 2
    g = al.group_exp(su2, [0, 0, 0.8 * np.pi])
    vals[parity == 0] = np.eye(2)
    vals[parity == 1] = g
    with pytest.raises(LogRangeError):
        lat.log_derivative(lat.GroupField(lat8, su2, vals))


def test_right_translation_leaves_energy(su2, lat8):
    u = lat.make_random(lat8, su2, seed=1, amplitude=0.5)
    g = al.group_exp(su2, [0.3, -0.2, 0.9])
    assert lat.skyrme_energy_map(lat.right_translate(u, g)) == pytest.approx(
        lat.skyrme_energy_map(u), abs=1e-10)


def test_wedge_bracket(su2, lat8):
    a = lat.zero_one_form(lat8, su2)
    a.coeffs[0, ..., 2] = 0.7  # abelian: everything along i sigma_3
    a.coeffs[1, ..., 2] = -1.1
    assert np.abs(lat.wedge_bracket(a).coeffs).max() < 1e-14

    b = lat.zero_one_form(lat8, su2)
    b.coeffs[0, ..., 0] = 1.0  # L_1 = i sigma_1
    b.coeffs[1, ..., 1] = 1.0  # L_2 = i sigma_2
    W = lat.wedge_bracket(b)
    # plane (1,2) in 1-based axes is PLANES index 2; [is1, is2] = -2 is3
    assert np.abs(W.coeffs[2][..., 2] + 2.0).max() < 1e-14
    assert np.abs(W.coeffs[0]).max() < 1e-14

    # antisymmetry under swapping the two one-form slots
    c = lat.zero_one_form(lat8, su2)
    c.coeffs[0] = b.coeffs[1]
    c.coeffs[1] = b.coeffs[0]
    assert np.abs(lat.wedge_bracket(c).coeffs[2] + W.coeffs[2]).max() < 1e-14


@pytest.mark.parametrize("n", [4, 8, 16])
def test_energy_closed_form(su2, n):
    L = lat.TorusLattice((n, n, n))
    u = lat.make_winding(L, su2, (1, 0, 0))
    assert abs(lat.skyrme_energy_map(u) - 2 * np.pi ** 2) < 1e-10


def test_energy_two_direction_closed_form(su2):
    # exp(2 pi x1 is3) exp(2 pi x2 is3) = exp(2 pi (x1+x2) is3): E = 4 pi^2
    for n in (8, 16, 32):
        L = lat.TorusLattice((n, n, n))
        u = lat.multiply(lat.make_winding(L, su2, (1, 0, 0)),
                         lat.make_winding(L, su2, (0, 1, 0)))
        assert abs(lat.skyrme_energy_map(u) - 4 * np.pi ** 2) < 1e-10


def test_energy_identity_map_vs_connection(su2, lat8):
    for seed in range(3):
        u = lat.make_random(lat8, su2, seed=seed, amplitude=0.6)
        a = lat.log_derivative(u)
        assert abs(lat.skyrme_energy_map(u) - lat.skyrme_energy_connection(a)) <= 1e-10


def test_quartic_factor_bookkeeping(su2, lat8):
    # (1/16)|[a,a]|^2 = (1/4) sum_{i<j} |[a_i,a_j]|^2 with [a,a]_{ij} = 2[a_i,a_j]
    u = lat.make_random(lat8, su2, seed=5, amplitude=0.7)
    a = lat.log_derivative(u)
    W = lat.wedge_bracket(a)
    gram = su2.norm_gram
    quart_planes = sum(np.einsum("...a,ab,...b->...", W.coeffs[p], gram, W.coeffs[p]).sum()
                       for p in range(3))
    quad = sum(np.einsum("...a,ab,...b->...", a.coeffs[i], gram, a.coeffs[i]).sum()
               for i in range(3))
    expected = lat8.cell_volume * (0.5 * quad + (1.0 / 16.0) * 4.0 * quart_planes)
    assert lat.skyrme_energy_connection(a) == pytest.approx(expected, rel=1e-12)


def test_connection_energy_invariant_under_constant_conjugation(su2, lat8):
    u = lat.make_random(lat8, su2, seed=2, amplitude=0.5)
    a = lat.log_derivative(u)
    g = al.group_exp(su2, [0.4, 0.1, -0.7])
    conj = a.copy()
    for i in range(3):
        M = su2.to_matrix(a.coeffs[i])
        conj.coeffs[i], res = su2.to_coords(np.einsum("ji,...jk,kl->...il", g.conj(), M, g))
        assert res < 1e-9
    assert lat.skyrme_energy_connection(conj) == pytest.approx(
        lat.skyrme_energy_connection(a), abs=1e-10)


def test_flatness_examples(su2, lat8):
    _, r0 = lat.flatness_residual(lat.zero_one_form(lat8, su2))
    assert r0 == 0.0
    a = lat.zero_one_form(lat8, su2)
    a.coeffs[0, ..., 2] = 1.3  # constant commuting component
    _, rc = lat.flatness_residual(a)
    assert rc < 1e-14


def test_flatness_richardson_on_log_derivative(su2):
    resids = []
    for n in (8, 16, 32):
        L = lat.TorusLattice((n, n, n))
        u = lat.make_random(L, su2, seed=3, smoothness=n / 8.0, amplitude=0.4)
        # same continuum field at all resolutions is awkward with filtered
        # noise; use an analytic field instead
        x1, x2, _ = L.coordinates()
        coords = np.zeros(L.dims + (3,))
        coords[..., 0] = 0.3 * np.cos(2 * np.pi * x1)
        coords[..., 2] = 0.4 * np.sin(2 * np.pi * x2)
        u = lat.GroupField(L, su2, al.group_exp(su2, coords))
        _, r = lat.flatness_residual(lat.log_derivative(u))
        resids.append(r)
    assert resids[0] > resids[1] > resids[2]
    assert resids[1] / resids[2] > 1.7  # first-order decay


def test_gauge_transform_basics(su2, lat8):
    b = lat.zero_one_form(lat8, su2)
    const = lat.constant_field(lat8, su2, al.group_exp(su2, [0.1, 0.2, 0.3]))
    assert np.abs(lat.gauge_transform(b, const).coeffs).max() < 1e-14
    u = lat.make_random(lat8, su2, seed=4, amplitude=0.5)
    D = lat.log_derivative(u)
    assert np.abs(lat.gauge_transform(b, u).coeffs - D.coeffs).max() < 1e-14


def test_gauge_transform_cocycle_small_fields(su2, lat12):
    # the componentwise formula satisfies the cocycle identity up to a
    # quadratic-in-amplitude commutator defect; small fields pass 1e-9
    b = lat.zero_one_form(lat12, su2)
    u = lat.make_random(lat12, su2, seed=7, amplitude=2e-5)
    w = lat.make_random(lat12, su2, seed=8, amplitude=2e-5)
    lhs = lat.gauge_transform(lat.gauge_transform(b, u), w)
    rhs = lat.gauge_transform(b, lat.multiply(u, w))
    assert np.abs(lhs.coeffs - rhs.coeffs).max() <= 1e-9


def test_gauge_transform_preserves_flatness_scale(su2, lat12):
    b = lat.zero_one_form(lat12, su2)
    b.coeffs[0, ..., 2] = 0.6
    w = lat.make_random(lat12, su2, seed=9, amplitude=0.3)
    _, r = lat.flatness_residual(lat.gauge_transform(b, w))
    # flat reference stays flat up to discretization error
    assert r < 1.0


def test_hedgehog_generator(su2, lat16):
    u = lat.make_hedgehog(lat16, su2, 0.45)
    u.validate()
    v = lat.make_hedgehog(lat16, su2, 0.45)
    assert np.array_equal(u.values, v.values)
    # supported in the ball: identity at the corner of the torus
    assert np.abs(u.values[0, 0, 0] - np.eye(2)).max() < 1e-12
    with pytest.raises(GeneratorError):
        lat.make_hedgehog(lat16, su2, 0.5)


def test_winding_generator(su2, lat8):
    u = lat.make_winding(lat8, su2, (0, 0, 0))
    assert np.abs(u.values - np.eye(2)).max() < 1e-14
    with pytest.raises(GeneratorError):
        lat.make_winding(lat8, su2, (1, 0, 0), axis=np.array([0.0, 0.0, 0.37]))


def test_random_generator_deterministic(su2, lat8):
    a = lat.make_random(lat8, su2, seed=11)
    b = lat.make_random(lat8, su2, seed=11)
    c = lat.make_random(lat8, su2, seed=12)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)
    a.validate()


def test_group_field_shape_check(su2, lat8):
    with pytest.raises(ValueError):
        lat.GroupField(lat8, su2, np.zeros((8, 8, 7, 2, 2), dtype=complex))
