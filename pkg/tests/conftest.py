import numpy as np
import pytest

from skyrme import algebra as alg_mod
from skyrme.lattice import TorusLattice


@pytest.fixture(scope="session")
def su2():
    return alg_mod.build_algebra("su", 2)


@pytest.fixture(scope="session")
def so3():
    return alg_mod.build_algebra("so3")


@pytest.fixture(scope="session")
def u1():
    return alg_mod.build_algebra("u1")


@pytest.fixture
def lat8():
    return TorusLattice((8, 8, 8))


@pytest.fixture
def lat12():
    return TorusLattice((12, 12, 12))


@pytest.fixture
def lat16():
    return TorusLattice((16, 16, 16))


def optimal_left_constant(alg, u_vals, w_vals):
    """argmin_g max-ish |u - g w|: polar factor of sum u w^dagger."""
    n = alg.rep_dim
    S = np.einsum("xij,xkj->ik", u_vals.reshape(-1, n, n), w_vals.conj().reshape(-1, n, n))
    W, _, Vh = np.linalg.svd(S)
    g = W @ Vh
    if alg.group_kind in ("special_unitary", "symplectic"):
        g = g * np.exp(-1j * np.angle(np.linalg.det(g)) / n)
    return g


def sup_deviation_mod_constant(alg, u_vals, w_vals):
    g = optimal_left_constant(alg, u_vals, w_vals)
    return float(np.abs(u_vals - np.einsum("ij,...jk->...ik", g, w_vals)).max())


def analytic_exp_field(alg, lattice, amp, seed, n_modes=6):
    """w = exp(X) for a low-frequency coordinate field X, together with the
    exact Maurer-Cartan components w^-1 d_i w sampled at sites.

    The derivative uses d/dt exp(X) = exp(X) D(ad_X) dX with
    D(z) = (1 - e^-z)/z summed far past machine precision.
    """
    rng = np.random.default_rng(seed)
    xs = lattice.coordinates()
    dim = alg.dim
    modes = [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 0), (0, 1, 1), (1, 0, 1)][:n_modes]
    X = np.zeros(lattice.dims + (dim,))
    dX = np.zeros((3,) + lattice.dims + (dim,))
    for a in range(dim):
        for kv in modes:
            ph = rng.uniform(0, 2 * np.pi)
            c = rng.normal() * amp / len(modes)
            arg = 2 * np.pi * sum(k * x / l for k, x, l in zip(kv, xs, lattice.lengths)) + ph
            X[..., a] += c * np.cos(arg)
            for ax in range(3):
                dX[ax, ..., a] += -c * 2 * np.pi * kv[ax] / lattice.lengths[ax] * np.sin(arg)
    f = alg.structure_constants
    A = np.empty_like(dX)
    for ax in range(3):
        cur = dX[ax]
        out = cur.copy()
        fact = 1.0
        for k in range(1, 20):
            cur = -np.einsum("...a,...b,abc->...c", X, cur, f)
            fact *= k + 1
            out += cur / fact
        A[ax] = out
    from skyrme.algebra import group_exp
    from skyrme.lattice import AlgebraOneForm, GroupField

    w = GroupField(lattice, alg, group_exp(alg, X))
    form = AlgebraOneForm(lattice, alg, A, sampling="site")
    return w, form
