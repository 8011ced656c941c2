import numpy as np
import pytest
import scipy.interpolate
from hypothesis import given, strategies as st

from splinepde.simulate import (NoiseSpec, PdeSpec, add_noise, characteristic_foot,
                                inviscid_burgers_field, reference_cells, simulate_field,
                                transport_field, viscous_burgers_field,
                                viscous_burgers_reference)
from splinepde.types import Grid1D


def burgers_fd_oracle(x_out, t_out, cells=2000):
    """u_t = -(u^2 / 4)_x by fourth-order central differences and classical RK4.

    The solution stays smooth before the shock, and sin(2 pi x) is odd about
    both ends, so odd reflection supplies the ghost values.
    """
    dx = 1.0 / cells
    x = np.linspace(0, 1, cells + 1)
    u = np.sin(2 * np.pi * x)

    def rhs(v):
        w = np.concatenate([-v[2:0:-1], v, -v[-2:-4:-1]])
        f = 0.25 * w * w
        df = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * dx)
        out = -df
        out[0] = out[-1] = 0.0
        return out

    res = np.empty((len(x_out), len(t_out)))
    t = 0.0
    for k, target in enumerate(t_out):
        nst = max(1, int(np.ceil((target - t) / (0.2 * dx))))
        dt = (target - t) / nst
        for _ in range(nst):
            k1 = rhs(u)
            k2 = rhs(u + 0.5 * dt * k1)
            k3 = rhs(u + 0.5 * dt * k2)
            k4 = rhs(u + dt * k3)
            u = u + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = target
        res[:, k] = np.interp(x_out, x, u)
    return res


def test_transport_closed_form():
    g = Grid1D.uniform(10, 7)
    f = transport_field(g)
    assert f.values[3, 4] == pytest.approx(2 * np.sin(4 * (g.x[3] - 2 * g.t[4])), abs=1e-15)


def test_transport_satisfies_pde_numerically():
    g = Grid1D.uniform(200, 200)
    U = transport_field(g).values
    ut = (U[1:-1, 2:] - U[1:-1, :-2]) / (g.t[2] - g.t[0])
    ux = (U[2:, 1:-1] - U[:-2, 1:-1]) / (g.x[2] - g.x[0])
    assert np.max(np.abs(ut + 2 * ux)) <= 5e-3


def test_inviscid_initial_slice_and_boundaries():
    g = Grid1D(np.linspace(0, 1, 41), np.array([0.0, 0.02, 0.05, 0.1]))
    U = inviscid_burgers_field(g).values
    assert np.allclose(U[:, 0], np.sin(2 * np.pi * g.x), atol=1e-12)
    assert np.all(U[0] == 0) and np.all(U[-1] == 0)


def test_inviscid_matches_independent_solver():
    g = Grid1D.uniform(50, 10)
    U = inviscid_burgers_field(g).values
    ref = burgers_fd_oracle(g.x, g.t)
    assert np.max(np.abs(U - ref)) <= 1e-4


def test_inviscid_rejects_shock_times():
    with pytest.raises(ValueError):
        PdeSpec("inviscid_burgers", t_max=0.4)
    with pytest.raises(ValueError):
        inviscid_burgers_field(Grid1D(np.linspace(0, 1, 10), np.linspace(0.1, 0.35, 5)))


@given(st.floats(0.0, 0.3))
def test_characteristic_feet_monotone_and_consistent(t):
    x = np.linspace(0, 1, 201)
    x0 = characteristic_foot(x, t)
    assert np.all(np.diff(x0) > 0)
    assert np.allclose(x0 + 0.5 * np.sin(2 * np.pi * x0) * t, x, atol=1e-11)


def test_viscous_initial_slice_and_boundaries():
    g = Grid1D(np.linspace(0, 1, 21), np.array([0.0, 0.03, 0.06, 0.1]))
    U = viscous_burgers_field(g).values
    x = g.x
    ic = np.sin(4 * np.pi * x) ** 2 + np.sin(2 * np.pi * x) ** 3
    assert np.allclose(U[1:-1, 0], ic[1:-1], atol=1e-12)
    assert np.all(U[0] == 0) and np.all(U[-1] == 0)


def test_viscous_reference_converged():
    g = Grid1D.uniform(100, 10)
    a = viscous_burgers_field(g, refine=8).values
    b = viscous_burgers_field(g, refine=16).values
    assert np.max(np.abs(a - b)) <= 1e-4


def test_viscous_non_nested_output_interpolates():
    xf = np.linspace(0, 1, 161)
    fine = viscous_burgers_reference(0.1, 160, [0.05])
    x_out = np.array([0.123, 0.5001, 0.77])
    out = viscous_burgers_reference(0.1, 160, [0.05], x_out)
    ref = scipy.interpolate.CubicSpline(xf, fine[:, 0])(x_out)
    assert np.allclose(out[:, 0], ref, atol=1e-5)


def test_reference_cells():
    assert reference_cells(Grid1D.uniform(20, 5)) == 160
    assert reference_cells(Grid1D(np.array([0.0, 0.3, 0.7, 1.0]), np.arange(4.0)), 2) == 7


def test_viscous_step_guard():
    with pytest.raises(ValueError):
        viscous_burgers_reference(0.1, 100000, [1.0])


def test_spec_truths():
    assert [str(t) for t in PdeSpec("viscous_burgers").true_support()] == ["u_xx", "u*u_x"]
    assert PdeSpec("transport").true_coefficients() == {"u_x": -2.0}
    with pytest.raises(ValueError):
        PdeSpec("heat")
    with pytest.raises(ValueError):
        PdeSpec("viscous_burgers", nu=0)


def test_simulate_dispatch():
    g = Grid1D.uniform(20, 10)
    for kind in ("transport", "inviscid_burgers", "viscous_burgers"):
        f = simulate_field(PdeSpec(kind), g)
        assert f.values.shape == (20, 10)


def test_noise_zero_and_reproducible():
    f = transport_field(Grid1D.uniform(30, 30))
    assert add_noise(f, NoiseSpec(0.0, 5)) is f
    a = add_noise(f, NoiseSpec(0.5, 3)).values
    b = add_noise(f, NoiseSpec(0.5, 3)).values
    c = add_noise(f, NoiseSpec(0.5, 4)).values
    assert np.array_equal(a, b) and not np.array_equal(a, c)
    with pytest.raises(ValueError):
        NoiseSpec(-1.0)


def test_noise_statistics():
    g = Grid1D.uniform(100, 100)
    f = transport_field(g)
    e = add_noise(f, NoiseSpec(1.0, 0)).values - f.values
    # 10^4 standard normals: mean within 4 standard errors, variance within 5%
    assert abs(e.mean()) <= 0.04
    assert e.std() == pytest.approx(1.0, rel=0.05)
