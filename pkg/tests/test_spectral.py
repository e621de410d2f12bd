import math

import numpy as np
import pytest

from relnls import spectral


@pytest.fixture
def grid():
    return spectral.Grid1D(40.0, 256)


def test_grid_layout(grid):
    assert grid.x[0] == -20.0 and grid.dx == pytest.approx(40 / 256)
    k = np.sort(grid.k)
    assert k[0] == pytest.approx(-2 * np.pi * 128 / 40)
    with pytest.raises(ValueError):
        spectral.Grid1D(1.0, 100)


def test_spectral_derivative(grid):
    f = np.exp(-grid.x ** 2)
    assert np.allclose(grid.derivative(f, 1), -2 * grid.x * f, atol=1e-12)
    assert np.allclose(grid.derivative(f, 2), (4 * grid.x ** 2 - 2) * f, atol=1e-11)


def test_state_validation(grid):
    with pytest.raises(ValueError):
        spectral.WaveState(grid, np.full(grid.n, np.inf))
    with pytest.raises(ValueError):
        spectral.WaveState(grid, np.zeros(10))
    s = spectral.WaveState(grid, spectral.gaussian_profile(grid))
    assert s.norm0 == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        s.values[0] = 0


def test_single_mode_phase_rotation(grid):
    mode = 3
    s = spectral.WaveState(grid, spectral.plane_profile(grid, mode), c=5.0, m=1.0)
    out = spectral.linear_propagate(s, 0.7, "semirel-exact")
    k0 = 2 * np.pi * mode / grid.length
    rate = 25.0 * (math.sqrt(1 + (k0 / 5.0) ** 2) - 1)
    assert np.allclose(out.values, s.values * np.exp(-1j * rate * 0.7), atol=1e-12)


def test_dispersion_kinds_agree_at_small_momentum():
    k = np.linspace(-1, 1, 11)
    exact = spectral.dispersion_rate(k, 1.0, 1.0, 50.0, "semirel-exact")
    trunc = spectral.dispersion_rate(k, 1.0, 1.0, 50.0, "semirel-truncated", 2)
    assert np.allclose(exact, trunc, atol=1e-10)
    assert np.array_equal(spectral.dispersion_rate(k, 1.0, 1.0, math.inf, "semirel-exact"),
                          spectral.dispersion_rate(k, 1.0, 1.0, 1.0, "nonrel"))
    with pytest.raises(ValueError):
        spectral.dispersion_rate(k, 1.0, 1.0, 5.0, "semirel-truncated")


def test_linear_norm_and_composition(grid):
    s = spectral.WaveState(grid, spectral.gaussian_profile(grid, 1.0, 0.0, 2.0), c=3.0)
    one = spectral.linear_propagate(s, 1.0)
    assert abs(spectral.norm(grid, one.values) - s.norm0) < 1e-12
    many = spectral.splitstep_evolve(s, 1e-3, 1000)
    assert np.max(np.abs(many.values - one.values)) < 1e-12
    with pytest.raises(ValueError):
        spectral.linear_propagate(s, 0.0)


def test_packet_relativistic_correction_scales(grid):
    s0 = spectral.gaussian_profile(grid, 0.5)
    diffs = []
    cs = (10.0, 20.0, 40.0)
    for c in cs:
        s = spectral.WaveState(grid, s0, c=c)
        a = spectral.linear_propagate(s, 1.0, "semirel-exact").values
        b = spectral.linear_propagate(s, 1.0, "nonrel").values
        diffs.append(np.sqrt(spectral.norm(grid, a - b)))
    slope = np.polyfit(np.log(1 / np.array(cs)), np.log(diffs), 1)[0]
    assert abs(slope - 2) < 0.1


def test_soliton_is_exact_solution():
    # residual of i psi_t = (1/2m)(-psi_xx - 2 kappa2 |psi|^2 psi) at t = 0.3
    g = spectral.Grid1D(40.0, 512)
    m, k2, tt, h = 0.5, 1.0, 0.3, 1e-4
    psi = spectral.soliton_profile(g, 1.3, k2, m, tt)
    psi_t = (spectral.soliton_profile(g, 1.3, k2, m, tt + h)
             - spectral.soliton_profile(g, 1.3, k2, m, tt - h)) / (2 * h)
    rhs = (-g.derivative(psi, 2) - 2 * k2 * np.abs(psi) ** 2 * psi) / (2 * m)
    assert np.max(np.abs(1j * psi_t - rhs)) < 1e-6


def test_soliton_propagation():
    g = spectral.Grid1D(40.0, 512)
    s = spectral.WaveState(g, spectral.soliton_profile(g), m=0.5, kappa2=1.0)
    out = spectral.splitstep_evolve(s, 1e-3, 1000, 0, linear_kind="nonrel")
    assert np.max(np.abs(out.values - spectral.soliton_profile(g, t=1.0))) < 1e-6
    assert out.time == pytest.approx(1.0)


def test_second_order_in_time():
    g = spectral.Grid1D(40.0, 256)
    s = spectral.WaveState(g, 1.2 * spectral.soliton_profile(g), m=0.5, kappa2=1.0, c=10.0)
    runs = [spectral.splitstep_evolve(s, dt, int(round(0.4 / dt)), 1).values for dt in (4e-3, 2e-3, 1e-3)]
    e1 = np.max(np.abs(runs[0] - runs[1]))
    e2 = np.max(np.abs(runs[1] - runs[2]))
    assert 3.5 < e1 / e2 < 4.5


def test_spatial_resolution():
    # a Gaussian is analytic and periodic to rounding on this box; the sech
    # soliton's 1e-9 tails at the box edge would dominate instead
    outs = []
    for n in (256, 512):
        g = spectral.Grid1D(40.0, n)
        s = spectral.WaveState(g, 1.5 * spectral.gaussian_profile(g), m=0.5, kappa2=1.0, c=20.0)
        outs.append(spectral.splitstep_evolve(s, 1e-3, 200, 1).values)
    assert np.max(np.abs(outs[1][::2] - outs[0])) < 1e-10


@pytest.mark.parametrize("eps_order, c", [(0, math.inf), (1, 10.0)])
def test_norm_conservation(eps_order, c):
    g = spectral.Grid1D(40.0, 256)
    s = spectral.WaveState(g, spectral.soliton_profile(g), m=0.5, kappa2=1.0, c=c)
    out = spectral.splitstep_evolve(s, 1e-3, 1000, eps_order)
    assert abs(spectral.norm(g, out.values) / s.norm0 - 1) < 1e-10


def test_stability_guard_and_preconditions(grid):
    s = spectral.WaveState(grid, spectral.soliton_profile(grid), m=0.5, kappa2=1.0, c=1.0)
    with pytest.raises(spectral.StabilityGuard):
        spectral.splitstep_evolve(s, 0.5, 1, 1)
    with pytest.raises(ValueError):
        spectral.splitstep_evolve(s, 1e-3, 1, 2)
    bad = spectral.WaveState(grid, spectral.soliton_profile(grid), hbar=2.0, kappa2=1.0)
    with pytest.raises(ValueError):
        spectral.splitstep_evolve(bad, 1e-3, 1)


def test_blowup_detection(grid):
    s = spectral.WaveState(grid, 1e-3 * spectral.gaussian_profile(grid), m=0.5, kappa2=-1e9)
    with pytest.raises((spectral.BlowUp, spectral.StabilityGuard)):
        spectral.splitstep_evolve(s, 1e-3, 10)


def test_observer_called(grid):
    s = spectral.WaveState(grid, spectral.soliton_profile(grid), m=0.5, kappa2=1.0)
    seen = []
    spectral.splitstep_evolve(s, 1e-3, 10, observer=lambda st, k: seen.append(k), observe_every=4)
    assert seen == [4, 8, 10]


def test_observables(grid):
    s = spectral.WaveState(grid, spectral.gaussian_profile(grid, 1.0, 0.0, 1.5), hbar=1.0)
    obs = spectral.observables(s)
    assert obs["norm"] == pytest.approx(1.0, abs=1e-12)
    assert obs["momentum"] == pytest.approx(1.5, abs=1e-10)
    assert abs(obs["centroid"]) < 1e-10


def test_soliton_energy_conserved():
    g = spectral.Grid1D(40.0, 256)
    s = spectral.WaveState(g, spectral.soliton_profile(g), m=0.5, kappa2=1.0)
    out = spectral.splitstep_evolve(s, 1e-3, 200, 0, linear_kind="nonrel")
    e0 = spectral.candidate_functionals(s)["energy"]
    assert spectral.candidate_functionals(out)["energy"] == pytest.approx(e0, rel=1e-6)


def test_compiled_nonlinearity_matches_direct_formula():
    g = spectral.Grid1D(20.0, 128)
    psi = spectral.soliton_profile(g, 1.1) * np.exp(0.3j * g.x)
    F = spectral.nonlinearity(0, 0.5, 1.0, math.inf)
    d = spectral.spectral_derivatives(g, np.fft.fft(psi), F.orders)
    assert np.allclose(F(d), -(2 / (2 * 0.5)) * np.abs(psi) ** 2 * psi, atol=1e-12)
