import numpy as np
import pytest

from mmwba.channel import (PathSet, build_physical_matrices, ensemble_xi,
                           gen_path_set, make_virtual_channel, to_virtual,
                           true_xi, virtual_to_physical)
from mmwba.config import SimConfig

CFG = SimConfig(f=64, l_cp=8, m_b=8, m_j=8, n_u=8)


def single_path(rho=1.0, nu=0, chi=0.0, aod=0.0, aoa=0.0, owner="bs"):
    return PathSet(rho=np.array([rho], dtype=complex), nu=np.array([nu]),
                   chi=np.array([chi]), aod=np.array([aod]),
                   aoa=np.array([aoa]), owner=owner)


def test_seeded_draws_are_identical():
    a = gen_path_set(CFG, "bs", np.random.default_rng(42))
    b = gen_path_set(CFG, "bs", np.random.default_rng(42))
    for field in ("rho", "nu", "chi", "aod", "aoa"):
        np.testing.assert_array_equal(getattr(a, field), getattr(b, field))


def test_path_draws_respect_configured_ranges():
    rng = np.random.default_rng(0)
    for _ in range(200):
        ps = gen_path_set(CFG, "jammer", rng)
        delays = ps.delays
        assert np.all(delays >= 0) and np.all(delays <= CFG.delay_max)
        assert np.all(np.abs(ps.aod) <= 0.5) and np.all(np.abs(ps.aoa) <= 0.5)


def test_gain_variance_ratio_matches_profile():
    # second path configured 3 dB below the first
    rng = np.random.default_rng(7)
    n = 100_000
    g1 = np.empty(n)
    g2 = np.empty(n)
    for i in range(n):
        ps = gen_path_set(CFG, "bs", rng)
        g1[i], g2[i] = np.abs(ps.rho[0]) ** 2, np.abs(ps.rho[1]) ** 2
    ratio = g2.mean() / g1.mean()
    expected = CFG.path_gains[1] / CFG.path_gains[0]
    # delta-method standard error of the ratio of two independent means
    se = ratio * np.sqrt(g1.var() / g1.mean() ** 2 + g2.var() / g2.mean() ** 2) / np.sqrt(n)
    assert abs(ratio - expected) <= 3 * se


def test_vanishing_delay_spread_collapses_delays():
    cfg = SimConfig(f=64, l_cp=8, m_b=8, m_j=8, n_u=8, delay_max=1e-12)
    rng = np.random.default_rng(3)
    for _ in range(50):
        ps = gen_path_set(cfg, "bs", rng)
        assert np.all(ps.nu == 0)
        assert np.all(ps.chi <= 1e-12)


def test_bad_config_rejected():
    with pytest.raises(ValueError):
        SimConfig(f=64, l_cp=8, m_b=8, m_j=8, n_u=8, l_b=0)
    with pytest.raises(ValueError):
        SimConfig(f=64, l_cp=8, m_b=8, m_j=8, n_u=8, delay_max=0.0)
    with pytest.raises(ValueError):
        SimConfig(f=64, l_cp=8, m_b=8, m_j=8, n_u=8, delay_slope=-1.0)


def test_boresight_path_gives_constant_matrix():
    ks = CFG.used_subcarriers().reshape(-1)
    c = build_physical_matrices(single_path(), CFG, ks)
    want = 1.0 / (np.sqrt(CFG.n_rf) * np.sqrt(CFG.n_u * CFG.m_b))
    np.testing.assert_allclose(c, want * np.ones_like(c), atol=1e-14)


def test_unit_delay_rotates_phase_across_subcarriers():
    ks = CFG.used_subcarriers().reshape(-1)
    c0 = build_physical_matrices(single_path(nu=0), CFG, ks)
    c1 = build_physical_matrices(single_path(nu=1), CFG, ks)
    expected = np.exp(-2j * np.pi * ks / CFG.f)
    np.testing.assert_allclose(c1, c0 * expected[:, None, None], atol=1e-14)
    np.testing.assert_allclose(np.abs(c1), np.abs(c0), atol=1e-14)


def test_two_path_matrix_has_rank_at_most_two():
    rng = np.random.default_rng(5)
    ps = gen_path_set(CFG, "bs", rng)
    c = build_physical_matrices(ps, CFG, CFG.used_subcarriers().reshape(-1))
    for mat in c:
        assert np.linalg.matrix_rank(mat, tol=1e-10) <= 2


@pytest.mark.parametrize("n,m", [(4, 4), (8, 4), (4, 8), (8, 8), (16, 16)])
def test_virtual_round_trip_is_exact(n, m):
    rng = np.random.default_rng(n * 31 + m)
    c = rng.standard_normal((5, n, m)) + 1j * rng.standard_normal((5, n, m))
    vc = to_virtual(c, np.arange(5))
    back = virtual_to_physical(vc)
    assert np.max(np.abs(back - c)) < 1e-12
    np.testing.assert_allclose(np.linalg.norm(vc.c_virt, axis=(1, 2)),
                               np.linalg.norm(c, axis=(1, 2)), rtol=1e-12)


def test_virtual_matches_entrywise_dft_oracle():
    # brute-force evaluation of the unitary congruence, element by element
    rng = np.random.default_rng(11)
    n, m = 4, 6
    c = rng.standard_normal((2, n, m)) + 1j * rng.standard_normal((2, n, m))
    vc = to_virtual(c, np.arange(2))
    for k in range(2):
        brute = np.zeros((n, m), dtype=complex)
        for nn in range(n):
            for mm in range(m):
                acc = 0.0
                for a in range(n):
                    for b in range(m):
                        acc += (np.exp(2j * np.pi * nn * a / n) / np.sqrt(n)
                                * (-1.0) ** a * c[k, a, b] * (-1.0) ** b
                                * np.exp(-2j * np.pi * b * mm / m) / np.sqrt(m))
                brute[nn, mm] = acc
        np.testing.assert_allclose(vc.c_virt[k], brute, atol=1e-12)


def test_on_grid_path_is_one_beamspace_entry():
    m0, n0 = 3, 5
    ps = single_path(rho=2.0 - 1j, aod=m0 / CFG.m_b - 0.5, aoa=n0 / CFG.n_u - 0.5)
    vc = make_virtual_channel(ps, CFG)
    for mat in vc.c_virt:
        rest = mat.copy()
        rest[n0, m0] = 0.0
        assert np.max(np.abs(rest)) < 1e-12
        assert abs(mat[n0, m0] - (2.0 - 1j) / np.sqrt(CFG.n_rf)) < 1e-12


def test_off_grid_path_leaks_but_conserves_energy():
    ps = single_path(aod=0.137, aoa=-0.222)
    ks = CFG.used_subcarriers().reshape(-1)
    c_phys = build_physical_matrices(ps, CFG, ks)
    vc = to_virtual(c_phys, ks)
    nonzero = np.sum(np.abs(vc.c_virt[0]) > 1e-12)
    assert nonzero > 1  # off-grid angles spread over several bins
    for k in range(ks.size):
        total = np.sum(np.abs(vc.vec()[k]) ** 2)
        assert abs(total - np.linalg.norm(c_phys[k]) ** 2) < 1e-12


def test_true_xi_on_grid_value_and_index():
    m0, n0 = 2, 1
    ps = single_path(rho=1.5 + 0.5j, aod=m0 / CFG.m_b - 0.5, aoa=n0 / CFG.n_u - 0.5)
    vc = make_virtual_channel(ps, CFG)
    xi = true_xi(vc, power=2.0)
    idx = n0 + CFG.n_u * m0
    assert xi.argmax() == idx
    expected = 2.0 * abs(1.5 + 0.5j) ** 2 / CFG.n_rf
    assert abs(xi.values[idx] - expected) < 1e-12
    assert np.sum(xi.values > 1e-12) == 1


def test_true_xi_zero_channel_and_linearity():
    ps = single_path(rho=0.0)
    vc = make_virtual_channel(ps, CFG)
    assert np.all(true_xi(vc, 1.0).values == 0)

    rng = np.random.default_rng(2)
    vc2 = make_virtual_channel(gen_path_set(CFG, "bs", rng), CFG)
    np.testing.assert_allclose(true_xi(vc2, 2.0).values,
                               2.0 * true_xi(vc2, 1.0).values, rtol=1e-14)


def test_ensemble_xi_is_positive_and_normalized_scale():
    xi = ensemble_xi(CFG, "bs", power=1.0, n_quad=512)
    assert xi.values.shape == (CFG.m_b * CFG.n_u,)
    assert np.all(xi.values > 0)
    # total beamspace power equals total path variance / n_rf (unitarity)
    total = np.sum(xi.values)
    expected = sum(CFG.path_gains[:CFG.l_b]) / CFG.n_rf
    assert abs(total - expected) < 0.02 * expected


def test_path_set_validation():
    with pytest.raises(ValueError):
        PathSet(rho=np.array([1.0 + 0j]), nu=np.array([-1]), chi=np.array([0.0]),
                aod=np.array([0.0]), aoa=np.array([0.0]))
    with pytest.raises(ValueError):
        PathSet(rho=np.array([1.0 + 0j]), nu=np.array([0]), chi=np.array([1.5]),
                aod=np.array([0.0]), aoa=np.array([0.0]))
    with pytest.raises(ValueError):
        PathSet(rho=np.array([1.0 + 0j]), nu=np.array([0]), chi=np.array([0.0]),
                aod=np.array([0.7]), aoa=np.array([0.0]))
