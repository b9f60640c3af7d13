import numpy as np
import pytest

from mmwba.codebook import (build_G, codebook_from_json, codebook_to_json,
                            gen_codebook)
from mmwba.config import SimConfig

CFG = SimConfig(f=2048, l_cp=128)  # reference scale: M_B=32, U_B=4, V=4


def test_bs_codebook_shape_and_cardinality():
    cb = gen_codebook("bs", CFG, q=2, rng=np.random.default_rng(0))
    assert cb.supports.shape == (2, 3, 4)  # Q=2 slots, 3 chains, card 4
    for slot in cb.supports:
        for sup in slot:
            assert len(set(sup.tolist())) == 4
            assert np.all(np.diff(sup) > 0)  # sorted, no repeats


def test_beam_vectors_are_unit_norm():
    cb = gen_codebook("ue", CFG, q=3, rng=np.random.default_rng(1))
    vecs = cb.beam_vectors()
    np.testing.assert_allclose(np.linalg.norm(vecs, axis=-1), 1.0, atol=1e-15)


def test_omni_jammer_covers_every_direction():
    cb = gen_codebook("jammer", CFG, q=2, rng=np.random.default_rng(2), mode="omni")
    vecs = cb.beam_vectors()
    assert cb.cardinality == CFG.m_j
    np.testing.assert_allclose(vecs, 1.0 / np.sqrt(32), atol=1e-15)
    np.testing.assert_allclose(np.linalg.norm(vecs, axis=-1), 1.0, atol=1e-15)


def test_copy_bs_reproduces_measurement_matrix_bit_exact():
    rng = np.random.default_rng(3)
    cb_bs = gen_codebook("bs", CFG, q=4, rng=rng)
    cb_ue = gen_codebook("ue", CFG, q=4, rng=rng)
    cb_jam = gen_codebook("jammer", CFG, q=4, rng=rng, mode="copy_bs",
                          bs_codebook=cb_bs)
    g_b = build_G(cb_bs, cb_ue)
    g_j = build_G(cb_jam, cb_ue)
    assert np.array_equal(g_b.values, g_j.values)


def test_copy_bs_requires_bs_codebook():
    with pytest.raises(ValueError):
        gen_codebook("jammer", CFG, q=2, rng=np.random.default_rng(0),
                     mode="copy_bs")


def test_oversized_support_rejected_at_config():
    with pytest.raises(ValueError):
        SimConfig(f=64, l_cp=8, m_b=8, m_j=8, n_u=8, u_b=9)


def test_g_rows_sum_to_one_with_expected_entries():
    rng = np.random.default_rng(4)
    cb_bs = gen_codebook("bs", CFG, q=3, rng=rng)
    cb_ue = gen_codebook("ue", CFG, q=3, rng=rng)
    g = build_G(cb_bs, cb_ue)
    assert g.values.shape == (3 * 3 * 2, 32 * 32)
    np.testing.assert_allclose(g.values.sum(axis=1), 1.0, atol=1e-12)
    weight = 1.0 / (4 * 4)
    vals = np.unique(g.values)
    assert set(np.round(vals, 15)) <= {0.0, np.round(weight, 15)}
    assert np.all((g.values == 0).sum(axis=1) == 32 * 32 - 16)


def test_singleton_supports_give_basis_row():
    cfg = SimConfig(f=64, l_cp=8, m_b=4, m_j=4, n_u=4, m_rf=1, n_rf=1,
                    f_per_stream=1, u_b=1, u_j=1, v=1)
    rng = np.random.default_rng(5)
    cb_bs = gen_codebook("bs", cfg, q=1, rng=rng)
    cb_ue = gen_codebook("ue", cfg, q=1, rng=rng)
    g = build_G(cb_bs, cb_ue)
    m0 = cb_bs.supports[0, 0, 0]
    n0 = cb_ue.supports[0, 0, 0]
    want = np.zeros(16)
    want[n0 + 4 * m0] = 1.0
    np.testing.assert_array_equal(g.values[0], want)


def test_g_matches_bruteforce_kronecker():
    cfg = SimConfig(f=64, l_cp=8, m_b=4, m_j=4, n_u=4, m_rf=1, n_rf=1,
                    f_per_stream=1, u_b=2, u_j=2, v=2)
    rng = np.random.default_rng(6)
    cb_bs = gen_codebook("bs", cfg, q=3, rng=rng)
    cb_ue = gen_codebook("ue", cfg, q=3, rng=rng)
    g = build_G(cb_bs, cb_ue)
    for slot in range(3):
        u_ind = np.zeros(4)
        u_ind[cb_bs.supports[slot, 0]] = 1.0
        v_ind = np.zeros(4)
        v_ind[cb_ue.supports[slot, 0]] = 1.0
        row = np.kron(u_ind, v_ind) / (2 * 2)
        np.testing.assert_array_equal(g.values[g.row_index(slot, 0, 0)], row)


def test_row_index_ordering_contract():
    rng = np.random.default_rng(7)
    cb_bs = gen_codebook("bs", CFG, q=2, rng=rng)
    cb_ue = gen_codebook("ue", CFG, q=2, rng=rng)
    g = build_G(cb_bs, cb_ue)
    # slot-major, then stream, then UE chain
    assert g.row_index(0, 0, 0) == 0
    assert g.row_index(0, 0, 1) == 1
    assert g.row_index(0, 1, 0) == 2
    assert g.row_index(1, 0, 0) == 6


def test_mismatched_slot_counts_rejected():
    rng = np.random.default_rng(8)
    cb_bs = gen_codebook("bs", CFG, q=2, rng=rng)
    cb_ue = gen_codebook("ue", CFG, q=3, rng=rng)
    with pytest.raises(ValueError):
        build_G(cb_bs, cb_ue)


def test_json_snapshot_round_trip():
    cb = gen_codebook("jammer", CFG, q=2, rng=np.random.default_rng(9))
    restored = codebook_from_json(codebook_to_json(cb))
    assert restored.owner == cb.owner
    assert restored.mode == cb.mode
    assert restored.n_bins == cb.n_bins
    np.testing.assert_array_equal(restored.supports, cb.supports)
