"""Static impurity: rank-one resolvent update, bound states, vacancy limit."""

import numpy as np
import pytest

from dressedgf import (
    VACANCY,
    BathSpec,
    ImpuritySpec,
    PoleError,
    RegimeError,
    build_uniform_chain,
    diagonalize_bath,
    green_matrix,
    impurity_green,
    impurity_pole_function,
    impurity_scattering_state,
    impurity_state,
    solve_impurity_bound_state,
    vacancy_green,
)

from conftest import fidelity, random_bath_spec, random_gapped_bath, random_z


def _single_site(freq=0.0):
    return diagonalize_bath(BathSpec(n_sites=1, frequencies=(freq,), hoppings=()))


def _impurity_matrix(s, spec):
    h = s.source.to_matrix()
    h[spec.site, spec.site] += spec.strength
    return h


# ----------------------------------------------------------- basic pieces


def test_impurity_state_chain3_centre():
    s = diagonalize_bath(build_uniform_chain(3, 0.0, 1.0))
    psi = impurity_state(s, ImpuritySpec(site=1, strength=1.0), 0.0)
    np.testing.assert_allclose(psi, [-0.5, 0.0, -0.5], atol=1e-14)


def test_pole_function_single_site():
    s = _single_site()
    spec = ImpuritySpec(site=0, strength=2.0)
    assert abs(impurity_pole_function(s, spec, 4.0) - (0.5 - 0.25)) < 1e-14
    with pytest.raises(RegimeError, match="vacancy"):
        impurity_pole_function(s, ImpuritySpec(site=0, strength=VACANCY), 4.0)
    with pytest.raises(RegimeError, match="zero impurity strength"):
        impurity_pole_function(s, ImpuritySpec(site=0, strength=0.0), 4.0)


def test_impurity_green_zero_strength_is_bare():
    rng = np.random.default_rng(31)
    s = diagonalize_bath(random_bath_spec(rng, 6))
    z = random_z(rng, s)
    np.testing.assert_allclose(
        impurity_green(s, ImpuritySpec(site=2, strength=0.0), z),
        green_matrix(s, z),
        atol=0,
    )


def test_impurity_green_against_dense_inverse():
    rng = np.random.default_rng(32)
    for _ in range(25):
        spec_b = random_bath_spec(rng)
        s = diagonalize_bath(spec_b)
        site = int(rng.integers(0, s.n_sites))
        strength = float(rng.uniform(-3.0, 3.0))
        imp = ImpuritySpec(site=site, strength=strength)
        z = random_z(rng, s)
        got = impurity_green(s, imp, z)
        ref = np.linalg.inv(z * np.eye(s.n_sites) - _impurity_matrix(s, imp))
        np.testing.assert_allclose(got, ref, atol=1e-9)


def test_impurity_green_pole_error_at_bound_state():
    # single site at 0 with strength 2: the dressed level sits exactly at 2
    s = _single_site()
    with pytest.raises(PoleError, match="impurity resolvent pole"):
        impurity_green(s, ImpuritySpec(site=0, strength=2.0), 2.0)


# ------------------------------------------------------------ bound states


def test_bound_state_single_site():
    s = _single_site()
    states = solve_impurity_bound_state(s, ImpuritySpec(site=0, strength=2.0))
    assert len(states) == 1
    st = states[0]
    assert abs(st.energy - 2.0) < 1e-11
    assert abs(st.norm_factor - 2.0) < 1e-9
    np.testing.assert_allclose(st.wavefunction, [1.0], atol=1e-9)
    assert abs(st.residue_trace - 1.0) < 1e-12


def test_bound_state_chain_against_oracle():
    s = diagonalize_bath(build_uniform_chain(50, 0.0, 1.0))
    for strength in (3.0, 0.01, -1.5):
        imp = ImpuritySpec(site=20, strength=strength)
        states = solve_impurity_bound_state(s, imp)
        assert len(states) == 1
        st = states[0]
        evals, evecs = np.linalg.eigh(_impurity_matrix(s, imp))
        idx = -1 if strength > 0 else 0   # the split-off level
        assert abs(st.energy - evals[idx]) < 1e-9
        assert fidelity(st.wavefunction, evecs[:, idx]) > 1 - 1e-9
        assert abs(np.linalg.norm(st.wavefunction) - 1.0) < 1e-9
        assert abs(st.residue_trace - 1.0) < 1e-12


def test_bound_state_count_matches_oracle():
    rng = np.random.default_rng(33)
    for _ in range(50):
        spec_b, s, bands = random_gapped_bath(rng)
        site = int(rng.integers(0, s.n_sites))
        strength = float(rng.choice([-1.0, 1.0]) * rng.uniform(0.1, 3.0))
        imp = ImpuritySpec(site=site, strength=strength)
        states = solve_impurity_bound_state(s, imp, bands=bands)
        evals = np.linalg.eigvalsh(_impurity_matrix(s, imp))
        # pad band edges by a roundoff margin: eigenvalues of the component
        # the impurity does not touch stay exactly on the edges and must not
        # be miscounted as in-gap
        pad = 1e-12
        def clearly_in_gap(w):
            return all(w < lo - pad or w > hi + pad for lo, hi in bands.bands)
        oracle = sorted(float(w) for w in evals if clearly_in_gap(float(w)))
        assert len(states) == len(oracle)
        for st, w in zip(states, oracle):
            assert abs(st.energy - w) < 1e-9


def test_zero_strength_has_no_bound_states():
    s = diagonalize_bath(build_uniform_chain(5, 0.0, 1.0))
    assert solve_impurity_bound_state(s, ImpuritySpec(site=2, strength=0.0)) == []


# ---------------------------------------------------------------- vacancy


def test_vacancy_green_deletes_the_site():
    s = diagonalize_bath(build_uniform_chain(3, 0.0, 1.0))
    z = 0.5j
    g = vacancy_green(s, 1, z)
    assert np.all(g[1, :] == 0.0)
    assert np.all(g[:, 1] == 0.0)
    # remaining block equals the resolvent of the two decoupled end sites
    h_del = np.delete(np.delete(s.source.to_matrix(), 1, axis=0), 1, axis=1)
    ref = np.linalg.inv(z * np.eye(2) - h_del)
    np.testing.assert_allclose(g[np.ix_([0, 2], [0, 2])], ref, atol=1e-12)


def test_vacancy_green_random_baths():
    rng = np.random.default_rng(34)
    for _ in range(20):
        spec_b = random_bath_spec(rng)
        s = diagonalize_bath(spec_b)
        site = int(rng.integers(0, s.n_sites))
        z = random_z(rng, s)
        g = vacancy_green(s, site, z)
        keep = [x for x in range(s.n_sites) if x != site]
        h_del = spec_b.to_matrix()[np.ix_(keep, keep)]
        ref = np.linalg.inv(z * np.eye(len(keep)) - h_del)
        np.testing.assert_allclose(g[np.ix_(keep, keep)], ref, atol=1e-9)


def test_vacancy_single_site_is_empty():
    s = _single_site(0.3)
    np.testing.assert_allclose(vacancy_green(s, 0, 2.0), [[0.0]], atol=0)


def test_large_strength_approaches_vacancy():
    s = diagonalize_bath(build_uniform_chain(7, 0.0, 1.0))
    z = 1.2 + 0.4j
    g_imp = impurity_green(s, ImpuritySpec(site=3, strength=1e8), z)
    g_vac = vacancy_green(s, 3, z)
    assert np.max(np.abs(g_imp - g_vac)) < 1e-6


def test_impurity_green_vacancy_dispatch():
    s = diagonalize_bath(build_uniform_chain(4, 0.0, 1.0))
    z = 0.9 + 0.2j
    np.testing.assert_allclose(
        impurity_green(s, ImpuritySpec(site=1, strength=VACANCY), z),
        vacancy_green(s, 1, z),
        atol=0,
    )


# -------------------------------------------------------------- scattering


def test_scattering_node_mode_stays_put():
    # zero mode of chain(3) has a node at the centre: the correction term
    # vanishes through its numerator for finite strength
    s = diagonalize_bath(build_uniform_chain(3, 0.0, 1.0))
    st = impurity_scattering_state(s, ImpuritySpec(site=1, strength=0.8), 1)
    np.testing.assert_allclose(st.vector, s.eigenvectors[:, 1], atol=1e-12)
    assert st.residual < 1e-12
    # in the vacancy limit the same mode sits exactly on a zero of the pole
    # function and takes the untouched branch
    st = impurity_scattering_state(s, ImpuritySpec(site=1, strength=VACANCY), 1)
    assert not st.regular
    np.testing.assert_allclose(st.vector, s.eigenvectors[:, 1], atol=0)
    assert st.residual < 1e-12


def test_scattering_regular_modes():
    s = diagonalize_bath(build_uniform_chain(8, 0.0, 1.0))
    imp = ImpuritySpec(site=2, strength=0.7)
    for k in range(8):
        st = impurity_scattering_state(s, imp, k, delta=1e-8)
        assert st.residual < 1e-6
        coarse = impurity_scattering_state(s, imp, k, delta=1e-6)
        if coarse.residual > 1e-12:   # modes with a node never move
            assert st.residual < coarse.residual


def test_scattering_zero_strength_passes_modes_through():
    s = diagonalize_bath(build_uniform_chain(5, 0.0, 1.0))
    st = impurity_scattering_state(s, ImpuritySpec(site=2, strength=0.0), 3)
    assert st.regular
    np.testing.assert_allclose(st.vector, s.eigenvectors[:, 3], atol=0)
    assert st.residual < 1e-12


def test_scattering_vacancy_modes():
    s = diagonalize_bath(build_uniform_chain(6, 0.0, 1.0))
    imp = ImpuritySpec(site=2, strength=VACANCY)
    for k in range(6):
        st = impurity_scattering_state(s, imp, k, delta=1e-8)
        assert st.residual < 1e-5


def test_scattering_k_index_range():
    s = _single_site()
    with pytest.raises(ValueError, match="k_index"):
        impurity_scattering_state(s, ImpuritySpec(site=0, strength=1.0), 5)
