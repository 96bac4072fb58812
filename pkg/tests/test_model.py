from __future__ import annotations

import dataclasses
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from scipy.optimize import linear_sum_assignment
from hypothesis import strategies as st

from phason_stab.errors import ConfigError, InadmissibleParametersError, SingularConfigurationError
from phason_stab.matkernel import eig, sym3_eigvals
from phason_stab.model import (
    GPA,
    QC_MATERIAL,
    ConstitutiveParams,
    SelfActionMode,
    WaveConfig,
    assemble_system,
    build_K,
    build_K123,
    check_energy_positivity,
    derive_coefficients,
    load_params,
    params_from_mapping,
    params_to_mapping,
    quasicrystal_params,
    require_admissible,
)

from conftest import random_orthogonal

LAM, MU, ZETA, GAMMA, RHO = (QC_MATERIAL[k] for k in ("lam", "mu", "zeta", "gamma", "rho"))


# -- coefficients -----------------------------------------------------------


def test_zero_k_coefficients():
    p = ConstitutiveParams(lam=1.0, mu=1.0, k1=0, k2=0, k2p=0, k3=0, k3p=0)
    d = derive_coefficients(p)
    assert (d.alpha, d.zeta, d.gamma, d.chi) == (0, 0, 0, 0)
    assert d.xi == 2.0


coef = st.floats(-1e10, 1e10, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(coef, coef, coef, coef, st.floats(0.01, 0.99))
def test_inverse_round_trip(chi, alpha, zeta, gamma, frac):
    p = ConstitutiveParams.from_derived(LAM, MU, chi, alpha, zeta, gamma, k2p_fraction=frac)
    d = p.derived
    scale = max(abs(chi), abs(alpha), abs(zeta), abs(gamma), 1.0)
    for got, want in ((d.chi, chi), (d.alpha, alpha), (d.zeta, zeta), (d.gamma, gamma)):
        assert abs(got - want) <= 4e-16 * scale


def test_quasicrystal_values_stored():
    p = quasicrystal_params(chi=0.3 * GPA, alpha=0.1 * GPA)
    d = p.derived
    assert d.zeta == pytest.approx(0.044 * GPA, rel=1e-15)
    assert d.gamma == pytest.approx(0.0198 * GPA, rel=1e-15)
    assert d.chi == pytest.approx(0.3 * GPA)
    assert d.alpha == pytest.approx(0.1 * GPA)


def test_from_gpa():
    p = ConstitutiveParams.from_gpa(lam=85, mu=65, chi=0.1, alpha=0, zeta=0.044, gamma=0.0198,
                                    varsigma=0.178, rho=5100)
    assert p.varsigma == pytest.approx(1.78e8)
    assert p.rho == 5100
    assert p.derived.chi == pytest.approx(1e8)


def test_phi_and_varsigma():
    p = quasicrystal_params(phi=19)
    assert p.varsigma == pytest.approx(math.exp(19))
    assert p.phi == pytest.approx(19)
    # phi = 19 is the same friction as 0.178 GPa s/m^2 to three digits
    assert p.varsigma / GPA == pytest.approx(0.178, abs=5e-4)
    with pytest.raises(ValueError):
        quasicrystal_params(phi=19, varsigma=1.0)


@pytest.mark.parametrize("field, value", [("rho", 0.0), ("varsigma", -1.0), ("mu", math.nan)])
def test_constructor_invariants(field, value):
    with pytest.raises(ValueError):
        dataclasses.replace(quasicrystal_params(varsigma=1.0), **{field: value})


def test_with_value_names():
    p = quasicrystal_params(chi=0.1 * GPA, phi=19)
    assert p.with_value("chi", 0.2 * GPA).derived.chi == pytest.approx(0.2 * GPA)
    assert p.with_value("chi", 0.2 * GPA).derived.alpha == pytest.approx(0.0, abs=1e-6)
    assert p.with_value("alpha", 0.3 * GPA).derived.alpha == pytest.approx(0.3 * GPA)
    assert p.with_value("lambda", 1.0).lam == 1.0
    assert p.with_value("phi", 20).phi == pytest.approx(20)
    z = p.with_value("zeta", 0.1 * GPA)
    assert z.derived.zeta == pytest.approx(0.1 * GPA)
    assert z.derived.gamma == pytest.approx(GAMMA)
    assert z.k2p / z.derived.zeta == pytest.approx(0.1)
    g = p.with_value("gamma", 0.5 * GPA)
    assert g.derived.gamma == pytest.approx(0.5 * GPA)
    assert g.derived.zeta == pytest.approx(ZETA)
    with pytest.raises(KeyError):
        p.with_value("nope", 1.0)


# -- admissibility ----------------------------------------------------------


def test_negative_mu_violation():
    p = dataclasses.replace(quasicrystal_params(), mu=-1.0)
    names = [v.name for v in check_energy_positivity(p)]
    assert "mu > 0" in names


def test_admissible_with_slack():
    # every condition holds with at least 10% slack
    p = ConstitutiveParams(lam=1.0, mu=1.0, k1=1.0, k2=1.0, k2p=1.0, k3=0.1, k3p=0.5, k0=1.0)
    assert check_energy_positivity(p) == []


def test_quasicrystal_window_admissible():
    for chi in np.linspace(0.0, 1.5, 31):
        assert check_energy_positivity(quasicrystal_params(chi=chi * GPA)) == []


def test_admissible_window_limit():
    # k3' < 2 sqrt(mu k2) with k2 = 0.9 zeta gives chi < sqrt(0.9 mu zeta)
    limit = math.sqrt(MU * 0.9 * ZETA)
    assert check_energy_positivity(quasicrystal_params(chi=0.999 * limit)) == []
    v = check_energy_positivity(quasicrystal_params(chi=1.001 * limit))
    assert [x.name for x in v] == ["k3' < 2 sqrt(mu k2)"]
    assert v[0].margin < 0


def test_strictness():
    base = ConstitutiveParams(lam=1.0, mu=1.0, k1=1.0, k2=1.0, k2p=1.0, k3=0.0, k3p=0.0)
    # k0 = 0 is allowed, k2' = 0 is not
    assert check_energy_positivity(base) == []
    assert [v.name for v in check_energy_positivity(dataclasses.replace(base, k2p=0.0))] == ["k2' > 0"]
    assert [v.name for v in check_energy_positivity(dataclasses.replace(base, k0=-1e-9))] == ["k0 >= 0"]


def test_nan_margin_is_violation():
    p = ConstitutiveParams(lam=1.0, mu=1.0, k1=1.0, k2=-1.0, k2p=1.0, k3=0.0, k3p=0.0)
    names = [v.name for v in check_energy_positivity(p)]
    assert "k3' < 2 sqrt(mu k2)" in names


def test_require_admissible():
    bad = dataclasses.replace(quasicrystal_params(), mu=-1.0)
    with pytest.raises(InadmissibleParametersError) as info:
        require_admissible(bad)
    assert info.value.violations
    assert require_admissible(bad, allow_inadmissible=True)


# -- wave -------------------------------------------------------------------


def test_wave_validation():
    with pytest.raises(ValueError):
        WaveConfig(k=0.0)
    with pytest.raises(ValueError):
        WaveConfig(n=(1.0, 1.0, 0.0))
    w = WaveConfig.along([0, 3, 4], k=2.0)
    assert w.n == pytest.approx((0, 0.6, 0.8))


# -- builders ---------------------------------------------------------------


def _acoustic_oracle(chi, alpha=0.0, k=1.0):
    """Coefficients of the no-self-action tensor from the scalar formulas."""
    a = MU - chi**2 / ZETA
    b = LAM + MU - (alpha + chi) ** 2 / (ZETA + GAMMA) + chi**2 / ZETA
    return -k * k / RHO * a, -k * k / RHO * (a + b)


def test_decoupled_acoustic_tensor():
    p = quasicrystal_params()
    for mode in ("none", "conservative"):
        K = build_K(mode, p.with_value("k0", 0.1 * GPA) if mode == "conservative" else p,
                    p.derived, WaveConfig())
        np.testing.assert_allclose(K, -(MU * np.eye(3) + (LAM + MU) * np.diag([1, 0, 0])) / RHO)


def test_no_self_action_K_eigenvalues():
    p = quasicrystal_params(chi=0.05 * GPA)
    K = build_K("none", p, p.derived, WaveConfig())
    trans, longi = _acoustic_oracle(0.05 * GPA)
    np.testing.assert_allclose(sym3_eigvals(K), [longi, trans, trans], rtol=1e-12)
    # frozen values of the oracle
    assert longi == pytest.approx(-4.2149e7, rel=1e-4)
    assert trans == pytest.approx(-1.27340e7, rel=1e-5)


def test_no_self_action_threshold_K():
    p = quasicrystal_params(chi=1.6912 * GPA)
    K = build_K("none", p, p.derived, WaveConfig())
    np.testing.assert_allclose(sym3_eigvals(K), [-3.34e7, 701.6043, 701.6043], rtol=1e-3)


def test_build_K_singular():
    p = quasicrystal_params()
    p0 = p.with_value("zeta", 0.0)
    with pytest.raises(SingularConfigurationError):
        build_K("none", p0, p0.derived, WaveConfig())
    p1 = p.with_value("gamma", -ZETA)
    with pytest.raises(SingularConfigurationError):
        build_K("none", p1, p1.derived, WaveConfig())
    p2 = p.with_value("k0", -ZETA)
    with pytest.raises(SingularConfigurationError):
        build_K("conservative", p2, p2.derived, WaveConfig())


def test_build_K_rejects_friction_modes():
    p = quasicrystal_params(phi=19)
    with pytest.raises(ValueError):
        build_K("dissipative", p, p.derived, WaveConfig())


def test_K123_decoupled():
    p = quasicrystal_params(phi=19)
    K1, K2, K3 = build_K123("dissipative", p, p.derived, WaveConfig())
    assert not K2.any()


def test_K3_dissipative_eigenvalues():
    p = quasicrystal_params(phi=19)
    _, _, K3 = build_K123("dissipative", p, p.derived, WaveConfig())
    s = math.exp(19)
    oracle = sorted([-(ZETA + GAMMA) / s, -ZETA / s, -ZETA / s])
    np.testing.assert_allclose(sym3_eigvals(K3), oracle, rtol=1e-12)
    np.testing.assert_allclose(oracle, [-0.3576, -0.2466, -0.2466], atol=5e-4)


def test_K3_complete_longitudinal():
    p = quasicrystal_params(k0=0.01 * GPA, varsigma=0.178 * GPA)
    _, _, K3 = build_K123("complete", p, p.derived, WaveConfig())
    assert sym3_eigvals(K3)[0] == pytest.approx(-(ZETA + 0.01 * GPA + GAMMA) / (0.178 * GPA))
    assert sym3_eigvals(K3)[0] == pytest.approx(-0.4146, abs=1e-4)


def test_K123_requires_friction():
    p = quasicrystal_params()
    with pytest.raises(SingularConfigurationError):
        build_K123("dissipative", p, p.derived, WaveConfig())


# -- assembly ---------------------------------------------------------------


@pytest.mark.parametrize("mode", list(SelfActionMode))
def test_layout_and_symmetric_blocks(mode):
    p = quasicrystal_params(chi=0.3 * GPA, alpha=0.05 * GPA, k0=0.01 * GPA, phi=19)
    S = assemble_system(mode, p)
    assert S.A.shape == (mode.size, mode.size)
    for b in S.blocks.values():
        np.testing.assert_array_equal(b, b.T)
    np.testing.assert_array_equal(S.A[0:3, 3:6], np.eye(3))
    assert not S.A.flags.writeable
    if mode.size == 9:
        np.testing.assert_array_equal(S.A[0:3, [0, 1, 2, 6, 7, 8]], 0)
        np.testing.assert_array_equal(S.A[3:6, 3:9], np.hstack([np.zeros((3, 3)), S.blocks["K2"] / p.rho]))
        np.testing.assert_array_equal(S.A[6:9, 3:6], 0)


def test_no_self_action_square_is_block_diagonal():
    S = assemble_system("none", quasicrystal_params(chi=0.7 * GPA, alpha=0.2 * GPA))
    K = S.blocks["K"]
    target = np.block([[K, np.zeros((3, 3))], [np.zeros((3, 3)), K]])
    np.testing.assert_allclose(S.A @ S.A, target, rtol=0, atol=1e-12 * np.abs(K).max())


def test_dissipative_is_non_normal(dissipative_A):
    A = dissipative_A.A
    assert np.linalg.norm(A @ A.T - A.T @ A, 2) > 0


def test_conservative_simple_body_limit():
    freqs = []
    for k0 in (1e-3, 1e-1, 1e1, 1e3):
        S = assemble_system("conservative", quasicrystal_params(chi=0.1 * GPA, k0=k0 * GPA))
        freqs.append(sorted(set(np.round(np.abs(eig(S.A).eigenvalues.imag), 6))))
    freqs = np.array(freqs)
    assert np.all(np.diff(freqs, axis=0) > 0)
    simple = [math.sqrt(MU / RHO), math.sqrt((LAM + 2 * MU) / RHO)]
    np.testing.assert_allclose(freqs[-1], simple, atol=1e-3)
    np.testing.assert_allclose(simple, [3570.0277, 6492.8316], atol=1e-4)


def test_dissipative_complete_coincide_at_zero_k0():
    p = quasicrystal_params(chi=0.4 * GPA, alpha=0.1 * GPA, phi=18)
    np.testing.assert_array_equal(assemble_system("dissipative", p).A,
                                  assemble_system("complete", p).A)


def test_conservative_converges_to_none():
    p = quasicrystal_params(chi=0.6 * GPA, alpha=0.1 * GPA)
    ref = assemble_system("none", p).A
    errs = [np.abs(assemble_system("conservative", p.with_value("k0", k0)).A - ref).max()
            for k0 in (1e6, 1e3, 1.0, 1e-3)]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 1e-9 * np.abs(ref).max()


@pytest.mark.parametrize("mode", list(SelfActionMode))
def test_isotropy(mode, rng):
    p = quasicrystal_params(chi=0.5 * GPA, alpha=0.1 * GPA, k0=0.05 * GPA, phi=19)
    ref = eig(assemble_system(mode, p).A).eigenvalues
    for _ in range(20):
        lam = eig(assemble_system(mode, p, WaveConfig.along(rng.standard_normal(3))).A).eigenvalues
        # optimal pairing, so rounding noise cannot reorder near-equal eigenvalues
        cost = np.abs(lam[:, None] - ref[None, :])
        rows, cols = linear_sum_assignment(cost)
        assert cost[rows, cols].max() <= 1e-9 * np.max(np.abs(ref))


def test_matrix_hash_stable():
    p = quasicrystal_params(chi=0.1 * GPA, phi=19)
    a, b = assemble_system("dissipative", p), assemble_system("dissipative", p)
    assert a.matrix_hash == b.matrix_hash
    assert a.matrix_hash != assemble_system("complete", p.with_value("k0", 1.0)).matrix_hash


def test_mode_parse_aliases():
    assert SelfActionMode.parse("NoSelfAction") is SelfActionMode.NONE
    assert SelfActionMode.parse("Complete") is SelfActionMode.COMPLETE
    with pytest.raises(ValueError):
        SelfActionMode.parse("bogus")


# -- parameter files --------------------------------------------------------


def test_params_mapping_units():
    p = params_from_mapping({"chi": "0.1GPa", "phi": 19, "k0": "0.01GPa/m^2"})
    assert p.derived.chi == pytest.approx(1e8)
    assert p.k0 == pytest.approx(1e7)
    assert p.phi == pytest.approx(19)


@pytest.mark.parametrize("bad", [
    {"chi": 0.1},
    {"chi": "0.1"},
    {"chi": "0.1GPa", "k3": "1GPa"},
    {"phi": 19, "varsigma": "1Pa*s/m^2"},
    {"phi": "19"},
    {"unknown": "1Pa"},
])
def test_params_mapping_errors(bad):
    with pytest.raises(ConfigError):
        params_from_mapping(bad)


def test_params_round_trip(tmp_path):
    p = quasicrystal_params(chi=0.37 * GPA, alpha=0.01 * GPA, k0=3.3e6, phi=18.5)
    path = tmp_path / "p.json"
    path.write_text(json.dumps(params_to_mapping(p)))
    assert load_params(path) == p


def test_raw_keys_in_mapping():
    p = params_from_mapping({"k1": "1GPa", "k2": "2GPa", "k2p": "0.5GPa", "k3": "0.1GPa",
                             "k3p": "0.2GPa"})
    assert (p.k1, p.k2, p.k2p, p.k3, p.k3p) == (1e9, 2e9, 5e8, 1e8, 2e8)


def test_rotation_invariance_of_blocks(rng):
    Q = random_orthogonal(rng, 3)
    n = Q[:, 0]
    p = quasicrystal_params(chi=0.2 * GPA, phi=19)
    K1, _, _ = build_K123("dissipative", p, p.derived, WaveConfig.along(n))
    K1e, _, _ = build_K123("dissipative", p, p.derived, WaveConfig())
    # rotating e1 onto n conjugates every block
    R = Q if np.allclose(Q[:, 0], n) else None
    np.testing.assert_allclose(R @ K1e @ R.T, K1, atol=1e-9 * np.abs(K1).max())
