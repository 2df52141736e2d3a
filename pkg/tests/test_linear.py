import math

import numpy as np
import pytest
from scipy.special import zeta

from fermitherm.entropy import make_power_entropy
from fermitherm.linear import (
    Regime,
    UnboundedModelError,
    UnreachableChargeError,
    guaranteed_existence_qmax,
    hydrogen_level,
    linear_ground_free_energy,
    linear_report,
    mu_of_q,
    q_max_lin,
    q_of_mu,
    regime_classify,
)


def test_hydrogen_level_values():
    lv = hydrogen_level(2.0, 1)
    assert (lv.lambda_j, lv.multiplicity) == (-1.0, 1)
    lv = hydrogen_level(2.0, 2)
    assert (lv.lambda_j, lv.multiplicity) == (-0.25, 4)
    lv = hydrogen_level(1.0, 3)
    assert lv.lambda_j == pytest.approx(-1.0 / 36.0, abs=1e-18)
    assert lv.multiplicity == 9


def test_hydrogen_level_errors():
    with pytest.raises(ValueError):
        hydrogen_level(1.0, 0)
    with pytest.raises(ValueError):
        hydrogen_level(0.0, 1)


def test_regime_table():
    assert regime_classify(1.4) is Regime.FINITE_QMAX
    assert regime_classify(2.0) is Regime.INFINITE_QMAX
    assert regime_classify(5.0 / 3.0) is Regime.INFINITE_QMAX
    assert regime_classify(3.0) is Regime.UNBOUNDED
    assert regime_classify(4.5) is Regime.UNBOUNDED


def test_ground_free_energy_m2():
    spec = make_power_entropy(2.0)
    res = linear_ground_free_energy(spec, Z=2.0, T=1.0)
    assert res.value == pytest.approx(-math.pi**2 / 24.0, abs=1e-9)
    assert res.value < 0.0
    assert res.tail_bound < 1e-9


def test_ground_free_energy_m15():
    # beta*(lam) = -0.5*(-lam/1.5)**3 on the window, so the term is
    # j^2 * (-1/(432 j^6)) and the sum is -zeta(4)/432.
    spec = make_power_entropy(1.5)
    res = linear_ground_free_energy(spec, Z=1.0, T=1.0)
    assert res.value == pytest.approx(-(math.pi**4 / 90.0) / 432.0, rel=1e-9)


def test_ground_free_energy_vanishing_charge():
    spec = make_power_entropy(2.0)
    res = linear_ground_free_energy(spec, Z=1e-4, T=1.0)
    assert -1e-9 < res.value < 0.0


def test_ground_free_energy_temperature_scaling():
    # per level the minimum of lam*nu + T*beta(nu) is T*beta*(lam/T); for
    # m=2 with no saturated level this collapses to -Z^4 zeta(2)/(64 T)
    spec = make_power_entropy(2.0)
    for Z, T in ((2.0, 2.0), (1.0, 0.5), (3.0, 4.0)):
        assert T > Z * Z / 8.0  # keeps every level in the closed-form window
        res = linear_ground_free_energy(spec, Z=Z, T=T)
        closed = -(Z**4) * (math.pi**2 / 6.0) / (64.0 * T)
        assert res.value == pytest.approx(closed, rel=1e-9)


def test_ground_level_terms_match_scalar_minimization():
    # independent oracle: each level's contribution is the scalar minimum of
    # nu -> lam*nu + T*beta(nu), found by golden section (cancellation-free
    # comparison, see test_entropy.golden_argmin for the rationale)
    import math as _math

    spec = make_power_entropy(1.7)
    Z, T, m = 1.0, 1.5, 1.7
    invphi = (_math.sqrt(5.0) - 1.0) / 2.0
    for j in (1, 2, 5, 12, 40):
        lam = -Z * Z / (4.0 * j * j)
        a, b = 0.0, 1.0
        for _ in range(110):
            c = b - invphi * (b - a)
            d = a + invphi * (b - a)
            pow_diff = d**m * np.expm1(m * np.log1p((c - d) / d)) if d > 0 else 0.0
            if lam * (c - d) + T * pow_diff < 0.0:
                b = d
            else:
                a = c
        nu_star = 0.5 * (a + b)
        oracle = lam * nu_star + T * nu_star**m
        term = T * float(spec.beta_star(lam / T))
        assert term == pytest.approx(oracle, abs=1e-13)


def test_ground_free_energy_unbounded():
    spec = make_power_entropy(3.0)
    with pytest.raises(UnboundedModelError):
        linear_ground_free_energy(spec, Z=1.0, T=1.0)


def test_q_max_lin_m15():
    spec = make_power_entropy(1.5)
    res = q_max_lin(spec, Z=1.0, T=1.0)
    assert res.value == pytest.approx((math.pi**2 / 6.0) / 36.0, abs=1e-9)


def test_q_max_lin_infinite_for_m2():
    spec = make_power_entropy(2.0)
    assert math.isinf(q_max_lin(spec, Z=1.0, T=1.0).value)


def test_q_max_lin_vanishes_at_high_temperature():
    spec = make_power_entropy(1.5)
    assert q_max_lin(spec, Z=1.0, T=1e8).value < 1e-10


def test_q_max_lin_closed_form_against_zeta():
    # For T > Z^2/(4m) no level saturates and the sum factorizes into
    # (Z^2/(4Tm))^(1/(m-1)) * zeta(2/(m-1) - 2).
    for m, Z, T in ((1.5, 1.0, 1.0), (1.4, 1.0, 1.0), (1.6, 2.0, 3.0)):
        spec = make_power_entropy(m)
        assert T > Z * Z / (4.0 * m)
        s = 2.0 / (m - 1.0) - 2.0
        closed = (Z * Z / (4.0 * T * m)) ** (1.0 / (m - 1.0)) * zeta(s)
        assert q_max_lin(spec, Z, T).value == pytest.approx(closed, rel=1e-9)


def test_q_of_mu_single_level():
    spec = make_power_entropy(2.0)
    # only j=1 sits below mu = -0.2; g(-0.05) = 0.025
    assert q_of_mu(spec, 1.0, 1.0, -0.2) == pytest.approx(0.025, abs=1e-15)


def test_q_of_mu_zero_when_mu_below_spectrum():
    spec = make_power_entropy(2.0)
    assert q_of_mu(spec, 1.0, 1.0, -2.0) == 0.0


def test_q_of_mu_approaches_q_max_lin():
    spec = make_power_entropy(1.5)
    qmax = q_max_lin(spec, 1.0, 1.0).value
    assert q_of_mu(spec, 1.0, 1.0, -1e-10) == pytest.approx(qmax, abs=1e-4)


def test_q_of_mu_nondecreasing():
    spec = make_power_entropy(1.5)
    mus = np.linspace(-1.0, -1e-6, 60)
    vals = [q_of_mu(spec, 1.0, 1.0, mu) for mu in mus]
    assert all(b >= a - 1e-14 for a, b in zip(vals, vals[1:]))


def test_mu_of_q_inverts_example():
    spec = make_power_entropy(2.0)
    assert mu_of_q(spec, 1.0, 1.0, 0.025) == pytest.approx(-0.2, abs=1e-9)


def test_mu_of_q_zero_sentinel():
    spec = make_power_entropy(2.0)
    assert mu_of_q(spec, 1.0, 1.0, 0.0) == -math.inf


def test_mu_of_q_unreachable():
    spec = make_power_entropy(1.5)
    with pytest.raises(UnreachableChargeError):
        mu_of_q(spec, 1.0, 1.0, 0.1)  # above q_max_lin ~ 0.0457


def test_mu_of_q_roundtrip():
    spec = make_power_entropy(1.5)
    rng = np.random.default_rng(2)
    for mu in rng.uniform(-0.3, -0.02, size=8):
        q = q_of_mu(spec, 1.0, 1.0, mu)
        if q == 0.0:
            continue
        assert mu_of_q(spec, 1.0, 1.0, q) == pytest.approx(mu, abs=1e-8)


def test_guaranteed_qmax_m2():
    # closed form: rhs = (1-q)^2 zeta(2)/8, crossing of q = c(1-q)^2
    spec = make_power_entropy(2.0)
    c = (math.pi**2 / 6.0) / 8.0
    root = (1.0 + 2.0 * c - math.sqrt(4.0 * c + 1.0)) / (2.0 * c)
    got = guaranteed_existence_qmax(spec, 1.0, 1.0)
    assert got == pytest.approx(root, abs=1e-10)
    assert got == pytest.approx(0.148932, abs=5e-6)


def test_guaranteed_qmax_shrinks_with_temperature():
    spec = make_power_entropy(2.0)
    q1 = guaranteed_existence_qmax(spec, 1.0, 1.0)
    q2 = guaranteed_existence_qmax(spec, 1.0, 100.0)
    q3 = guaranteed_existence_qmax(spec, 1.0, 10000.0)
    assert q1 > q2 > q3
    assert q3 < 1e-3


def test_guaranteed_qmax_capped_by_Z():
    spec = make_power_entropy(2.0)
    for Z, T in ((1.0, 1.0), (0.1, 0.01), (5.0, 0.2)):
        assert guaranteed_existence_qmax(spec, Z, T) <= Z


def test_guaranteed_qmax_below_q_max_lin_when_finite():
    spec = make_power_entropy(1.5)
    q_g = guaranteed_existence_qmax(spec, 1.0, 1.0)
    q_m = q_max_lin(spec, 1.0, 1.0).value
    assert q_g <= q_m


def test_linear_report_composes():
    spec = make_power_entropy(2.0)
    rep = linear_report(spec, 1.0, 1.0)
    assert rep.regime is Regime.INFINITE_QMAX
    assert math.isinf(rep.q_max_lin.value)
    assert rep.ground_free_energy.value < 0.0
    assert rep.q_guaranteed == pytest.approx(0.148932, abs=5e-6)


def test_linear_report_unbounded_regime():
    spec = make_power_entropy(3.5)
    rep = linear_report(spec, 1.0, 1.0)
    assert rep.regime is Regime.UNBOUNDED
    assert rep.ground_free_energy.value == -math.inf
