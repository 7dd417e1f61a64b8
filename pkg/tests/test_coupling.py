import math

import numpy as np
import pytest

from asqsim.constants import GHZ_NH, TWO_PI
from asqsim.core import DeviceParams, FluxPoint, SpinConfig, SPIN_CONFIGS
from asqsim.coupling import (
    SingularCouplingError,
    branch_energies,
    dressed_splitting,
    j_analytic,
    j_current_product,
    j_current_product_from_params,
    j_flux_sweep,
    j_numeric,
    j_vs_ljc_rows,
    total_potential,
)

# Energies of the method-comparison regime: E^sigma/h = (0.82, 0.63) GHz,
# E^I/h = (0.2, 0.3) GHz, stiff coupling junction at 10 GHz.
COMPARISON = DeviceParams(ej_i_1=0.2, ej_i_2=0.3, ej_s_1=0.82, ej_s_2=0.63, ej_c=10.0)


def brute_force_branches(params, fluxes, n=100_000):
    """Independent oracle: dense-grid minimum of the potential per branch."""
    phi = np.linspace(0.0, TWO_PI, n, endpoint=False)
    return {cfg: float(total_potential(params, cfg, fluxes, phi).min())
            for cfg in SPIN_CONFIGS}


def brute_force_j_mhz(params, fluxes, n=100_000):
    e = brute_force_branches(params, fluxes, n)
    return 0.5 * (e[SpinConfig(-1, -1)] - e[SpinConfig(-1, 1)]
                  - e[SpinConfig(1, -1)] + e[SpinConfig(1, 1)]) * 1e3


class TestTotalPotential:
    def test_empty_circuit(self):
        p = DeviceParams(ej_i_1=0, ej_i_2=0, ej_s_1=0, ej_s_2=0, ej_c=0)
        for phi in (0.0, 1.0, 4.2):
            assert total_potential(p, SpinConfig(1, 1), FluxPoint(0.3, 0.7), phi) == 0.0

    def test_single_junction_minimum(self):
        p = DeviceParams(ej_i_1=0, ej_i_2=0, ej_s_1=0, ej_s_2=0, ej_c=10.0)
        assert total_potential(p, SpinConfig(1, -1), FluxPoint(0, 0), 0.0) == pytest.approx(-10.0)

    def test_term_by_term(self):
        # spins (+1, +1), fluxes (0, 0.5), phi = 0:
        # -E^I_1 + 0 + E^I_2 + 0 - E_JC = 0.1 - E_JC
        v = total_potential(COMPARISON, SpinConfig(1, 1), FluxPoint(0.0, 0.5), 0.0)
        assert v == pytest.approx(0.1 - 10.0, abs=1e-12)

    def test_array_evaluation(self):
        phi = np.linspace(0, TWO_PI, 64)
        v = total_potential(COMPARISON, SpinConfig(-1, 1), FluxPoint(0.1, 0.4), phi)
        assert v.shape == phi.shape


class TestBranchEnergies:
    def test_spin_independent(self):
        p = DeviceParams(ej_i_1=0.7, ej_i_2=0.4, ej_s_1=0, ej_s_2=0, ej_c=3.0)
        be = branch_energies(p, FluxPoint(0.2, 0.6))
        vals = list(be.e.values())
        assert max(vals) - min(vals) < 1e-12

    def test_stiff_junction_pins_phase(self):
        p = DeviceParams(ej_i_1=0.2, ej_i_2=0.3, ej_s_1=0.82, ej_s_2=0.63, ej_c=1000.0)
        be = branch_energies(p, FluxPoint(0.13, 0.57))
        bound = 2 * max(p.ej_s_1, p.ej_s_2) / p.ej_c
        for phi in be.phase_min.values():
            wrapped = min(phi, TWO_PI - phi)
            assert wrapped < bound

    def test_against_brute_force(self):
        fx = FluxPoint(0.0, 0.5)
        be = branch_energies(COMPARISON, fx)
        oracle = brute_force_branches(COMPARISON, fx)
        for cfg in SPIN_CONFIGS:
            # dense-grid minimum sits above the refined one by O(h^2)
            assert be.e[cfg] == pytest.approx(oracle[cfg], abs=1e-7)
            assert be.e[cfg] <= oracle[cfg] + 1e-12

    def test_degenerate_tie_smallest_phase(self):
        p = DeviceParams(ej_i_1=0, ej_i_2=0, ej_s_1=0, ej_s_2=0, ej_c=0)
        be = branch_energies(p, FluxPoint(0, 0))
        for phi in be.phase_min.values():
            assert phi == 0.0


class TestJNumeric:
    def test_decoupled_qubit(self):
        p = DeviceParams(ej_i_1=0.2, ej_i_2=0.3, ej_s_1=0.0, ej_s_2=0.63, ej_c=10.0)
        assert abs(j_numeric(p, FluxPoint(0.1, 0.3)).j_mhz) < 1e-9

    def test_comparison_point(self):
        # frozen against the brute-force oracle below
        res = j_numeric(COMPARISON, FluxPoint(0.0, 0.5))
        assert res.j_mhz == pytest.approx(-103.800354, abs=1e-4)
        assert res.j_mhz == pytest.approx(brute_force_j_mhz(COMPARISON, FluxPoint(0.0, 0.5)),
                                          abs=1e-3)

    def test_zero_at_frequency_extremum(self):
        p_exact = DeviceParams(ej_i_1=0, ej_i_2=0, ej_s_1=0.82, ej_s_2=0.63, ej_c=10.0)
        for f2 in (0.0, 0.25, 0.5):
            assert abs(j_numeric(p_exact, FluxPoint(0.25, f2)).j_mhz) < 1e-3
        p_stiff = DeviceParams(ej_i_1=0, ej_i_2=0, ej_s_1=0.82, ej_s_2=0.63, ej_c=100.0)
        assert abs(j_numeric(p_stiff, FluxPoint(0.25, 0.37)).j_mhz) < 1e-3

    def test_qubit_exchange_symmetry(self):
        p = DeviceParams(ej_i_1=0.9, ej_i_2=0.35, ej_s_1=0.5, ej_s_2=1.1, ej_c=6.0,
                         skew_1=-0.25)
        for f1, f2 in [(0.12, 0.41), (0.77, 0.06), (0.5, 0.93)]:
            a = j_numeric(p, FluxPoint(f1, f2)).j_mhz
            b = j_numeric(p.swapped(), FluxPoint(f2, f1)).j_mhz
            assert a == pytest.approx(b, abs=1e-6)

    def test_flux_periodicity(self):
        for f1, f2 in [(0.2, 0.7), (0.45, 0.05)]:
            a = j_numeric(COMPARISON, FluxPoint(f1, f2)).j_mhz
            b = j_numeric(COMPARISON, FluxPoint(f1 + 1.0, f2)).j_mhz
            c = j_numeric(COMPARISON, FluxPoint(f1, f2 - 1.0)).j_mhz
            assert b == pytest.approx(a, abs=1e-6)
            assert c == pytest.approx(a, abs=1e-6)


class TestJAnalytic:
    def test_comparison_point_closed_form(self):
        # E~ = 0.2 - 0.3 + 10 = 9.9, phases (0, pi):
        # |J| = 2*0.82*0.63/9.9 GHz, sign matching the numeric method
        res = j_analytic(COMPARISON, FluxPoint(0.0, 0.5))
        assert res.j_mhz == pytest.approx(-2 * 0.82 * 0.63 / 9.9 * 1e3, rel=1e-12)

    def test_zero_prefactor(self):
        p = DeviceParams(ej_i_1=0.2, ej_i_2=0.3, ej_s_1=0.0, ej_s_2=0.63, ej_c=10.0)
        assert j_analytic(p, FluxPoint(0.3, 0.8)).j_mhz == 0.0

    def test_zero_at_quarter_flux(self):
        p = DeviceParams(ej_i_1=0, ej_i_2=0, ej_s_1=0.82, ej_s_2=0.63, ej_c=10.0)
        assert j_analytic(p, FluxPoint(0.25, 0.4)).j_mhz == pytest.approx(0.0, abs=1e-9)

    def test_singular(self):
        p = DeviceParams(ej_i_1=5.0, ej_i_2=0.0, ej_s_1=0.5, ej_s_2=0.5, ej_c=5.0)
        with pytest.raises(SingularCouplingError):
            j_analytic(p, FluxPoint(0.5, 0.0))

    def test_agreement_with_numeric(self):
        # stiff-regime agreement, spot checks off the acceptance grid
        for f1, f2 in [(0.1, 0.6), (0.33, 0.9), (0.71, 0.2)]:
            ja = j_analytic(COMPARISON, FluxPoint(f1, f2)).j_mhz
            jn = j_numeric(COMPARISON, FluxPoint(f1, f2)).j_mhz
            assert abs(ja - jn) <= 0.02 * max(abs(jn), 1.0)


class TestJCurrentProduct:
    def test_alt_setpoint_value(self):
        res = j_current_product(22.3, 176.9, 1.7, -5.6)
        assert res.j_mhz == pytest.approx(-142.26, abs=0.1)
        # scaled by the fitted 0.79 this brackets the measured -110.0 +- 3.2
        assert 0.79 * res.j_mhz == pytest.approx(-112.4, abs=0.1)

    def test_main_setpoint_value(self):
        res = j_current_product(8.4, 102.0, 2.16, -2.52)
        assert res.j_mhz == pytest.approx(-31.88, abs=0.05)

    def test_zero_current(self):
        assert j_current_product(10.0, 100.0, 0.0, -3.0).j_mhz == 0.0

    def test_divergent_lasq_degrades_to_ljc(self):
        res = j_current_product(10.0, math.inf, 1.0, 1.0)
        assert res.diagnostics["m_nh"] == 10.0

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            j_current_product(10.0, -50.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            j_current_product(0.0, 50.0, 1.0, 1.0)


class TestDressedSplitting:
    def test_bare_limit_orientation(self):
        # very stiff coupling junction: splitting -> +2 E^sigma sin(2 pi flux)
        p = DeviceParams(ej_i_1=0.2, ej_i_2=0.3, ej_s_1=0.82, ej_s_2=0.63, ej_c=5000.0)
        for flux in (0.1, 0.37, 0.81):
            f1 = dressed_splitting(p, FluxPoint(flux, 0.0), 1)
            assert f1 == pytest.approx(2 * 0.82 * math.sin(TWO_PI * flux), abs=2e-3)
            f2 = dressed_splitting(p, FluxPoint(0.0, flux), 2)
            assert f2 == pytest.approx(2 * 0.63 * math.sin(TWO_PI * flux), abs=2e-3)


class TestJFluxSweep:
    def test_single_point(self):
        rows = j_flux_sweep(COMPARISON, [0.1], 0.0, methods=("analytic", "numeric"))
        assert len(rows) == 2
        assert {r["method"] for r in rows} == {"analytic", "numeric"}

    def test_periodic_endpoints(self):
        grid = np.linspace(0.0, 1.0, 41)
        rows = j_flux_sweep(COMPARISON, grid, 0.0, methods=("numeric",))
        assert rows[0]["j_mhz"] == pytest.approx(rows[-1]["j_mhz"], abs=1e-6)

    def test_method_agreement_columns(self):
        grid = np.linspace(0.0, 1.0, 11)
        rows = j_flux_sweep(COMPARISON, grid, 0.5, methods=("analytic", "numeric"))
        ja = [r["j_mhz"] for r in rows if r["method"] == "analytic"]
        jn = [r["j_mhz"] for r in rows if r["method"] == "numeric"]
        scale = max(abs(v) for v in jn)
        assert all(abs(a - n) <= 0.02 * scale for a, n in zip(ja, jn))

    def test_error_annotation_without_abort(self):
        # near (0, 0.5) the parallel ASQ inductance is negative: the
        # current-product rows carry errors, the sweep still completes
        rows = j_flux_sweep(COMPARISON, [0.0, 0.1], 0.5,
                            methods=("numeric", "current_product"))
        cp = [r for r in rows if r["method"] == "current_product"]
        assert all(r["error"] for r in cp)
        assert all(r["j_mhz"] is None for r in cp)
        num = [r for r in rows if r["method"] == "numeric"]
        assert all(not r["error"] for r in num)

    def test_threads_preserve_order(self):
        grid = np.linspace(0.0, 1.0, 9)
        a = j_flux_sweep(COMPARISON, grid, 0.0, methods=("analytic",), threads=1)
        b = j_flux_sweep(COMPARISON, grid, 0.0, methods=("analytic",), threads=4)
        assert a == b

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError):
            j_flux_sweep(COMPARISON, [], 0.0)


class TestJVsLjc:
    def test_single_point(self):
        p = DeviceParams(ej_i_1=1.79, ej_i_2=0.53, ej_s_1=0.66, ej_s_2=1.3, ej_c=GHZ_NH / 22.3)
        rows = j_vs_ljc_rows(p, FluxPoint(1.1, 0.48), [22.3], i1_mode="fixed",
                             i1_na=1.7, i2_na=-5.6, lasq_nh=176.9)
        assert len(rows) == 1
        assert rows[0]["j_current_product_mhz"] == pytest.approx(-142.26, abs=0.1)

    def test_scale_applied(self):
        p = DeviceParams(ej_i_1=1.79, ej_i_2=0.53, ej_s_1=0.66, ej_s_2=1.3, ej_c=GHZ_NH / 22.3)
        rows = j_vs_ljc_rows(p, FluxPoint(1.1, 0.48), [22.3], i1_mode="fixed",
                             i1_na=1.7, i2_na=-5.6, lasq_nh=176.9, scale=0.79)
        assert rows[0]["j_current_product_mhz"] == pytest.approx(-112.4, abs=0.1)

    def test_monotone_increase_and_saturation(self):
        # |J| grows with L_JC and saturates toward the L_ASQ-limited value
        p = DeviceParams(ej_i_1=1.79, ej_i_2=0.53, ej_s_1=0.66, ej_s_2=1.3, ej_c=1.0)
        fx = FluxPoint(1.1, 0.48)
        grid = [1.0, 5.0, 20.0, 80.0, 320.0, 1280.0]
        rows = j_vs_ljc_rows(p, fx, grid, i1_mode="fixed")
        mags = [abs(r["j_current_product_mhz"]) for r in rows]
        assert all(b > a for a, b in zip(mags, mags[1:]))
        from asqsim.core import l_asq
        from asqsim.coupling import bare_cpr
        from asqsim.core import spin_current
        la = l_asq(p, fx)
        i1 = spin_current(bare_cpr(p, 1), fx.flux_1)
        i2 = spin_current(bare_cpr(p, 2), fx.flux_2)
        limit = abs(j_current_product(1e9, la, i1, i2).j_mhz)
        assert mags[-1] < limit
        assert mags[-1] > 0.75 * limit

    def test_per_point_tracks_numeric_in_stiff_regime(self):
        p = DeviceParams(ej_i_1=0.2, ej_i_2=0.3, ej_s_1=0.82, ej_s_2=0.63, ej_c=1.0)
        rows = j_vs_ljc_rows(p, FluxPoint(0.1, 0.0), [1.0, 2.0, 4.0], i1_mode="per_point")
        for r in rows:
            assert r["j_current_product_mhz"] == pytest.approx(r["j_numeric_mhz"], rel=0.05)


def closed_form_j_mhz(p, fx):
    """Exact oracle for unskewed circuits: each branch potential is a pure
    first harmonic a cos(phi) + b sin(phi) with minimum -sqrt(a^2 + b^2)."""
    ph1, ph2 = 2 * math.pi * fx.flux_1, 2 * math.pi * fx.flux_2
    e = {}
    for cfg in SPIN_CONFIGS:
        a = (-p.ej_i_1 * math.cos(ph1) - p.ej_i_2 * math.cos(ph2) - p.ej_c
             - cfg.s1 * p.ej_s_1 * math.sin(ph1) + cfg.s2 * p.ej_s_2 * math.sin(ph2))
        b = (-p.ej_i_1 * math.sin(ph1) - p.ej_i_2 * math.sin(ph2)
             + cfg.s1 * p.ej_s_1 * math.cos(ph1) - cfg.s2 * p.ej_s_2 * math.cos(ph2))
        e[cfg] = -math.hypot(a, b)
    return 0.5 * (e[SpinConfig(-1, -1)] - e[SpinConfig(-1, 1)]
                  - e[SpinConfig(1, -1)] + e[SpinConfig(1, 1)]) * 1e3


def test_j_numeric_matches_closed_form():
    rng = np.random.default_rng(99)
    for _ in range(12):
        p = DeviceParams(ej_i_1=rng.uniform(0, 3), ej_i_2=rng.uniform(0, 3),
                         ej_s_1=rng.uniform(0, 1.5), ej_s_2=rng.uniform(0, 1.5),
                         ej_c=rng.uniform(1, 30))
        fx = FluxPoint(rng.uniform(-1, 1), rng.uniform(-1, 1))
        assert j_numeric(p, fx).j_mhz == pytest.approx(closed_form_j_mhz(p, fx), abs=1e-6)


def test_convenience_composition_matches_manual():
    p = DeviceParams(ej_i_1=0.2, ej_i_2=0.3, ej_s_1=0.82, ej_s_2=0.63, ej_c=40.0)
    fx = FluxPoint(0.1, 0.0)
    from asqsim.core import l_asq, spin_current
    from asqsim.coupling import bare_cpr
    manual = j_current_product(GHZ_NH / 40.0, l_asq(p, fx),
                               spin_current(bare_cpr(p, 1), 0.1),
                               spin_current(bare_cpr(p, 2), 0.0))
    auto = j_current_product_from_params(p, fx)
    assert auto.j_mhz == pytest.approx(manual.j_mhz, rel=1e-12)
