import math
from dataclasses import replace

import numpy as np
import pytest

from asqsim.core import DeviceParams, FluxPoint, SpinConfig, SPIN_CONFIGS
from asqsim.coupling import total_potential
from asqsim.transmon import (
    CalibrationRangeError,
    ChargeBasisConfig,
    ConvergenceError,
    ejc_from_ft,
    potential_harmonics,
    spectrum_sweep,
    transmon_spectrum,
    _charge_hamiltonian,
)


def single_junction(ejc, ec):
    return DeviceParams(ej_i_1=0, ej_i_2=0, ej_s_1=0, ej_s_2=0, ej_c=ejc, e_c=ec)


SETPOINT = DeviceParams(ej_i_1=2.29, ej_i_2=0.0, ej_s_1=0.82, ej_s_2=0.0,
                        ej_c=19.95, e_c=0.2)


class TestChargeBasisConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            ChargeBasisConfig(n_max=5)
        with pytest.raises(ValueError):
            ChargeBasisConfig(n_max=10, n_levels=22)


class TestHarmonics:
    def test_reconstructs_potential_unskewed(self):
        p = DeviceParams(ej_i_1=0.7, ej_i_2=0.4, ej_s_1=0.9, ej_s_2=0.3, ej_c=5.0)
        fx = FluxPoint(0.17, 0.62)
        for cfg in SPIN_CONFIGS:
            a, b = potential_harmonics(p, cfg, fx)
            phi = np.linspace(0, 2 * np.pi, 257)
            recon = sum(a[m - 1] * np.cos(m * phi) + b[m - 1] * np.sin(m * phi)
                        for m in range(1, len(a) + 1))
            assert np.max(np.abs(recon - total_potential(p, cfg, fx, phi))) < 1e-12

    def test_reconstructs_potential_skewed(self):
        p = DeviceParams(ej_i_1=0.7, ej_i_2=0.4, ej_s_1=0.9, ej_s_2=0.3, ej_c=5.0,
                         skew_1=-0.39, skew_2=0.45)
        fx = FluxPoint(0.17, 0.62)
        for cfg in SPIN_CONFIGS:
            a, b = potential_harmonics(p, cfg, fx)
            phi = np.linspace(0, 2 * np.pi, 257)
            recon = sum(a[m - 1] * np.cos(m * phi) + b[m - 1] * np.sin(m * phi)
                        for m in range(1, len(a) + 1))
            # harmonic-8 truncation: error below 1e-6 of the spin amplitudes
            tol = 1e-6 * 2 * (p.ej_s_1 + p.ej_s_2)
            assert np.max(np.abs(recon - total_potential(p, cfg, fx, phi))) < tol


class TestTransmonSpectrum:
    def test_single_junction_asymptotics(self):
        spec = transmon_spectrum(single_junction(19.95, 0.2), FluxPoint(0, 0))
        target = math.sqrt(8 * 19.95 * 0.2) - 0.2
        for cfg in SPIN_CONFIGS:
            assert abs(spec.f01[cfg] - target) / target < 0.01

    def test_single_junction_flux_independent(self):
        p = single_junction(19.95, 0.2)
        s1 = transmon_spectrum(p, FluxPoint(0.0, 0.0))
        s2 = transmon_spectrum(p, FluxPoint(0.31, 0.77))
        for cfg in SPIN_CONFIGS:
            assert np.max(np.abs(s1.branches[cfg] - s2.branches[cfg])) < 1e-9

    def test_hermitian_construction(self):
        p = DeviceParams(ej_i_1=1.1, ej_i_2=0.4, ej_s_1=0.8, ej_s_2=0.6, ej_c=8.0,
                         e_c=0.2, skew_1=-0.39)
        a, b = potential_harmonics(p, SpinConfig(1, -1), FluxPoint(0.13, 0.49))
        h = _charge_hamiltonian(p.e_c, a, b, 25)
        assert np.array_equal(h, h.conj().T)

    def test_branches_coincide_without_spin_terms(self):
        p = DeviceParams(ej_i_1=1.1, ej_i_2=0.4, ej_s_1=0, ej_s_2=0, ej_c=8.0, e_c=0.2)
        spec = transmon_spectrum(p, FluxPoint(0.2, 0.6))
        ref = spec.branches[SpinConfig(1, 1)]
        for cfg in SPIN_CONFIGS:
            assert np.max(np.abs(spec.branches[cfg] - ref)) < 1e-10

    def test_spin_splitting_matches_perturbation_theory(self):
        # ASQ1 at its setpoint energies, ASQ2 closed, quarter flux quantum.
        # Oracle: first-order shift of f01 from the spin potential, using the
        # unperturbed circuit's eigenvectors (built independently here).
        p = SETPOINT
        fx = FluxPoint(0.25, 0.0)
        cfg = ChargeBasisConfig(n_max=40, n_levels=2)
        spec = transmon_spectrum(p, fx, cfg)
        split = abs(spec.f01[SpinConfig(1, 1)] - spec.f01[SpinConfig(-1, 1)])

        n_max = 40
        dim = 2 * n_max + 1
        n = np.arange(-n_max, n_max + 1, dtype=float)
        idx = np.arange(dim - 1)
        h0 = np.zeros((dim, dim), dtype=complex)
        h0[np.diag_indices(dim)] = 4 * p.e_c * n * n
        # -E^I_1 cos(pi/2 - phi) = -E^I_1 sin(phi); -E_JC cos(phi)
        h0[idx, idx + 1] += -p.ej_c / 2 - p.ej_i_1 * 0.5j
        h0[idx + 1, idx] += -p.ej_c / 2 + p.ej_i_1 * 0.5j
        w, v = np.linalg.eigh(h0)
        # spin perturbation at phi1 = pi/2: s1 E^sigma_1 sin(phi - pi/2) = -s1 E^sigma_1 cos(phi)
        cos_op = np.zeros((dim, dim), dtype=complex)
        cos_op[idx, idx + 1] = 0.5
        cos_op[idx + 1, idx] = 0.5
        shift = [np.real(v[:, k].conj() @ cos_op @ v[:, k]) for k in (0, 1)]
        split_pert = 2 * p.ej_s_1 * abs(shift[1] - shift[0])
        assert split == pytest.approx(split_pert, rel=0.10)

    def test_convergence_error(self):
        p = single_junction(2000.0, 0.02)
        with pytest.raises(ConvergenceError):
            transmon_spectrum(p, FluxPoint(0, 0), ChargeBasisConfig(n_max=10, n_levels=2))

    def test_cutoff_stability(self):
        p = DeviceParams(ej_i_1=2.29, ej_i_2=0.45, ej_s_1=0.82, ej_s_2=0.63,
                         ej_c=19.95, e_c=0.2)
        fx = FluxPoint(0.2, 0.7)
        small = transmon_spectrum(p, fx, ChargeBasisConfig(n_max=40, n_levels=4))
        big = transmon_spectrum(p, fx, ChargeBasisConfig(n_max=80, n_levels=4))
        for cfg in SPIN_CONFIGS:
            assert np.max(np.abs(small.branches[cfg] - big.branches[cfg])) < 1e-6

    def test_heavy_transmon_anharmonicity_trend(self):
        # the anharmonicity approaches -E_c from below as E_J/E_c grows
        devs = []
        for ratio in (50, 200, 800):
            spec = transmon_spectrum(single_junction(ratio * 0.2, 0.2), FluxPoint(0, 0),
                                     ChargeBasisConfig(n_max=60, n_levels=3))
            lev = spec.branches[SpinConfig(1, 1)]
            anh = (lev[2] - lev[1]) - (lev[1] - lev[0])
            devs.append(abs(anh + 0.2) / 0.2)
        assert devs[0] > devs[1] > devs[2]
        assert devs[2] < 0.05

    def test_phase_grid_cross_check(self):
        # finite-difference Laplacian on a periodic phase grid reproduces f01
        p = DeviceParams(ej_i_1=1.1, ej_i_2=0.4, ej_s_1=0.8, ej_s_2=0.6, ej_c=12.0,
                         e_c=0.2, skew_1=-0.3)
        fx = FluxPoint(0.13, 0.57)
        cfgspin = SpinConfig(1, -1)
        spec = transmon_spectrum(p, fx, ChargeBasisConfig(n_max=40, n_levels=2))
        npts = 2048
        phi = np.linspace(0, 2 * np.pi, npts, endpoint=False)
        dphi = phi[1] - phi[0]
        v = total_potential(p, cfgspin, fx, phi)
        main = np.full(npts, 8 * p.e_c / dphi**2) + v
        off = np.full(npts - 1, -4 * p.e_c / dphi**2)
        h = np.diag(main) + np.diag(off, 1) + np.diag(off, -1)
        h[0, -1] = h[-1, 0] = -4 * p.e_c / dphi**2
        w = np.linalg.eigvalsh(h)
        f01_grid = w[1] - w[0]
        assert spec.f01[cfgspin] == pytest.approx(f01_grid, rel=1e-3)


class TestEjcCalibration:
    def test_inverts_asymptotic_regime(self):
        p = single_junction(1.0, 0.2)
        ejc = ejc_from_ft(5.45, p)
        assert abs(ejc - 19.9) / 19.9 < 0.02

    def test_round_trip(self):
        p = single_junction(1.0, 0.2)
        for target in (3.0, 5.45, 8.0):
            ejc = ejc_from_ft(target, p)
            spec = transmon_spectrum(replace(p, ej_c=ejc), FluxPoint(0, 0),
                                     ChargeBasisConfig(n_max=40, n_levels=2),
                                     check_convergence=False)
            assert spec.f01[SpinConfig(1, 1)] == pytest.approx(target, abs=1e-4)

    def test_monotone(self):
        p = single_junction(1.0, 0.2)
        assert ejc_from_ft(4.0, p) < ejc_from_ft(6.0, p)

    def test_out_of_range(self):
        p = single_junction(1.0, 0.2)
        with pytest.raises(CalibrationRangeError):
            ejc_from_ft(50.0, p)

    def test_requires_closed_asqs(self):
        p = DeviceParams(ej_i_1=1.0, ej_i_2=0, ej_s_1=0, ej_s_2=0, ej_c=1.0, e_c=0.2)
        with pytest.raises(ValueError):
            ejc_from_ft(5.0, p)


def test_spectrum_sweep_rows():
    p = DeviceParams(ej_i_1=2.29, ej_i_2=0.0, ej_s_1=0.82, ej_s_2=0.0, ej_c=19.95, e_c=0.2)
    rows = spectrum_sweep(p, [0.0, 0.25], [0.0], ChargeBasisConfig(n_max=40, n_levels=3))
    assert len(rows) == 2 * 1 * 4 * 3
    assert {r["spin_config"] for r in rows} == {"dd", "du", "ud", "uu"}
    ground = [r for r in rows if r["level"] == 0]
    assert all(r["f_ghz"] == 0.0 for r in ground)
