"""Transmon spectra of the three-junction circuit, per spin branch.

The island charging energy is added to the double-SQUID potential and the
Hamiltonian H = 4 E_c n^2 + V(phi) is diagonalized in the charge basis
(Fourier dual of the phase basis; unitarily equivalent, and every harmonic
of V becomes a banded off-diagonal coupling). Skewed spin terms are
expanded in a Fourier sine series truncated at harmonic 8.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .constants import TWO_PI
from .core import DeviceParams, FluxPoint, SpinConfig, SPIN_CONFIGS, reduced_phase


MAX_HARMONIC = 8
_QUAD_POINTS = 201  # trapezoid points per harmonic coefficient
_CONV_TOL_GHZ = 1e-6


class ConvergenceError(RuntimeError):
    """Charge-basis cutoff too small for the requested spectrum."""


class CalibrationRangeError(ValueError):
    """Target transmon frequency outside the achievable E_JC bracket."""


@dataclass(frozen=True)
class ChargeBasisConfig:
    """Charge cutoff (states n in [-n_max, n_max]) and number of levels kept."""

    n_max: int = 40
    n_levels: int = 5

    def __post_init__(self):
        if self.n_max < 10:
            raise ValueError("n_max must be >= 10")
        if not 1 <= self.n_levels <= 2 * self.n_max + 1:
            raise ValueError("n_levels must fit within the charge basis")


@dataclass(frozen=True)
class TransmonSpectrum:
    """Eigenfrequencies per spin branch, relative to each branch ground state."""

    branches: dict
    f01: dict


def _sine_series(skew: float, max_harm: int = MAX_HARMONIC) -> np.ndarray:
    """Fourier sine coefficients c_m of sin(x + S sin x), m = 1..max_harm.

    Periodic trapezoid quadrature; spectrally accurate for this analytic
    integrand, truncation error < 1e-6 of the amplitude for |S| <= 0.5.
    """
    x = np.linspace(0.0, TWO_PI, _QUAD_POINTS)
    f = np.sin(x + skew * np.sin(x))
    coeffs = np.empty(max_harm)
    for m in range(1, max_harm + 1):
        coeffs[m - 1] = np.trapezoid(f * np.sin(m * x), x) / math.pi
    return coeffs


def potential_harmonics(params: DeviceParams, spins: SpinConfig, fluxes: FluxPoint):
    """Coefficients (a, b) with V(phi) = sum_m a_m cos(m phi) + b_m sin(m phi).

    Index m runs 1..MAX_HARMONIC (only m = 1 is populated when neither
    qubit is skewed). The expansion reproduces total_potential exactly for
    unskewed terms and to the sine-series truncation for skewed ones.
    """
    ph1 = reduced_phase(fluxes.flux_1)
    ph2 = reduced_phase(fluxes.flux_2)
    a = np.zeros(MAX_HARMONIC)
    b = np.zeros(MAX_HARMONIC)
    # -E^I_i cos(phi_i - phi) and the coupling junction: first harmonic only.
    a[0] += -params.ej_i_1 * math.cos(ph1) - params.ej_i_2 * math.cos(ph2) - params.ej_c
    b[0] += -params.ej_i_1 * math.sin(ph1) - params.ej_i_2 * math.sin(ph2)
    # Qubit 1 spin term: s1 E^s_1 sinshape(phi - phi1).
    if params.skew_1 == 0.0:
        c1 = np.zeros(MAX_HARMONIC)
        c1[0] = 1.0
    else:
        c1 = _sine_series(params.skew_1)
    for m in range(1, MAX_HARMONIC + 1):
        w = spins.s1 * params.ej_s_1 * c1[m - 1]
        a[m - 1] += -w * math.sin(m * ph1)
        b[m - 1] += w * math.cos(m * ph1)
    # Qubit 2 spin term: s2 E^s_2 sinshape(phi2 - phi).
    if params.skew_2 == 0.0:
        c2 = np.zeros(MAX_HARMONIC)
        c2[0] = 1.0
    else:
        c2 = _sine_series(params.skew_2)
    for m in range(1, MAX_HARMONIC + 1):
        w = spins.s2 * params.ej_s_2 * c2[m - 1]
        a[m - 1] += w * math.sin(m * ph2)
        b[m - 1] += -w * math.cos(m * ph2)
    return a, b


def _charge_hamiltonian(e_c: float, a: np.ndarray, b: np.ndarray, n_max: int) -> np.ndarray:
    """4 E_c n^2 plus harmonic couplings, in the charge basis (Hermitian)."""
    dim = 2 * n_max + 1
    n = np.arange(-n_max, n_max + 1, dtype=float)
    h = np.zeros((dim, dim), dtype=complex)
    h[np.diag_indices(dim)] = 4.0 * e_c * n * n
    for m in range(1, len(a) + 1):
        am, bm = a[m - 1], b[m - 1]
        if am == 0.0 and bm == 0.0:
            continue
        # cos(m phi) -> 1/2 on the +-m off-diagonals;
        # sin(m phi) -> -i/2 (+m) and +i/2 (-m).
        idx = np.arange(dim - m)
        h[idx, idx + m] += 0.5 * am - 0.5j * bm
        h[idx + m, idx] += 0.5 * am + 0.5j * bm
    return h


def _branch_levels(params, spins, fluxes, n_max: int, n_levels: int) -> np.ndarray:
    a, b = potential_harmonics(params, spins, fluxes)
    h = _charge_hamiltonian(params.e_c, a, b, n_max)
    w = np.linalg.eigvalsh(h)
    return w[:n_levels] - w[0]


def transmon_spectrum(params: DeviceParams, fluxes: FluxPoint,
                      cfg: ChargeBasisConfig = ChargeBasisConfig(),
                      check_convergence: bool = True) -> TransmonSpectrum:
    """Per-branch transmon levels (GHz, relative to the branch ground state).

    With check_convergence the cutoff is re-run at 1.5x n_max and every
    level must move by less than 1e-6 GHz, otherwise ConvergenceError.
    """
    branches, f01 = {}, {}
    for cfgspin in SPIN_CONFIGS:
        lev = _branch_levels(params, cfgspin, fluxes, cfg.n_max, cfg.n_levels)
        if check_convergence:
            n_big = int(math.ceil(1.5 * cfg.n_max))
            lev_big = _branch_levels(params, cfgspin, fluxes, n_big, cfg.n_levels)
            if np.max(np.abs(lev - lev_big)) >= _CONV_TOL_GHZ:
                raise ConvergenceError(
                    f"charge cutoff n_max={cfg.n_max} not converged; try n_max>={2 * cfg.n_max}"
                )
        branches[cfgspin] = lev
        f01[cfgspin] = float(lev[1]) if cfg.n_levels > 1 else float("nan")
    return TransmonSpectrum(branches=branches, f01=f01)


def ejc_from_ft(ft_target: float, params: DeviceParams,
                cfg: ChargeBasisConfig = ChargeBasisConfig(),
                bracket=(0.1, 200.0), tol_ghz: float = 1e-4) -> float:
    """Invert f01(E_JC) for the coupling-junction energy, both ASQs closed.

    Bisection on a bracket verified monotone increasing; target outside the
    achievable range raises CalibrationRangeError.
    """
    if any(getattr(params, k) != 0.0 for k in ("ej_i_1", "ej_i_2", "ej_s_1", "ej_s_2")):
        raise ValueError("E_JC calibration requires both ASQs closed (zero ASQ energies)")
    spins = SpinConfig(1, 1)
    fx = FluxPoint(0.0, 0.0)

    def f01(ejc: float) -> float:
        from dataclasses import replace
        p = replace(params, ej_c=ejc)
        lev = _branch_levels(p, spins, fx, cfg.n_max, 2)
        return float(lev[1])

    lo, hi = bracket
    probes = np.geomspace(lo, hi, 7)
    vals = [f01(e) for e in probes]
    if any(v2 <= v1 for v1, v2 in zip(vals, vals[1:])):
        raise CalibrationRangeError("f01(E_JC) not monotone on the search bracket")
    if not vals[0] <= ft_target <= vals[-1]:
        raise CalibrationRangeError(
            f"target {ft_target} GHz outside achievable range "
            f"[{vals[0]:.4f}, {vals[-1]:.4f}] GHz"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fmid = f01(mid)
        if abs(fmid - ft_target) <= tol_ghz and (hi - lo) <= 1e-6 * mid:
            return mid
        if fmid < ft_target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def spectrum_sweep(params: DeviceParams, flux1_grid, flux2_grid,
                   cfg: ChargeBasisConfig = ChargeBasisConfig(), threads: int = 1):
    """Spectrum rows over the cartesian flux grid, in grid order.

    Row schema: flux1_phi0, flux2_phi0, spin_config, level, f_ghz.
    """
    points = [(float(f1), float(f2)) for f1 in flux1_grid for f2 in flux2_grid]

    def rows_at(pt):
        f1, f2 = pt
        spec = transmon_spectrum(params, FluxPoint(f1, f2), cfg, check_convergence=False)
        out = []
        for cfgspin in SPIN_CONFIGS:
            for k, f in enumerate(spec.branches[cfgspin]):
                out.append({"flux1_phi0": f1, "flux2_phi0": f2,
                            "spin_config": cfgspin.label, "level": k, "f_ghz": float(f)})
        return out

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(rows_at, points))
    else:
        chunks = [rows_at(pt) for pt in points]
    return [row for chunk in chunks for row in chunk]
