"""Longitudinal qubit-qubit coupling strength J, computed three ways.

* j_numeric: exact minimization of the double-SQUID potential per spin
  branch, J from the branch-energy combination
  J = (E_uu - E_ud - E_du + E_dd) / 2.
* j_analytic: lowest-order perturbative expression in E^sigma/E_JC.
* j_current_product: J = M I1 I2 / 2h with M the effective mutual
  inductance (coupling junction in parallel with the ASQ inductance).

All three share the sign convention fixed by the branch-energy extraction
above: at small positive Phi1 and Phi2 near half a flux quantum J is
negative, matching the current product evaluated on positive-amplitude
sinusoidal CPRs.
"""

from __future__ import annotations

from dataclasses import dataclass
import cmath
import math

import numpy as np

from .constants import GHZ_NH, MHZ_PER_NH_NA2, TWO_PI
from .core import (
    CurrentPhaseRelation,
    DeviceParams,
    FluxPoint,
    SpinConfig,
    SPIN_CONFIGS,
    l_asq,
    reduced_phase,
    spin_current,
)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_GRID_N = 720
_PHASE_TOL = 1e-10
_TIE_TOL = 1e-12


class SingularCouplingError(ValueError):
    """Perturbative formula hit |E~| = 0."""


@dataclass(frozen=True)
class BranchEnergies:
    """Minimized branch energy (GHz) and minimizing phase per spin config."""

    e: dict
    phase_min: dict


@dataclass(frozen=True)
class CouplingResult:
    j_mhz: float
    method: str
    diagnostics: dict = None


def _sinshape(x, skew: float):
    if skew == 0.0:
        return np.sin(x)
    return np.sin(x + skew * np.sin(x))


def total_potential(params: DeviceParams, spins: SpinConfig, fluxes: FluxPoint, phase):
    """Total junction energy (GHz) of the double SQUID at phase `phase`.

    phase may be a scalar or an array. The spin-dependent terms use the
    skewed sine shape whenever the corresponding skew parameter is set.
    """
    ph1 = reduced_phase(fluxes.flux_1)
    ph2 = reduced_phase(fluxes.flux_2)
    phi = np.asarray(phase, dtype=float)
    v = (-params.ej_i_1 * np.cos(ph1 - phi)
         + spins.s1 * params.ej_s_1 * _sinshape(phi - ph1, params.skew_1)
         - params.ej_i_2 * np.cos(ph2 - phi)
         + spins.s2 * params.ej_s_2 * _sinshape(ph2 - phi, params.skew_2)
         - params.ej_c * np.cos(phi))
    if np.isscalar(phase):
        return float(v)
    return v


def _golden_section(fn, a: float, b: float, tol: float = _PHASE_TOL):
    """Golden-section minimum of fn on [a, b] to |b - a| < tol."""
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = fn(x1), fn(x2)
    while (b - a) > tol:
        if f1 < f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = fn(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = fn(x2)
    xm = 0.5 * (a + b)
    return xm, fn(xm)


def _minimize_periodic(fn):
    """Global minimum of a smooth 2pi-periodic function.

    Coarse 720-point scan, then golden-section refinement of every local
    minimum close enough to the grid minimum to plausibly win. Ties within
    1e-12 resolve to the smallest phase in [0, 2pi).
    """
    grid = np.linspace(0.0, TWO_PI, _GRID_N, endpoint=False)
    vals = fn(grid)
    vmin = vals.min()
    if vals.max() - vmin <= _TIE_TOL:  # constant potential
        return float(vals[0]), 0.0
    # Refine every grid-local minimum within one grid-cell energy swing.
    margin = max(1e-9, (vals.max() - vmin) * 1e-2)
    left = np.roll(vals, 1)
    right = np.roll(vals, -1)
    cand = np.where((vals <= left) & (vals <= right) & (vals <= vmin + margin))[0]
    if len(cand) == 0:
        cand = [int(np.argmin(vals))]
    h = TWO_PI / _GRID_N
    best_e, best_phi = math.inf, 0.0
    scalar = lambda x: float(fn(x))
    for i in cand:
        x0 = grid[i]
        phi, e = _golden_section(scalar, x0 - h, x0 + h)
        phi = phi % TWO_PI
        if e < best_e - _TIE_TOL:
            best_e, best_phi = e, phi
        elif abs(e - best_e) <= _TIE_TOL and phi < best_phi:
            best_phi = phi
    return best_e, best_phi


def branch_energies(params: DeviceParams, fluxes: FluxPoint) -> BranchEnergies:
    """Minimum of the total potential over phase, for all four spin branches."""
    e, pm = {}, {}
    for cfg in SPIN_CONFIGS:
        fn = lambda phi, cfg=cfg: total_potential(params, cfg, fluxes, phi)
        emin, phimin = _minimize_periodic(fn)
        e[cfg] = emin
        pm[cfg] = phimin
    return BranchEnergies(e=e, phase_min=pm)


def j_numeric(params: DeviceParams, fluxes: FluxPoint) -> CouplingResult:
    """Coupling strength from exact branch minimization, in MHz."""
    be = branch_energies(params, fluxes)
    e = be.e
    uu = e[SpinConfig(-1, -1)]
    ud = e[SpinConfig(-1, 1)]
    du = e[SpinConfig(1, -1)]
    dd = e[SpinConfig(1, 1)]
    j_ghz = 0.5 * (uu - ud - du + dd)
    return CouplingResult(j_mhz=j_ghz * 1e3, method="numeric",
                          diagnostics={"branch_energies": be})


def j_analytic(params: DeviceParams, fluxes: FluxPoint) -> CouplingResult:
    """Perturbative coupling strength, valid for E^sigma << E_JC, in MHz.

    J = 2 E^s_1 E^s_2 / |E~| * cos(phi_E - phi1) * cos(phi_E - phi2) with
    E~ = E^I_1 e^{i phi1} + E^I_2 e^{i phi2} + E_JC. The overall sign is
    fixed to agree with j_numeric's branch-energy convention.
    """
    ph1 = reduced_phase(fluxes.flux_1)
    ph2 = reduced_phase(fluxes.flux_2)
    et = (params.ej_i_1 * cmath.exp(1j * ph1)
          + params.ej_i_2 * cmath.exp(1j * ph2)
          + params.ej_c)
    mag = abs(et)
    scale = params.ej_i_1 + params.ej_i_2 + params.ej_c
    if mag <= 1e-12 * max(scale, 1e-300):
        raise SingularCouplingError("|E~| = 0: perturbative formula is singular")
    ph_e = cmath.phase(et)
    j_ghz = (2.0 * params.ej_s_1 * params.ej_s_2 / mag
             * math.cos(ph_e - ph1) * math.cos(ph_e - ph2))
    return CouplingResult(j_mhz=j_ghz * 1e3, method="analytic",
                          diagnostics={"e_tilde_ghz": mag, "phase_e": ph_e})


def j_current_product(l_jc: float, l_asq_nh: float, i1: float, i2: float) -> CouplingResult:
    """Coupling from the mutual-inductance current product, in MHz.

    M = L_JC L_ASQ / (L_JC + L_ASQ); a divergent (infinite) L_ASQ degrades
    M to L_JC. Negative finite L_ASQ is outside the formula's regime.
    """
    if l_jc <= 0:
        raise ValueError("coupling-junction inductance must be positive")
    if math.isinf(l_asq_nh):
        m = l_jc
    elif l_asq_nh <= 0:
        raise ValueError("non-positive finite L_ASQ: outside the mutual-inductance regime")
    else:
        m = l_jc * l_asq_nh / (l_jc + l_asq_nh)
    j = MHZ_PER_NH_NA2 * m * i1 * i2
    return CouplingResult(j_mhz=j, method="current_product",
                          diagnostics={"m_nh": m, "i1_na": i1, "i2_na": i2})


def bare_cpr(params: DeviceParams, qubit: int) -> CurrentPhaseRelation:
    """Flux-dependent part of qubit i's frequency in the stiff-junction limit.

    Positive-amplitude convention: f_i = 2 E^sigma_i sin(2 pi Phi_i), with
    the skewed shape when the qubit's skew parameter is set.
    """
    if qubit == 1:
        amp, skew = 2.0 * params.ej_s_1, params.skew_1
    elif qubit == 2:
        amp, skew = 2.0 * params.ej_s_2, params.skew_2
    else:
        raise ValueError("qubit must be 1 or 2")
    if skew != 0.0:
        return CurrentPhaseRelation.skewed(amp, skew)
    return CurrentPhaseRelation.sinusoidal(amp)


def j_current_product_from_params(params: DeviceParams, fluxes: FluxPoint) -> CouplingResult:
    """Convenience composition: spin currents from the bare CPRs, L_ASQ from
    the spin-independent energies, L_JC from E_JC."""
    i1 = float(spin_current(bare_cpr(params, 1), fluxes.flux_1))
    i2 = float(spin_current(bare_cpr(params, 2), fluxes.flux_2))
    l_jc = GHZ_NH / params.ej_c
    return j_current_product(l_jc, l_asq(params, fluxes), i1, i2)


def dressed_splitting(params: DeviceParams, fluxes: FluxPoint, qubit: int) -> float:
    """Flux-dependent spin splitting of one qubit in the full circuit (GHz).

    Branch energies include the phase backaction of the coupling junction
    and of the other qubit (held in its down state). Oriented so the
    stiff-junction limit reproduces bare_cpr's +sin convention.
    """
    be = branch_energies(params, fluxes).e
    if qubit == 1:
        return be[SpinConfig(-1, 1)] - be[SpinConfig(1, 1)]
    if qubit == 2:
        return be[SpinConfig(1, 1)] - be[SpinConfig(1, -1)]
    raise ValueError("qubit must be 1 or 2")


def dressed_spin_current(params: DeviceParams, fluxes: FluxPoint, qubit: int,
                         step: float = 1e-5) -> float:
    """Spin current from the circuit-dressed splitting, central difference."""
    from .constants import NA_PER_GHZ_SLOPE

    if qubit == 1:
        up = FluxPoint(fluxes.flux_1 + step, fluxes.flux_2)
        dn = FluxPoint(fluxes.flux_1 - step, fluxes.flux_2)
    else:
        up = FluxPoint(fluxes.flux_1, fluxes.flux_2 + step)
        dn = FluxPoint(fluxes.flux_1, fluxes.flux_2 - step)
    slope = (dressed_splitting(params, up, qubit)
             - dressed_splitting(params, dn, qubit)) / (2.0 * step)
    return NA_PER_GHZ_SLOPE * slope


METHODS = ("analytic", "numeric", "current_product")


def _sweep_point(params: DeviceParams, fx: FluxPoint, methods):
    rows = []
    for m in methods:
        row = {"flux1_phi0": fx.flux_1, "flux2_phi0": fx.flux_2,
               "method": m, "j_mhz": None, "phase_min_dd": None, "error": ""}
        try:
            if m == "numeric":
                res = j_numeric(params, fx)
                be = res.diagnostics["branch_energies"]
                row["phase_min_dd"] = be.phase_min[SpinConfig(1, 1)]
            elif m == "analytic":
                res = j_analytic(params, fx)
            else:
                res = j_current_product_from_params(params, fx)
            row["j_mhz"] = res.j_mhz
        except (ValueError, ArithmeticError) as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    return rows


def j_flux_sweep(params: DeviceParams, flux1_grid, flux2: float, methods=METHODS,
                 threads: int = 1):
    """Evaluate the requested J methods over a Phi1 grid at fixed Phi2.

    Returns a list of row dicts in grid order regardless of scheduling.
    Per-method failures are recorded in the row's 'error' field without
    aborting the sweep.
    """
    flux1_grid = [float(f) for f in flux1_grid]
    if not flux1_grid:
        raise ValueError("flux grid must be non-empty")
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}")
    points = [FluxPoint(f1, float(flux2)) for f1 in flux1_grid]
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(lambda fx: _sweep_point(params, fx, methods), points))
    else:
        chunks = [_sweep_point(params, fx, methods) for fx in points]
    return [row for chunk in chunks for row in chunk]


def j_vs_ljc_rows(params: DeviceParams, fluxes: FluxPoint, ljc_grid,
                  i1_mode: str = "per_point", i1_na: float = None, i2_na: float = None,
                  lasq_nh: float = None, scale: float = 1.0):
    """Coupling versus coupling-junction inductance, numeric and
    current-product columns side by side.

    fixed mode freezes the spin currents at the reference flux point (bare
    CPR values unless explicit overrides are given); per_point mode
    recomputes them from the circuit-dressed splitting at every L_JC. The
    current-product column is multiplied by `scale`.
    """
    from dataclasses import replace

    if i1_mode not in ("fixed", "per_point"):
        raise ValueError("i1_mode must be 'fixed' or 'per_point'")
    ljc_grid = [float(v) for v in ljc_grid]
    if not ljc_grid or any(v <= 0 for v in ljc_grid):
        raise ValueError("L_JC grid must be non-empty and positive")
    la = l_asq(params, fluxes) if lasq_nh is None else lasq_nh
    if i1_mode == "fixed":
        i1_fix = float(spin_current(bare_cpr(params, 1), fluxes.flux_1)) if i1_na is None else i1_na
        i2_fix = float(spin_current(bare_cpr(params, 2), fluxes.flux_2)) if i2_na is None else i2_na
    rows = []
    for ljc in ljc_grid:
        p_at = replace(params, ej_c=GHZ_NH / ljc)
        row = {"ljc_nh": ljc, "j_numeric_mhz": None,
               "j_current_product_mhz": None, "error": ""}
        try:
            row["j_numeric_mhz"] = j_numeric(p_at, fluxes).j_mhz
            if i1_mode == "fixed":
                i1, i2 = i1_fix, i2_fix
            else:
                i1 = dressed_spin_current(p_at, fluxes, 1)
                i2 = dressed_spin_current(p_at, fluxes, 2)
            row["j_current_product_mhz"] = scale * j_current_product(ljc, la, i1, i2).j_mhz
        except (ValueError, ArithmeticError) as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    return rows
