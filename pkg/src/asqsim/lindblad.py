"""Driven-dissipative steady states of the coupled two-qubit system.

Rotating-frame Hamiltonian with two drives and longitudinal coupling,
relaxation and dephasing on each qubit, steady state from the vectorized
Liouvillian with a trace constraint. Readout is synthesized classically as
a population-weighted sum of displaced Lorentzians.

Product basis order: |dd>, |du>, |ud>, |uu> with down = sigma^z = +1.
Inputs are ordinary frequencies in MHz and times in us; the Hamiltonian is
assembled in angular MHz (rad/us) so that rates 1/T are used unscaled.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
import math

import numpy as np

from .core import SpinConfig, SPIN_CONFIGS

_I2 = np.eye(2, dtype=complex)
_SZ = np.diag([1.0, -1.0]).astype(complex)          # |d><d| - |u><u|
_SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SM = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)  # |d><u|, decay to down

SZ1 = np.kron(_SZ, _I2)
SZ2 = np.kron(_I2, _SZ)
SX1 = np.kron(_SX, _I2)
SX2 = np.kron(_I2, _SX)
SM1 = np.kron(_SM, _I2)
SM2 = np.kron(_I2, _SM)


class DegenerateSteadyStateError(RuntimeError):
    """The constrained Liouvillian is rank deficient: steady state not unique."""


@dataclass(frozen=True)
class DriveConfig:
    """Drive amplitudes Omega/2pi, detunings (f_i - f_pi) and coupling, MHz."""

    omega_p1: float
    omega_p2: float
    delta_1: float
    delta_2: float
    j: float

    def __post_init__(self):
        if self.omega_p1 < 0 or self.omega_p2 < 0:
            raise ValueError("drive amplitudes must be >= 0")
        for name in ("omega_p1", "omega_p2", "delta_1", "delta_2", "j"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


@dataclass(frozen=True)
class DecayRates:
    """Energy decay and dephasing times per qubit, in us.

    The collapse rates are gamma_1 = 1/T1 and gamma_phi = 1/T2, matching
    the dephasing-dominated regime these simulations target.
    """

    t1_1: float
    t1_2: float
    t2_1: float
    t2_2: float

    def __post_init__(self):
        for name in ("t1_1", "t1_2", "t2_1", "t2_2"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")


@dataclass(frozen=True)
class SteadyStateSolution:
    rho: np.ndarray
    populations: dict

    def population(self, label: str) -> float:
        return self.populations[SpinConfig.from_label(label)]


@dataclass(frozen=True)
class ReadoutModel:
    """Dispersive readout: bare frequency (GHz), per-state shifts chi (MHz),
    linewidth kappa (MHz) and synthesis mode."""

    f_res: float
    chi: dict
    kappa: float
    mode: str = "lorentzian_sum"

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError("kappa must be > 0")
        if self.mode not in ("lorentzian_sum", "large_shift_limit"):
            raise ValueError(f"unknown readout mode {self.mode!r}")
        for cfg in SPIN_CONFIGS:
            if cfg not in self.chi:
                raise ValueError(f"chi missing spin config {cfg.label}")


def rotating_hamiltonian(cfg: DriveConfig) -> np.ndarray:
    """H'/hbar in angular MHz, in the |dd>, |du>, |ud>, |uu> basis."""
    h = (0.5 * cfg.delta_1 * SZ1 + 0.5 * cfg.delta_2 * SZ2
         + 0.5 * cfg.omega_p1 * SX1 + 0.5 * cfg.omega_p2 * SX2
         + 0.5 * cfg.j * (SZ1 @ SZ2))
    return 2.0 * math.pi * h


def collapse_operators(rates: DecayRates):
    return [
        math.sqrt(1.0 / rates.t1_1) * SM1,
        math.sqrt(0.5 / rates.t2_1) * SZ1,
        math.sqrt(1.0 / rates.t1_2) * SM2,
        math.sqrt(0.5 / rates.t2_2) * SZ2,
    ]


def liouvillian(h: np.ndarray, c_ops) -> np.ndarray:
    """16x16 superoperator for column-stacked vec(rho)."""
    d = h.shape[0]
    iden = np.eye(d, dtype=complex)
    sup = -1j * (np.kron(iden, h) - np.kron(h.T, iden))
    for c in c_ops:
        cdc = c.conj().T @ c
        sup += (np.kron(c.conj(), c)
                - 0.5 * np.kron(iden, cdc)
                - 0.5 * np.kron(cdc.T, iden))
    return sup


def steady_state(h: np.ndarray, rates: DecayRates) -> SteadyStateSolution:
    """Solve L[rho] = 0 with trace(rho) = 1 as a constrained linear system.

    One row of the vectorized Liouvillian is replaced by the trace
    constraint; a rank-deficient constrained matrix (non-unique steady
    state) raises DegenerateSteadyStateError.
    """
    d = h.shape[0]
    sup = liouvillian(h, collapse_operators(rates))
    mat = sup.copy()
    trace_row = np.zeros(d * d, dtype=complex)
    trace_row[[i * (d + 1) for i in range(d)]] = 1.0
    mat[0, :] = trace_row
    rhs = np.zeros(d * d, dtype=complex)
    rhs[0] = 1.0
    if np.linalg.matrix_rank(mat) < d * d:
        raise DegenerateSteadyStateError("steady state is not unique")
    vec = np.linalg.solve(mat, rhs)
    rho = vec.reshape((d, d), order="F")
    rho = 0.5 * (rho + rho.conj().T)  # scrub solver-level asymmetry
    pops = {cfg: float(np.real(rho[i, i])) for i, cfg in enumerate(SPIN_CONFIGS)}
    return SteadyStateSolution(rho=rho, populations=pops)


def readout_signal(sol: SteadyStateSolution, model: ReadoutModel, f_probe_ghz) -> np.ndarray:
    """Synthesized readout trace over the probe frequency grid (GHz).

    lorentzian_sum: sum over states of P * displaced Lorentzian;
    large_shift_limit: only the dd population contributes.
    """
    f = np.atleast_1d(np.asarray(f_probe_ghz, dtype=float))
    if f.size == 0:
        raise ValueError("probe grid must be non-empty")
    half = 0.5 * model.kappa
    out = np.zeros_like(f)
    configs = SPIN_CONFIGS if model.mode == "lorentzian_sum" else (SpinConfig(1, 1),)
    for cfg in configs:
        det = (f - model.f_res) * 1e3 - model.chi[cfg]  # MHz
        out += sol.populations[cfg] * half**2 / (det**2 + half**2)
    return out


@dataclass(frozen=True)
class SpectroscopyMap:
    power_db: np.ndarray
    fd_ghz: np.ndarray
    signal: np.ndarray       # shape (len(power_db), len(fd_ghz)); nan where masked
    mask: np.ndarray         # True where the steady state was degenerate
    meta: dict


def spectroscopy_map(base: DriveConfig, rates: DecayRates, model: ReadoutModel,
                     fd_grid_ghz, power_grid_db, f_qubit_ghz: float,
                     pump_qubit: int = 1, probe_ghz: float = None,
                     threads: int = 1) -> SpectroscopyMap:
    """Two-tone spectroscopy map versus drive frequency and pump power.

    One qubit is pumped at fixed detuning base.delta_<pump>, with amplitude
    base.omega_p<pump> * 10^(P_dB/20); the other is scanned: its detuning is
    set per-cell to (f_qubit_ghz - f_d) in MHz. The readout value is taken
    at a fixed probe point and the median of each constant-power row is
    subtracted, as for the measured maps. Rows may be evaluated in parallel;
    assembly order is always grid order.
    """
    fd = np.asarray(list(fd_grid_ghz), dtype=float)
    power = np.asarray(list(power_grid_db), dtype=float)
    if fd.size == 0 or power.size == 0:
        raise ValueError("grids must be non-empty")
    if pump_qubit not in (1, 2):
        raise ValueError("pump_qubit must be 1 or 2")
    if probe_ghz is None:
        # Default probe sits on the dd-shifted resonance, so the large-shift
        # signal equals the dd population exactly.
        probe_ghz = model.f_res + model.chi[SpinConfig(1, 1)] * 1e-3
    omega_ref = base.omega_p1 if pump_qubit == 1 else base.omega_p2

    def compute_row(p_db):
        amp = omega_ref * 10.0 ** (p_db / 20.0)
        row = np.full(fd.size, np.nan)
        row_mask = np.zeros(fd.size, dtype=bool)
        for ifd, f_d in enumerate(fd):
            det = (f_qubit_ghz - f_d) * 1e3
            if pump_qubit == 1:
                cfg = replace(base, omega_p1=amp, delta_2=det)
            else:
                cfg = replace(base, omega_p2=amp, delta_1=det)
            try:
                sol = steady_state(rotating_hamiltonian(cfg), rates)
            except DegenerateSteadyStateError:
                row_mask[ifd] = True
                continue
            row[ifd] = float(readout_signal(sol, model, probe_ghz)[0])
        good = ~np.isnan(row)
        if good.any():
            row[good] -= np.median(row[good])
        return row, row_mask

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(compute_row, power))
    else:
        results = [compute_row(p_db) for p_db in power]
    sig = np.vstack([r for r, _ in results])
    mask = np.vstack([m for _, m in results])
    meta = {"pump_qubit": pump_qubit, "f_qubit_ghz": f_qubit_ghz,
            "probe_ghz": probe_ghz, "omega_ref_mhz": omega_ref}
    return SpectroscopyMap(power_db=power, fd_ghz=fd, signal=sig, mask=mask, meta=meta)
