"""Device parameters, flux conversions and current-phase relations.

Shared model layer for the coupled double-SQUID circuit: two quantum-dot
junctions hosting Andreev spin qubits (ASQ1, ASQ2) in parallel with the
coupling junction. All types are immutable; all operations are pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.interpolate import CubicSpline

from .constants import GHZ_NH, NA_PER_GHZ_SLOPE, TWO_PI


class CprRangeError(ValueError):
    """Tabulated CPR evaluated outside its extendable flux span."""


@dataclass(frozen=True)
class SpinConfig:
    """Spin eigenvalues (s1, s2) of the two qubits.

    Labels follow sigma^z = |down><down| - |up><up|, so down = +1 and
    up = -1.
    """

    s1: int
    s2: int

    def __post_init__(self):
        if self.s1 not in (1, -1) or self.s2 not in (1, -1):
            raise ValueError("spin eigenvalues must be +1 or -1")

    @property
    def label(self) -> str:
        return ("d" if self.s1 == 1 else "u") + ("d" if self.s2 == 1 else "u")

    @classmethod
    def from_label(cls, label: str) -> "SpinConfig":
        lut = {"d": 1, "u": -1}
        if len(label) != 2 or label[0] not in lut or label[1] not in lut:
            raise ValueError(f"bad spin label {label!r}")
        return cls(lut[label[0]], lut[label[1]])


# Product-basis order used everywhere: |dd>, |du>, |ud>, |uu>.
SPIN_CONFIGS = (
    SpinConfig(1, 1),
    SpinConfig(1, -1),
    SpinConfig(-1, 1),
    SpinConfig(-1, -1),
)


@dataclass(frozen=True)
class DeviceParams:
    """Circuit energies, all as E/h in GHz.

    ej_i_*: spin-independent Josephson energies of the two ASQ junctions.
    ej_s_*: spin-dependent Josephson energies.
    ej_c:   coupling-junction Josephson energy.
    e_c:    transmon charging energy.
    skew_*: skewness of the spin-dependent energy-phase relation, |S| < 1.
    """

    ej_i_1: float
    ej_i_2: float
    ej_s_1: float
    ej_s_2: float
    ej_c: float
    e_c: float = 0.0
    skew_1: float = 0.0
    skew_2: float = 0.0

    def __post_init__(self):
        for name in ("ej_i_1", "ej_i_2", "ej_s_1", "ej_s_2", "ej_c", "e_c"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        for name in ("skew_1", "skew_2"):
            if not abs(getattr(self, name)) < 1.0:
                raise ValueError(f"{name} must satisfy |S| < 1")

    def swapped(self) -> "DeviceParams":
        """Parameters with the roles of the two qubits exchanged."""
        return DeviceParams(
            ej_i_1=self.ej_i_2, ej_i_2=self.ej_i_1,
            ej_s_1=self.ej_s_2, ej_s_2=self.ej_s_1,
            ej_c=self.ej_c, e_c=self.e_c,
            skew_1=self.skew_2, skew_2=self.skew_1,
        )


@dataclass(frozen=True)
class FluxPoint:
    """External fluxes through the two loops, in units of Phi0."""

    flux_1: float
    flux_2: float


@dataclass(frozen=True)
class CurrentPhaseRelation:
    """Qubit frequency versus external flux.

    kind 'sinusoidal': amplitude * sin(2 pi x) + offset
    kind 'skewed':     amplitude * sin(2 pi x + S sin(2 pi x)) + offset
    kind 'tabulated':  cubic-spline interpolation of (flux, f) samples,
                       periodically extended when the samples span >= one
                       flux quantum.

    amplitude corresponds to 2 E^sigma/h in GHz for the analytic kinds.
    """

    kind: str
    amplitude: float = 0.0
    skew: float = 0.0
    offset: float = 0.0
    samples: tuple = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in ("sinusoidal", "skewed", "tabulated"):
            raise ValueError(f"unknown CPR kind {self.kind!r}")
        if self.kind == "skewed" and not abs(self.skew) < 1.0:
            raise ValueError("skewness must satisfy |S| < 1")
        if self.kind == "tabulated":
            if self.samples is None:
                raise ValueError("tabulated CPR requires samples")
            x = np.asarray([s[0] for s in self.samples], dtype=float)
            y = np.asarray([s[1] for s in self.samples], dtype=float)
            if len(x) < 4:
                raise ValueError("tabulated CPR needs at least 4 samples")
            if not np.all(np.diff(x) > 0):
                raise ValueError("tabulated CPR samples must be strictly increasing in flux")
            # Not-a-knot cubic spline over the sampled span; queries are
            # reduced into the span by 1-periodicity when it covers a period.
            object.__setattr__(self, "_spline", CubicSpline(x, y))
            object.__setattr__(self, "_span", (float(x[0]), float(x[-1])))

    @classmethod
    def sinusoidal(cls, amplitude: float, offset: float = 0.0) -> "CurrentPhaseRelation":
        return cls(kind="sinusoidal", amplitude=amplitude, offset=offset)

    @classmethod
    def skewed(cls, amplitude: float, skew: float, offset: float = 0.0) -> "CurrentPhaseRelation":
        return cls(kind="skewed", amplitude=amplitude, skew=skew, offset=offset)

    @classmethod
    def tabulated(cls, flux, freq) -> "CurrentPhaseRelation":
        samples = tuple((float(a), float(b)) for a, b in zip(flux, freq))
        return cls(kind="tabulated", samples=samples)

    def _reduce(self, flux: float) -> float:
        lo, hi = self._span
        if lo <= flux <= hi:
            return flux
        if hi - lo >= 1.0:
            r = math.fmod(flux - lo, 1.0)
            if r < 0:
                r += 1.0
            return lo + r
        raise CprRangeError(
            f"flux {flux} outside tabulated span [{lo}, {hi}] (< one period, not extendable)"
        )


def reduced_phase(flux: float):
    """Reduced flux: phase in radians for a flux in Phi0 units."""
    return TWO_PI * flux


def _skewed_sin(x, skew: float):
    return np.sin(x + skew * np.sin(x))


def cpr_eval(cpr: CurrentPhaseRelation, flux: float):
    """Frequency f(Phi) in GHz at flux Phi/Phi0."""
    if cpr.kind == "sinusoidal":
        return cpr.amplitude * np.sin(TWO_PI * np.asarray(flux, dtype=float)) + cpr.offset
    if cpr.kind == "skewed":
        x = TWO_PI * np.asarray(flux, dtype=float)
        return cpr.amplitude * _skewed_sin(x, cpr.skew) + cpr.offset
    return float(cpr._spline(cpr._reduce(float(flux))))


def cpr_derivative(cpr: CurrentPhaseRelation, flux: float):
    """Slope df/d(Phi/Phi0) in GHz per flux quantum."""
    if cpr.kind == "sinusoidal":
        return cpr.amplitude * TWO_PI * np.cos(TWO_PI * np.asarray(flux, dtype=float))
    if cpr.kind == "skewed":
        x = TWO_PI * np.asarray(flux, dtype=float)
        inner = x + cpr.skew * np.sin(x)
        return cpr.amplitude * np.cos(inner) * TWO_PI * (1.0 + cpr.skew * np.cos(x))
    return float(cpr._spline.derivative()(cpr._reduce(float(flux))))


def spin_current(cpr: CurrentPhaseRelation, flux: float):
    """Spin-dependent current difference I = h df/dPhi, in nA."""
    return NA_PER_GHZ_SLOPE * cpr_derivative(cpr, flux)


def inductance_from_energy(ej: float) -> float:
    """Josephson inductance (Phi0/2pi)^2/E_J in nH for E_J/h in GHz."""
    if ej <= 0:
        raise ValueError("Josephson energy must be positive")
    return GHZ_NH / ej


def l_asq(params: DeviceParams, fluxes: FluxPoint) -> float:
    """Parallel spin-independent inductance of the two ASQ branches, in nH.

    1/L = cos(phi1)/L1 + cos(phi2)/L2. Returns +inf when the reciprocal sum
    vanishes (divergent inductance) and a negative value when the sum is
    negative; both regimes are outside the mutual-inductance formula and
    are rejected by j_current_product.
    """
    s = (params.ej_i_1 * math.cos(reduced_phase(fluxes.flux_1))
         + params.ej_i_2 * math.cos(reduced_phase(fluxes.flux_2)))
    scale = max(params.ej_i_1 + params.ej_i_2, 1.0)
    if abs(s) < 1e-12 * scale:
        return math.inf
    return GHZ_NH / s
