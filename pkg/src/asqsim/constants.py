"""Physical constants and the unit conversions used throughout the toolkit.

Unit conventions everywhere in this package:

* energies are stored as frequencies E/h in GHz,
* external fluxes are in units of the flux quantum Phi0 (dimensionless),
* currents are in nA,
* inductances are in nH.

Conversions between these happen only inside operations, via the derived
constants below.
"""

from dataclasses import dataclass
import math

# Exact SI values (2019 redefinition).
H_PLANCK = 6.62607015e-34          # J s
E_CHARGE = 1.602176634e-19         # C
PHI0 = H_PLANCK / (2.0 * E_CHARGE)  # Wb, magnetic flux quantum h/2e
MU_B = 9.2740100783e-24            # J/T, Bohr magneton


@dataclass(frozen=True)
class PhysicalConstants:
    h: float = H_PLANCK
    phi0: float = PHI0
    mu_b: float = MU_B


CONSTANTS = PhysicalConstants()

# L[nH] * (E_J/h)[GHz] for a Josephson junction, E_J = (Phi0/2pi)^2 / L;
# the nH and GHz scale factors cancel exactly.
GHZ_NH = (PHI0 / (2.0 * math.pi)) ** 2 / H_PLANCK  # ~163.46

# Spin current I = h * df/dPhi: nA produced per (GHz per Phi0) of slope.
NA_PER_GHZ_SLOPE = H_PLANCK * 1e18 / PHI0  # ~0.3204

# J = M I1 I2 / (2h): MHz produced per (nH * nA * nA).
MHZ_PER_NH_NA2 = 1e-27 / (2.0 * H_PLANCK) / 1e6  # ~0.7546

TWO_PI = 2.0 * math.pi
