"""Physical constants and default material parameters.

All values are SI.  The electron gyromagnetic ratio ships as a named
default (2pi x 28.0 GHz/T) because it enters several derivations; it can
be overridden per-call or through the configuration file.
"""

import math

TWO_PI = 2.0 * math.pi

# CODATA 2018
HBAR = 1.054571817e-34  # J s
MU_0 = 1.25663706212e-6  # N A^-2

# Electron gyromagnetic ratio, angular (rad s^-1 T^-1).
GAMMA_E = TWO_PI * 28.0e9
