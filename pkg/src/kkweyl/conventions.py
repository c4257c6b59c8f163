"""Every sign, weight and normalisation the library commits to, in one place.

The values below were pinned by direct computation on lifted metrics and on
the solution fixtures (see the oracle tests); they are not free choices.
Reports embed :func:`conventions_hash` so numbers from different builds are
only compared when these agree.
"""

from __future__ import annotations

import hashlib
import json

# Riemann sign: R^r_{smn} = d_m G^r_{ns} - ..., unit 2-sphere has R = +2.
RIEMANN_SIGN = +1

# Levi-Civita: eps^{01..} = +1 in declared coordinate order, divided by sqrt|det g|.
EPSILON_ORIENTATION = +1

# Lift: g_MN = exp(2 sigma) [[g - a a, -a], [-a, -1]], fibre coordinate appended last.
FIBRE_COORD = "y"

# Conformal weight w in  C_direct(lift) * exp(w sigma) = C_reduced.
WEIGHT_WEYL_4TO3 = 6
WEIGHT_COTTON_3TO2 = 5

# 4->3: the eps term of C^{-lmn} carries eps/(4 sqrt g) (printed: 1/(2 sqrt g)).
WEYL_MINUS_EPS_FACTOR = 0.25

# 3->2: C^{mn}_direct = COTTON_3TO2_FACTOR * g^{ma} g^{nb} C_ab(printed form),
# and C^{-m} = COTTON_MINUS_EPS_FACTOR * eps^{mn} d_n(r + 3 f^2)/sqrt(-g) - a_n C^{mn}.
COTTON_3TO2_FACTOR = -0.5
COTTON_MINUS_EPS_FACTOR = 0.25

# The reduced 2D equations use r = CURVATURE_SIGN_2D * (library Ricci scalar).
CURVATURE_SIGN_2D = -1

# Einstein-Weyl comparison: s multiplies the W-bilinear block.
EW_SIGN = {"indefinite": -1, "positive": +1}

# D_(m W_n) = 1/2 (D_m W_n + D_n W_m).
SYMMETRIZATION = 0.5

# "Vanishing" residuals are divided by max|R^r_{smn}| + 1.
NORMALISATION = "max|Riemann| + 1"

CONVENTIONS = {
    "riemann_sign": RIEMANN_SIGN,
    "epsilon_orientation": EPSILON_ORIENTATION,
    "fibre_coord": FIBRE_COORD,
    "weight_weyl_4to3": WEIGHT_WEYL_4TO3,
    "weight_cotton_3to2": WEIGHT_COTTON_3TO2,
    "weyl_minus_eps_factor": WEYL_MINUS_EPS_FACTOR,
    "cotton_3to2_factor": COTTON_3TO2_FACTOR,
    "cotton_minus_eps_factor": COTTON_MINUS_EPS_FACTOR,
    "curvature_sign_2d": CURVATURE_SIGN_2D,
    "ew_sign": EW_SIGN,
    "symmetrization": SYMMETRIZATION,
    "normalisation": NORMALISATION,
}


def conventions_hash() -> str:
    blob = json.dumps(CONVENTIONS, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]
