"""Bisect the two-path f0 disagreement: vary tau / tau_nu independently."""
import sys
sys.path.insert(0, "src")
import math
import numpy as np

from geodesicnf.fourier import PeriodicCoefficient, real_band_limited
from geodesicnf.germs import CurvatureData2D, germ_from_curvature_2d, preset_germ
from geodesicnf.jacobi import build_frame
from geodesicnf.laplacian import build_scaled_terms, conjugate_to_model
from geodesicnf.normalform import scnf_iterate, f0_direct_dim2


def compare(tag, g):
    fr = build_frame(g)
    ladder = build_scaled_terms(g, 4)
    conj = conjugate_to_model(ladder, g, fr)
    s = scnf_iterate(conj, fr.alpha, 0)
    direct = f0_direct_dim2(g, fr)
    it = s.f[0]
    diff = (direct - it).max_abs() / max(it.max_abs(), 1.0)
    print(f"{tag}: rel diff {diff:.3e}")
    if diff > 1e-8:
        print("  iter:   ", {k: f"{v.mean():.6g}" for k, v in it.terms.items()})
        print("  direct: ", {k: f"{v.mean():.6g}" for k, v in direct.terms.items()})
    return diff


L = 7.1
rng = np.random.default_rng(2)
const = lambda v: PeriodicCoefficient.constant(v, L)
var_tau = real_band_limited(rng, L, 1.3, 0.3, 3)
var_tnu = real_band_limited(rng, L, 0.4, 0.3, 3)
var_tnn = real_band_limited(rng, L, -0.8, 0.4, 3)

# (a) varying tau only, no cubic
compare("varying tau, tau_nu=0",
        germ_from_curvature_2d(CurvatureData2D(L, var_tau, const(0.0), var_tnn)))
# (b) constant tau, constant tau_nu (cubic preset)
compare("cubic preset", preset_germ("cubic"))
# (c) constant tau, varying tau_nu
compare("const tau, varying tau_nu",
        germ_from_curvature_2d(CurvatureData2D(L, const(1.3), var_tnu, const(0.0))))
# (d) both varying
compare("both varying",
        germ_from_curvature_2d(CurvatureData2D(L, var_tau, var_tnu, var_tnn)))
