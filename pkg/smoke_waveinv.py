"""Scratch validation for waveinv.py."""
import sys
sys.path.insert(0, "src")
import cmath
import math
import numpy as np

from geodesicnf.fourier import PeriodicCoefficient, real_band_limited
from geodesicnf.germs import (CurvatureData2D, germ_from_curvature_2d,
                              iterate_curvature, preset_germ)
from geodesicnf.jacobi import build_frame
from geodesicnf.laplacian import build_scaled_terms, conjugate_to_model
from geodesicnf.normalform import (scnf_iterate, qbnf_assemble,
                                   required_ladder_depth)
from geodesicnf.symbols import diagonal_eigenvalue_polynomial
from geodesicnf.waveinv import (hermite_trace, trace_distribution,
                                wave_invariant, beta_form_check, morse_index,
                                with_principal)


def report(name, val, tol):
    flag = "OK " if val <= tol else "FAIL"
    print(f"{flag} {name}: {val:.3e}  (tol {tol:g})")
    return val <= tol


ok = True

# 1. anchors
ok &= report("T(pi) = i/2", abs(trace_distribution([math.pi]) - 0.5j), 1e-15)
ok &= report("F=1 at pi", abs(hermite_trace({(0,): 1.0}, [math.pi]) - 0.5j), 1e-15)
ok &= report("F=x at pi", abs(hermite_trace({(1,): 1.0}, [math.pi])), 1e-15)


# 2. damped-series oracle, random degree-3 F
import mpmath as mp


def damped_mp(F, alpha, delta, qmax):
    mp.mp.dps = 25
    step = mp.e ** (mp.mpc(-delta, alpha))
    zq = mp.e ** (mp.mpc(-delta, alpha) * mp.mpf("0.5"))
    kmax = max(e[0] for e in F)
    cs = [mp.mpc(complex(F.get((e,), 0.0))) for e in range(kmax + 1)]
    acc = mp.mpc(0)
    for qi in range(qmax):
        q = mp.mpf(2 * qi + 1) / 2
        poly, qp = cs[0], mp.mpf(1)
        for e in range(1, kmax + 1):
            qp *= q
            poly += cs[e] * qp
        acc += poly * zq
        zq *= step
    return acc


rng = np.random.default_rng(0)
F = {(e,): complex(rng.normal(), rng.normal()) for e in range(4)}
alpha = float(rng.uniform(0.4, 2 * math.pi - 0.4))
exact = hermite_trace(F, [alpha])
ds = [1e-3 / 2 ** i for i in range(4)]
vals = [damped_mp(F, alpha, d, max(100000, int(60 / d))) for d in ds]
tab = list(vals)
for lev in range(1, len(ds)):
    tab = [(tab[i + 1] * (ds[i] / ds[i + lev]) - tab[i])
           / (ds[i] / ds[i + lev] - 1) for i in range(len(tab) - 1)]
ok &= report("damped-series oracle (deg<=3)",
             abs(complex(tab[0]) - exact) / max(abs(exact), 1.0), 1e-6)

# 3. conjugation symmetry for real F
F = {(0,): 1.0, (1,): -0.7, (2,): 0.3, (3,): 2.2}
a = 1.3
ok &= report("conjugation symmetry",
             abs(hermite_trace(F, [-a]) - hermite_trace(F, [a]).conjugate()),
             1e-14)

# 4. multivariate factorization
F2 = {(2, 1): 1.5, (0, 3): -0.4, (1, 0): 2.0}
al = [0.9, 2.2]
direct = 0.0
for (e1, e2), c in F2.items():
    direct += c * hermite_trace({(e1,): 1.0}, [al[0]]) \
        * hermite_trace({(e2,): 1.0}, [al[1]])
ok &= report("2-var factorization",
             abs(hermite_trace(F2, al) - direct), 1e-13)


# 5. k=0 identity against (L^2/2) trace(f0)
def pipeline(data_or_germ, K=0):
    g = data_or_germ if hasattr(data_or_germ, "jets") \
        else germ_from_curvature_2d(data_or_germ, required_ladder_depth(K))
    fr = build_frame(g)
    ladder = build_scaled_terms(g, required_ladder_depth(K))
    conj = conjugate_to_model(ladder, g, fr)
    s = scnf_iterate(conj, fr.alpha, K)
    return g, fr, s, qbnf_assemble(s)


g, fr, s, q = pipeline(preset_germ("quartic"))
rep = wave_invariant(q, 0, fr)
f0c = diagonal_eigenvalue_polynomial(s.f[0], table="contracted")
direct = (q.L ** 2 / 2.0) * hermite_trace(dict(f0c), fr.alpha)
ok &= report("k=0 vs (L^2/2) trace(f0)", abs(rep.a - direct), 1e-12)
ok &= report("a_raw = i a", abs(rep.a_raw - 1j * rep.a), 1e-12)

# 6. beta-form fit on quartic
fit = beta_form_check(q, fr)
ok &= report("beta fit residual", fit["residual"], 1e-8)
ok &= report("beta fit B4 vs -pi/16", abs(fit["B4"] - (-math.pi / 16)), 1e-9)
ok &= report("beta fit B0 vs -pi/2", abs(fit["B0"] - (-math.pi / 2)), 1e-9)

# 7. morse index
g2 = germ_from_curvature_2d(CurvatureData2D.constant(2 * math.pi, 2.0))
fr2 = build_frame(g2)
sig = morse_index(g2, fr2)
ok &= report("morse sigma=2 (tau=2, L=2pi)", abs(sig - 2), 0)
g3 = germ_from_curvature_2d(CurvatureData2D.constant(2.0, 0.5))
fr3 = build_frame(g3)
ok &= report("morse sigma=0 (sqrt(tau) L < pi)", morse_index(g3, fr3), 0)
rep2 = with_principal(wave_invariant(q, 0, fr), preset_germ("quartic"), fr)
print(f"    quartic: sigma={rep2.morse_index}, c_gamma={rep2.principal:.6g}, "
      f"a={rep2.a:.6g}")

# 8. iterate consistency, m = 2, 3, orders k = 0, 1
L0 = 6.0
rng = np.random.default_rng(1)
tau = real_band_limited(rng, L0, 1.5, 0.25, 2)
tnu = real_band_limited(rng, L0, 0.4, 0.3, 2)
tnn = real_band_limited(rng, L0, -0.6, 0.3, 2)
hi = [real_band_limited(rng, L0, 0.2, 0.3, 2),
      real_band_limited(rng, L0, -0.3, 0.3, 2)]
base = CurvatureData2D(L0, tau, tnu, tnn, hi)
for m in (2, 3):
    d_iter = iterate_curvature(base, m)
    Lm = L0 * m

    def resample(pc):
        return PeriodicCoefficient.from_function(
            lambda ss: pc(ss), Lm, bandwidth=2 * m + 4)

    d_direct = CurvatureData2D(Lm, resample(tau), resample(tnu), resample(tnn),
                               [resample(h) for h in hi])
    for k in (0, 1):
        _, fra, sa, qa = pipeline(d_iter, K=k)
        _, frb, sb, qb = pipeline(d_direct, K=k)
        ra = wave_invariant(qa, k, fra)
        rb = wave_invariant(qb, k, frb)
        rel = abs(ra.a - rb.a) / max(abs(ra.a), 1.0)
        ok &= report(f"iterate consistency m={m} k={k}", rel, 1e-7)

# 9. rescaling covariance: a_0 invariant, a_1 ~ 1/eps
eps = 1.4
g4, fr4, s4, q4 = pipeline(base, K=1)
g5, fr5, s5, q5 = pipeline(base.rescaled(eps), K=1)
r40, r41 = wave_invariant(q4, 0, fr4), wave_invariant(q4, 1, fr4)
r50, r51 = wave_invariant(q5, 0, fr5), wave_invariant(q5, 1, fr5)
ok &= report("a_0 scale invariance", abs(r50.a - r40.a) / abs(r40.a), 1e-9)
ok &= report("a_1 ~ 1/eps", abs(r51.a - r41.a / eps) / abs(r41.a), 1e-9)

print("ALL OK" if ok else "FAILURES PRESENT")
