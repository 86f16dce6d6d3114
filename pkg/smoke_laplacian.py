import sys
sys.path.insert(0, "src")
import numpy as np
from geodesicnf.fourier import PeriodicCoefficient
from geodesicnf.symbols import OperatorSymbol, WeylPolynomial
from geodesicnf.germs import preset_germ, random_germ_2d, germ_from_curvature_2d
from geodesicnf.jacobi import integrate_monodromy, floquet_decompose, build_frame
from geodesicnf.laplacian import (build_scaled_terms, conjugate_to_model,
                                  frame_harmonic_image, harmonic_symbol)

rng = np.random.default_rng(3)
g = random_germ_2d(rng)
c = g.curvature_data_2d()
L = g.L
lad = build_scaled_terms(g, 4)

def const(v):
    return WeylPolynomial.constant(v, 1, L)

def mono(m, n, pc):
    return WeylPolynomial({((m,), (n,)): pc}, 1, L)

x = WeylPolynomial.coordinate("x", 0, 1, L)
xi = WeylPolynomial.coordinate("xi", 0, 1, L)
x2 = x.pointwise_product(x)
x3 = x2.pointwise_product(x)
x4 = x3.pointwise_product(x)
xi2 = xi.pointwise_product(xi)

tau, tau_nu, tau_nunu = c.tau, c.tau_nu, c.tau_nunu
c4 = (tau * tau).scale(8.0).__add__(tau_nunu).scale(1.0 / 12.0)

# frozen dim-2 ladder
exp2 = OperatorSymbol.from_weyl(const(L ** -2))
exp1 = OperatorSymbol({1: const(2.0 / L),
                       0: xi2.scale(L ** -2) + x2.mul_coefficient(tau)}, 1, L)
exp12 = OperatorSymbol.from_weyl(x3.mul_coefficient(tau_nu.scale(L / 3.0)))
exp0 = OperatorSymbol(
    {2: const(1.0),
     1: x2.mul_coefficient(tau.scale(2.0 * L)),
     0: x4.mul_coefficient(c4.scale(L ** 2))
        + x2.mul_coefficient(tau.derivative().scale(-1j * L))
        - WeylPolynomial.zero(1, L).__add__(const(1.0)).mul_coefficient(tau.scale(0.5))},
    1, L)

print("L2 defect:", (lad.term(0) - exp2).max_abs())
print("L3/2 defect:", lad.term(1).max_abs())
print("L1 defect:", (lad.term(2) - exp1).max_abs())
print("L1/2 defect:", (lad.term(3) - exp12).max_abs())
print("L0 defect:", (lad.term(4) - exp0).max_abs())

# classical mode: no sigma0, no transport
ladc = build_scaled_terms(g, 4, classical=True)
exp0c = OperatorSymbol(
    {2: const(1.0),
     1: x2.mul_coefficient(tau.scale(2.0 * L)),
     0: x4.mul_coefficient(c4.scale(L ** 2))}, 1, L)
print("classical L0 defect:", (ladc.term(4) - exp0c).max_abs())
print("classical L1 defect:", (ladc.term(2) - exp1).max_abs())

# conjugation anchors
m = integrate_monodromy(g)
fl = floquet_decompose(m)
fr = build_frame(g, fl)
alpha = fr.alpha[0]
conj = conjugate_to_model(lad, g, fr)
print("D2 defect:", (conj.term(0) - exp2).max_abs())
print("D3/2:", conj.term(1).max_abs())
d1 = conj.term(2) - OperatorSymbol({1: const(2.0 / L)}, 1, L)
print("D1 cancellation:", d1.max_abs())

# twisted periodicity of D0 coefficients
worst = 0.0
for dsp, poly in conj.term(4).ds_terms.items():
    for (mm, nn) in poly.terms:
        pc = poly.coefficient(mm, nn)
        th = (sum(nn) - sum(mm)) * alpha
        dtw = abs(pc.twist - np.exp(1j * th))
        worst = max(worst, dtw * pc.max_abs())
print("D0 twist-pattern defect:", worst)

# D_{1/2} structure on cubic preset: prop to L^{-1/2} tau_nu (Ybar z + Y zbar)^3
gc = preset_germ("cubic")
mc = integrate_monodromy(gc)
frc = build_frame(gc, floquet_decompose(mc))
ladc3 = build_scaled_terms(gc, 4)
conc3 = conjugate_to_model(ladc3, gc, frc)
got = conc3.term(3)
cc = gc.curvature_data_2d()
xc = WeylPolynomial.coordinate("x", 0, 1, gc.L)
xc3 = xc.pointwise_product(xc).pointwise_product(xc)
# expected: substitute frame into (tau_nu/3) L x^3
expd = OperatorSymbol.from_weyl(
    frc.substitute(xc3.mul_coefficient(cc.tau_nu.scale(gc.L / 3.0))))
print("D1/2 structural defect:", (got - expd).max_abs(), " size:", got.max_abs())

# R diagonal = unreduced rotation rate / 2L * |z|^2  (constant curvature)
from geodesicnf.germs import CurvatureData2D, germ_from_curvature_2d
gs = germ_from_curvature_2d(CurvatureData2D.constant(2 * np.pi, 2.0))
frs = build_frame(gs, floquet_decompose(integrate_monodromy(gs)))
R = frame_harmonic_image(gs, frs)
dz = R.coefficient((1,), (1,))
print("R zzbar coeff:", dz.mean(), " expected", np.sqrt(2.0) / 2)
print("R offdiag z^2:", abs(R.coefficient((2,), (0,)).max_abs()))
