"""Linearized geodesic dynamics: monodromy, Floquet data, Wronskian frame.

The Jacobi equation Y'' + K(s) Y = 0 is integrated with a high-order explicit
scheme; symplectic defects are monitored, not enforced, so they double as
integration diagnostics.  Floquet exponents alpha_j in (0, 2pi) are branch-fixed
by the positive-Lagrangian convention: the chosen eigenvector v = (Y, Ydot)
satisfies i*sigma(v, conj v) > 0 and is normalized to sigma(v, conj v) = -2i,
which makes the weighted frame substitution symplectic and the model rotation
term positive.  Eigenfields are stored as twisted Fourier coefficients, so
quasi-periodicity Y(s+L) = e^{i alpha} Y(s) is exact by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from .fourier import TWO_PI, PeriodicCoefficient
from .germs import MetricGerm
from .symbols import WeylPolynomial, substitute_linear, transvectant

__all__ = [
    "DegenerateError", "NonEllipticError", "Monodromy", "FloquetData",
    "JacobiFrame", "integrate_monodromy", "floquet_decompose", "build_frame",
    "conjugate_point_count",
]


def _standard_symplectic(n: int) -> np.ndarray:
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = np.eye(n)
    J[n:, :n] = -np.eye(n)
    return J


@dataclass
class Monodromy:
    """Linear Poincaré map in (Y, Ydot) coordinates."""

    P: np.ndarray
    L: float
    dim: int  # total dimension n+1

    @property
    def nvars(self) -> int:
        return self.dim - 1

    def symplectic_defect(self) -> float:
        J = _standard_symplectic(self.nvars)
        return float(np.max(np.abs(self.P.T @ J @ self.P - J)))


@dataclass
class FloquetData:
    """Floquet exponents, invariants, and normalized eigenvectors.

    eigvecs columns v_j = (Y_j(0), Ydot_j(0)) satisfy P v_j = e^{i alpha_j} v_j
    and sigma(v_j, conj v_j) = -2i (positive Lagrangian); beta_j = 1/(1-e^{i a}).
    """

    alpha: np.ndarray
    eigvecs: np.ndarray
    beta: np.ndarray
    det_factor: float                      # det(I - P) > 0 for elliptic maps
    witness_divisor: float                 # min |m·alpha mod 2pi| over small m
    witness_combo: Tuple[int, ...]

    @property
    def nvars(self) -> int:
        return len(self.alpha)

    def gram_defect(self) -> float:
        """Deviation of sigma(v_j, conj v_k)/(-2i) from the identity."""
        n = self.nvars
        J = _standard_symplectic(n)
        G = self.eigvecs.T @ J @ np.conj(self.eigvecs) / (-2j)
        return float(np.max(np.abs(G - np.eye(n))))


class DegenerateError(ValueError):
    pass


class NonEllipticError(DegenerateError):
    pass


def _rhs_factory(K: List[List[PeriodicCoefficient]], n: int):
    def rhs(s: float, state: np.ndarray) -> np.ndarray:
        mats = state.reshape(2 * n, -1)
        Y, Yd = mats[:n], mats[n:]
        Ks = np.empty((n, n))
        for i in range(n):
            for j in range(n):
                Ks[i, j] = float(np.real(K[i][j](s)))
        return np.concatenate([Yd, -Ks @ Y]).ravel()
    return rhs


def _integrate(K: List[List[PeriodicCoefficient]], L: float, n: int,
               init: np.ndarray, dense: bool = False,
               rtol: float = 1e-12, atol: float = 1e-13):
    sol = solve_ivp(_rhs_factory(K, n), (0.0, L), init.ravel(),
                    method="DOP853", rtol=rtol, atol=atol, dense_output=dense)
    if not sol.success:
        raise RuntimeError(f"Jacobi integration failed: {sol.message}")
    return sol


def integrate_monodromy(g: MetricGerm) -> Monodromy:
    """Fundamental solution of Y'' + K(s) Y = 0 over one period, with holonomy."""
    n = g.nvars
    K = g.curvature_matrix()
    sol = _integrate(K, g.L, n, np.eye(2 * n))
    Phi = sol.y[:, -1].reshape(2 * n, 2 * n)
    T = g.holonomy
    R = np.block([[T.T, np.zeros((n, n))], [np.zeros((n, n)), T.T]])
    return Monodromy(R @ Phi, g.L, g.dim)


def floquet_decompose(m: Monodromy, resonance_tol: float = 1e-6,
                      witness_order: int = 4) -> FloquetData:
    """Extract one exponent per conjugate eigenvalue pair of the Poincaré map."""
    n = m.nvars
    lam, vecs = np.linalg.eig(m.P)
    off_circle = float(np.max(np.abs(np.abs(lam) - 1.0)))
    if off_circle > 1e-8:
        raise NonEllipticError(
            f"eigenvalue off the unit circle by {off_circle:.3e}; "
            f"the geodesic is not elliptic")
    for lam_i in lam:
        for pole in (1.0, -1.0):
            if abs(lam_i - pole) < resonance_tol:
                raise DegenerateError(
                    f"eigenvalue {lam_i:.12g} within {resonance_tol:g} of "
                    f"{pole:+.0f}; the map is degenerate")
    J = _standard_symplectic(n)
    chosen_alpha, chosen_vec, used = [], [], [False] * (2 * n)
    for i in range(2 * n):
        if used[i]:
            continue
        # conjugate partner
        partner = None
        for j in range(i + 1, 2 * n):
            if not used[j] and abs(lam[j] - np.conj(lam[i])) < 1e-8:
                partner = j
                break
        if partner is None:
            raise NonEllipticError("eigenvalues do not form conjugate pairs")
        used[i] = used[partner] = True
        best = None
        for idx in (i, partner):
            v = vecs[:, idx]
            s = complex(v @ J @ np.conj(v))       # sigma(v, conj v), purely imaginary
            if (1j * s).real > 0:
                best = (idx, s)
        if best is None:
            raise NonEllipticError("no positive-Lagrangian eigenvector in pair")
        idx, s = best
        v = vecs[:, idx] * math.sqrt(2.0 / abs(s.imag))
        angle = float(np.angle(lam[idx])) % TWO_PI
        chosen_alpha.append(angle)
        chosen_vec.append(v)
    order = np.argsort(chosen_alpha)
    alpha = np.array([chosen_alpha[i] for i in order])
    eigvecs = np.column_stack([chosen_vec[i] for i in order])
    # non-resonance witness over small integer combinations
    best_div, best_combo = math.inf, (0,) * n
    rng_sets: List[Tuple[int, ...]] = []

    def combos(prefix, budget):
        if len(prefix) == n:
            if any(prefix):
                rng_sets.append(tuple(prefix))
            return
        for v in range(-budget, budget + 1):
            combos(prefix + [v], budget - abs(v))
    combos([], witness_order)
    for combo in rng_sets:
        val = float(np.dot(combo, alpha))
        dist = abs(val - TWO_PI * round(val / TWO_PI))
        if dist < best_div:
            best_div, best_combo = dist, combo
    if best_div < resonance_tol:
        raise DegenerateError(
            f"near-resonance: combination m = {best_combo} gives "
            f"|m·alpha mod 2pi| = {best_div:.3e} < {resonance_tol:g}")
    det_factor = float(np.real(np.linalg.det(np.eye(2 * n) - m.P)))
    return FloquetData(alpha, eigvecs, 1.0 / (1.0 - np.exp(1j * alpha)),
                       det_factor, best_div, best_combo)


# ---------------------------------------------------------------------- #
# the twisted frame

class JacobiFrame:
    """Normalized complex eigenfields along the geodesic, twisted-exact.

    Y[i][j] is the i-th component of the j-th eigenfield as a twisted Fourier
    coefficient (twist alpha_j); Ydot is its exact s-derivative.  The frame
    feeds the weighted substitution replacing the transverse position x_i and
    momentum xi_i by
        x_i  -> (1/2) L^{-1/2} sum_j ( conj(Y_ij) z_j + Y_ij conj(z_j) ),
        xi_i -> (1/2) L^{+1/2} sum_j ( conj(Ydot_ij) z_j + Ydot_ij conj(z_j) ),
    which is symplectic by the Wronskian normalization.
    """

    __slots__ = ("L", "nvars", "floquet", "Y", "Ydot", "fit_residual")

    def __init__(self, L: float, floquet: FloquetData,
                 Y: List[List[PeriodicCoefficient]],
                 Ydot: List[List[PeriodicCoefficient]],
                 fit_residual: float):
        self.L = float(L)
        self.nvars = floquet.nvars
        self.floquet = floquet
        self.Y = Y
        self.Ydot = Ydot
        self.fit_residual = float(fit_residual)

    @property
    def alpha(self) -> np.ndarray:
        return self.floquet.alpha

    # ------------------------------------------------------------ #
    # invariants

    def wronskian_defect(self) -> float:
        """Max deviation of conj(Y)^T Ydot - conj(Ydot)^T Y from 2i*I."""
        n = self.nvars
        worst = 0.0
        for i in range(n):
            for j in range(n):
                acc = PeriodicCoefficient.zero(self.L)
                for l in range(n):
                    acc = acc + self.Y[l][i].conjugate() * self.Ydot[l][j] \
                        - self.Ydot[l][i].conjugate() * self.Y[l][j]
                if i == j:
                    acc = acc - PeriodicCoefficient.constant(2j, self.L)
                worst = max(worst, acc.max_abs())
        return worst

    def jacobi_residual(self, K: List[List[PeriodicCoefficient]]) -> float:
        """Max coefficient norm of Y'' + K(s) Y."""
        n = self.nvars
        worst = 0.0
        for j in range(n):
            for i in range(n):
                acc = self.Y[i][j].derivative().derivative()
                for l in range(n):
                    acc = acc + K[i][l] * self.Y[l][j]
                worst = max(worst, acc.max_abs())
        return worst

    # ------------------------------------------------------------ #
    # substitution interface

    def substitution_forms(self) -> Tuple[List[WeylPolynomial], List[WeylPolynomial]]:
        """Images of the physical z_i = x_i + i xi_i in the model variables."""
        n = self.nvars
        rootL = math.sqrt(self.L)
        z_forms = []
        for i in range(n):
            form = WeylPolynomial.zero(n, self.L)
            for j in range(n):
                e = tuple(1 if l == j else 0 for l in range(n))
                zero = (0,) * n
                a = self.Y[i][j].conjugate().scale(0.5 / rootL) \
                    + self.Ydot[i][j].conjugate().scale(0.5j * rootL)
                b = self.Y[i][j].scale(0.5 / rootL) \
                    + self.Ydot[i][j].scale(0.5j * rootL)
                term = WeylPolynomial({(e, zero): a, (zero, e): b}, n, self.L)
                form = form + term
            z_forms.append(form)
        zbar_forms = [f.adjoint() for f in z_forms]
        return z_forms, zbar_forms

    def substitute(self, a: WeylPolynomial) -> WeylPolynomial:
        z_forms, zbar_forms = self.substitution_forms()
        return substitute_linear(a, z_forms, zbar_forms)

    def frame_symplectic_defect(self) -> float:
        """P_1-Gram deviation of the substitution frame from the model frame."""
        z_forms, zbar_forms = self.substitution_forms()
        n = self.nvars
        defect = 0.0
        for i in range(n):
            for j in range(n):
                gram = transvectant(1, z_forms[i], zbar_forms[j])
                target = WeylPolynomial.constant(1.0 if i == j else 0.0, n, self.L)
                defect = max(defect, (gram - target).max_abs())
                defect = max(defect, transvectant(1, z_forms[i], z_forms[j]).max_abs())
        return float(defect)

    def a_l_matrix(self, s: float) -> np.ndarray:
        """Real 2n x 2n matrix of the weighted substitution at arclength s,
        mapping (Re z, Im z) to (x, xi)."""
        n = self.nvars
        rootL = math.sqrt(self.L)
        M = np.zeros((2 * n, 2 * n))
        for i in range(n):
            for j in range(n):
                y = complex(self.Y[i][j](s))
                yd = complex(self.Ydot[i][j](s))
                # x_i = Re(conj(y) z)/rootL ; xi_i = rootL * Re(conj(yd) z)
                M[i, j] = y.real / rootL
                M[i, n + j] = y.imag / rootL
                M[n + i, j] = yd.real * rootL
                M[n + i, n + j] = yd.imag * rootL
        return M

    def a_l_symplectic_defect(self, samples: int = 16) -> float:
        J = _standard_symplectic(self.nvars)
        worst = 0.0
        for s in np.linspace(0.0, self.L, samples, endpoint=False):
            M = self.a_l_matrix(float(s))
            worst = max(worst, float(np.max(np.abs(M.T @ J @ M - J))))
        return worst

    def to_json(self, samples: int = 32) -> dict:
        grid = np.linspace(0.0, self.L, samples, endpoint=False)
        return {
            "L": self.L,
            "alpha": self.alpha.tolist(),
            "beta": [[b.real, b.imag] for b in self.floquet.beta],
            "grid": grid.tolist(),
            "Y": [[[complex(c(s)).real, complex(c(s)).imag]
                   for s in grid] for row in self.Y for c in row],
            "Ydot": [[[complex(c(s)).real, complex(c(s)).imag]
                      for s in grid] for row in self.Ydot for c in row],
            "fit_residual": self.fit_residual,
        }


def build_frame(g: MetricGerm, floquet: Optional[FloquetData] = None,
                samples: int = 256) -> JacobiFrame:
    """Propagate the normalized eigenvectors and project onto twisted Fourier
    coefficients (exact quasi-periodicity; derivatives taken spectrally)."""
    n = g.nvars
    K = g.curvature_matrix()
    if floquet is None:
        floquet = floquet_decompose(integrate_monodromy(g))
    init = np.asarray(floquet.eigvecs)   # 2n x n complex
    sol_re = _integrate(K, g.L, n, np.real(init), dense=True)
    sol_im = _integrate(K, g.L, n, np.imag(init), dense=True)
    grid = np.linspace(0.0, g.L, samples, endpoint=False)
    vals = sol_re.sol(grid) + 1j * sol_im.sol(grid)   # (2n*n, samples)
    vals = vals.reshape(2 * n, n, samples)
    Y: List[List[PeriodicCoefficient]] = [[None] * n for _ in range(n)]
    Ydot: List[List[PeriodicCoefficient]] = [[None] * n for _ in range(n)]
    fit_residual = 0.0
    for j in range(n):
        phase = np.exp(-1j * floquet.alpha[j] * grid / g.L)
        for i in range(n):
            series = np.fft.fft(vals[i, j] * phase) / samples
            modes = np.fft.fftshift(series)
            offset = -(samples // 2)
            coeff = PeriodicCoefficient(offset, modes, g.L,
                                        twist_angle=floquet.alpha[j])
            Y[i][j] = coeff
            Ydot[i][j] = coeff.derivative()
            fit_residual = max(fit_residual, float(np.max(np.abs(
                coeff(grid) - vals[i, j]))))
            fit_residual = max(fit_residual, float(np.max(np.abs(
                Ydot[i][j](grid) - vals[n + i, j]))))
    return JacobiFrame(g.L, floquet, Y, Ydot, fit_residual)


# ---------------------------------------------------------------------- #
# random elliptic samples for property tests

def random_elliptic_germ(rng: np.random.Generator, nvars: int = 1,
                         resonance_tol: float = 1e-3, max_tries: int = 60,
                         **germ_kwargs) -> Tuple[MetricGerm, Monodromy, FloquetData]:
    """Draw random band-limited germs until the monodromy is elliptic and
    safely non-resonant (witness divisor above `resonance_tol`)."""
    from .germs import germ_from_curvature_matrix, random_curvature_matrix, \
        random_germ_2d
    for _ in range(max_tries):
        if nvars == 1:
            g = random_germ_2d(rng, **germ_kwargs)
        else:
            L = float(rng.uniform(3.0, 7.0))
            g = germ_from_curvature_matrix(
                random_curvature_matrix(rng, nvars, L), L)
        try:
            m = integrate_monodromy(g)
            fd = floquet_decompose(m, resonance_tol=resonance_tol)
        except (NonEllipticError, DegenerateError):
            continue
        return g, m, fd
    raise RuntimeError("failed to sample an elliptic non-resonant germ")


# ---------------------------------------------------------------------- #
# conjugate points

def conjugate_point_count(g: MetricGerm, samples: int = 4096,
                          endpoint_tol: float = 1e-9) -> int:
    """Morse index as the multiplicity-weighted count of conjugate points in
    (0, L]: zeros of det Y_D(s) for the solution with Y(0) = 0, Ydot(0) = I.

    Sign changes count as simple zeros; deep local minima of |det| without a
    sign change count as double (tangential) zeros.
    """
    n = g.nvars
    K = g.curvature_matrix()
    init = np.concatenate([np.zeros((n, n)), np.eye(n)])
    sol = _integrate(K, g.L, n, init, dense=True)
    grid = np.linspace(0.0, g.L, samples + 1)[1:]
    dets = np.empty(samples)
    for idx, s in enumerate(grid):
        mats = sol.sol(s).reshape(2 * n, n)
        dets[idx] = np.linalg.det(mats[:n])
    scale = float(np.max(np.abs(dets)))
    if abs(dets[-1]) < endpoint_tol * scale:
        raise ValueError("conjugate point at s = L within tolerance; "
                         "index count is ill-posed")
    count = 0
    idx = 1
    while idx < samples:
        prev, cur = dets[idx - 1], dets[idx]
        if cur == 0.0:
            count += 1
            idx += 2      # land past the grid-exact zero
            continue
        if prev * cur < 0:
            count += 1
        elif 0 < idx < samples - 1 and abs(cur) < 1e-4 * scale \
                and abs(cur) < abs(prev) and abs(cur) < abs(dets[idx + 1]) \
                and prev * dets[idx + 1] > 0:
            count += 2    # tangential dip: even-multiplicity zero
        idx += 1
    return count
