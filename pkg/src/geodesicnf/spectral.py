"""End-to-end eigenvalue oracle for surfaces of revolution.

For the metric dr^2 + a(r)^2 dtheta^2 the Laplace eigenvalue problem
separates: the angular sector k leaves the radial Sturm-Liouville
problem

    -(1/a) (a u')' + (k^2 / a^2) u = lambda^2 u.

The substitution v = sqrt(a) u brings it to standard form
-v'' + Q v = lambda^2 v with Q = k^2/a^2 + a''/(2a) - (a'/a)^2/4,
discretized by symmetric second-order finite differences on a domain
sized from the transverse harmonic-oscillator scale, with a two-mesh
Richardson extrapolation supplying both the eigenvalues and their
error bounds.  The resulting ladders lambda_{kq} feed a least-squares
fit of the correction series lambda - r = p1 / (L r) + O((L r)^-2),
giving an engine-independent measurement of the first
eigenvalue-correction polynomial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import eig_banded

from .germs import ProfileLike

__all__ = [
    "EigenLadder",
    "rev_surface_eigenvalues",
    "quasimode_fit",
]


@dataclass
class EigenLadder:
    """Ascending eigenvalue square roots of one angular sector.

    ``error_bounds[q]`` is the Richardson estimate of the remaining
    discretization error of ``lambdas[q]``; construction fails instead
    of returning a ladder that misses its tolerance.
    """

    k: int
    lambdas: np.ndarray
    error_bounds: np.ndarray
    mesh: dict

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "lambdas": list(map(float, self.lambdas)),
            "error_bounds": list(map(float, self.error_bounds)),
            "mesh": self.mesh,
        }


def _profile_callables(a: ProfileLike
                       ) -> Tuple[Callable[[np.ndarray], np.ndarray],
                                  Callable[[np.ndarray], np.ndarray],
                                  Callable[[np.ndarray], np.ndarray]]:
    """(a, a', a'') as vectorized callables; exact for polynomials."""
    if isinstance(a, (list, tuple)) and len(a) == 3 and all(callable(f) for f in a):
        f, df, d2f = a
        return (np.vectorize(f, otypes=[float]),
                np.vectorize(df, otypes=[float]),
                np.vectorize(d2f, otypes=[float]))
    if isinstance(a, (list, tuple, np.ndarray)):
        a = np.polynomial.Polynomial(np.asarray(a, dtype=float))
    if isinstance(a, np.polynomial.Polynomial):
        d1, d2 = a.deriv(), a.deriv(2)
        return (lambda r: a(r), lambda r: d1(r), lambda r: d2(r))
    f = np.vectorize(a, otypes=[float])

    def df(r: np.ndarray, h: float = 1e-4) -> np.ndarray:
        return (8 * (f(r + h) - f(r - h)) - (f(r + 2 * h) - f(r - 2 * h))) / (12 * h)

    def d2f(r: np.ndarray, h: float = 1e-4) -> np.ndarray:
        return (16 * (f(r + h) + f(r - h)) - (f(r + 2 * h) + f(r - 2 * h))
                - 30 * f(r)) / (12 * h * h)

    return f, df, d2f


def _domain_radius(f: Callable, a0: float, k: int, tau: float,
                   q_max: int) -> float:
    """Half-width containing the low modes to far below solver accuracy.

    The q-th transverse mode lives on the oscillator scale
    w = (k^2 tau / a0^4)^(-1/4); seven extra widths leave far less than
    1e-12 of its mass outside.  The domain is also kept inside the
    region where the profile stays comparable to its equator value.
    """
    w = (k * k * tau / a0 ** 4) ** -0.25
    R = w * (math.sqrt(2.0 * q_max + 1.0) + 7.0)
    r_limit = 0.0
    step = max(w, 1e-3 * a0)
    while r_limit < 1e3 * a0:
        r_limit += step
        if min(float(f(r_limit)), float(f(-r_limit))) < 0.5 * a0:
            break
    return min(R, 0.9 * r_limit)


def _sector_eigenvalues(Q_of: Callable[[np.ndarray], np.ndarray], R: float,
                        n_interior: int, count: int) -> np.ndarray:
    """Lowest eigenvalues of -v'' + Q v with v(+-R) = 0, FD2."""
    h = 2.0 * R / (n_interior + 1)
    r = -R + h * np.arange(1, n_interior + 1)
    bands = np.empty((2, n_interior))
    bands[0] = 2.0 / (h * h) + Q_of(r)
    bands[1] = -1.0 / (h * h)
    vals = eig_banded(bands, lower=True, eigvals_only=True,
                      select="i", select_range=(0, count - 1))
    return vals


def rev_surface_eigenvalues(a: ProfileLike, k_range: Iterable[int],
                            q_max: int = 1, mesh_points: int = 6144,
                            tol: float = 1e-6) -> List[EigenLadder]:
    """Eigenvalue ladders lambda_{kq}, q = 0..q_max, per angular sector k.

    ``tol`` bounds the accepted per-eigenvalue discretization error of
    sqrt(eigenvalue); an unconverged sector raises instead of returning
    a silently wrong ladder.
    """
    f, df, d2f = _profile_callables(a)
    a0 = float(f(0.0))
    if a0 <= 0.0:
        raise ValueError("profile radius must be positive at the equator")
    if abs(float(df(0.0))) > 1e-8 * a0:
        raise ValueError("equator is not a geodesic: a'(0) != 0")
    tau = -float(d2f(0.0)) / a0
    if tau <= 0.0:
        raise ValueError("equator is not elliptic: -a''(0)/a(0) <= 0")

    ladders = []
    for k in sorted(set(int(k) for k in k_range)):
        if k <= 0:
            raise ValueError("angular sectors must be positive integers")
        R = _domain_radius(f, a0, k, tau, q_max)

        def Q_of(r: np.ndarray) -> np.ndarray:
            av, dv, d2v = f(r), df(r), d2f(r)
            return (k * k / av ** 2 + 0.5 * d2v / av - 0.25 * (dv / av) ** 2)

        coarse = _sector_eigenvalues(Q_of, R, mesh_points, q_max + 1)
        fine = _sector_eigenvalues(Q_of, R, 2 * mesh_points + 1, q_max + 1)
        extrap = (4.0 * fine - coarse) / 3.0
        bound_sq = np.abs(fine - coarse) / 3.0
        if np.any(extrap <= 0.0):
            raise ValueError(f"sector k={k}: non-positive eigenvalue; "
                             "domain or mesh unsuitable")
        lambdas = np.sqrt(extrap)
        bounds = bound_sq / (2.0 * lambdas)
        if np.any(bounds > tol):
            raise ValueError(
                f"sector k={k}: eigenvalue error bound {bounds.max():.2e} "
                f"exceeds tol={tol:.2e}; refine the mesh")
        ladders.append(EigenLadder(
            k=k, lambdas=lambdas, error_bounds=bounds,
            mesh={"R": R, "interior_points": [mesh_points, 2 * mesh_points + 1],
                  "scheme": "fd2+richardson"}))
    return ladders


def quasimode_fit(ladders: Sequence[EigenLadder], alpha: float, L: float,
                  q_max: int = 1) -> Dict[int, dict]:
    """Fit lambda_{kq} - r_{kq} = p1 / (L r_{kq}) + O((L r)^-2) per level.

    The expansion runs in the phase variable L r = 2 pi k + (q+1/2) alpha,
    which makes the fitted slope directly comparable to the engine's
    correction polynomial p1 evaluated at q + 1/2 (the L-r denominator
    was pinned numerically by rescaling a fixed profile, which separates
    an L factor from a 2 pi).  ``alpha`` is the unreduced rotation angle
    of the transverse frame over one period (for a revolution profile,
    sqrt(tau) L); shifting it by 2 pi relabels k without changing the
    fit, so the caller fixes the branch.  Returns, per q, the fitted
    ``p1``, a residual-based confidence half-width, and the fit
    residual.  A ladder whose scaled residuals (lambda - r) L r are
    wildly non-constant is reported as misaligned instead of silently
    fitted.
    """
    if len(ladders) < 3:
        raise ValueError("need at least three angular sectors to fit")
    out: Dict[int, dict] = {}
    for q in range(q_max + 1):
        rs, ys = [], []
        for lad in ladders:
            if len(lad.lambdas) <= q:
                raise ValueError(f"ladder k={lad.k} has no level q={q}")
            r = (2.0 * math.pi * lad.k + (q + 0.5) * alpha) / L
            rs.append(r)
            ys.append(float(lad.lambdas[q]) - r)
        phases = L * np.asarray(rs)
        ys = np.asarray(ys)
        scaled = ys * phases
        # On an aligned ladder, (lambda - r) L r is constant up to O(1/r);
        # mislabeled k or a wrong alpha branch makes it drift linearly.
        drift_slope, drift_mean = np.polyfit(phases, scaled, 1)
        drift = abs(float(drift_slope)) * float(phases.max() - phases.min())
        if drift > 0.3 * max(abs(float(np.mean(scaled))), 1e-3):
            raise ValueError(
                f"q={q}: ladder misaligned with the quasi-eigenvalue grid "
                f"((lambda - r) L r spans {scaled.min():.3g}..{scaled.max():.3g}); "
                "check alpha branch and k labels")
        X = np.column_stack([1.0 / phases, 1.0 / phases ** 2])
        coef, _, _, _ = np.linalg.lstsq(X, ys, rcond=None)
        resid = ys - X @ coef
        rms = float(np.sqrt(np.mean(resid ** 2)))
        dof = max(1, len(rs) - 2)
        cov = np.linalg.inv(X.T @ X) * (float(resid @ resid) / dof)
        out[q] = {
            "p1": float(coef[0]),
            "confidence": float(math.sqrt(max(cov[0, 0], 0.0))),
            "residual": rms,
            "n_sectors": len(rs),
        }
    return out
