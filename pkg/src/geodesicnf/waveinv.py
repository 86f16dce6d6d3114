"""Wave-trace invariants from the normal-form ladder.

The length-spectrum contribution of the geodesic is a distribution whose
regular part is generated by the twisted oscillator trace
T(alpha) = prod_j e^{i alpha_j/2} (1 - e^{i alpha_j})^{-1}.  Acting on T with
a polynomial in the ladder shifts evaluates, in closed form, sums
sum_q F(q + 1/2) e^{i (q+1/2)·alpha} over the transverse quantum numbers.
The invariant of order k is obtained by expanding the normal-form resolvent
in the tangential symbol u = L D_s and taking the residue (the coefficient
of u^{-1}); the result is such a polynomial applied to T.

All closed forms are exact rational-trigonometric expressions in
beta_j = (1 - e^{i alpha_j})^{-1}; a damped-series oracle lives in the test
suite only.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .fourier import ResonanceError
from .germs import MetricGerm
from .jacobi import JacobiFrame, conjugate_point_count
from .normalform import QbnfResult
from .symbols import MultiIndex, diagonal_eigenvalue_polynomial

__all__ = [
    "WaveInvariantReport",
    "convention_ledger",
    "hermite_trace",
    "trace_distribution",
    "wave_invariant",
    "with_principal",
    "beta_form_check",
    "morse_index",
]

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------- #
# closed-form ladder sums


def _beta_polys(kmax: int) -> List[np.ndarray]:
    """G_k with sum_q (q+1/2)^k e^{i(q+1/2)a} = T(a) * G_k(beta).

    Differentiating the geometric sum once in the angle multiplies by
    i(q+1/2); in terms of beta = (1-e^{ia})^{-1} this gives the recursion
    G_k = (beta - 1/2) G_{k-1} + (beta^2 - beta) G_{k-1}'.
    Coefficient arrays ascending in beta.
    """
    polys = [np.array([1.0])]
    while len(polys) <= kmax:
        g = polys[-1]
        nxt = np.zeros(len(g) + 1)
        nxt[1:] += g                      # beta * G
        nxt[:-1] += -0.5 * g              # -1/2 * G
        dg = g[1:] * np.arange(1, len(g))
        nxt[2:len(dg) + 2] += dg          # beta^2 * G'
        nxt[1:len(dg) + 1] -= dg          # -beta * G'
        polys.append(nxt)
    return polys


def _check_nonresonant(alpha: Sequence[float], tol: float) -> None:
    for a in alpha:
        div = abs(1.0 - cmath.exp(1j * a))
        if div <= tol:
            raise ResonanceError(float(a), float(div),
                                 detail=" in trace evaluation")


def trace_distribution(alpha: Sequence[float], resonance_tol: float = 1e-8) -> complex:
    """T(alpha) = prod_j e^{i alpha_j / 2} / (1 - e^{i alpha_j})."""
    _check_nonresonant(alpha, resonance_tol)
    out = 1.0 + 0.0j
    for a in alpha:
        out *= cmath.exp(0.5j * a) / (1.0 - cmath.exp(1j * a))
    return out


def hermite_trace(F: Mapping[MultiIndex, complex], alpha: Sequence[float],
                  resonance_tol: float = 1e-8) -> complex:
    """Closed form of sum_{q in Z_{>=0}^n} F(q + 1/2) e^{i (q+1/2)·alpha}.

    ``F`` maps exponent tuples e to the coefficient of prod_j x_j^(e_j).
    The sum factorizes over the variables; each factor is T(alpha_j) times a
    polynomial in beta_j = (1 - e^{i alpha_j})^{-1}.
    """
    alpha = [float(a) for a in alpha]
    _check_nonresonant(alpha, resonance_tol)
    n = len(alpha)
    kmax = max((max(e, default=0) for e in F), default=0)
    polys = _beta_polys(kmax)
    beta = [1.0 / (1.0 - cmath.exp(1j * a)) for a in alpha]
    base = [cmath.exp(0.5j * a) * b for a, b in zip(alpha, beta)]
    S = [[base[j] * complex(np.polynomial.polynomial.polyval(beta[j], polys[k]))
          for k in range(kmax + 1)] for j in range(n)]
    total = 0.0 + 0.0j
    for e, c in F.items():
        if len(e) != n:
            raise ValueError("exponent arity does not match alpha")
        term = complex(c)
        for j, ej in enumerate(e):
            term *= S[j][ej]
        total += term
    return total


# ---------------------------------------------------------------------- #
# Laurent bookkeeping in the tangential symbol u (u = L D_s; its eigenvalue
# on the m-th tangential mode e^{2 pi i m s / L} is 2 pi m)

_XPoly = Dict[MultiIndex, complex]
_Laurent = Dict[int, _XPoly]


def _xp_mul(a: _XPoly, b: _XPoly) -> _XPoly:
    out: _XPoly = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            key = tuple(x + y for x, y in zip(ea, eb))
            out[key] = out.get(key, 0.0) + ca * cb
    return out


def _l_add(a: _Laurent, b: _Laurent) -> _Laurent:
    out = {p: dict(xp) for p, xp in a.items()}
    for p, xp in b.items():
        tgt = out.setdefault(p, {})
        for e, c in xp.items():
            tgt[e] = tgt.get(e, 0.0) + c
    return out


def _l_mul(a: _Laurent, b: _Laurent, pmin: int, pmax: int) -> _Laurent:
    out: _Laurent = {}
    for pa, xa in a.items():
        for pb, xb in b.items():
            p = pa + pb
            if p < pmin or p > pmax:
                continue
            prod = _xp_mul(xa, xb)
            tgt = out.setdefault(p, {})
            for e, c in prod.items():
                tgt[e] = tgt.get(e, 0.0) + c
    return out


def _l_scale(a: _Laurent, c: complex) -> _Laurent:
    return {p: {e: v * c for e, v in xp.items()} for p, xp in a.items()}


# ---------------------------------------------------------------------- #
# reports


@dataclass
class WaveInvariantReport:
    k: int
    a: complex
    a_raw: complex
    beta: Tuple[complex, ...]
    morse_index: Optional[int]
    principal: Optional[complex]
    alpha: Tuple[float, ...]
    L: float
    conventions: Dict[str, str] = field(default_factory=dict)

    def to_json(self) -> dict:
        def c(z):
            return {"re": z.real, "im": z.imag}
        return {
            "k": self.k,
            "a": c(self.a),
            "a_raw": c(self.a_raw),
            "beta": [c(b) for b in self.beta],
            "sigma": self.morse_index,
            "c_gamma": None if self.principal is None else c(self.principal),
            "alpha": list(self.alpha),
            "L": self.L,
            "conventions": dict(self.conventions),
        }


_CONVENTIONS = {
    "trace": "T(alpha) = prod_j i / (2 sin(alpha_j / 2))",
    "laurent_variable": "u is the tangential symbol L D_s (eigenvalue 2 pi m "
                        "on the mode e^{2 pi i m s / L}); all correction "
                        "denominators are powers of u",
    "residue": "F_k = [u^-1] of ((u + sum_j alpha_j x_j)/L "
               "+ P_{k+1}(u, x))^k * exp(i L P_{k+1}),  "
               "P_{k+1} = sum_{nu=1}^{k+1} ptilde_nu(x) / u^nu",
    "eigenvalue_expansion": "ladder eigenvalues satisfy lambda = r + "
                            "sum_nu p_nu(q + 1/2) / (L r)^nu with "
                            "L r = 2 pi m + sum_j alpha_j (q_j + 1/2); the "
                            "binomial ptilde ladder re-expands those "
                            "denominators in powers of u",
    "normalization": "a = L * hermite_trace(F_k / (i L)); the unnormalized "
                     "residue value is a_raw = i * a",
    "action_table": "ptilde contracted on |z|^0 -> 1, |z|^2 -> x, "
                    "|z|^4 -> x^2 + x - 1/2 (x = q + 1/2)",
    "principal": "c_gamma = i^sigma * L * |det(I - P_gamma)|^(-1/2) with the "
                 "input germ treated as primitive (L^# = L)",
    "moyal": "operator composition uses the transvectant series a # b = "
             "sum_k (i^k / k!) T_k(a, b); [Op(z), Op(zbar)] = 2 under it",
    "floquet": "alpha_j in (0, 2 pi), branch fixed by the positively "
               "oriented invariant plane of the linearized return map; "
               "non-resonance is checked before every small divisor",
    "curvature": "tau(s, nu) is the sectional-curvature jet along the "
                 "geodesic in parallel normal coordinates; for a profile "
                 "a(r) of a surface of revolution tau = -a''(0)/a(0)",
    "grading": "expansion ladders are keyed by integers m, the key-m term "
               "carrying the semiclassical prefactor h^{m/2 - 2}; the "
               "reduction clears keys in increasing m and freezes each "
               "cleared term",
}


def convention_ledger() -> Dict[str, str]:
    """The fixed normalization choices every report is interpreted under."""
    return dict(_CONVENTIONS)


def _contract(q: QbnfResult, nu: int, table: str) -> _XPoly:
    return dict(diagonal_eigenvalue_polynomial(q.p_tilde[nu], table=table))


def wave_invariant(q: QbnfResult, k: int, fr: JacobiFrame,
                   table: str = "contracted",
                   resonance_tol: float = 1e-8) -> WaveInvariantReport:
    """Invariant of order k of the geodesic's wave-trace singularity.

    Expands the normal-form resolvent in the tangential symbol u (the
    operator L D_s, eigenvalue 2 pi m on the m-th mode): with
    P_{k+1}(u, x) = sum_nu ptilde_nu(x)/u^nu, the residue

        F_k = [u^{-1}]  ((u + sum_j alpha_j x_j)/L + P_{k+1})^k
                        * exp(i L P_{k+1})

    is a polynomial in the shifted quantum numbers x_j = q_j + 1/2, and
    a_k = L * hermite_trace(F_k / (iL), alpha).  At leading order this
    reduces to a_0 = (L^2/2) * hermite_trace(f_0, alpha).  The u-powers
    match the ladder eigenvalue law lambda = r + sum_nu p_nu/(L r)^nu,
    L r = u + sum_j alpha_j x_j, via the binomial ptilde re-expansion.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if q.K < k:
        raise ValueError(f"normal form complete to order {q.K}; need K >= {k}")
    alpha = tuple(float(a) for a in fr.alpha)
    if len(alpha) != q.nvars:
        raise ValueError("frame and normal form have different variable counts")
    L = q.L
    _check_nonresonant(alpha, resonance_tol)

    one: _XPoly = {(0,) * q.nvars: 1.0}
    P: _Laurent = {-nu: _contract(q, nu, table) for nu in range(1, k + 2)}
    pmin, pmax = -(2 * k + 2), max(k, 0) + 1

    # exp(i L P): P only has negative powers, so the truncated series is finite
    expP: _Laurent = {0: dict(one)}
    power: _Laurent = {0: dict(one)}
    for t in range(1, 2 * k + 3):
        power = _l_mul(power, P, pmin, 0)
        if not power:
            break
        coef = (1j * L) ** t / math.factorial(t)
        expP = _l_add(expP, _l_scale(power, coef))

    bracket: _Laurent = {
        1: {(0,) * q.nvars: 1.0 / L},
        0: {tuple(1 if l == j else 0 for l in range(q.nvars)): alpha[j] / L
            for j in range(q.nvars)},
    }
    bracket = _l_add(bracket, P)

    series: _Laurent = {0: dict(one)}
    for _ in range(k):
        series = _l_mul(series, bracket, pmin, pmax)
    series = _l_mul(series, expP, pmin, pmax)

    F_raw = series.get(-1, {})
    F_norm = {e: c / (1j * L) for e, c in F_raw.items()}
    a = L * hermite_trace(F_norm, alpha, resonance_tol)
    a_raw = hermite_trace(F_raw, alpha, resonance_tol)

    beta = tuple(1.0 / (1.0 - cmath.exp(1j * aj)) for aj in alpha)
    conventions = dict(_CONVENTIONS)
    conventions["action_table"] = (
        _CONVENTIONS["action_table"] if table == "contracted"
        else "ptilde contracted on the symmetric-quantization ladder table")
    return WaveInvariantReport(
        k=k, a=a, a_raw=a_raw, beta=beta, morse_index=None, principal=None,
        alpha=alpha, L=L, conventions=conventions)


def with_principal(report: WaveInvariantReport, g: MetricGerm,
                   fr: JacobiFrame) -> WaveInvariantReport:
    """Attach the Morse index and the principal factor c_gamma to a report."""
    sigma = morse_index(g, fr)
    det = 1.0
    for aj in report.alpha:
        det *= 4.0 * math.sin(0.5 * aj) ** 2
    report.morse_index = sigma
    report.principal = (1j ** sigma) * report.L / math.sqrt(det)
    return report


def beta_form_check(q: QbnfResult, fr: JacobiFrame,
                    alphas: Optional[Sequence[float]] = None) -> dict:
    """Fit the angle dependence of the leading invariant on {2b^2-b-3/4, 1}.

    Samples a_0(alpha)/(L T(alpha)) over non-resonant angles and solves the
    real least-squares problem against the two-term basis in
    b = (1-e^{i alpha})^{-1}; for a surface the fit is exact and returns the
    action coefficients (B4, B0) of the leading polynomial.
    """
    if q.nvars != 1:
        raise ValueError("the two-term angle basis applies to surfaces")
    if alphas is None:
        alphas = [TWO_PI * j / 25.0 for j in range(1, 25) if j != 12][:12]
    F = _contract(q, 1, "contracted")
    rows: List[List[float]] = []
    rhs: List[float] = []
    for a in alphas:
        beta = 1.0 / (1.0 - cmath.exp(1j * a))
        y = hermite_trace(F, [a]) / trace_distribution([a])
        basis = [2.0 * beta * beta - beta - 0.75, 1.0 + 0.0j]
        rows.append([b.real for b in basis])
        rhs.append(y.real)
        rows.append([b.imag for b in basis])
        rhs.append(y.imag)
    A = np.array(rows)
    b = np.array(rhs)
    sol, *_ = np.linalg.lstsq(A, b, rcond=None)
    resid = float(np.max(np.abs(A @ sol - b)))
    cond = float(np.linalg.cond(A))
    if cond > 1e8:
        raise ValueError(f"ill-conditioned angle sample set (cond {cond:.3g})")
    return {
        "B4": float(sol[0]),
        "B0": float(sol[1]),
        "residual": resid,
        "cond": cond,
        "n_samples": len(list(alphas)),
    }


def morse_index(g: MetricGerm, fr: JacobiFrame) -> int:
    """Multiplicity-weighted count of conjugate points on one period."""
    if abs(fr.L - g.L) > 1e-12 * max(1.0, g.L):
        raise ValueError("frame and germ periods differ")
    return conjugate_point_count(g)
