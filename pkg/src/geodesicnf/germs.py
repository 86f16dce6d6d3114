"""Metric germs in Fermi coordinates along a closed geodesic.

A germ stores the transverse jets of the *inverse* metric components,
raw derivatives d^beta/dy^beta g^{ij}(s, 0), as twisted-free periodic
coefficient functions of arclength.  Dimension-2 germs are generated from
curvature data (tau, tau_nu, tau_nunu, optional higher normal jets) through
the normal Jacobi recursion J'' = -K J for the volume factor J = sqrt(det g),
which produces every universal Fermi-expansion coefficient to any order.

The module also provides surface-of-revolution constructors (the equator of
r -> a(r) is a closed geodesic when a'(r0) = 0), the parabolic rescaling
g -> eps^2 g, gauge validation, JSON serialization, and named presets used by
the command line.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .fourier import TWO_PI, PeriodicCoefficient, real_band_limited

MultiIndex = Tuple[int, ...]
JetKey = Tuple[int, int, MultiIndex]


def _factorial_multi(beta: MultiIndex) -> int:
    out = 1
    for b in beta:
        out *= math.factorial(b)
    return out


# ---------------------------------------------------------------------- #
# jet-series calculus in the transverse variables

class JetPolynomial:
    """Truncated Taylor polynomial in the transverse coordinates y_1..y_n
    with periodic coefficient functions of s; exact ring operations modulo
    the truncation order."""

    __slots__ = ("coeffs", "nvars", "period", "max_order")

    def __init__(self, coeffs: Mapping[MultiIndex, PeriodicCoefficient],
                 nvars: int, period: float, max_order: int):
        self.coeffs: Dict[MultiIndex, PeriodicCoefficient] = {
            k: v for k, v in coeffs.items()
            if sum(k) <= max_order and not v.is_zero}
        self.nvars = nvars
        self.period = float(period)
        self.max_order = int(max_order)

    @classmethod
    def zero(cls, nvars: int, period: float, max_order: int) -> "JetPolynomial":
        return cls({}, nvars, period, max_order)

    @classmethod
    def constant(cls, value: complex, nvars: int, period: float,
                 max_order: int) -> "JetPolynomial":
        return cls({(0,) * nvars: PeriodicCoefficient.constant(value, period)},
                   nvars, period, max_order)

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def coefficient(self, beta: MultiIndex) -> PeriodicCoefficient:
        return self.coeffs.get(tuple(beta), PeriodicCoefficient.zero(self.period))

    def __add__(self, other: "JetPolynomial") -> "JetPolynomial":
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out[k] + v if k in out else v
        return JetPolynomial(out, self.nvars, self.period,
                             min(self.max_order, other.max_order))

    def __neg__(self) -> "JetPolynomial":
        return JetPolynomial({k: -v for k, v in self.coeffs.items()},
                             self.nvars, self.period, self.max_order)

    def __sub__(self, other: "JetPolynomial") -> "JetPolynomial":
        return self + (-other)

    def scale(self, c: complex) -> "JetPolynomial":
        return JetPolynomial({k: v.scale(c) for k, v in self.coeffs.items()},
                             self.nvars, self.period, self.max_order)

    def __mul__(self, other: "JetPolynomial") -> "JetPolynomial":
        order = min(self.max_order, other.max_order)
        out: Dict[MultiIndex, PeriodicCoefficient] = {}
        for ka, va in self.coeffs.items():
            for kb, vb in other.coeffs.items():
                key = tuple(a + b for a, b in zip(ka, kb))
                if sum(key) > order:
                    continue
                prod = va * vb
                out[key] = out[key] + prod if key in out else prod
        return JetPolynomial(out, self.nvars, self.period, order)

    def derivative_y(self, i: int) -> "JetPolynomial":
        out: Dict[MultiIndex, PeriodicCoefficient] = {}
        for k, v in self.coeffs.items():
            if k[i] == 0:
                continue
            key = tuple(b - 1 if j == i else b for j, b in enumerate(k))
            out[key] = v.scale(k[i])
        return JetPolynomial(out, self.nvars, self.period, self.max_order)

    def derivative_s(self) -> "JetPolynomial":
        return JetPolynomial({k: v.derivative() for k, v in self.coeffs.items()},
                             self.nvars, self.period, self.max_order)

    def reciprocal(self) -> "JetPolynomial":
        """1/self for series with constant term identically 1."""
        one = JetPolynomial.constant(1.0, self.nvars, self.period, self.max_order)
        u = self - one
        if not u.coefficient((0,) * self.nvars).is_zero:
            raise ValueError("reciprocal requires unit constant term")
        out, upow = one, one
        for k in range(1, self.max_order + 1):
            upow = upow * u
            if upow.is_zero:
                break
            out = out + upow.scale((-1.0) ** k)
        return out

    def log_series(self) -> "JetPolynomial":
        """log(self) for series with constant term identically 1."""
        one = JetPolynomial.constant(1.0, self.nvars, self.period, self.max_order)
        u = self - one
        if not u.coefficient((0,) * self.nvars).is_zero:
            raise ValueError("log requires unit constant term")
        out = JetPolynomial.zero(self.nvars, self.period, self.max_order)
        upow = one
        for k in range(1, self.max_order + 1):
            upow = upow * u
            if upow.is_zero:
                break
            out = out + upow.scale(((-1.0) ** (k + 1)) / k)
        return out

    def max_abs(self) -> float:
        return max((c.max_abs() for c in self.coeffs.values()), default=0.0)


def jet_matrix_determinant(entries: List[List[JetPolynomial]]) -> JetPolynomial:
    """Leibniz determinant of a small matrix of jet polynomials."""
    n = len(entries)
    if n == 1:
        return entries[0][0]
    ref = entries[0][0]
    out = JetPolynomial.zero(ref.nvars, ref.period, ref.max_order)
    from itertools import permutations
    for perm in permutations(range(n)):
        sign = 1
        seen = list(perm)
        for i in range(n):
            for j in range(i + 1, n):
                if seen[i] > seen[j]:
                    sign = -sign
        term = JetPolynomial.constant(float(sign), ref.nvars, ref.period, ref.max_order)
        for i in range(n):
            term = term * entries[i][perm[i]]
        out = out + term
    return out


def jet_matrix_inverse(entries: List[List[JetPolynomial]]) -> List[List[JetPolynomial]]:
    """(I + H)^{-1} as a Neumann series for a matrix with unit constant part."""
    n = len(entries)
    ref = entries[0][0]
    one = JetPolynomial.constant(1.0, ref.nvars, ref.period, ref.max_order)
    zero = JetPolynomial.zero(ref.nvars, ref.period, ref.max_order)
    H = [[entries[i][j] - (one if i == j else zero) for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(n):
            if not H[i][j].coefficient((0,) * ref.nvars).is_zero:
                raise ValueError("matrix inverse requires unit constant part")
    out = [[one if i == j else zero for j in range(n)] for i in range(n)]
    power = [[one if i == j else zero for j in range(n)] for i in range(n)]
    for k in range(1, ref.max_order + 1):
        power = [[sum((power[i][l] * H[l][j] for l in range(n)),
                      start=zero) for j in range(n)] for i in range(n)]
        if all(power[i][j].is_zero for i in range(n) for j in range(n)):
            break
        s = (-1.0) ** k
        out = [[out[i][j] + power[i][j].scale(s) for j in range(n)] for i in range(n)]
    return out


# ---------------------------------------------------------------------- #
# germ containers

@dataclass
class CurvatureData2D:
    """Normal jets of the Gauss curvature along the geodesic (dimension 2).

    tau is the sectional curvature entering the Jacobi equation Y'' + tau Y = 0;
    tau_nu, tau_nunu are its first and second unit-normal derivatives; `higher`
    optionally continues the list with the raw normal derivatives of order >= 3.
    """

    L: float
    tau: PeriodicCoefficient
    tau_nu: PeriodicCoefficient
    tau_nunu: PeriodicCoefficient
    higher: List[PeriodicCoefficient] = field(default_factory=list)

    @classmethod
    def constant(cls, L: float, tau: float, tau_nu: float = 0.0,
                 tau_nunu: float = 0.0) -> "CurvatureData2D":
        c = lambda v: PeriodicCoefficient.constant(v, L)
        return cls(L, c(tau), c(tau_nu), c(tau_nunu))

    def curvature_jets(self, order: int) -> List[PeriodicCoefficient]:
        """K_a = (d/dy)^a K / a! for a = 0..order."""
        raw = [self.tau, self.tau_nu, self.tau_nunu] + list(self.higher)
        zero = PeriodicCoefficient.zero(self.L)
        out = []
        for a in range(order + 1):
            c = raw[a] if a < len(raw) else zero
            out.append(c.scale(1.0 / math.factorial(a)))
        return out

    def rescaled(self, eps: float) -> "CurvatureData2D":
        def r(c: PeriodicCoefficient, k: int) -> PeriodicCoefficient:
            return PeriodicCoefficient(c.offset, c.amps * (eps ** (-k)),
                                       c.period * eps, c.twist_angle)
        return CurvatureData2D(self.L * eps, r(self.tau, 2), r(self.tau_nu, 3),
                               r(self.tau_nunu, 4),
                               [r(c, 4 + 1 + a) for a, c in enumerate(self.higher)])


@dataclass
class ValidationIssue:
    name: str
    detail: str


@dataclass
class ValidationReport:
    ok: bool
    issues: List[ValidationIssue]

    def to_json(self) -> dict:
        return {"ok": self.ok,
                "issues": [{"name": i.name, "detail": i.detail} for i in self.issues]}


class MetricGerm:
    """Fermi-coordinate jets of the inverse metric along the geodesic.

    jets maps (i, j, beta) to the raw transverse derivative
    d^beta/dy^beta g^{ij}(s, 0); indices run over 0..dim-1 with 0 the
    tangential direction.  The gauge constraints g^{ij}(s,0) = delta and
    vanishing first-order transverse jets are expected (checked by validate).
    """

    __slots__ = ("dim", "L", "jets", "max_jet_order", "holonomy")

    def __init__(self, dim: int, L: float, jets: Mapping[JetKey, PeriodicCoefficient],
                 max_jet_order: int = 4, holonomy: Optional[np.ndarray] = None):
        self.dim = int(dim)
        self.L = float(L)
        self.jets: Dict[JetKey, PeriodicCoefficient] = {
            (i, j, tuple(beta)): c for (i, j, beta), c in jets.items() if not c.is_zero}
        self.max_jet_order = int(max_jet_order)
        self.holonomy = np.eye(dim - 1) if holonomy is None else np.asarray(holonomy, float)

    @property
    def nvars(self) -> int:
        return self.dim - 1

    def jet(self, i: int, j: int, beta: MultiIndex) -> PeriodicCoefficient:
        key = (i, j, tuple(beta))
        if key in self.jets:
            return self.jets[key]
        if (j, i, tuple(beta)) in self.jets:
            return self.jets[(j, i, tuple(beta))]
        if sum(beta) == 0 and i == j:
            return PeriodicCoefficient.constant(1.0, self.L)
        return PeriodicCoefficient.zero(self.L)

    def inverse_metric_series(self, i: int, j: int,
                              max_order: Optional[int] = None) -> JetPolynomial:
        """g^{ij}(s, y) as a truncated Taylor polynomial in y."""
        order = self.max_jet_order if max_order is None else max_order
        coeffs: Dict[MultiIndex, PeriodicCoefficient] = {}
        zero = (0,) * self.nvars
        if i == j:
            coeffs[zero] = PeriodicCoefficient.constant(1.0, self.L)
        want = (min(i, j), max(i, j))
        for (a, b, beta), c in self.jets.items():
            if (min(a, b), max(a, b)) != want:
                continue
            if sum(beta) == 0 or sum(beta) > order:
                continue
            add = c.scale(1.0 / _factorial_multi(beta))
            coeffs[beta] = coeffs[beta] + add if beta in coeffs else add
        return JetPolynomial(coeffs, self.nvars, self.L, order)

    def curvature_matrix(self) -> List[List[PeriodicCoefficient]]:
        """K_ij(s) = 1/2 d^2 g^{oo}/dy_i dy_j (s, 0): the Jacobi-equation matrix."""
        n = self.nvars
        K: List[List[PeriodicCoefficient]] = []
        for i in range(n):
            row = []
            for j in range(n):
                beta = tuple((1 if l == i else 0) + (1 if l == j else 0)
                             for l in range(n))
                row.append(self.jet(0, 0, beta).scale(0.5))
            K.append(row)
        return K

    # -------------------------------------------------------------- #
    # dimension-2 shorthand views

    def curvature_data_2d(self) -> CurvatureData2D:
        if self.dim != 2:
            raise ValueError("curvature shorthand is dimension-2 only")
        tau = self.jet(0, 0, (2,)).scale(0.5)
        tau_nu = self.jet(0, 0, (3,)).scale(0.5)
        tau_nunu = self.jet(0, 0, (4,)).scale(0.5) - (tau * tau).scale(8.0)
        return CurvatureData2D(self.L, tau, tau_nu, tau_nunu)

    # -------------------------------------------------------------- #

    def rescale(self, eps: float) -> "MetricGerm":
        """Parabolic rescaling g -> eps^2 g: L -> eps L, jets scale by eps^{-|beta|}."""
        if eps <= 0:
            raise ValueError("rescaling parameter must be positive")
        jets = {}
        for (i, j, beta), c in self.jets.items():
            jets[(i, j, beta)] = PeriodicCoefficient(
                c.offset, c.amps * (eps ** (-sum(beta))), c.period * eps, c.twist_angle)
        return MetricGerm(self.dim, self.L * eps, jets, self.max_jet_order,
                          self.holonomy.copy())

    def validate(self) -> ValidationReport:
        issues: List[ValidationIssue] = []
        if not self.L > 0:
            issues.append(ValidationIssue("length", f"L = {self.L} is not positive"))
        T = self.holonomy
        if T.shape != (self.nvars, self.nvars):
            issues.append(ValidationIssue("holonomy", f"shape {T.shape} != "
                                          f"({self.nvars}, {self.nvars})"))
        else:
            defect = float(np.max(np.abs(T.T @ T - np.eye(self.nvars)))) if T.size else 0.0
            if defect > 1e-10:
                issues.append(ValidationIssue(
                    "holonomy", f"not orthogonal (defect {defect:.3e})"))
        for (i, j, beta), c in self.jets.items():
            order = sum(beta)
            if order == 0:
                target = 1.0 if i == j else 0.0
                defect = (c - PeriodicCoefficient.constant(target, self.L)).max_abs()
                if defect > 1e-12:
                    issues.append(ValidationIssue(
                        "gauge", f"zeroth jet of g^{{{i}{j}}} is not Kronecker delta"))
            if order == 1 and c.max_abs() > 1e-12:
                issues.append(ValidationIssue(
                    "gauge", f"first-order jet of g^{{{i}{j}}} at beta={beta} "
                             f"does not vanish"))
            if order > self.max_jet_order:
                issues.append(ValidationIssue(
                    "order", f"jet beta={beta} exceeds max_jet_order="
                             f"{self.max_jet_order}"))
            if not c.is_real_function():
                issues.append(ValidationIssue(
                    "realness", f"jet g^{{{i}{j}}}, beta={beta} is not real"))
            if c.twist_angle != 0.0:
                issues.append(ValidationIssue(
                    "twist", f"jet g^{{{i}{j}}}, beta={beta} carries a twist"))
        return ValidationReport(not issues, issues)

    # -------------------------------------------------------------- #
    # serialization

    def to_json(self) -> dict:
        jets = []
        for (i, j, beta) in sorted(self.jets, key=lambda k: (k[0], k[1], k[2])):
            c = self.jets[(i, j, beta)]
            jets.append({"i": i, "j": j, "beta": list(beta),
                         "fourier": [{"freq": int(f), "re": float(a.real),
                                      "im": float(a.imag)}
                                     for f, a in sorted(c.fourier.items())]})
        return {"dim": self.dim, "L": self.L,
                "holonomy": self.holonomy.tolist(),
                "max_jet_order": self.max_jet_order, "jets": jets}

    @classmethod
    def from_json(cls, doc: Mapping) -> "MetricGerm":
        if "tau" in doc:
            return germ_from_curvature_2d(
                curvature_from_json(doc), int(doc.get("max_jet_order", 4)))
        jets = {}
        L = float(doc["L"])
        for entry in doc["jets"]:
            modes = {int(m["freq"]): complex(m["re"], m.get("im", 0.0))
                     for m in entry["fourier"]}
            jets[(int(entry["i"]), int(entry["j"]), tuple(entry["beta"]))] = \
                PeriodicCoefficient.from_dict(modes, L)
        holonomy = np.asarray(doc["holonomy"], float) if "holonomy" in doc else None
        return cls(int(doc["dim"]), L, jets, int(doc.get("max_jet_order", 4)), holonomy)

    def __repr__(self) -> str:
        return (f"MetricGerm(dim={self.dim}, L={self.L:.6g}, "
                f"jets={len(self.jets)}, order<={self.max_jet_order})")


# ---------------------------------------------------------------------- #
# constructors

def normal_jacobi_series(K_jets: Sequence[PeriodicCoefficient], order: int,
                         L: float) -> List[PeriodicCoefficient]:
    """Taylor coefficients J_m of the normal volume factor, from J'' = -K J.

    K_jets[a] is the coefficient of y^a in the normal expansion of the
    curvature; J_0 = 1, J_1 = 0, and m(m-1) J_m = -sum_{a+b=m-2} K_a J_b.
    """
    J = [PeriodicCoefficient.constant(1.0, L), PeriodicCoefficient.zero(L)]
    for m in range(2, order + 1):
        acc = PeriodicCoefficient.zero(L)
        for a in range(m - 1):
            b = m - 2 - a
            if a < len(K_jets) and b < len(J):
                acc = acc + K_jets[a] * J[b]
        J.append(acc.scale(-1.0 / (m * (m - 1))))
    return J


def germ_from_curvature_2d(c: CurvatureData2D, max_jet_order: int = 4) -> MetricGerm:
    """Dimension-2 germ from the normal jets of the Gauss curvature.

    The geodesic-parallel form of the metric, dy^2 + J(s,y)^2 ds^2 with
    J'' = -K J, determines every transverse jet: g_oo = J^2, g^{oo} = J^{-2},
    g^{11} = 1.  To fourth order
    g^{oo} = 1 + tau y^2 + (tau_nu/3) y^3 + ((8 tau^2 + tau_nunu)/12) y^4.
    """
    if max_jet_order < 2:
        raise ValueError("max_jet_order must be at least 2")
    needed = max_jet_order - 2
    if needed > 2 + len(c.higher):
        raise ValueError(
            f"insufficient curvature jets for max_jet_order={max_jet_order}: "
            f"have normal derivatives up to order {2 + len(c.higher)}, "
            f"need {needed}")
    L = c.L
    K_jets = c.curvature_jets(max(needed, 0))
    J = normal_jacobi_series(K_jets, max_jet_order, L)
    g_lower = JetPolynomial({(m,): J[m] for m in range(len(J))}, 1, L, max_jet_order)
    g_lower = g_lower * g_lower
    g_upper = g_lower.reciprocal()
    jets: Dict[JetKey, PeriodicCoefficient] = {}
    for (m,), coeff in g_upper.coeffs.items():
        if m >= 2:
            jets[(0, 0, (m,))] = coeff.scale(float(math.factorial(m)))
    return MetricGerm(2, L, jets, max_jet_order)


ProfileLike = Union[Callable[[float], float], np.polynomial.Polynomial, Sequence[float]]


def _profile_derivatives(a: ProfileLike, r0: float, upto: int) -> List[float]:
    """a(r0), a'(r0), ..., a^(upto)(r0); exact for polynomials, Richardson
    finite differences otherwise."""
    if isinstance(a, (list, tuple, np.ndarray)):
        a = np.polynomial.Polynomial(a)
    if isinstance(a, np.polynomial.Polynomial):
        out, p = [], a
        for _ in range(upto + 1):
            out.append(float(p(r0)))
            p = p.deriv()
        return out
    out = [float(a(r0))]
    for order in range(1, upto + 1):
        def diff(hh: float, n: int = order) -> float:
            half = n + 1
            vals = np.array([a(r0 + k * hh) for k in range(-half, half + 1)], float)
            d = vals
            for _ in range(n):
                d = (d[2:] - d[:-2]) / (2 * hh)
            return float(d[len(d) // 2])
        h = 0.2
        d1, d2, d4 = diff(h), diff(h / 2), diff(h / 4)
        r1 = (4 * d2 - d1) / 3
        r2 = (4 * d4 - d2) / 3
        out.append((16 * r2 - r1) / 15)
    return out


def germ_from_profile(a: ProfileLike, r0: float = 0.0,
                      order: int = 4) -> CurvatureData2D:
    """Curvature data of the equatorial geodesic of the revolution metric
    dr^2 + a(r)^2 dtheta^2.

    The circle r = r0 is a geodesic iff a'(r0) = 0; it is elliptic iff the
    Gauss curvature tau = -a''/a is positive there.  The normal coordinate is
    y = r - r0, so the returned jets are plain r-derivatives of -a''/a,
    computed up to derivative order ``order - 2`` by series division (exact
    for polynomial profiles).
    """
    if order < 4:
        raise ValueError("order must be at least 4")
    d = _profile_derivatives(a, r0, order)
    a0, a1, a2 = d[0], d[1], d[2]
    if a0 <= 0:
        raise ValueError(f"profile radius a(r0) = {a0:.6g} must be positive")
    if abs(a1) > 1e-12 * max(1.0, abs(a0)):
        raise ValueError(f"equator is not a geodesic: a'(r0) = {a1:.6g} != 0")
    if -a2 / a0 <= 0:
        raise ValueError(f"equator is not elliptic: a''(r0) = {a2:.6g} >= 0")
    # Taylor series of tau(y) = -a''(r0+y)/a(r0+y) up to y^(order-2).
    A = [d[j] / math.factorial(j) for j in range(order + 1)]
    App = [A[j + 2] * (j + 1) * (j + 2) for j in range(order - 1)]
    B = [1.0 / A[0]]
    for m in range(1, order - 1):
        B.append(-sum(A[j] * B[m - j] for j in range(1, m + 1)) / A[0])
    t = [-sum(App[j] * B[m - j] for j in range(m + 1))
         for m in range(order - 1)]
    L = 2 * math.pi * a0
    const = lambda v: PeriodicCoefficient.constant(v, L)
    return CurvatureData2D(
        L, const(t[0]), const(t[1]), const(2.0 * t[2]),
        [const(math.factorial(3 + j) * t[3 + j]) for j in range(order - 4)])


# ---------------------------------------------------------------------- #
# JSON, presets, random test germs

def curvature_from_json(doc: Mapping) -> CurvatureData2D:
    L = float(doc["L"])

    def load(entry) -> PeriodicCoefficient:
        if isinstance(entry, (int, float)):
            return PeriodicCoefficient.constant(float(entry), L)
        modes = {int(m["freq"]): complex(m["re"], m.get("im", 0.0)) for m in entry}
        return PeriodicCoefficient.from_dict(modes, L)

    zero = PeriodicCoefficient.zero(L)
    return CurvatureData2D(
        L,
        load(doc["tau"]),
        load(doc["tau_nu"]) if "tau_nu" in doc else zero,
        load(doc["tau_nunu"]) if "tau_nunu" in doc else zero,
        [load(e) for e in doc.get("higher", [])])


def load_germ(path: str) -> MetricGerm:
    with open(path, "r") as fh:
        return MetricGerm.from_json(json.load(fh))


#: surface-of-revolution profiles addressable from the command line.
PROFILE_PRESETS: Dict[str, np.polynomial.Polynomial] = {
    "paraboloid": np.polynomial.Polynomial([1.0, 0.0, -1.0]),
    "quartic": np.polynomial.Polynomial([1.0, 0.0, -1.0, 0.0, 1.0 / 3.0]),
    "cubic": np.polynomial.Polynomial([1.0, 0.0, -1.0, 0.25]),
}


def preset_profile(name: str) -> ProfileLike:
    if name == "sphere":
        return lambda r: math.cos(r)
    try:
        return PROFILE_PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; available: "
                         f"{['sphere'] + sorted(PROFILE_PRESETS)}") from None


def preset_germ(name: str, max_jet_order: int = 4) -> MetricGerm:
    if name == "sphere":
        # tau = -cos''/cos = 1 identically: every normal jet beyond tau is 0
        data = CurvatureData2D.constant(2 * math.pi, 1.0)
        zero = PeriodicCoefficient.zero(data.L)
        data.higher.extend(zero for _ in range(max_jet_order - 4))
    else:
        data = germ_from_profile(preset_profile(name),
                                 order=max(4, max_jet_order))
    return germ_from_curvature_2d(data, max_jet_order)


def iterate_curvature(c: CurvatureData2D, m: int) -> CurvatureData2D:
    """Curvature data of the geodesic traversed m times.

    The same functions viewed on the m-fold period: every Fourier mode at
    frequency k of the base period reappears at frequency m*k of the long
    period with the same amplitude.
    """
    if m < 1:
        raise ValueError("m must be a positive integer")
    L = c.L * m

    def stretch(pc: PeriodicCoefficient) -> PeriodicCoefficient:
        return PeriodicCoefficient.from_dict(
            {m * f: amp for f, amp in pc.fourier.items()}, L)

    return CurvatureData2D(L, stretch(c.tau), stretch(c.tau_nu),
                           stretch(c.tau_nunu), [stretch(h) for h in c.higher])


def random_germ_2d(rng: np.random.Generator, elliptic: bool = True,
                   max_freq: int = 3, amplitude: float = 0.25,
                   max_jet_order: int = 4) -> MetricGerm:
    """Band-limited random dimension-2 germ for property tests.

    With ``elliptic`` set, the draw is repeated until the integrated return
    map is genuinely elliptic with rotation-angle margins
    |k alpha mod 2pi| > 0.1 for every divisor weight k a ladder of depth
    ``max_jet_order`` can meet; a mean-elliptic band-limited curvature can
    still sit on a parametric-instability tongue, so the mean-value guard
    alone is not sufficient.
    """
    from .jacobi import DegenerateError, floquet_decompose, integrate_monodromy

    guard = max(6, max_jet_order)
    while True:
        L = float(rng.uniform(3.0, 9.0))
        while True:
            tau0 = float(rng.uniform(0.5, 3.0))
            angle = math.sqrt(tau0) * L
            # cheap pre-screen on the mean rotation angle
            if all(abs(k * angle - TWO_PI * round(k * angle / TWO_PI)) > 0.12
                   for k in range(1, 5)):
                break
        tau = real_band_limited(rng, L, tau0, amplitude * tau0, max_freq)
        tau_nu = real_band_limited(rng, L, rng.uniform(-1.0, 1.0), amplitude, max_freq)
        tau_nunu = real_band_limited(rng, L, rng.uniform(-1.5, 1.5), amplitude, max_freq)
        higher = [real_band_limited(rng, L, float(rng.uniform(-1.0, 1.0)),
                                    amplitude, max_freq)
                  for _ in range(max_jet_order - 4)]
        germ = germ_from_curvature_2d(
            CurvatureData2D(L, tau, tau_nu, tau_nunu, higher), max_jet_order)
        if not elliptic:
            return germ
        try:
            fl = floquet_decompose(integrate_monodromy(germ))
        except DegenerateError:
            continue
        a = float(fl.alpha[0])
        if all(abs(k * a - TWO_PI * round(k * a / TWO_PI)) > 0.1
               for k in range(1, guard + 1)):
            return germ


def random_curvature_matrix(rng: np.random.Generator, nvars: int, L: float,
                            max_freq: int = 3) \
        -> List[List[PeriodicCoefficient]]:
    """Random band-limited symmetric curvature matrix K(s) for Jacobi tests."""
    K = [[None] * nvars for _ in range(nvars)]
    for i in range(nvars):
        for j in range(i, nvars):
            base = rng.uniform(0.8, 2.5) if i == j else rng.uniform(-0.3, 0.3)
            c = real_band_limited(rng, L, base, 0.2, max_freq)
            K[i][j] = c
            K[j][i] = c
    return K


def germ_from_curvature_matrix(K: List[List[PeriodicCoefficient]], L: float,
                               dim: Optional[int] = None) -> MetricGerm:
    """Germ with g^{oo} = 1 + sum K_ij y_i y_j + O(y^3) (enough for Jacobi data)."""
    nvars = len(K)
    dim = nvars + 1 if dim is None else dim
    jets: Dict[JetKey, PeriodicCoefficient] = {}
    for i in range(nvars):
        for j in range(i, nvars):
            beta = tuple((1 if l == i else 0) + (1 if l == j else 0)
                         for l in range(nvars))
            factor = 2.0
            jets[(0, 0, beta)] = K[i][j].scale(factor)
    return MetricGerm(dim, L, jets, 2)
