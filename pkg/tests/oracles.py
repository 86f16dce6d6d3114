"""Independent brute-force oracles shared by the test suite.

Both oracles deliberately avoid the package's own machinery:

* ``weyl_matrix`` quantizes a polynomial symbol as a matrix in the
  harmonic-ladder basis using only the first-order product recursion
  Op(z p) = Op(z) Op(p) - Op(d_zbar p); no transvectant series.
* ``abel_ladder_sum`` evaluates twisted ladder sums from literal partial
  sums plus the exact geometric-tail ansatz; no closed trace forms.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Mapping, Sequence, Tuple

import mpmath as mp
import numpy as np

from geodesicnf import WeylPolynomial
from geodesicnf.fourier import PeriodicCoefficient

MODES = 60
BLOCK = 20


def ladder_matrix(modes: int = MODES) -> np.ndarray:
    """A = Op(z), acting as A|q> = sqrt(2q)|q-1>, so that [A, A*] = 2."""
    q = np.arange(1, modes)
    A = np.zeros((modes, modes), dtype=complex)
    A[q - 1, q] = np.sqrt(2.0 * q)
    return A


@lru_cache(maxsize=None)
def monomial_matrix(m: int, n: int, modes: int = MODES) -> np.ndarray:
    """Weyl matrix of z^m zbar^n on `modes` ladder states.

    Peeling one factor of z off the symbol costs the derivative term:
    Op(z p) = A Op(p) - Op(d_zbar p), and dually for zbar.  For symbols of
    degree <= 8 the truncation is exact on the lowest BLOCK x BLOCK block.
    """
    if m == 0 and n == 0:
        return np.eye(modes, dtype=complex)
    A = ladder_matrix(modes)
    if m > 0:
        out = A @ monomial_matrix(m - 1, n, modes)
        if n > 0:
            out = out - n * monomial_matrix(m - 1, n - 1, modes)
        return out
    return A.conj().T @ monomial_matrix(0, n - 1, modes)


def weyl_matrix(p: WeylPolynomial, s: float, modes: int = MODES) -> np.ndarray:
    """Matrix of Op(p(s)) in the ladder basis, coefficients evaluated at s."""
    if p.dim != 1:
        raise ValueError("matrix oracle is one-dimensional")
    out = np.zeros((modes, modes), dtype=complex)
    for m, n in p.sorted_keys():
        c = complex(np.asarray(p.coefficient(m, n)(s), dtype=complex).reshape(()))
        out += c * monomial_matrix(m[0], n[0], modes)
    return out


def random_symbol(rng: np.random.Generator, max_degree: int = 4,
                  bandwidth: int = 2, period: float = 2.0 * np.pi,
                  hermitian: bool = True) -> WeylPolynomial:
    """Random one-dimensional polynomial symbol with band-limited coefficients."""
    p = WeylPolynomial.zero(1, period)
    for m in range(max_degree + 1):
        for n in range(max_degree + 1 - m):
            modes = {k: complex(rng.normal(), rng.normal())
                     for k in range(-bandwidth, bandwidth + 1)}
            pc = PeriodicCoefficient.from_dict(modes, period)
            p = p + WeylPolynomial.monomial((m,), (n,), pc, 1)
    if hermitian:
        p = (p + p.adjoint()).scale(0.5)
    return p


def abel_ladder_sum(F: Mapping[Tuple[int, ...], complex],
                    alpha: Sequence[float], dps: int = 50,
                    n0: int = 12) -> complex:
    """Brute-force value of sum_{q in Z_{>=0}^n} F(q+1/2) e^{i(q+1/2).alpha}.

    Each one-dimensional factor S_k = sum_q (q+1/2)^k e^{i(q+1/2)a} is
    recovered from literal partial sums P_N through q = N together with the
    exact tail model S_k - P_N = z^{N+1} * (degree-k polynomial in N),
    z = e^{ia}: a square linear solve in (S_k, tail coefficients).
    """
    n = len(alpha)
    kmax = max((max(e, default=0) for e in F), default=0)
    with mp.workdps(dps):
        tables = []
        for j in range(n):
            a = mp.mpf(alpha[j])
            z = mp.e ** (1j * a)
            col = []
            for k in range(kmax + 1):
                rows = k + 2
                partial, s = [], mp.mpc(0)
                for q in range(n0 + rows):
                    x = mp.mpf(2 * q + 1) / 2
                    s += x ** k * mp.e ** (1j * a * x)
                    if q >= n0:
                        partial.append(s)
                A = mp.zeros(rows, rows)
                b = mp.matrix(rows, 1)
                for r in range(rows):
                    N = n0 + r
                    A[r, 0] = mp.mpc(1)
                    zN = z ** (N + 1)
                    for i in range(k + 1):
                        A[r, i + 1] = -zN * mp.mpf(N) ** i
                    b[r] = partial[r]
                col.append(mp.lu_solve(A, b)[0])
            tables.append(col)
        total = mp.mpc(0)
        for e, c in F.items():
            term = mp.mpc(c)
            for j, ej in enumerate(e):
                term *= tables[j][ej]
            total += term
        return complex(total)
