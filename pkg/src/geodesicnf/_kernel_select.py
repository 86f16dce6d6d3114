"""Select the compiled convolution kernel if available, else the numpy fallback.

The Moyal-product inner loop reduces to many short complex convolutions of
Fourier amplitude arrays; that is the one hot spot worth compiling.  Both
implementations are exact and interchangeable; ``KERNEL_BACKEND`` records
which one is active (surfaced in CLI reports and the benchmark).
"""

from __future__ import annotations

import numpy as np

try:  # pragma: no cover - depends on build environment
    from . import _kernels as _impl

    def convolve_complex(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return _impl.convolve_complex(np.ascontiguousarray(a, dtype=complex),
                                      np.ascontiguousarray(b, dtype=complex))

    KERNEL_BACKEND = "cython"
except ImportError:  # pragma: no cover
    def convolve_complex(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.convolve(a, b)

    KERNEL_BACKEND = "numpy"
