"""Quantum Birkhoff normal form of the half-density Laplacian at an elliptic
closed geodesic, and the wave-trace invariants it generates.

The public surface re-exports the main entry points of each stage:

* metric germs in Fermi coordinates (:mod:`geodesicnf.germs`),
* the linearized (Jacobi) dynamics and Floquet data (:mod:`geodesicnf.jacobi`),
* the rescaled operator ladder (:mod:`geodesicnf.laplacian`),
* the semiclassical normal-form iteration (:mod:`geodesicnf.normalform`),
* wave-trace coefficients at iterates of the geodesic (:mod:`geodesicnf.waveinv`),
* the classical normal form / twist oracle (:mod:`geodesicnf.classical`),
* a direct spectral oracle for surfaces of revolution (:mod:`geodesicnf.spectral`).
"""

from ._kernel_select import KERNEL_BACKEND
from .classical import (
    ClassicalNormalForm,
    classical_normal_form,
    flow_twist_report,
    geodesic_return_map,
    twist_from_flow,
)
from .fourier import PeriodicCoefficient, ResonanceError
from .germs import (
    CurvatureData2D,
    MetricGerm,
    germ_from_curvature_2d,
    germ_from_profile,
    iterate_curvature,
    load_germ,
    preset_germ,
    preset_profile,
    random_germ_2d,
)
from .jacobi import (
    DegenerateError,
    FloquetData,
    JacobiFrame,
    Monodromy,
    build_frame,
    conjugate_point_count,
    floquet_decompose,
    integrate_monodromy,
)
from .laplacian import ExpansionLadder, build_scaled_terms, conjugate_to_model
from .normalform import (
    QbnfResult,
    ScnfResult,
    f0_direct_dim2,
    qbnf_assemble,
    required_ladder_depth,
    scnf_iterate,
)
from .spectral import EigenLadder, quasimode_fit, rev_surface_eigenvalues
from .symbols import (
    OperatorSymbol,
    WeylPolynomial,
    commutator,
    diagonal_eigenvalue_polynomial,
    linear_symplectic_substitute,
    moyal_product,
    solve_twisted_ode,
    transvectant,
)
from .waveinv import (
    WaveInvariantReport,
    beta_form_check,
    convention_ledger,
    hermite_trace,
    morse_index,
    trace_distribution,
    wave_invariant,
    with_principal,
)

__all__ = [
    "KERNEL_BACKEND",
    # periodic coefficients and symbol calculus
    "PeriodicCoefficient",
    "ResonanceError",
    "WeylPolynomial",
    "OperatorSymbol",
    "transvectant",
    "moyal_product",
    "commutator",
    "diagonal_eigenvalue_polynomial",
    "linear_symplectic_substitute",
    "solve_twisted_ode",
    # metric germs
    "MetricGerm",
    "CurvatureData2D",
    "germ_from_curvature_2d",
    "germ_from_profile",
    "preset_profile",
    "preset_germ",
    "random_germ_2d",
    "iterate_curvature",
    "load_germ",
    # linearized dynamics
    "DegenerateError",
    "Monodromy",
    "FloquetData",
    "JacobiFrame",
    "integrate_monodromy",
    "floquet_decompose",
    "build_frame",
    "conjugate_point_count",
    # operator ladder
    "ExpansionLadder",
    "build_scaled_terms",
    "conjugate_to_model",
    # normal form
    "ScnfResult",
    "QbnfResult",
    "scnf_iterate",
    "qbnf_assemble",
    "f0_direct_dim2",
    "required_ladder_depth",
    # wave invariants
    "WaveInvariantReport",
    "convention_ledger",
    "hermite_trace",
    "trace_distribution",
    "wave_invariant",
    "with_principal",
    "beta_form_check",
    "morse_index",
    # classical oracle
    "ClassicalNormalForm",
    "classical_normal_form",
    "geodesic_return_map",
    "flow_twist_report",
    "twist_from_flow",
    # spectral oracle
    "EigenLadder",
    "rev_surface_eigenvalues",
    "quasimode_fit",
]

__version__ = "0.1.0"
