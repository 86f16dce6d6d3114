"""Shared fixtures: preset germ pipelines reused across test modules."""

from __future__ import annotations

import numpy as np
import pytest

from geodesicnf import (
    build_frame,
    build_scaled_terms,
    conjugate_to_model,
    preset_germ,
    qbnf_assemble,
    required_ladder_depth,
    scnf_iterate,
)


def run_pipeline(g, K: int, resonance_tol: float = 1e-6):
    """Germ -> (frame, semiclassical normal form, ladder normal form)."""
    fr = build_frame(g)
    ladder = build_scaled_terms(g, required_ladder_depth(K))
    conj = conjugate_to_model(ladder, g, fr)
    s = scnf_iterate(conj, fr.alpha, K, resonance_tol=resonance_tol)
    return fr, s, qbnf_assemble(s)


@pytest.fixture(scope="session")
def quartic_k1():
    """quartic preset (profile 1 - r^2 + r^4/3) carried to order 1."""
    g = preset_germ("quartic", max_jet_order=6)
    fr, s, q = run_pipeline(g, 1)
    return g, fr, s, q


@pytest.fixture(scope="session")
def paraboloid_k0():
    """paraboloid preset (profile 1 - r^2) carried to order 0."""
    g = preset_germ("paraboloid")
    fr, s, q = run_pipeline(g, 0)
    return g, fr, s, q


@pytest.fixture()
def rng():
    return np.random.default_rng(20260815)
