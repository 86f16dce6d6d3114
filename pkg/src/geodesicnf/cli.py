"""Command-line surface of the normal-form engine.

Five commands cover the artifact's workflows:

* ``compute``            germ or preset -> normal form + wave invariants,
* ``validate``           germ diagnostics (gauge, frame, resonance margins),
* ``oracle-spectral``    revolution profile -> true eigenvalue ladders vs
                         the engine's correction polynomial,
* ``oracle-dynamics``    classical twist vs quantum coefficient vs a direct
                         return-map fit,
* ``suite``              seeded randomized property checks.

Reports are versioned JSON (or a Markdown rendering of the same tree),
embed the full run configuration and the convention ledger, and are
byte-identical for a fixed configuration and seed.  Exit status: 0 when
every declared tolerance holds, 1 on a tolerance failure (the failing
check is named on stderr) or a resonance/degeneracy diagnostic, 2 on
malformed input.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .classical import classical_normal_form, flow_twist_report
from .fourier import ResonanceError
from .germs import (MetricGerm, load_germ, preset_germ, preset_profile,
                    germ_from_profile, random_germ_2d)
from .jacobi import DegenerateError, build_frame, integrate_monodromy
from .laplacian import build_scaled_terms, conjugate_to_model
from .normalform import (f0_direct_dim2, qbnf_assemble, required_ladder_depth,
                         scnf_iterate)
from .spectral import quasimode_fit, rev_surface_eigenvalues
from .symbols import diagonal_eigenvalue_polynomial
from .waveinv import (beta_form_check, convention_ledger, wave_invariant,
                      with_principal)

SCHEMA = "geodesicnf-report/1"

__all__ = ["RunConfig", "main", "run"]


@dataclass
class RunConfig:
    """Full description of a run; serialized into every report."""

    command: str
    germ: Optional[str] = None
    preset: Optional[str] = None
    k: int = 0
    fourier_bandwidth: int = 3
    resonance_tol: float = 1e-6
    out: Optional[str] = None
    format: str = "json"
    seed: int = 0


# ---------------------------------------------------------------------- #
# serialization helpers


def _jsonable(obj):
    """Plain JSON tree: numpy scalars to Python, complex to {re, im}."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    return obj


def _render_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def _md_lines(obj, indent: int) -> List[str]:
    pad = "  " * indent
    lines: List[str] = []
    if isinstance(obj, dict):
        for key in sorted(obj):
            value = obj[key]
            if isinstance(value, (dict, list)):
                lines.append(f"{pad}- **{key}**:")
                lines.extend(_md_lines(value, indent + 1))
            else:
                lines.append(f"{pad}- **{key}**: {value!r}")
    elif isinstance(obj, list):
        for i, value in enumerate(obj):
            if isinstance(value, (dict, list)):
                lines.append(f"{pad}- [{i}]:")
                lines.extend(_md_lines(value, indent + 1))
            else:
                lines.append(f"{pad}- [{i}]: {value!r}")
    else:
        lines.append(f"{pad}- {obj!r}")
    return lines


def _render_md(report: dict) -> str:
    lines = [f"# {report['config']['command']} report", "",
             f"schema: `{report['schema']}`", ""]
    for section in ["config", "status", "results", "conventions"]:
        if section not in report:
            continue
        lines.append(f"## {section}")
        lines.extend(_md_lines(report[section], 0))
        lines.append("")
    return "\n".join(lines) + "\n"


def _emit(report: dict, cfg: RunConfig) -> None:
    text = _render_md(report) if cfg.format == "md" else _render_json(report)
    if cfg.out:
        os.makedirs(cfg.out, exist_ok=True)
        ext = "md" if cfg.format == "md" else "json"
        path = os.path.join(cfg.out, f"{cfg.command.replace('-', '_')}-report.{ext}")
        with open(path, "w") as fh:
            fh.write(text)
        print(path)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------- #
# shared pipeline pieces


def _load_input_germ(cfg: RunConfig, depth: int) -> MetricGerm:
    if (cfg.germ is None) == (cfg.preset is None):
        raise ValueError("provide exactly one of --germ FILE or --preset NAME")
    if cfg.preset is not None:
        return preset_germ(cfg.preset, max_jet_order=max(4, depth))
    return load_germ(cfg.germ)


def _qbnf_pipeline(g: MetricGerm, K: int, resonance_tol: float):
    fr = build_frame(g)
    ladder = build_scaled_terms(g, required_ladder_depth(K))
    conj = conjugate_to_model(ladder, g, fr)
    s = scnf_iterate(conj, fr.alpha, K, resonance_tol=resonance_tol)
    return fr, s, qbnf_assemble(s)


def _eval_poly(poly: Dict[Tuple[int, ...], complex], x: float) -> float:
    return float(sum((c * x ** e[0] for e, c in poly.items())).real) if poly else 0.0


def _resonance_margin(alpha: Sequence[float], upto: int) -> dict:
    """Smallest divisor |1 - e^{i m.alpha}| over 0 < sum|m_i| <= upto."""
    alpha = np.asarray(alpha, float)
    n = len(alpha)
    best = None
    span = range(-upto, upto + 1)
    for combo in np.ndindex(*([2 * upto + 1] * n)):
        m = np.array([span[c] for c in combo])
        weight = int(np.abs(m).sum())
        if weight == 0 or weight > upto:
            continue
        margin = abs(1.0 - np.exp(1j * float(m @ alpha)))
        if best is None or margin < best[0]:
            best = (margin, m.tolist())
    return {"margin": best[0], "combination": best[1], "max_weight": upto}


# ---------------------------------------------------------------------- #
# commands


def _cmd_compute(cfg: RunConfig) -> Tuple[dict, List[str]]:
    g = _load_input_germ(cfg, required_ladder_depth(cfg.k))
    fr, s, q = _qbnf_pipeline(g, cfg.k, cfg.resonance_tol)
    invariants = []
    for order in range(cfg.k + 1):
        rep = with_principal(
            wave_invariant(q, order, fr, resonance_tol=cfg.resonance_tol), g, fr)
        entry = rep.to_json()
        del entry["conventions"]  # hoisted once to the top level
        invariants.append(entry)
    results = {
        "germ": {"nvars": g.nvars, "L": g.L, "max_jet_order": g.max_jet_order},
        "alpha": list(fr.alpha),
        "qbnf": {
            "B": {f"{k}:" + ",".join(map(str, j)): v
                  for (k, j), v in sorted(q.B.items())},
            "hermiticity_defect": q.hermiticity_defect,
        },
        "invariants": invariants,
    }
    return results, []


def _cmd_validate(cfg: RunConfig) -> Tuple[dict, List[str]]:
    g = _load_input_germ(cfg, 4)
    report = g.validate()
    failures = [f"germ:{issue.name}" for issue in report.issues]
    results: dict = {
        "germ": {"nvars": g.nvars, "L": g.L, "max_jet_order": g.max_jet_order,
                 "jets": len(g.jets)},
        "validation": report.to_json(),
    }
    try:
        fr = build_frame(g)
    except (DegenerateError, ResonanceError) as exc:
        results["frame"] = {"error": str(exc)}
        failures.append("frame:resonance" if isinstance(exc, ResonanceError)
                        else "frame:degenerate")
        return results, failures
    margin = _resonance_margin(fr.alpha, upto=2 * cfg.k + 4 if cfg.k else 6)
    results["frame"] = {
        "alpha": list(fr.alpha),
        "monodromy_symplectic_defect": integrate_monodromy(g).symplectic_defect(),
        "resonance": margin,
    }
    if margin["margin"] < cfg.resonance_tol:
        failures.append("frame:resonance-margin")
    return results, failures


def _cmd_oracle_spectral(cfg: RunConfig) -> Tuple[dict, List[str]]:
    if cfg.germ is not None:
        raise ValueError("oracle-spectral compares against a revolution "
                         "profile; use --preset")
    name = cfg.preset or "quartic"
    if name == "sphere":
        raise ValueError("the round sphere has a resonant (degenerate) "
                         "equator; choose a twisted profile preset")
    profile = preset_profile(name)
    data = germ_from_profile(profile)
    L = data.L
    alpha_unreduced = math.sqrt(float(data.tau.mean().real)) * L

    g = preset_germ(name, 4)
    fr, s, q = _qbnf_pipeline(g, 0, cfg.resonance_tol)
    p1 = diagonal_eigenvalue_polynomial(q.p[1].s_mean(), table="weyl")

    sectors = list(range(80, 201, 8))
    ladders = rev_surface_eigenvalues(profile, sectors, q_max=1)
    fits = quasimode_fit(ladders, alpha_unreduced, L, q_max=1)

    tol = 0.05
    failures: List[str] = []
    rows = []
    for level in sorted(fits):
        engine = _eval_poly(p1, level + 0.5)
        fitted = fits[level]["p1"]
        rel = abs(fitted - engine) / abs(engine)
        ok = rel <= tol
        if not ok:
            failures.append(f"spectral:p1-level-{level}")
        rows.append({"level": level, "engine_p1": engine, "fitted_p1": fitted,
                     "relative_error": rel, "tolerance": tol, "ok": ok,
                     "fit": fits[level]})
    results = {
        "profile": name,
        "L": L,
        "alpha_unreduced": alpha_unreduced,
        "alpha_reduced": list(fr.alpha),
        "sectors": sectors,
        "levels": rows,
    }
    return results, failures


def _cmd_oracle_dynamics(cfg: RunConfig) -> Tuple[dict, List[str]]:
    if cfg.germ is None and cfg.preset is None:
        cfg.preset = "paraboloid"
    g = _load_input_germ(cfg, 4)
    fr = build_frame(g)

    cl = classical_normal_form(g, fr, N=0, resonance_tol=cfg.resonance_tol)
    twist_classical = float(cl.twist[0, 0])

    _, s, q = _qbnf_pipeline(g, 0, cfg.resonance_tol)
    coeffs = q.p[1].s_mean().diagonal_action_coefficients()
    twist_quantum = 8.0 * float(coeffs.get((2,), 0.0).real)

    flow = flow_twist_report(g, fr)
    twist_flow = flow["twist"]

    sym_tol, flow_tol = 1e-6, 5e-3
    scale = max(abs(twist_classical), 1e-12)
    rel_sym = abs(twist_quantum - twist_classical) / scale
    rel_flow = abs(twist_flow - twist_classical) / scale
    failures = []
    if rel_sym > sym_tol:
        failures.append("dynamics:classical-vs-quantum-twist")
    if rel_flow > flow_tol:
        failures.append("dynamics:flow-vs-symbolic-twist")
    results = {
        "alpha": list(fr.alpha),
        "twist": {
            "classical": twist_classical,
            "quantum_top": twist_quantum,
            "flow": twist_flow,
            "relative_error_symbolic": {"value": rel_sym, "tolerance": sym_tol},
            "relative_error_flow": {"value": rel_flow, "tolerance": flow_tol},
        },
        "flow_fit": {k: v for k, v in flow.items() if k != "samples"},
    }
    return results, failures


def _cmd_suite(cfg: RunConfig) -> Tuple[dict, List[str]]:
    rng = np.random.default_rng(cfg.seed)
    checks: List[dict] = []

    def check(name: str, value: float, tol: float) -> None:
        checks.append({"name": name, "value": float(value), "tolerance": tol,
                       "ok": bool(value <= tol)})

    # linearized dynamics: monodromy stays symplectic
    for i in range(2):
        g = random_germ_2d(rng, max_freq=cfg.fourier_bandwidth)
        check(f"monodromy-symplectic-{i}",
              integrate_monodromy(g).symplectic_defect(), 1e-9)

    # reduction: hermiticity, vanishing |z|^2 coefficient, two-path f0
    for i in range(2):
        g = random_germ_2d(rng, max_freq=cfg.fourier_bandwidth)
        fr, s, q = _qbnf_pipeline(g, 0, cfg.resonance_tol)
        c = s.f_coefficients(0)
        check(f"hermiticity-defect-{i}", s.hermiticity_defect, 1e-9)
        check(f"vanishing-z2-coefficient-{i}", abs(c.get((1,), 0.0)), 1e-8)
        direct = f0_direct_dim2(g, fr)
        scale = max(s.f[0].max_abs(), 1.0)
        check(f"two-path-f0-{i}", (direct - s.f[0]).max_abs() / scale, 1e-8)

    # covariance: f0 coefficients carry weight -2, a_0 is scale-invariant
    g = random_germ_2d(rng, max_freq=cfg.fourier_bandwidth)
    eps = 2.0
    fr_a, s_a, q_a = _qbnf_pipeline(g, 0, cfg.resonance_tol)
    g_scaled = g.rescale(eps)
    fr_b, s_b, q_b = _qbnf_pipeline(g_scaled, 0, cfg.resonance_tol)
    ca, cb = s_a.f_coefficients(0), s_b.f_coefficients(0)
    scale = max(abs(v) for v in ca.values())
    err = max(abs(cb.get(e, 0.0) - v * eps ** (-2)) for e, v in ca.items())
    check("scaling-weight-f0", err * eps ** 2 / scale, 1e-7)
    a0a = wave_invariant(q_a, 0, fr_a).a
    a0b = wave_invariant(q_b, 0, fr_b).a
    check("scaling-invariance-a0", abs(a0b - a0a) / abs(a0a), 1e-7)

    # angle structure of the leading invariant on a fixed preset
    g = preset_germ("quartic")
    fr, s, q = _qbnf_pipeline(g, 0, cfg.resonance_tol)
    fit = beta_form_check(q, fr)
    check("beta-structure-residual", fit["residual"], 1e-8)

    failures = [c["name"] for c in checks if not c["ok"]]
    return {"seed": cfg.seed, "checks": checks}, failures


_DISPATCH = {
    "compute": _cmd_compute,
    "validate": _cmd_validate,
    "oracle-spectral": _cmd_oracle_spectral,
    "oracle-dynamics": _cmd_oracle_dynamics,
    "suite": _cmd_suite,
}


# ---------------------------------------------------------------------- #
# argument parsing and entry point


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geodesicnf",
        description="Normal-form and wave-invariant engine for elliptic "
                    "closed geodesics")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in [
        ("compute", "normal form and wave invariants of a germ"),
        ("validate", "germ and frame diagnostics"),
        ("oracle-spectral", "true eigenvalue ladders vs the engine"),
        ("oracle-dynamics", "return-map twist vs the symbolic twist"),
        ("suite", "seeded randomized property checks"),
    ]:
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--germ", metavar="FILE", help="germ JSON file")
        p.add_argument("--preset", metavar="NAME",
                       help="built-in profile: paraboloid, quartic, cubic, sphere")
        p.add_argument("--k", type=int, default=0,
                       help="highest invariant order (default 0)")
        p.add_argument("--fourier-bandwidth", type=int, default=3,
                       dest="fourier_bandwidth", metavar="INT",
                       help="mode cutoff for randomized suite germs")
        p.add_argument("--resonance-tol", type=float, default=1e-6,
                       dest="resonance_tol", metavar="FLOAT",
                       help="smallest allowed Floquet divisor")
        p.add_argument("--out", metavar="DIR", help="write the report here")
        p.add_argument("--format", choices=["json", "md"], default="json")
        p.add_argument("--seed", type=int, default=0,
                       help="seed for randomized suites")
    return parser


def run(cfg: RunConfig) -> int:
    """Execute one configured command; returns the process exit status."""
    if cfg.command not in _DISPATCH:
        print(f"error: unknown command {cfg.command!r}", file=sys.stderr)
        return 2
    if cfg.k < 0:
        print("error: --k must be non-negative", file=sys.stderr)
        return 2
    try:
        results, failures = _DISPATCH[cfg.command](cfg)
    except (ResonanceError, DegenerateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"error: malformed input: {exc}", file=sys.stderr)
        return 2
    report = {
        "schema": SCHEMA,
        "config": asdict(cfg),
        "status": {"ok": not failures, "failures": failures},
        "results": _jsonable(results),
        "conventions": convention_ledger(),
    }
    _emit(report, cfg)
    if failures:
        print("tolerance failure: " + ", ".join(failures), file=sys.stderr)
        return 1
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    return run(RunConfig(**vars(args)))


if __name__ == "__main__":
    sys.exit(main())
