"""Verification suites behind the command-line interface.

Each suite returns a Report whose checks carry the measured value and the
tolerance it was held to.
"""
from __future__ import annotations

import numpy as np

from . import fiber
from .geometry import LCConnection
from .minimization import (
    COMPONENTS, Collapsed, DEFAULT_TOL_Q, collinearity_report, coincidence_violations, detect,
    minimize_all, pairing_at_minimizer,
)
from .report import Report
from .scenario import Scenario
from .spinc import (
    CONSISTENCY_CONSTANT, b_tensor, dirac, split_b, tensor_inner, trace_tensor,
)

FIBER_TOL = 1e-12
CLASSIFY_TOL = 1e-9
SPLIT_TOL = 1e-12
COLLINEARITY_TOL = 1e-8
PAIRING_TOL = 1e-10


def random_unit_sd_form(rng: np.random.Generator) -> np.ndarray:
    u = rng.normal(size=3)
    u /= np.linalg.norm(u)
    return fiber.sdform_from_j(fiber.AcStructure.from_unit(np.concatenate([[0.0], u])))


def verify_fiber(seed: int, count: int) -> Report:
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(count, 4))
    q = rng.normal(size=(count, 4))
    report = Report("verify-fiber", {"seed": seed, "count": count})

    evaluated = fiber.clifford_mul(v, q)
    via_matrix = np.einsum("nab,nb->na", fiber.endo_from_spinor(q), v)
    report.check("evaluation_identity", np.max(np.abs(evaluated - via_matrix)), FIBER_TOL)
    report.check("clifford_isometry",
                 np.max(np.abs(fiber.quat_norm(evaluated) - fiber.quat_norm(v) * fiber.quat_norm(q))), FIBER_TOL)
    unit_v = v / fiber.quat_norm(v)[:, None]
    there_and_back = fiber.clifford_mul_minus(unit_v, fiber.clifford_mul(unit_v, q))
    report.check("clifford_relation", np.max(np.abs(there_and_back + q)), FIBER_TOL)
    complex_linear = fiber.clifford_mul(v, fiber.i_action(q)) - np.einsum(
        "ab,nb->na", fiber.REFERENCE_AC.J, fiber.clifford_mul(v, q))
    report.check("clifford_complex_linear", np.max(np.abs(complex_linear)), FIBER_TOL)

    sig = fiber.sigma(q)
    report.check("sigma_self_dual", np.max(np.abs(fiber.hodge_star(sig) - sig)), FIBER_TOL)
    report.check("sigma_norm",
                 np.max(np.abs(fiber.form_norm(sig) - np.sqrt(2.0) / 4.0 * fiber.quat_norm(q) ** 2)), FIBER_TOL)

    forms = rng.normal(size=(count, 4, 4))
    forms = forms - np.swapaxes(forms, -1, -2)
    report.check("hodge_involution", np.max(np.abs(fiber.hodge_star(fiber.hodge_star(forms)) - forms)), FIBER_TOL)
    plus, minus = fiber.sd_asd_split(forms)
    report.check("sd_asd_orthogonal", np.max(np.abs(fiber.form_inner(plus, minus))), FIBER_TOL)
    report.check("sd_asd_resum", np.max(np.abs(plus + minus - forms)), FIBER_TOL)

    roundtrip = 0.0
    for _ in range(min(count, 100)):
        omega = random_unit_sd_form(rng)
        back = fiber.sdform_from_j(fiber.j_from_sdform(omega))
        roundtrip = max(roundtrip, float(np.max(np.abs(back - omega))))
    report.check("j_omega_roundtrip", roundtrip, FIBER_TOL)

    classify = 0.0
    for qi in q:
        s, theta = fiber.classify_endo(fiber.endo_from_spinor(qi), CLASSIFY_TOL)
        norm = float(np.linalg.norm(qi))
        expected = float(np.arccos(np.clip(qi[0] / norm, -1.0, 1.0)))
        classify = max(classify, abs(s - norm), abs(theta - expected))
    report.check("classify_recovers", classify, CLASSIFY_TOL)
    return report


def _scenario_echo(scenario: Scenario) -> dict:
    return {"name": scenario.name, "grid.n": scenario.n, "geometry": scenario.geometry, "spinor": scenario.spinor}


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.sum(x**2, axis=(-3, -2, -1)))))


def decompose(scenario: Scenario) -> Report:
    lc = LCConnection.from_metric(scenario.metric())
    q = scenario.spinor_field()
    constant = float(scenario.tolerances.get("consistency", CONSISTENCY_CONSTANT))
    bt = b_tensor(q, lc, consistency_constant=np.inf)
    split = split_b(bt.B)
    trace = trace_tensor(split.dirac)
    report = Report("decompose", _scenario_echo(scenario))
    report.values.update({
        "norm.B": _rms(bt.B),
        "norm.alt": _rms(split.alt),
        "norm.sym0": _rms(split.sym0),
        "norm.trace": _rms(trace),
    })
    scale = max(1.0, float(np.max(np.abs(bt.B))))
    report.check("reconstruction", np.max(np.abs(split.alt + split.sym0 + trace - bt.B)), SPLIT_TOL * scale)
    orth = max(
        float(np.max(np.abs(tensor_inner(split.alt, split.sym0)))),
        float(np.max(np.abs(tensor_inner(split.alt, trace)))),
        float(np.max(np.abs(tensor_inner(split.sym0, trace)))),
    )
    report.check("orthogonality", orth, SPLIT_TOL * scale**2)
    report.check("dirac_as_trace", np.max(np.abs(dirac(q, lc) - split.dirac)), SPLIT_TOL * scale)
    report.check("eqcomp_residual", bt.consistency_residual, constant * scenario.grid.h**4)
    return report


def minimize(scenario: Scenario) -> Report:
    """Minimizer line, ratios, pairing at the full minimizer and coincidence.

    Raises DegenerateEverywhere for an identically vanishing spinor.
    """
    lc = LCConnection.from_metric(scenario.metric())
    q = scenario.spinor_field()
    minimizers = minimize_all(q, lc)
    report = Report("minimize", _scenario_echo(scenario))
    report.check("pairing_at_full_minimizer",
                 pairing_at_minimizer(q, lc, full=minimizers["full"]), PAIRING_TOL)
    report.check("coincidence_violations", coincidence_violations(minimizers.values()), 0)
    try:
        line = collinearity_report(minimizers.values())
    except Collapsed as exc:
        report.values["collapsed"] = True
        report.values["usable_points"] = exc.points
        report.check("coincident_spread", exc.max_spread, 1e-9)
        report.notes.append("all minimizers coincide; the line is undefined")
        return report
    report.values["collapsed"] = False
    report.check("collinearity_relative", line.max_relative_residual, COLLINEARITY_TOL)
    for key in ("usable_points", "valid_points", "coincident_points"):
        report.values[key] = line.stats[key]
    for comp in COMPONENTS:
        report.values[f"ratio.{comp}.mean"] = line.stats["ratio_mean"][comp]
        report.values[f"ratio.{comp}.std"] = line.stats["ratio_std"][comp]
    return report


def detection(scenario: Scenario) -> Report:
    lc = LCConnection.from_metric(scenario.metric())
    q = scenario.spinor_field()
    tol = scenario.tolerances
    result = detect(q, lc, tol_d=tol.get("d"), tol_m=tol.get("m"), tol_q=tol.get("q", DEFAULT_TOL_Q))
    report = Report("detect", _scenario_echo(scenario))
    report.measure("dsigma_max", result.dsigma_max, result.tol_d)
    report.measure("min_norm", result.min_norm, result.tol_q, relation=">")
    report.measure("minimizer_discrepancy", result.discrepancy, result.tol_m)
    report.values.update({
        "verdict.symplectic": result.symplectic,
        "verdict.criterion": result.criterion,
        "verdict.agree": result.agree,
        "outcome": result.outcome,
    })
    report.check("verdicts_agree", float(not result.agree), 0.0)
    return report
