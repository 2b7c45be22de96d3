"""Two-agent scenario files and single-shot fusion runs.

Scenario files are UTF-8 JSON objects::

    {
      "name": "fig1", "dim": 2,
      "truth_a": [0, 0], "truth_b": [20, 0],          # optional
      "est_a": {"mean": [0, 0], "cov": [[16, 8], [8, 9]]},
      "est_b": {"mean": [20, 0], "cov": [[1, 1], [1, 4]]},
      "sigma_m2": 1.0,                                 # range noise *variance*
      "measurement": 19.7,                             # optional
      "objective": "trace",                            # or "det"
      "seed": 0
    }

When ``measurement`` is absent both truths are required and a noisy range
is synthesized from them.
"""
from dataclasses import dataclass, replace
from importlib import resources
import json
import math
from typing import Optional

import numpy as np

from .errors import ScenarioError
from .fusion import DistanceMeasurement, Estimate, directional_stats, linearize_direction
from .omega import optimal_sci_filter
from .oracle import SeededRng, check_consistency
from .pertinence import CostObjective, det_pertinent, necessary_condition, trace_pertinent

KEYS = ("name", "dim", "truth_a", "truth_b", "est_a", "est_b", "sigma_m2",
        "measurement", "objective", "seed")
REQUIRED = ("name", "dim", "est_a", "est_b", "sigma_m2", "objective", "seed")
SYMMETRY_TOL = 1e-9
MEASUREMENT_STREAM = 2**63
CONSISTENCY_SAMPLES = 1000


@dataclass(frozen=True)
class Scenario:
    name: str
    dim: int
    est_a: Estimate
    est_b: Estimate
    sigma_m2: float
    objective: str
    seed: int
    truth_a: Optional[np.ndarray] = None
    truth_b: Optional[np.ndarray] = None
    measurement: Optional[float] = None


def _vector(value, dim, field):
    if not isinstance(value, list) or len(value) != dim or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        raise ScenarioError(f"{field} must be a list of {dim} numbers", field)
    return np.array(value, dtype=float)


def _matrix(value, dim, field):
    if not isinstance(value, list) or len(value) != dim:
        raise ScenarioError(f"{field} must be a {dim}x{dim} array of rows", field)
    rows = [_vector(row, dim, field) for row in value]
    m = np.array(rows)
    if np.max(np.abs(m - m.T)) > SYMMETRY_TOL * max(1.0, float(np.max(np.abs(m)))):
        raise ScenarioError(f"{field} is not symmetric", field)
    return m


def _estimate(value, dim, field):
    if not isinstance(value, dict) or set(value) != {"mean", "cov"}:
        raise ScenarioError(f"{field} must be an object with exactly 'mean' and 'cov'", field)
    mean = _vector(value["mean"], dim, f"{field}.mean")
    cov = _matrix(value["cov"], dim, f"{field}.cov")
    try:
        return Estimate(mean, cov)
    except ValueError as exc:
        raise ScenarioError(f"{field}: {exc}", field) from exc


def _number(value, field):
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
        raise ScenarioError(f"{field} must be a finite number", field)
    return float(value)


def scenario_from_dict(data):
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a JSON object")
    unknown = sorted(set(data) - set(KEYS))
    if unknown:
        raise ScenarioError(f"unknown keys: {', '.join(unknown)}", unknown[0])
    for key in REQUIRED:
        if key not in data:
            raise ScenarioError(f"missing required key '{key}'", key)
    if not isinstance(data["name"], str):
        raise ScenarioError("name must be a string", "name")
    dim = data["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ScenarioError("dim must be a positive integer", "dim")
    sigma_m2 = _number(data["sigma_m2"], "sigma_m2")
    if sigma_m2 < 0:
        raise ScenarioError("sigma_m2 must be nonnegative", "sigma_m2")
    if data["objective"] not in ("trace", "det"):
        raise ScenarioError("objective must be 'trace' or 'det'", "objective")
    seed = data["seed"]
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2**64:
        raise ScenarioError("seed must be an unsigned 64-bit integer", "seed")
    truth_a = _vector(data["truth_a"], dim, "truth_a") if "truth_a" in data else None
    truth_b = _vector(data["truth_b"], dim, "truth_b") if "truth_b" in data else None
    measurement = data.get("measurement")
    if measurement is not None:
        measurement = _number(measurement, "measurement")
    elif truth_a is None or truth_b is None:
        raise ScenarioError("either 'measurement' or both 'truth_a' and 'truth_b' are required",
                            "measurement/truth_a+truth_b")
    return Scenario(
        name=data["name"],
        dim=dim,
        est_a=_estimate(data["est_a"], dim, "est_a"),
        est_b=_estimate(data["est_b"], dim, "est_b"),
        sigma_m2=sigma_m2,
        objective=data["objective"],
        seed=seed,
        truth_a=truth_a,
        truth_b=truth_b,
        measurement=measurement,
    )


def load_scenario(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return scenario_from_dict(data)


def bundled_scenario(name="fig1"):
    """A scenario shipped with the package (``fig1``: the two-agent planar example)."""
    ref = resources.files("scifuse") / "data" / f"{name}.json"
    return scenario_from_dict(json.loads(ref.read_text(encoding="utf-8")))


def swap_roles(scn):
    """Same scenario with B fusing A's estimate instead."""
    return replace(scn, name=f"{scn.name}-swapped", est_a=scn.est_b, est_b=scn.est_a,
                   truth_a=scn.truth_b, truth_b=scn.truth_a)


def synthesize_measurement(scn, rng=None):
    """``|truth_a - truth_b|`` plus Gaussian noise of variance ``sigma_m2``."""
    if scn.truth_a is None or scn.truth_b is None:
        raise ScenarioError("synthesizing a range needs both truth_a and truth_b", "truth_a")
    if rng is None:
        rng = SeededRng(scn.seed).stream(MEASUREMENT_STREAM)
    elif isinstance(rng, SeededRng):
        rng = rng.stream(MEASUREMENT_STREAM)
    dist = float(np.linalg.norm(scn.truth_a - scn.truth_b))
    if scn.sigma_m2 == 0.0:
        return dist
    return dist + float(rng.normal(0.0, math.sqrt(scn.sigma_m2)))


def measurement_for(scn):
    u = linearize_direction(scn.est_a.mean, scn.est_b.mean)
    z = scn.measurement if scn.measurement is not None else synthesize_measurement(scn)
    return DistanceMeasurement(z, scn.sigma_m2, u)


@dataclass
class FusionRecord:
    scenario: str
    objective: str
    measurement: float
    direction: np.ndarray
    sigma_a2: float
    sigma_b2: float
    r_a: float
    necessary: bool
    trace_pertinent: bool
    det_pertinent: bool
    pertinent: bool
    omega_star: float
    method: str
    objective_before: float
    objective_after: float
    fused_mean: np.ndarray
    fused_cov: np.ndarray
    consistency: dict
    diagnostics: dict

    def to_dict(self):
        return {
            "scenario": self.scenario,
            "objective": self.objective,
            "measurement": self.measurement,
            "direction": self.direction.tolist(),
            "stats": {"sigma_a2": self.sigma_a2, "sigma_b2": self.sigma_b2, "r_a": self.r_a},
            "pertinence": {"necessary": self.necessary, "trace": self.trace_pertinent,
                           "det": self.det_pertinent},
            "pertinent": self.pertinent,
            "omega_star": self.omega_star,
            "method": self.method,
            "objective_before": self.objective_before,
            "objective_after": self.objective_after,
            "fused_mean": self.fused_mean.tolist(),
            "fused_cov": self.fused_cov.tolist(),
            "consistency": self.consistency,
            "diagnostics": self.diagnostics,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, default=_jsonable)


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def run_fusion(scn, objective=None, samples=CONSISTENCY_SAMPLES, jobs=1, seed=None):
    """Full pipeline on one scenario: pertinence gate, optimal SCI update, consistency check."""
    objective = objective or scn.objective
    obj = CostObjective.parse(objective)
    seed = scn.seed if seed is None else seed
    meas = measurement_for(scn)
    stats = directional_stats(scn.est_a.cov, scn.est_b.cov, meas.direction)
    sol = optimal_sci_filter(scn.est_a, scn.est_b, meas, obj)
    report = check_consistency(scn.est_a, scn.est_b, meas, sol.omega_star, SeededRng(seed),
                               samples, jobs=jobs)
    summary = report.to_dict()
    summary.pop("violating_sample")
    return FusionRecord(
        scenario=scn.name,
        objective=obj.kind,
        measurement=meas.value,
        direction=meas.direction,
        sigma_a2=stats.sigma_a2,
        sigma_b2=stats.sigma_b2,
        r_a=stats.r_a,
        necessary=necessary_condition(stats),
        trace_pertinent=trace_pertinent(stats),
        det_pertinent=det_pertinent(stats),
        pertinent=sol.pertinent,
        omega_star=sol.omega_star,
        method=sol.method,
        objective_before=obj(scn.est_a.cov),
        objective_after=sol.objective_value,
        fused_mean=sol.fused_mean,
        fused_cov=sol.fused_cov,
        consistency=summary,
        diagnostics=sol.diagnostics,
    )
