"""Scenario configuration, orchestration and report emission.

Configs use degrees; everything below the runner works in radians.
Output is deterministic: no timestamps, fixed column order, fixed
numeric formatting (12 significant digits), so identical configs give
byte-identical files.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

from ._version import __version__
from .bell_engine import (
    ChshSettings,
    chsh_from_table,
    chsh_number,
    enumerate_deterministic_bound,
    estimate_sequential_correlation,
    exact_differing_measure,
    exact_sequential_correlation,
    exact_sequential_joint,
    factorization_probe,
    pilot_wave_exact_source,
    pilot_wave_mc_source,
    quantum_oracle_source,
    strategy_factorization_probe,
    verify_decomposition,
)
from .hv_models import random_strategy_table
from .quantum_reference import malus_probability, sequential_correlation_qm

import numpy as np

SCENARIOS = (
    "malus_sweep",
    "sequential_sweep",
    "chsh",
    "enumeration",
    "factorization",
    "decomposition",
)
MODELS = ("pilot_wave", "strategy_table", "quantum_oracle")
FORMATS = ("csv", "json")

# scenarios that need a concrete angle list, with the required count
# (None = one or more)
_ANGLE_COUNTS = {
    "malus_sweep": None,
    "sequential_sweep": None,
    "chsh": 4,
    "factorization": 3,
    "decomposition": 2,
}

DEFAULT_SAMPLES = 10**6
DEFAULT_SEED = 42

CSV_COLUMNS = (
    "scenario",
    "row_id",
    "theta_a_deg",
    "theta_b_deg",
    "estimate",
    "std_error",
    "exact",
    "deviation_sigma",
    "verdict",
    "n_samples",
    "seed",
)


class ConfigError(ValueError):
    """Invalid scenario configuration."""


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    model: str = "pilot_wave"
    angles_deg: tuple[float, ...] = ()
    initial_polarization_deg: float = 0.0
    samples: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED
    output_format: str = "csv"

    def to_json(self) -> str:
        d = asdict(self)
        d["angles_deg"] = list(self.angles_deg)
        return json.dumps(d, sort_keys=True)


def load_config(text: str) -> ScenarioConfig:
    """Parse and validate a JSON scenario configuration."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")

    known = {
        "scenario",
        "model",
        "angles_deg",
        "initial_polarization_deg",
        "samples",
        "seed",
        "output_format",
    }
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"unknown field(s): {', '.join(unknown)}")

    if "scenario" not in raw:
        raise ConfigError("scenario required")
    scenario = raw["scenario"]
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}; expected one of {SCENARIOS}")

    model = raw.get("model", "pilot_wave")
    if model not in MODELS:
        raise ConfigError(f"unknown model {model!r}; expected one of {MODELS}")

    angles = raw.get("angles_deg")
    if scenario in _ANGLE_COUNTS:
        if angles is None:
            raise ConfigError(f"angles_deg required for scenario {scenario!r}")
        if not isinstance(angles, list) or not angles:
            raise ConfigError("angles_deg must be a non-empty list of numbers")
        if any(not isinstance(a, (int, float)) or not math.isfinite(a) for a in angles):
            raise ConfigError("angles_deg entries must be finite numbers")
        want = _ANGLE_COUNTS[scenario]
        if want is not None and len(angles) != want:
            raise ConfigError(
                f"scenario {scenario!r} needs exactly {want} angles, got {len(angles)}"
            )
        if scenario == "sequential_sweep" and len(angles) < 2:
            raise ConfigError("sequential_sweep needs a first angle plus at least one second angle")
    else:
        angles = angles or []

    theta0 = raw.get("initial_polarization_deg", 0.0)
    if not isinstance(theta0, (int, float)) or not math.isfinite(theta0):
        raise ConfigError("initial_polarization_deg must be a finite number")

    samples = raw.get("samples", DEFAULT_SAMPLES)
    if not isinstance(samples, int) or isinstance(samples, bool) or samples < 0:
        raise ConfigError(f"samples must be an integer >= 0, got {samples!r}")

    seed = raw.get("seed", DEFAULT_SEED)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError(f"seed must be an unsigned integer, got {seed!r}")

    fmt = raw.get("output_format", "csv")
    if fmt not in FORMATS:
        raise ConfigError(f"output_format must be one of {FORMATS}, got {fmt!r}")

    if scenario in ("malus_sweep", "sequential_sweep", "decomposition") and model == "strategy_table":
        raise ConfigError(f"model 'strategy_table' is not valid for scenario {scenario!r}")

    return ScenarioConfig(
        scenario=scenario,
        model=model,
        angles_deg=tuple(float(a) for a in angles),
        initial_polarization_deg=float(theta0),
        samples=samples,
        seed=seed,
        output_format=fmt,
    )


@dataclass(frozen=True)
class ReportRow:
    row_id: str
    theta_a_deg: float | None
    theta_b_deg: float | None
    estimate: float
    std_error: float
    exact: float
    deviation_sigma: float
    verdict: str
    n_samples: int


@dataclass(frozen=True)
class Report:
    scenario: str
    rows: tuple[ReportRow, ...]
    verdicts: dict
    seed: int
    samples: int
    version: str = __version__


class ScenarioError(RuntimeError):
    """A scenario failed at run time; carries the scenario name for context."""


def run_scenario(config: ScenarioConfig) -> Report:
    """Execute one scenario preset deterministically."""
    try:
        handler = {
            "malus_sweep": _run_malus_sweep,
            "sequential_sweep": _run_sequential_sweep,
            "chsh": _run_chsh,
            "enumeration": _run_enumeration,
            "factorization": _run_factorization,
            "decomposition": _run_decomposition,
        }[config.scenario]
        return handler(config)
    except ScenarioError:
        raise
    except Exception as exc:
        raise ScenarioError(f"scenario {config.scenario!r} failed: {exc}") from exc


def _deviation(estimate: float, exact: float, se: float) -> float:
    if se == 0.0:
        return 0.0 if estimate == exact else math.inf
    return (estimate - exact) / se


def _run_malus_sweep(config: ScenarioConfig) -> Report:
    theta0 = math.radians(config.initial_polarization_deg)
    rows = []
    for i, a_deg in enumerate(config.angles_deg):
        a = math.radians(a_deg)
        exact = malus_probability(theta0, a)
        if config.samples > 0:
            u = np.random.default_rng([config.seed, i]).random(config.samples)
            freq = float(np.mean(u < exact))
            se = math.sqrt(exact * (1.0 - exact) / config.samples)
            est_se = math.sqrt(max(freq * (1.0 - freq), 0.0) / config.samples)
            rows.append(
                ReportRow(
                    f"malus_{i}", a_deg, None, freq, est_se, exact,
                    _deviation(freq, exact, se), "", config.samples,
                )
            )
        else:
            rows.append(
                ReportRow(f"malus_{i}", a_deg, None, exact, 0.0, exact, 0.0, "", 0)
            )
    return Report("malus_sweep", tuple(rows), {}, config.seed, config.samples)


def _run_sequential_sweep(config: ScenarioConfig) -> Report:
    theta0 = math.radians(config.initial_polarization_deg)
    a_deg = config.angles_deg[0]
    a = math.radians(a_deg)
    rows = []
    for i, b_deg in enumerate(config.angles_deg[1:]):
        b = math.radians(b_deg)
        if config.model == "quantum_oracle":
            exact = sequential_correlation_qm(a, b)
        else:
            exact = exact_sequential_correlation(theta0, a, b).value
        if config.samples > 0 and config.model == "pilot_wave":
            est = estimate_sequential_correlation(
                theta0, a, b, config.samples, config.seed
            )
            rows.append(
                ReportRow(
                    f"seq_{i}", a_deg, b_deg, est.value, est.std_error, exact,
                    _deviation(est.value, exact, est.std_error), "", est.n_samples,
                )
            )
        else:
            rows.append(
                ReportRow(f"seq_{i}", a_deg, b_deg, exact, 0.0, exact, 0.0, "", 0)
            )
    return Report("sequential_sweep", tuple(rows), {}, config.seed, config.samples)


def _chsh_source(config: ScenarioConfig, theta0: float):
    if config.model == "quantum_oracle":
        return quantum_oracle_source()
    if config.samples > 0:
        return pilot_wave_mc_source(theta0, config.samples, config.seed)
    return pilot_wave_exact_source(theta0)


def _run_chsh(config: ScenarioConfig) -> Report:
    theta0 = math.radians(config.initial_polarization_deg)
    settings = ChshSettings.from_degrees(*config.angles_deg)
    oracle = chsh_number(settings, quantum_oracle_source())
    if config.model == "strategy_table":
        table = random_strategy_table(np.random.default_rng(config.seed))
        result = chsh_from_table(table)
    else:
        result = chsh_number(settings, _chsh_source(config, theta0))
    a_deg, ap_deg, b_deg, bp_deg = config.angles_deg
    term_angles = ((a_deg, b_deg), (ap_deg, bp_deg), (ap_deg, b_deg), (a_deg, bp_deg))
    term_ids = ("E_ab", "E_apbp", "E_apb", "E_abp")
    rows = []
    for rid, (ta, tb), term, ref in zip(term_ids, term_angles, result.terms, oracle.terms):
        rows.append(
            ReportRow(
                rid, ta, tb, term.value, term.std_error, ref.value,
                _deviation(term.value, ref.value, term.std_error), "", term.n_samples,
            )
        )
    rows.append(
        ReportRow(
            "S", None, None, result.s_value, result.std_error, oracle.s_value,
            _deviation(result.s_value, oracle.s_value, result.std_error),
            result.verdict, config.samples if result.std_error > 0 else 0,
        )
    )
    verdicts = {
        "s_value": result.s_value,
        "verdict": result.verdict,
        "quantum_reference_s": oracle.s_value,
    }
    return Report("chsh", tuple(rows), verdicts, config.seed, config.samples)


def _run_enumeration(config: ScenarioConfig) -> Report:
    max_abs_s, attaining = enumerate_deterministic_bound()
    rows = []
    for i, (aa, aap, bb, bbp) in enumerate(itertools.product((1, -1), repeat=4)):
        s = aa * bb + aap * bbp + aap * bb - aa * bbp
        rows.append(
            ReportRow(
                f"strategy_{i}", None, None, float(s), 0.0, float(s), 0.0,
                "satisfies_bound", 0,
            )
        )
    verdicts = {"max_abs_s": max_abs_s, "n_attaining": len(attaining)}
    return Report("enumeration", tuple(rows), verdicts, config.seed, 0)


def _run_factorization(config: ScenarioConfig) -> Report:
    theta0 = math.radians(config.initial_polarization_deg)
    a_deg, ap_deg, b_deg = config.angles_deg
    a, ap, b = (math.radians(x) for x in config.angles_deg)
    if config.model == "strategy_table":
        table = random_strategy_table(np.random.default_rng(config.seed))
        report = strategy_factorization_probe(table, 0, 0, 1)
        exact = 0.0
        se = 0.0
    else:
        n = config.samples if config.samples > 0 else 10**4
        report = factorization_probe(a, ap, b, theta0, n, config.seed)
        exact = exact_differing_measure(a, ap, b, theta0)
        se = math.sqrt(exact * (1.0 - exact) / n)
    row = ReportRow(
        "differing_fraction", a_deg, b_deg, report.differing_fraction,
        se, exact, _deviation(report.differing_fraction, exact, se),
        report.verdict, report.sampled_lambdas,
    )
    verdicts = {
        "verdict": report.verdict,
        "theta_a_prime_deg": ap_deg,
        "differing_fraction": report.differing_fraction,
        "exact_differing_measure": exact,
    }
    return Report("factorization", (row,), verdicts, config.seed, config.samples)


def _run_decomposition(config: ScenarioConfig) -> Report:
    theta0 = math.radians(config.initial_polarization_deg)
    a_deg, b_deg = config.angles_deg
    a, b = math.radians(a_deg), math.radians(b_deg)
    n = config.samples if config.samples > 0 else 10**4
    rows = []
    labels = {(1, 1): "pp", (1, -1): "pm", (-1, 1): "mp", (-1, -1): "mm"}
    for row in verify_decomposition(theta0, a, b, n, config.seed):
        se = math.sqrt(row.exact * (1.0 - row.exact) / n)
        rows.append(
            ReportRow(
                f"p_{labels[(row.alpha, row.beta)]}", a_deg, b_deg,
                row.mc_frequency, se, row.exact, row.deviation_sigma, "", n,
            )
        )
    return Report("decomposition", tuple(rows), {}, config.seed, config.samples)


# ---------------------------------------------------------------------------
# emission

def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.12g}"
    return str(x)


def _round12(x):
    if x is None or isinstance(x, (int, str)):
        return x
    if math.isinf(x) or math.isnan(x):
        return str(x)
    return float(f"{x:.12g}")


def emit_report(report: Report, fmt: str, out_dir) -> list[Path]:
    """Write the report as CSV or JSON; returns the written paths."""
    if fmt not in FORMATS:
        raise ConfigError(f"output_format must be one of {FORMATS}, got {fmt!r}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{report.scenario}_report.{fmt}"
    if fmt == "csv":
        lines = [",".join(CSV_COLUMNS)]
        for row in report.rows:
            lines.append(
                ",".join(
                    [
                        report.scenario,
                        row.row_id,
                        _fmt(row.theta_a_deg),
                        _fmt(row.theta_b_deg),
                        _fmt(row.estimate),
                        _fmt(row.std_error),
                        _fmt(row.exact),
                        _fmt(row.deviation_sigma),
                        row.verdict,
                        str(row.n_samples),
                        str(report.seed),
                    ]
                )
            )
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    else:
        doc = {
            "scenario": report.scenario,
            "rows": [
                {
                    "row_id": r.row_id,
                    "theta_a_deg": _round12(r.theta_a_deg),
                    "theta_b_deg": _round12(r.theta_b_deg),
                    "estimate": _round12(r.estimate),
                    "std_error": _round12(r.std_error),
                    "exact": _round12(r.exact),
                    "deviation_sigma": _round12(r.deviation_sigma),
                    "verdict": r.verdict,
                    "n_samples": r.n_samples,
                }
                for r in report.rows
            ],
            "verdicts": {k: _round12(v) for k, v in report.verdicts.items()},
            "meta": {
                "seed": report.seed,
                "samples": report.samples,
                "version": report.version,
            },
        }
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return [path]
