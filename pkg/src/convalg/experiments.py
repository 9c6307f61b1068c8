"""Declarative experiment runner.

A config names weights, families, functions and measures, then lists suites
``{"name", "check", "targets", "params", "expect"}``.  Every name is resolved
before anything runs; a suite that raises is reported as an error without
touching the others.
"""

from __future__ import annotations

import csv
import io
import json
import platform
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np
import scipy

from . import __version__
from .errors import ConfigError, ConvalgError
from .family import (
    FAMILY_KINDS,
    WeightFamily,
    builtin_families,
    check_condition_c,
    check_condition_d,
    check_convergence_factor,
    check_monotone,
    check_wein,
    check_weco,
    check_weco_family,
    check_weco_p,
    family_from_dict,
)
from .grid import (
    EXACT_SUPPORT,
    FUNCTION_KINDS,
    Grid,
    GridFunction,
    check_approximate_identity,
    check_banach_inequality,
    check_character,
    function_from_dict,
)
from .measures import Measure, check_measure_banach, dirac, measure_from_dict
from .operators import (
    DerivationOp,
    DilationEndo,
    check_alpha_inequality,
    check_dilation_norm_identity,
    check_semigroup_action,
    check_titchmarsh,
    derivation_on_dirac,
    endo_ai_check,
    extended_derivation,
    ghahramani_bound,
    leibniz_residual,
)
from .report import CheckReport, Verdict, jsonable
from .weights import (
    WEIGHT_KINDS,
    Weight,
    builtin_weights,
    check_integer_subadditive,
    check_root_limit,
    check_submultiplicative,
    check_subadditive_extension,
    check_tends_to_infinity,
    popcount_table,
    weight_from_dict,
)

EXPECT = ("pass", "fail", "any")


@dataclass(frozen=True)
class SuiteContext:
    grid: Grid
    rng: np.random.Generator


@dataclass(frozen=True)
class CheckSpec:
    fn: Callable[..., CheckReport]
    targets: dict[str, str]
    params: dict[str, Any]
    doc: str


# --- check adapters ------------------------------------------------------


def _integer_subadditive(ctx, *, limit):
    return check_integer_subadditive(popcount_table(), int(limit))


def _subadditive_extension(ctx, *, grid_step, x_max, abs_tol):
    return check_subadditive_extension(popcount_table(), grid_step, x_max, abs_tol)


def _submultiplicative(ctx, weight, *, n_pairs, t_max, rel_tol):
    pairs = ctx.rng.uniform(0.0, t_max, size=(int(n_pairs), 2))
    return check_submultiplicative(weight, pairs, rel_tol)


def _root_limit(ctx, weight, *, horizon, window, tol):
    return check_root_limit(weight, horizon, window, tol)


def _tends_to_infinity(ctx, weight, *, horizon, thresholds):
    return check_tends_to_infinity(weight, horizon, thresholds)


def _monotone(ctx, family, *, horizon):
    return check_monotone(family, horizon)


def _condition_c(ctx, family, *, n, horizon, threshold):
    return check_condition_c(family, int(n), horizon, threshold)


def _condition_d(ctx, family, *, t, threshold):
    return check_condition_d(family, t, threshold)


def _wein(ctx, family, *, n, horizon, growth_threshold, m_max):
    return check_wein(family, int(n), horizon, growth_threshold, m_max)


def _weco(ctx, family, *, n, horizon, m_max):
    return check_weco(family, int(n), horizon, m_max)


def _weco_p(ctx, family, *, n, p, horizon, m_max):
    return check_weco_p(family, int(n), p, horizon, m_max)


def _weco_family(ctx, family, *, p, ns, horizon, m_max):
    return check_weco_family(family, p, ns, horizon, m_max)


def _convergence_factor(ctx, family, *, n, m, r, horizon, tol):
    return check_convergence_factor(family, int(n), int(m), r, horizon, tol)


def _approximate_identity(ctx, function, weight, *, k_list, tol):
    return check_approximate_identity(function, weight, k_list, tol)


def _character(ctx, f, g, *, z, tol):
    return check_character(f, g, [complex(a, b) for a, b in z], tol)


def _banach(ctx, weight, *, n_pairs, slack):
    fn = check_banach_inequality(weight, ctx.grid, ctx.rng, int(n_pairs), slack)
    ms = check_measure_banach(weight, ctx.rng, int(n_pairs), ctx.grid.T / 4, slack)
    ok = fn.passed and ms.passed
    return CheckReport(
        "banach_inequality",
        Verdict.PASS if ok else Verdict.FAIL,
        witness=list(fn.witness) + list(ms.witness),
        extremum=max(fn.extremum, ms.extremum),
        parameters=fn.parameters,
        details={"functions": fn.extremum, "measures": ms.extremum},
    )


def _titchmarsh(ctx, f, g, *, eps_rel):
    return check_titchmarsh(f, g, eps_rel)


def _leibniz(ctx, measure, f, g, weight, *, max_residual):
    r = leibniz_residual(DerivationOp(measure), f, g, weight)
    ok = r <= max_residual
    return CheckReport(
        "leibniz",
        Verdict.PASS if ok else Verdict.FAIL,
        witness=() if ok else [(ctx.grid.h, r)],
        extremum=r,
        parameters={"h": ctx.grid.h, "max_residual": max_residual},
        details={"residual_over_h": r / ctx.grid.h},
    )


def _alpha_inequality(ctx, measure, input, *, slack):
    return check_alpha_inequality(DerivationOp(measure), input, slack)


def _derivation_on_dirac(ctx, measure, *, t):
    """``D(delta_t)`` built from atoms against the extension ``(X delta_t) * mu``."""
    D = DerivationOp(measure)
    bad = []
    for s in t:
        direct = derivation_on_dirac(D, s)
        via = extended_derivation(D, dirac(s))
        if direct.atoms != via.atoms:
            bad.append((s, float(len(direct.atoms))))
    return CheckReport(
        "derivation_on_dirac",
        Verdict.FAIL if bad else Verdict.PASS,
        witness=bad,
        extremum=float(len(bad)),
        parameters={"t": list(t)},
        evidence="exact",
    )


def _ghahramani(ctx, measure, weight, *, horizon):
    est = ghahramani_bound(measure, weight, horizon)
    ok = est.status == "bounded"
    verdict = Verdict.PASS if ok else (
        Verdict.FAIL if est.status == "unbounded" else Verdict.INCONCLUSIVE)
    return CheckReport(
        "ghahramani_bound",
        verdict,
        witness=[(est.argmax_doubled, est.value_doubled)] if verdict is Verdict.FAIL else (),
        extremum=est.value,
        parameters={"horizon": horizon},
        evidence="finite-horizon",
        details=est.to_dict(),
    )


def _dilation_norm_identity(ctx, function, *, a, c, tol):
    return check_dilation_norm_identity(a, function, tol, DilationEndo(c))


def _semigroup_action(ctx, function, *, s, c, factor):
    return check_semigroup_action(DilationEndo(c), function, s, factor)


def _endo_ai(ctx, function, family, *, c, n, k_list, tol):
    return endo_ai_check(DilationEndo(c), family, function, k_list, int(n), tol)


_K_LIST = [2**j for j in range(4, 11)]

CHECKS: dict[str, CheckSpec] = {
    "integer_subadditive": CheckSpec(_integer_subadditive, {}, {"limit": 4096},
                                     "v(m+n) <= v(m)+v(n), exhaustive"),
    "subadditive_extension": CheckSpec(
        _subadditive_extension, {}, {"grid_step": 1 / 64, "x_max": 64.0, "abs_tol": 1e-12},
        "piecewise-linear extension stays subadditive on a grid"),
    "submultiplicative": CheckSpec(
        _submultiplicative, {"weight": "weight"},
        {"n_pairs": 10000, "t_max": 64.0, "rel_tol": 1e-12},
        "w(s+t) <= w(s) w(t) on random pairs"),
    "root_limit": CheckSpec(_root_limit, {"weight": "weight"},
                            {"horizon": 2.0**10, "window": 2.0**9, "tol": 0.05},
                            "w(t)^(1/t) -> 1"),
    "tends_to_infinity": CheckSpec(
        _tends_to_infinity, {"weight": "weight"},
        {"horizon": 2.0**10, "thresholds": [10.0, 100.0]}, "w(t) -> inf"),
    "monotone": CheckSpec(_monotone, {"family": "family"}, {"horizon": 2.0**10},
                          "w_n <= w_{n+1}"),
    "condition_c": CheckSpec(_condition_c, {"family": "family"},
                             {"n": 1, "horizon": 2.0**10, "threshold": 2.0**10},
                             "sup w_{n+1}/w_n reaches the threshold"),
    "condition_d": CheckSpec(_condition_d, {"family": "family"},
                             {"t": 1.0, "threshold": 2.0**10},
                             "w_n(t) exceeds the threshold for large n"),
    "wein": CheckSpec(_wein, {"family": "family"},
                      {"n": 1, "horizon": 2.0**10, "growth_threshold": 100.0, "m_max": None},
                      "some w_m/w_n tends to infinity"),
    "weco": CheckSpec(_weco, {"family": "family"},
                      {"n": 1, "horizon": 2.0**10, "m_max": None},
                      "some sup t w_n/w_m is finite"),
    "weco_p": CheckSpec(_weco_p, {"family": "family"},
                        {"n": 1, "p": 1.0, "horizon": 2.0**10, "m_max": None},
                        "some sup t^p w_n/w_m is finite"),
    "weco_family": CheckSpec(_weco_family, {"family": "family"},
                             {"p": 1.0, "ns": None, "horizon": 2.0**10, "m_max": None},
                             "weco_p for every n"),
    "convergence_factor": CheckSpec(
        _convergence_factor, {"family": "family"},
        {"n": 1, "m": 2, "r": 1.0, "horizon": 2.0**10, "tol": 1e-6},
        "sup w_n(s)^2 / (w_m(s) w_n(r)) tends to zero"),
    "approximate_identity": CheckSpec(
        _approximate_identity, {"function": "function", "weight": "weight"},
        {"k_list": _K_LIST, "tol": 1e-3}, "||e_k||_w -> 1 and e_k*f -> f"),
    "character": CheckSpec(_character, {"f": "function", "g": "function"},
                           {"z": [[0, 0], [1, 0], [1, 1], [0, 5]], "tol": 1e-2},
                           "Laplace transform is multiplicative"),
    "banach_inequality": CheckSpec(_banach, {"weight": "weight"},
                                   {"n_pairs": 100, "slack": 1e-6},
                                   "||f*g|| <= ||f|| ||g|| for functions and measures"),
    "titchmarsh": CheckSpec(_titchmarsh, {"f": "function", "g": "function"},
                            {"eps_rel": EXACT_SUPPORT},
                            "alpha(f*g) = alpha(f) + alpha(g) within 2h"),
    "leibniz": CheckSpec(_leibniz, {"measure": "measure", "f": "function", "g": "function",
                                    "weight": "weight"},
                         {"max_residual": 1e-8}, "D(f*g) = D(f)*g + f*D(g)"),
    "alpha_inequality": CheckSpec(_alpha_inequality, {"measure": "measure", "input": "measure"},
                                  {"slack": 0.0}, "alpha(D(nu)) >= alpha(nu)"),
    "derivation_on_dirac": CheckSpec(_derivation_on_dirac, {"measure": "measure"},
                                     {"t": [0.0, 0.25, 1.0, 3.0]},
                                     "D(delta_t) = t delta_t * mu on atoms"),
    "ghahramani_bound": CheckSpec(_ghahramani, {"measure": "measure", "weight": "weight"},
                                  {"horizon": 2.0**10},
                                  "sup (t/w(t)) int w(t+s) d|mu|(s) is finite"),
    "dilation_norm_identity": CheckSpec(
        _dilation_norm_identity, {"function": "function"}, {"a": 1.0, "c": 2.0, "tol": 1e-3},
        "||Phi f||_{exp(a sqrt t)} = ||f||_{exp(a/sqrt(c) sqrt t)}"),
    "semigroup_action": CheckSpec(_semigroup_action, {"function": "function"},
                                  {"s": 1.0, "c": 2.0, "factor": 8.0},
                                  "Phi(delta_s*f) = nu^s * Phi(f)"),
    "endo_ai": CheckSpec(_endo_ai, {"function": "function", "family": "family"},
                         {"c": 2.0, "n": 1, "k_list": _K_LIST, "tol": 1e-3},
                         "Phi(e_k) is an approximate identity"),
}


def catalog() -> dict[str, Any]:
    """Everything a config may name."""
    return {
        "weight_kinds": WEIGHT_KINDS,
        "family_kinds": FAMILY_KINDS,
        "function_kinds": FUNCTION_KINDS,
        "builtin_weights": sorted(builtin_weights()),
        "builtin_families": sorted(builtin_families()),
        "checks": {
            name: {"targets": spec.targets, "params": spec.params, "doc": spec.doc}
            for name, spec in CHECKS.items()
        },
    }


# --- config --------------------------------------------------------------


@dataclass
class ExperimentConfig:
    grid: Grid = field(default_factory=Grid)
    seed: int = 0
    weights: dict[str, Weight] = field(default_factory=dict)
    families: dict[str, WeightFamily] = field(default_factory=dict)
    functions: dict[str, GridFunction] = field(default_factory=dict)
    measures: dict[str, Measure] = field(default_factory=dict)
    suites: list[dict[str, Any]] = field(default_factory=list)

    def pool(self, kind: str) -> dict[str, Any]:
        if kind == "weight":
            return {**builtin_weights(), **self.weights}
        if kind == "family":
            return {**builtin_families(), **self.families}
        if kind == "function":
            return self.functions
        return self.measures


def _section(raw: dict, key: str) -> dict:
    sec = raw.get(key, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"{key!r} must be an object")
    return sec


def load_config(raw: dict[str, Any], *, grid_h: float | None = None,
                grid_T: float | None = None, seed: int | None = None) -> ExperimentConfig:
    """Parse and fully validate a config dict; overrides win over the file."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - {"grid", "seed", "weights", "families", "functions", "measures",
                          "suites"}
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    g = _section(raw, "grid")
    try:
        grid = Grid(float(grid_h if grid_h is not None else g.get("h", Grid.h)),
                    float(grid_T if grid_T is not None else g.get("T", Grid.T)))
        cfg = ExperimentConfig(
            grid=grid,
            seed=int(seed if seed is not None else raw.get("seed", 0)),
            weights={k: weight_from_dict(v) for k, v in _section(raw, "weights").items()},
            families={k: family_from_dict(v) for k, v in _section(raw, "families").items()},
            functions={k: function_from_dict(v, grid)
                       for k, v in _section(raw, "functions").items()},
            measures={k: measure_from_dict(v, grid)
                      for k, v in _section(raw, "measures").items()},
        )
    except ConvalgError as exc:
        raise ConfigError(str(exc)) from exc
    except (TypeError, ValueError, AttributeError) as exc:
        raise ConfigError(f"malformed descriptor: {exc}") from exc

    suites = raw.get("suites", [])
    if not isinstance(suites, list):
        raise ConfigError("'suites' must be a list")
    names = set()
    for i, s in enumerate(suites):
        cfg.suites.append(_validate_suite(cfg, i, s))
        if cfg.suites[-1]["name"] in names:
            raise ConfigError(f"duplicate suite name {cfg.suites[-1]['name']!r}")
        names.add(cfg.suites[-1]["name"])
    return cfg


def _validate_suite(cfg: ExperimentConfig, i: int, s: Any) -> dict[str, Any]:
    if not isinstance(s, dict):
        raise ConfigError(f"suite {i} must be an object")
    check = s.get("check")
    if check not in CHECKS:
        raise ConfigError(f"suite {i}: unknown check {check!r}")
    spec = CHECKS[check]
    targets = s.get("targets", {})
    if set(targets) != set(spec.targets):
        raise ConfigError(f"suite {i}: {check} needs targets {sorted(spec.targets)}")
    for role, kind in spec.targets.items():
        if targets[role] not in cfg.pool(kind):
            raise ConfigError(f"suite {i}: unknown {kind} {targets[role]!r}")
    params = s.get("params", {})
    extra = set(params) - set(spec.params)
    if extra:
        raise ConfigError(f"suite {i}: unknown params {sorted(extra)} for {check}")
    expect = s.get("expect", "pass")
    if expect not in EXPECT:
        raise ConfigError(f"suite {i}: expect must be one of {EXPECT}")
    return {
        "name": str(s.get("name", f"{i:02d}_{check}")),
        "check": check,
        "targets": dict(targets),
        "params": {**spec.params, **params},
        "expect": expect,
    }


# --- running -------------------------------------------------------------


@dataclass
class RunReport:
    environment: dict[str, Any]
    suites: list[dict[str, Any]]

    @property
    def passed(self) -> bool:
        return all(s["ok"] for s in self.suites)

    def to_dict(self) -> dict[str, Any]:
        return {
            "aggregate": "pass" if self.passed else "fail",
            "environment": self.environment,
            "suites": self.suites,
        }

    def to_json(self) -> str:
        return json.dumps(jsonable(self.to_dict()), sort_keys=True, indent=2) + "\n"

    def suite_csv(self, suite: dict[str, Any]) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["check", "target", "verdict", "extremum", "witness"])
        rep = suite.get("report") or {}
        writer.writerow([
            suite["check"],
            ";".join(f"{k}={v}" for k, v in sorted(suite["targets"].items())),
            suite["verdict"],
            json.dumps(jsonable(rep.get("extremum"))),
            json.dumps(jsonable(rep.get("witness", []))),
        ])
        return buf.getvalue()

    def write(self, out_dir: str | Path) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(self.to_json())
        for s in self.suites:
            (out / f"{s['name']}.csv").write_text(self.suite_csv(s))


def environment(cfg: ExperimentConfig) -> dict[str, Any]:
    return {
        "grid": {"h": cfg.grid.h, "T": cfg.grid.T},
        "seed": cfg.seed,
        "versions": {
            "convalg": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
    }


def run_suite(cfg: ExperimentConfig, index: int, suite: dict[str, Any]) -> dict[str, Any]:
    spec = CHECKS[suite["check"]]
    # one stream per suite, so suites cannot influence each other's samples
    ctx = SuiteContext(cfg.grid, np.random.default_rng([cfg.seed, index]))
    args = [cfg.pool(kind)[suite["targets"][role]] for role, kind in spec.targets.items()]
    entry = {k: suite[k] for k in ("name", "check", "targets", "expect")}
    try:
        with np.errstate(over="raise", invalid="raise"):
            rep = spec.fn(ctx, *args, **suite["params"])
    except (ConvalgError, ArithmeticError, ValueError) as exc:
        entry.update(verdict="error", ok=False, error=f"{type(exc).__name__}: {exc}")
        return entry
    verdict = rep.verdict.value
    expect = suite["expect"]
    ok = verdict == expect or (expect == "any" and verdict != "error")
    entry.update(verdict=verdict, ok=ok, report=rep.to_dict())
    return entry


def run(cfg: ExperimentConfig) -> RunReport:
    suites = [run_suite(cfg, i, s) for i, s in enumerate(cfg.suites)]
    return RunReport(environment(cfg), suites)


def run_file(path: str | Path, **overrides) -> RunReport:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return run(load_config(raw, **overrides))
