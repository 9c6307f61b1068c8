"""Increasing weight families and the conditions placed on them.

All asymptotic conditions are finite-horizon probes; see
:mod:`convalg.report` for the horizon-doubling protocol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Iterable

import numpy as np

from .errors import ParameterError
from .report import (
    BOUNDED_REL,
    FINITE_HORIZON,
    UNBOUNDED_FACTOR,
    CheckReport,
    Verdict,
    probe_sup,
    safe_exp,
    sample_points,
)
from .weights import (
    BinaryPow,
    Exponential,
    ExpSqrt,
    FractionalPower,
    Pow,
    Power,
    Weight,
    weight_from_dict,
)

DEFAULT_HORIZON = 2.0**10

FAMILY_KINDS = {
    "power_n": {"a": "real > 0 (member n is (1+t)^(a n))", "n_max": "int"},
    "frac_power": {"n_max": "int (member n is (1+t)^(1-1/n))"},
    "exp_sqrt_n": {"a": "real > 0 (member n is exp(a n sqrt t))", "n_max": "int"},
    "exp_n": {"a": "real > 0 (member n is exp(a n t))", "n_max": "int"},
    "binary_pow_n": {"b": "real > 1 (member n is b^(n v(t)))", "n_max": "int"},
    "weight_pow_n": {"base": "weight (member n is base^n)", "n_max": "int"},
    "constant": {"base": "weight (every member equals base)", "n_max": "int"},
}


@dataclass(frozen=True)
class WeightFamily:
    """Closed-form family ``n -> w_n`` for ``1 <= n <= n_max``."""

    kind: str
    n_max: int = 16
    a: float = 1.0
    b: float = 2.0
    base: Weight | None = None

    def __post_init__(self):
        if self.kind not in FAMILY_KINDS:
            raise ParameterError(f"unknown family kind {self.kind!r}")
        if self.kind in ("weight_pow_n", "constant") and self.base is None:
            raise ParameterError(f"{self.kind} needs a base weight")
        if self.n_max < 1:
            raise ParameterError("n_max must be >= 1")

    def member(self, n: int) -> Weight:
        if not 1 <= n <= self.n_max:
            raise ParameterError(f"index {n} outside 1..{self.n_max}")
        k = self.kind
        if k == "power_n":
            return Power(self.a * n)
        if k == "frac_power":
            return Power(0.0) if n == 1 else FractionalPower(1 - 1 / n)
        if k == "exp_sqrt_n":
            return ExpSqrt(self.a * n)
        if k == "exp_n":
            return Exponential(self.a * n)
        if k == "binary_pow_n":
            return Pow(BinaryPow(self.b), n)
        if k == "weight_pow_n":
            return Pow(self.base, n)
        return self.base

    __getitem__ = member

    def log_eval(self, n: int, t: np.ndarray) -> np.ndarray:
        return self.member(n).log_eval(np.asarray(t, dtype=float))

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"kind": self.kind, "n_max": self.n_max}
        if self.kind in ("power_n", "exp_sqrt_n", "exp_n"):
            d["a"] = self.a
        if self.kind == "binary_pow_n":
            d["b"] = self.b
        if self.base is not None:
            d["base"] = self.base.to_dict()
        return d


def family_from_dict(d: dict[str, Any]) -> WeightFamily:
    kw: dict[str, Any] = {"kind": d.get("kind")}
    if "n_max" in d:
        kw["n_max"] = int(d["n_max"])
    if "a" in d:
        kw["a"] = float(d["a"])
    if "b" in d:
        kw["b"] = float(d["b"])
    if "base" in d:
        kw["base"] = weight_from_dict(d["base"])
    return WeightFamily(**kw)


def builtin_families(n_max: int = 16) -> dict[str, WeightFamily]:
    """The six reference families used throughout the tests and configs."""
    return {
        "power_n": WeightFamily("power_n", n_max),
        "frac_power": WeightFamily("frac_power", n_max),
        "exp_sqrt_n": WeightFamily("exp_sqrt_n", n_max),
        "exp_n": WeightFamily("exp_n", n_max),
        "binary_pow_n": WeightFamily("binary_pow_n", n_max),
        "weight_pow_n": WeightFamily(
            "weight_pow_n", n_max, base=Power(1.0) * ExpSqrt(0.5)
        ),
    }


def _ratio(fam: WeightFamily, top: int, bottom: int, t: np.ndarray) -> np.ndarray:
    """``w_top(t) / w_bottom(t)`` by direct evaluation, falling back to logs."""
    with np.errstate(over="ignore", invalid="ignore"):
        direct = np.asarray(fam.member(top)(t)) / np.asarray(fam.member(bottom)(t))
        via_log = np.exp(fam.log_eval(top, t) - fam.log_eval(bottom, t))
    return np.where(np.isfinite(direct), direct, via_log)


def _check_index(fam: WeightFamily, n: int):
    if not 1 <= n < fam.n_max:
        raise ParameterError(f"need 1 <= n < n_max={fam.n_max}")


# --- standing assumptions -------------------------------------------------


def check_monotone(fam: WeightFamily, horizon: float = DEFAULT_HORIZON,
                   rel_tol: float = 1e-12) -> CheckReport:
    """``w_n(t) <= w_{n+1}(t) (1 + rel_tol)`` on sampled ``t`` for all ``n``."""
    ts = sample_points(0.0, horizon)
    worst, witness = -np.inf, []
    for n in range(1, fam.n_max):
        excess = fam.log_eval(n, ts) - fam.log_eval(n + 1, ts)
        i = int(np.argmax(excess))
        worst = max(worst, float(excess[i]))
        if excess[i] > math.log1p(rel_tol):
            witness.append((ts[i], float(n)))
    return CheckReport(
        "family_monotone",
        Verdict.FAIL if witness else Verdict.PASS,
        witness=witness,
        extremum=worst,
        parameters={"family": fam.to_dict(), "horizon": horizon, "rel_tol": rel_tol},
    )


def check_condition_c(fam: WeightFamily, n: int, horizon: float = DEFAULT_HORIZON,
                      threshold: float = 2.0**10) -> CheckReport:
    """Sampled ``sup w_{n+1}/w_n`` on ``[0, horizon]`` reaches ``threshold``."""
    _check_index(fam, n)
    ts = sample_points(0.0, horizon)
    logs = fam.log_eval(n + 1, ts) - fam.log_eval(n, ts)
    i = int(np.argmax(logs))
    value = float(_ratio(fam, n + 1, n, ts[i]))
    ok = value >= threshold
    return CheckReport(
        "condition_c",
        Verdict.PASS if ok else Verdict.FAIL,
        witness=[(ts[i], value)],
        extremum=value,
        parameters={"family": fam.to_dict(), "n": n, "horizon": horizon,
                    "threshold": threshold},
        evidence=FINITE_HORIZON,
    )


def check_condition_d(fam: WeightFamily, t: float, threshold: float) -> CheckReport:
    """``w_n(t)`` is nondecreasing in ``n`` and exceeds ``threshold``."""
    if t < 0:
        raise ParameterError("t must be >= 0")
    ns = np.arange(1, fam.n_max + 1)
    logs = np.array([fam.log_eval(int(n), t) for n in ns], dtype=float)
    values = np.exp(logs)
    drops = np.flatnonzero(np.diff(logs) < -1e-12 * np.maximum(1.0, np.abs(logs[1:])))
    exceeded = bool(np.any(logs >= math.log(threshold))) and not drops.size
    witness = [(float(ns[k + 1]), float(values[k + 1])) for k in drops]
    if not exceeded and not witness:
        witness = [(float(ns[-1]), float(values[-1]))]
    return CheckReport(
        "condition_d",
        Verdict.PASS if exceeded else Verdict.FAIL,
        witness=witness if not exceeded else (),
        extremum=float(values.max()),
        parameters={"family": fam.to_dict(), "t": t, "threshold": threshold},
        evidence=FINITE_HORIZON,
        details={"values": values.tolist()},
    )


# --- divergence of w_m / w_n --------------------------------------------


def check_wein(fam: WeightFamily, n: int, horizon: float = DEFAULT_HORIZON,
               growth_threshold: float = 100.0, m_max: int | None = None) -> CheckReport:
    """Search the least ``m`` with ``w_m(s)/w_n(s) -> inf``.

    An ``m`` qualifies when the sampled infimum of the ratio over
    ``[horizon/2, horizon]`` is at least ``growth_threshold`` and the infimum
    over ``[horizon, 2*horizon]`` is larger by ``UNBOUNDED_FACTOR``.  For a
    non-qualifying ``m`` the dyadic points where the ratio does not exceed
    its window infimum are recorded as a bounded subsequence.
    """
    _check_index(fam, n)
    m_max = fam.n_max if m_max is None else m_max
    if not n < m_max <= fam.n_max:
        raise ParameterError("need n < m_max <= n_max")
    ts = sample_points(horizon / 2, 2 * horizon)
    w1 = ts <= horizon
    w2 = ts >= horizon
    dyad = 2.0 ** np.arange(0, math.floor(math.log2(2 * horizon)) + 1)
    per_m: dict[int, Any] = {}
    selected = None
    witness: list[tuple[float, float]] = []
    for m in range(n + 1, m_max + 1):
        logs = fam.log_eval(m, ts) - fam.log_eval(n, ts)
        inf1, inf2 = float(logs[w1].min()), float(logs[w2].min())
        diverges = inf1 >= math.log(growth_threshold) and inf2 - inf1 >= math.log(UNBOUNDED_FACTOR)
        entry: dict[str, Any] = {
            "inf_window": safe_exp(inf1),
            "inf_window_doubled": safe_exp(inf2),
            "diverges": diverges,
        }
        if not diverges:
            level = min(inf1, inf2) + BOUNDED_REL
            dl = fam.log_eval(m, dyad) - fam.log_eval(n, dyad)
            pts = dyad[dl <= level]
            if pts.size == 0:
                pts = ts[[int(np.argmin(np.where(w1, logs, np.inf)))]]
            m_witness = list(zip(pts.tolist(), _ratio(fam, m, n, pts).tolist()))
            entry["witness"] = m_witness
            witness = m_witness
        per_m[m] = entry
        if diverges:
            selected = m
            break
    params = {"family": fam.to_dict(), "n": n, "horizon": horizon,
              "growth_threshold": growth_threshold, "m_max": m_max}
    if selected is not None:
        return CheckReport("wein", Verdict.PASS, extremum=per_m[selected]["inf_window"],
                           parameters=params, evidence=FINITE_HORIZON,
                           selected=selected, details={"per_m": per_m})
    return CheckReport("wein", Verdict.FAIL, witness=witness,
                       extremum=max(e["inf_window"] for e in per_m.values()),
                       parameters=params, evidence=FINITE_HORIZON,
                       details={"per_m": per_m})


# --- boundedness of t^p w_n / w_m ---------------------------------------


def check_weco_p(fam: WeightFamily, n: int, p: float = 1.0,
                 horizon: float = DEFAULT_HORIZON, m_max: int | None = None) -> CheckReport:
    """Least ``m`` for which ``t**p w_n(t)/w_m(t)`` stays bounded.

    Each candidate ``m = n+1, ..., m_max`` gets the horizon-doubling probe
    with growth measured on the ``1/p``-th power, so the classification of
    ``t**p w_n/w_m`` matches that of ``t (w_n/w_m)**(1/p)``.  Pass at the
    first bounded ``m``; fail only if every candidate is unbounded.
    """
    if p <= 0:
        raise ParameterError("p must be positive")
    m_max = fam.n_max if m_max is None else m_max
    if not 1 <= n < m_max <= fam.n_max:
        raise ParameterError("need 1 <= n < m_max <= n_max")
    pts = sample_points(0.0, 2 * horizon)
    per_m: dict[int, Any] = {}
    selected = None
    for m in range(n + 1, m_max + 1):
        est = probe_sup(
            lambda t, m=m: p * np.log(t) + fam.log_eval(n, t) - fam.log_eval(m, t),
            horizon, power=p, points=pts,
        )
        per_m[m] = est
        if est.status == "bounded":
            selected = m
            break
    params = {"family": fam.to_dict(), "n": n, "p": p, "horizon": horizon, "m_max": m_max}
    details = {"per_m": {m: e.to_dict() for m, e in per_m.items()}}
    name = "weco" if p == 1 else "weco_p"
    if selected is not None:
        return CheckReport(name, Verdict.PASS, extremum=per_m[selected].bound,
                           parameters=params, evidence=FINITE_HORIZON,
                           selected=selected, details=details)
    if all(e.status == "unbounded" for e in per_m.values()):
        witness = [(e.argmax_doubled, e.value_doubled) for e in per_m.values()]
        return CheckReport(name, Verdict.FAIL, witness=witness,
                           extremum=min(e.growth for e in per_m.values()),
                           parameters=params, evidence=FINITE_HORIZON, details=details)
    return CheckReport(name, Verdict.INCONCLUSIVE,
                       extremum=min(e.growth for e in per_m.values()),
                       parameters=params, evidence=FINITE_HORIZON, details=details)


def check_weco(fam: WeightFamily, n: int, horizon: float = DEFAULT_HORIZON,
               m_max: int | None = None) -> CheckReport:
    return check_weco_p(fam, n, 1.0, horizon, m_max)


def check_weco_family(fam: WeightFamily, p: float = 1.0, ns: Iterable[int] | None = None,
                      horizon: float = DEFAULT_HORIZON, m_max: int | None = None) -> CheckReport:
    """Family-level verdict for "for every n there is m": pass if every
    probed ``n`` passes, fail if any fails, otherwise inconclusive.

    ``m_max`` defaults to 8: for the popcount family with a large gap
    ``m - n`` the growth of ``t**p 2**(-(m-n) v(t))`` only shows beyond
    ``t ~ 2**((m-n)/p)``, well past any practical horizon.
    """
    m_max = min(fam.n_max, 8) if m_max is None else m_max
    ns = list(range(1, m_max - 1)) if ns is None else list(ns)
    reports = {n: check_weco_p(fam, n, p, horizon, m_max) for n in ns}
    verdicts = [r.verdict for r in reports.values()]
    if Verdict.FAIL in verdicts:
        verdict = Verdict.FAIL
    elif all(v is Verdict.PASS for v in verdicts):
        verdict = Verdict.PASS
    else:
        verdict = Verdict.INCONCLUSIVE
    witness = [(float(n), float(r.extremum)) for n, r in reports.items()
               if r.verdict is Verdict.FAIL]
    return CheckReport(
        "weco_family", verdict, witness=witness,
        extremum=max((r.extremum for r in reports.values() if r.passed), default=math.nan),
        parameters={"family": fam.to_dict(), "p": p, "ns": ns, "horizon": horizon,
                    "m_max": m_max},
        evidence=FINITE_HORIZON,
        details={"per_n": {n: {"verdict": r.verdict.value, "selected": r.selected}
                           for n, r in reports.items()}},
    )


# --- convergence factor ---------------------------------------------------


def check_convergence_factor(fam: WeightFamily, n: int, m: int, r: float,
                             horizon: float = DEFAULT_HORIZON, tol: float = 1e-6) -> CheckReport:
    """Probe ``w_n(r+s)/w_m(s) -> 0`` on the tail ``[horizon/2, horizon]``.

    Also records whether ``w_n(r+s)/w_m(s) <= w_n(r) w_n(s)/w_m(s)`` held at
    every sample.
    """
    if m <= n:
        raise ParameterError("convergence factor needs m > n")
    if r <= 0:
        raise ParameterError("r must be positive")
    fam.member(m)
    ts = sample_points(horizon / 2, horizon)
    logq = fam.log_eval(n, r + ts) - fam.log_eval(m, ts)
    upper = fam.log_eval(n, np.array([r]))[0] + fam.log_eval(n, ts) - fam.log_eval(m, ts)
    display_ok = bool(np.all(logq <= upper + 1e-12 * np.maximum(1.0, np.abs(upper))))
    i = int(np.argmax(logq))
    sup = safe_exp(logq[i])
    ok = sup <= tol
    return CheckReport(
        "convergence_factor",
        Verdict.PASS if ok else Verdict.FAIL,
        witness=[(ts[i], sup)] if not ok else (),
        extremum=sup,
        parameters={"family": fam.to_dict(), "n": n, "m": m, "r": r,
                    "horizon": horizon, "tol": tol},
        evidence=FINITE_HORIZON,
        details={"submultiplicative_display_holds": display_ok},
    )
