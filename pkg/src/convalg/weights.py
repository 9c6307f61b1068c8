"""Algebra weights on the half-line and the binary digit-count function.

Weights are immutable descriptors evaluated through their logarithm, so that
``(1+t)**n`` and ``exp(a*sqrt(t))`` never overflow inside the library;
:meth:`Weight.__call__` exponentiates at the boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Iterable

import numpy as np

from .errors import DomainError, ParameterError, RangeError
from .report import EXACT, FINITE_HORIZON, NUMERIC, CheckReport, Verdict, safe_exp, sample_points

DEFAULT_TABLE_SIZE = 2**20


def _as_times(t) -> np.ndarray:
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("weights are defined on t >= 0 only")
    return arr


def _scalar_or_array(arr: np.ndarray, like):
    return float(arr) if np.ndim(like) == 0 else arr


class Weight:
    """Positive function on [0, inf) with value 1 at the origin.

    Subclasses implement :meth:`log_eval` on nonnegative float arrays.
    """

    kind: str = ""

    def log_eval(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def log(self, t):
        arr = _as_times(t)
        return _scalar_or_array(self.log_eval(arr), t)

    def __call__(self, t):
        arr = _as_times(t)
        return _scalar_or_array(self._eval(arr), t)

    def _eval(self, t: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_eval(t))

    def to_dict(self) -> dict[str, Any]:
        raise NotImplementedError

    def __mul__(self, other: "Weight") -> "Weight":
        return Product(self, other)

    def __pow__(self, n: int) -> "Weight":
        return Pow(self, n)


@dataclass(frozen=True)
class Power(Weight):
    """``(1+t)**a`` with ``a >= 0``."""

    a: float
    kind = "power"

    def __post_init__(self):
        if self.a < 0:
            raise ParameterError("power weight needs a >= 0")

    def log_eval(self, t):
        return self.a * np.log1p(t)

    def to_dict(self):
        return {"kind": self.kind, "a": self.a}


@dataclass(frozen=True)
class FractionalPower(Power):
    """``(1+t)**a`` restricted to ``0 < a < 1``."""

    kind = "fractional_power"

    def __post_init__(self):
        if not 0 < self.a < 1:
            raise ParameterError("fractional power needs 0 < a < 1")


@dataclass(frozen=True)
class Exponential(Weight):
    """``exp(a*t)`` for any real ``a``."""

    a: float
    kind = "exponential"

    def log_eval(self, t):
        return self.a * t

    def to_dict(self):
        return {"kind": self.kind, "a": self.a}


@dataclass(frozen=True)
class ExpSqrt(Weight):
    """``exp(a*sqrt(t))`` with ``a >= 0``."""

    a: float
    kind = "exp_sqrt"

    def __post_init__(self):
        if self.a < 0:
            raise ParameterError("exp_sqrt weight needs a >= 0")

    def log_eval(self, t):
        return self.a * np.sqrt(t)

    def to_dict(self):
        return {"kind": self.kind, "a": self.a}


# --- binary digit count --------------------------------------------------


def popcount_v(m: int) -> int:
    """Number of 1-bits of ``m``; the fewest powers of two summing to ``m``."""
    m = int(m)
    if m < 0:
        raise DomainError("popcount needs m >= 0")
    return m.bit_count() if hasattr(m, "bit_count") else bin(m).count("1")


@dataclass(frozen=True, eq=False)
class IntegerSubadditive:
    """A real function on ``0..N`` given by its table, plus the rule name."""

    values: np.ndarray
    rule: str = "table"

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if vals.ndim != 1 or vals.size < 2:
            raise ParameterError("need at least v(0), v(1)")

    @property
    def n_max(self) -> int:
        return self.values.size - 1

    @classmethod
    def popcount(cls, n_max: int = DEFAULT_TABLE_SIZE) -> "IntegerSubadditive":
        m = np.arange(n_max + 1, dtype=np.uint64)
        return cls(np.bitwise_count(m).astype(float), rule="popcount")

    def __call__(self, x):
        return extend_piecewise_linear(self, x)


def extend_piecewise_linear(v: IntegerSubadditive, x):
    """Continuous extension of ``v`` that is linear between integers.

    ``v(m + r) = (1 - r) v(m) + r v(m + 1)`` for integer ``m``, ``0 <= r < 1``.
    """
    arr = _as_times(x)
    m = np.floor(arr)
    r = arr - m
    if np.any(m + (r > 0) > v.n_max):
        raise RangeError(f"x beyond tabulated range 0..{v.n_max}")
    mi = m.astype(np.int64)
    nxt = np.minimum(mi + 1, v.n_max)
    out = (1 - r) * v.values[mi] + r * v.values[nxt]
    return _scalar_or_array(out, x)


_POPCOUNT: IntegerSubadditive | None = None


def popcount_table() -> IntegerSubadditive:
    global _POPCOUNT
    if _POPCOUNT is None:
        _POPCOUNT = IntegerSubadditive.popcount()
    return _POPCOUNT


@dataclass(frozen=True)
class BinaryPow(Weight):
    """``b ** v(t)`` with ``v`` the piecewise-linear binary digit count."""

    b: float = 2.0
    kind = "binary_pow"

    def __post_init__(self):
        if self.b <= 1:
            raise ParameterError("binary_pow needs b > 1")

    def digits(self, t):
        return extend_piecewise_linear(popcount_table(), t)

    def log_eval(self, t):
        return self.digits(t) * math.log(self.b)

    def _eval(self, t):
        # b**v is exact for integer v and b a power of two
        return np.power(self.b, self.digits(t))

    def to_dict(self):
        return {"kind": self.kind, "b": self.b}


# --- composition ---------------------------------------------------------


@dataclass(frozen=True)
class Product(Weight):
    left: Weight
    right: Weight
    kind = "product"

    def log_eval(self, t):
        return self.left.log_eval(t) + self.right.log_eval(t)

    def to_dict(self):
        return {"kind": self.kind, "factors": [self.left.to_dict(), self.right.to_dict()]}


@dataclass(frozen=True)
class Pow(Weight):
    base: Weight
    n: int
    kind = "pow"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise ParameterError("pow needs a nonnegative integer exponent")

    def log_eval(self, t):
        return self.n * self.base.log_eval(t)

    def _eval(self, t):
        if isinstance(self.base, BinaryPow):
            return np.power(self.base.b, self.n * self.base.digits(t))
        return super()._eval(t)

    def to_dict(self):
        return {"kind": self.kind, "base": self.base.to_dict(), "n": self.n}


def weight_from_dict(d: dict[str, Any]) -> Weight:
    kind = d.get("kind")
    try:
        if kind == "power":
            return Power(float(d["a"]))
        if kind == "fractional_power":
            return FractionalPower(float(d["a"]))
        if kind == "exponential":
            return Exponential(float(d["a"]))
        if kind == "exp_sqrt":
            return ExpSqrt(float(d["a"]))
        if kind == "binary_pow":
            return BinaryPow(float(d.get("b", 2.0)))
        if kind == "product":
            left, right = d["factors"]
            return Product(weight_from_dict(left), weight_from_dict(right))
        if kind == "pow":
            return Pow(weight_from_dict(d["base"]), int(d["n"]))
    except KeyError as exc:
        raise ParameterError(f"weight {kind!r} missing field {exc}") from None
    raise ParameterError(f"unknown weight kind {kind!r}")


WEIGHT_KINDS = {
    "power": {"a": "real >= 0"},
    "fractional_power": {"a": "real in (0, 1)"},
    "exponential": {"a": "real"},
    "exp_sqrt": {"a": "real >= 0"},
    "binary_pow": {"b": "real > 1"},
    "product": {"factors": "[weight, weight]"},
    "pow": {"base": "weight", "n": "integer >= 0"},
}


def builtin_weights() -> dict[str, Weight]:
    return {
        "power1": Power(1.0),
        "power3": Power(3.0),
        "fractional_half": FractionalPower(0.5),
        "exponential1": Exponential(1.0),
        "exp_sqrt1": ExpSqrt(1.0),
        "binary2": BinaryPow(2.0),
        "product": Product(Power(1.0), ExpSqrt(0.5)),
        "pow": Pow(ExpSqrt(0.5), 3),
    }


# --- single-weight checks ------------------------------------------------


def check_submultiplicative(
    w, pairs, rel_tol: float = 1e-12, *, chunk: int = 2**20
) -> CheckReport:
    """``w(s+t) <= w(s) w(t) (1 + rel_tol)`` on every given pair.

    ``w`` may be any callable; on failure the worst pair (largest ratio) is
    the witness.
    """
    pairs = np.asarray(pairs, dtype=float).reshape(-1, 2)
    if np.any(pairs < 0):
        raise DomainError("pairs must be nonnegative")
    worst_ratio, worst = -np.inf, None
    n_bad = 0
    for start in range(0, len(pairs), chunk):
        s, t = pairs[start : start + chunk].T
        lhs = np.asarray(w(s + t), dtype=float)
        rhs = np.asarray(w(s), dtype=float) * np.asarray(w(t), dtype=float)
        ratio = lhs / rhs
        n_bad += int(np.count_nonzero(lhs > rhs * (1 + rel_tol)))
        i = int(np.argmax(ratio))
        if ratio[i] > worst_ratio:
            worst_ratio, worst = float(ratio[i]), (float(s[i]), float(t[i]))
    params = {"n_pairs": len(pairs), "rel_tol": rel_tol}
    if n_bad:
        return CheckReport(
            "submultiplicative",
            Verdict.FAIL,
            witness=[worst],
            extremum=worst_ratio,
            parameters=params,
            details={"violations": n_bad, "worst_pair": worst},
        )
    return CheckReport("submultiplicative", Verdict.PASS, extremum=worst_ratio, parameters=params)


def check_subadditive_extension(
    v: IntegerSubadditive, grid_step: float, x_max: float, abs_tol: float = 1e-12
) -> CheckReport:
    """Exhaustive check of ``v(x+y) <= v(x) + v(y)`` for grid pairs with
    ``x + y <= x_max``, counting pairs in each fractional-part branch."""
    if grid_step <= 0:
        raise ParameterError("grid_step must be positive")
    n = int(math.floor(x_max / grid_step + 1e-9))
    xs = np.arange(n + 1) * grid_step
    vals = np.asarray(extend_piecewise_linear(v, xs))
    frac = xs - np.floor(xs)
    worst, worst_pair = -np.inf, (0.0, 0.0)
    n_bad = 0
    low_branch = high_branch = 0
    for i in range(n + 1):
        j = np.arange(n + 1 - i)
        excess = vals[i + j] - vals[i] - vals[j]
        k = int(np.argmax(excess))
        if excess[k] > worst:
            worst, worst_pair = float(excess[k]), (float(xs[i]), float(xs[k]))
        n_bad += int(np.count_nonzero(excess > abs_tol))
        over = frac[i] + frac[j] > 1
        high_branch += int(np.count_nonzero(over))
        low_branch += int(over.size - np.count_nonzero(over))
    params = {"grid_step": grid_step, "x_max": x_max, "abs_tol": abs_tol, "rule": v.rule}
    details = {
        "pairs_fraction_sum_le_1": low_branch,
        "pairs_fraction_sum_gt_1": high_branch,
        "violations": n_bad,
    }
    if n_bad:
        return CheckReport(
            "subadditive_extension",
            Verdict.FAIL,
            witness=[worst_pair],
            extremum=worst,
            parameters=params,
            details=details,
            evidence=EXACT,
        )
    return CheckReport(
        "subadditive_extension",
        Verdict.PASS,
        extremum=worst,
        parameters=params,
        details=details,
        evidence=EXACT,
    )


def check_root_limit(w: Weight, horizon: float, window: float, tol: float) -> CheckReport:
    """Probe ``w(t)**(1/t) -> 1`` on ``[horizon - window, horizon]``."""
    if not horizon > window > 0:
        raise ParameterError("need horizon > window > 0")
    ts = sample_points(horizon - window, horizon)
    ts = ts[ts > 0]
    dev = np.abs(np.expm1(w.log_eval(ts) / ts))
    i = int(np.argmax(dev))
    params = {"horizon": horizon, "window": window, "tol": tol}
    verdict = Verdict.PASS if dev[i] <= tol else Verdict.FAIL
    return CheckReport(
        "root_limit",
        verdict,
        witness=[(ts[i], dev[i])] if verdict is Verdict.FAIL else (),
        extremum=float(dev[i]),
        parameters=params,
        evidence=FINITE_HORIZON,
    )


def check_tends_to_infinity(
    w: Weight, horizon: float, threshold_schedule: Iterable[float]
) -> CheckReport:
    """Probe ``w(t) -> inf``.

    A threshold ``M`` is met when some sampled ``t0 <= horizon/2`` has
    ``w >= M`` on every sampled point of ``[t0, horizon]``.  Points of an
    unmet threshold where ``w < M`` are reported as the bounded witness.
    """
    thresholds = [float(m) for m in threshold_schedule]
    if horizon <= 0:
        raise ParameterError("horizon must be positive")
    ts = sample_points(0.0, horizon)
    logs = w.log_eval(ts)
    suffix_min = np.minimum.accumulate(logs[::-1])[::-1]
    eligible = ts <= horizon / 2
    met = {}
    witness = []
    for m in thresholds:
        ok = eligible & (suffix_min >= math.log(m))
        if ok.any():
            met[m] = float(ts[np.argmax(ok)])
        else:
            met[m] = None
            tail = (ts >= horizon / 2) & (logs < math.log(m))
            low = np.flatnonzero(tail)
            # report the lowest few values in the tail window
            pick = low[np.argsort(logs[low], kind="stable")[:8]]
            witness.extend((ts[k], safe_exp(logs[k])) for k in sorted(pick))
    verdict = Verdict.PASS if all(v is not None for v in met.values()) else Verdict.FAIL
    return CheckReport(
        "tends_to_infinity",
        verdict,
        witness=witness if verdict is Verdict.FAIL else (),
        extremum=float(safe_exp(suffix_min[eligible][-1])),
        parameters={"horizon": horizon, "thresholds": thresholds},
        evidence=FINITE_HORIZON,
        details={"t0": {str(k): v for k, v in met.items()}},
    )


def check_integer_subadditive(v: IntegerSubadditive, limit: int) -> CheckReport:
    """Exhaustive ``v(m+n) <= v(m) + v(n)`` for ``0 <= m, n <= limit``.

    Integer-valued tables are compared in int64, so the check is exact.
    """
    if 2 * limit > v.n_max:
        raise RangeError(f"need a table up to {2 * limit}, have {v.n_max}")
    vals = v.values
    exact = bool(np.all(vals == np.round(vals)))
    if exact:
        vals = vals.astype(np.int64)
    m = np.arange(limit + 1)
    n_bad, worst, worst_pair = 0, -np.inf, (0.0, 0.0)
    for i in m:
        excess = vals[i + m] - vals[i] - vals[m]
        k = int(np.argmax(excess))
        if excess[k] > worst:
            worst, worst_pair = float(excess[k]), (float(i), float(k))
        n_bad += int(np.count_nonzero(excess > 0))
    return CheckReport(
        "integer_subadditive",
        Verdict.FAIL if n_bad else Verdict.PASS,
        witness=[worst_pair] if n_bad else (),
        extremum=worst,
        parameters={"limit": limit, "rule": v.rule},
        evidence=EXACT if exact else NUMERIC,
        details={"violations": n_bad, "pairs": (limit + 1) ** 2},
    )
