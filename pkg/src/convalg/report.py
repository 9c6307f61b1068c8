"""Check reports and the finite-horizon probing protocol.

Every condition checker returns a :class:`CheckReport`.  Asymptotic
statements ("tends to infinity", "is bounded") are operationalised by
sampling on a fixed point set and, where needed, comparing the sampled
supremum on ``[0, H]`` with the one on ``[0, 2H]``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

# horizon-doubling thresholds
UNBOUNDED_FACTOR = 1.5
BOUNDED_REL = 1e-3


class Verdict(str, enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive-numeric"


# how much a verdict can be trusted
EXACT = "exact"
NUMERIC = "numeric"
FINITE_HORIZON = "finite-horizon"


@dataclass(frozen=True)
class CheckReport:
    """Outcome of a single condition check.

    ``witness`` holds ``(point, value)`` pairs; a failing report always has
    at least one.  ``selected`` carries the index chosen by searches over
    family members (the ``m`` of "there exists m").
    """

    check: str
    verdict: Verdict
    witness: tuple[tuple[float, float], ...] = ()
    extremum: float = math.nan
    parameters: dict[str, Any] = field(default_factory=dict)
    evidence: str = NUMERIC
    selected: int | None = None
    details: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "verdict", Verdict(self.verdict))
        object.__setattr__(
            self, "witness", tuple((float(p), float(v)) for p, v in self.witness)
        )
        if self.verdict is Verdict.FAIL and not self.witness:
            raise ValueError(f"failing report for {self.check!r} carries no witness")

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS

    def to_dict(self) -> dict[str, Any]:
        return {
            "check": self.check,
            "verdict": self.verdict.value,
            "evidence": self.evidence,
            "extremum": jsonable(self.extremum),
            "selected": self.selected,
            "witness": [[jsonable(p), jsonable(v)] for p, v in self.witness],
            "parameters": jsonable(self.parameters),
            "details": jsonable(self.details),
        }


def jsonable(obj: Any) -> Any:
    """Convert numpy scalars, complex numbers and non-finite floats for JSON."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": jsonable(obj.real), "im": jsonable(obj.imag)}
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if hasattr(obj, "to_dict"):
        return jsonable(obj.to_dict())
    return obj


def dyadic_points(lo: float, hi: float) -> np.ndarray:
    """Points 2^k and 2^k +- 1 inside ``[lo, hi]``; the popcount weight's
    extremal subsequences live here."""
    pts = []
    for k in range(-12, 64):
        d = 2.0**k
        if d > hi + 1:
            break
        pts.extend((d, d - 1.0, d + 1.0))
    pts = np.asarray(pts)
    return pts[(pts >= lo) & (pts <= hi)]


def sample_points(
    lo: float,
    hi: float,
    *,
    n_linear: int = 2049,
    ratio: float = 2.0 ** (1 / 16),
    max_integers: int = 2**17,
) -> np.ndarray:
    """Sorted sample set on ``[lo, hi]`` used by all asymptotic probes.

    Union of a uniform grid, a geometric grid ``t0 * ratio**j``, the dyadic
    points, and every integer in range when there are at most
    ``max_integers`` of them.
    """
    if hi < lo:
        raise ValueError("empty sampling interval")
    parts = [np.linspace(lo, hi, n_linear), dyadic_points(lo, hi)]
    t0 = max(lo, 2.0**-10)
    if hi > t0:
        n_geo = int(math.floor(math.log(hi / t0) / math.log(ratio))) + 1
        parts.append(t0 * ratio ** np.arange(n_geo))
    if hi - lo <= max_integers:
        parts.append(np.arange(math.ceil(lo), math.floor(hi) + 1, dtype=float))
    pts = np.unique(np.concatenate(parts))
    return pts[(pts >= lo) & (pts <= hi)]


def classify_growth(growth: float) -> str:
    if growth >= UNBOUNDED_FACTOR:
        return "unbounded"
    if abs(growth - 1.0) < BOUNDED_REL:
        return "bounded"
    return "inconclusive"


@dataclass(frozen=True)
class BoundEstimate:
    """Sampled supremum of a nonnegative quantity on ``[0, H]`` and ``[0, 2H]``.

    ``growth`` is ``(sup_2H / sup_H) ** (1 / power)``; ``status`` is one of
    ``bounded``, ``unbounded``, ``inconclusive``.
    """

    value: float
    value_doubled: float
    growth: float
    status: str
    argmax: float
    argmax_doubled: float
    horizon: float

    @property
    def bound(self) -> float:
        return max(self.value, self.value_doubled)

    def to_dict(self) -> dict[str, Any]:
        return {
            "sup": self.value,
            "sup_doubled": self.value_doubled,
            "growth": self.growth,
            "status": self.status,
            "argmax": self.argmax,
            "argmax_doubled": self.argmax_doubled,
            "horizon": self.horizon,
        }


def safe_exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def probe_sup(
    log_quantity: Callable[[np.ndarray], np.ndarray],
    horizon: float,
    *,
    power: float = 1.0,
    points: np.ndarray | None = None,
) -> BoundEstimate:
    """Run the horizon-doubling protocol on ``exp(log_quantity(t))``.

    ``power`` rescales the growth factor so that a quantity ``q`` and
    ``q ** (1/power)`` are judged identically.
    """
    if points is None:
        points = sample_points(0.0, 2.0 * horizon)
    with np.errstate(divide="ignore"):
        logs = np.asarray(log_quantity(points), dtype=float)
    inside = points <= horizon
    i1 = int(np.argmax(np.where(inside, logs, -np.inf)))
    i2 = int(np.argmax(logs))
    l1, l2 = logs[i1], logs[i2]
    if np.isneginf(l2):
        return BoundEstimate(0.0, 0.0, 1.0, "bounded", 0.0, 0.0, horizon)
    if np.isneginf(l1):
        growth = math.inf
    else:
        growth = safe_exp((l2 - l1) / power)
    return BoundEstimate(
        value=safe_exp(l1) if np.isfinite(l1) else 0.0,
        value_doubled=safe_exp(l2),
        growth=growth,
        status=classify_growth(growth),
        argmax=float(points[i1]),
        argmax_doubled=float(points[i2]),
        horizon=horizon,
    )
