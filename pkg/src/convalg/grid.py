"""Grid functions on [0, T] and the algebra operations on them.

Every integral is a left-rectangle sum ``h * sum_j``.  With that choice the
discrete causal convolution ``h * sum_{i<=j} f_i g_{j-i}`` is exactly the
quadrature of the convolution integral, so the discrete objects form an
algebra in their own right and the inequalities transfer without mixing
schemes.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

import numpy as np
from scipy.signal import fftconvolve

from .errors import DomainError, GridMismatchError, ParameterError, ResolutionError
from .report import NUMERIC, CheckReport, Verdict
from .weights import Weight

DEFAULT_H = 2.0**-10
DEFAULT_T = 64.0
DEFAULT_EPS_REL = 1e-12
# any nonzero sample counts; sound because convolve never writes before the
# sum of the operand supports
EXACT_SUPPORT = float(np.finfo(float).smallest_subnormal)
# direct summation below this many products, FFT above
DIRECT_LIMIT = 2**22


@dataclass(frozen=True)
class Grid:
    """Uniform nodes ``t_j = j*h`` for ``j = 0..floor(T/h)``."""

    h: float = DEFAULT_H
    T: float = DEFAULT_T

    def __post_init__(self):
        if not self.h > 0 or self.T < self.h:
            raise ParameterError("grid needs h > 0 and T >= h")

    @property
    def n(self) -> int:
        return int(math.floor(self.T / self.h + 1e-9)) + 1

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.n) * self.h

    def index(self, t: float) -> int:
        """Nearest node index to ``t``."""
        return int(round(t / self.h))


class GridFunction:
    """Complex samples of a function at the nodes of a :class:`Grid`.

    Values beyond ``T`` are treated as zero.  Instances are immutable.
    """

    __slots__ = ("grid", "samples")

    def __init__(self, grid: Grid, samples):
        arr = np.array(samples, dtype=np.complex128)
        if arr.shape != (grid.n,):
            raise ParameterError(f"expected {grid.n} samples, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ParameterError("samples must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "samples", arr)

    def __setattr__(self, name, value):
        raise AttributeError("GridFunction is immutable")

    def __repr__(self):
        return f"GridFunction(h={self.grid.h}, T={self.grid.T}, nnz={np.count_nonzero(self.samples)})"

    @property
    def t(self) -> np.ndarray:
        return self.grid.t

    def _same(self, other: "GridFunction"):
        if not isinstance(other, GridFunction):
            return NotImplemented
        if other.grid != self.grid:
            raise GridMismatchError(f"{self.grid} vs {other.grid}")
        return other

    def __eq__(self, other):
        if not isinstance(other, GridFunction):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.samples, other.samples)

    __hash__ = None

    def __add__(self, other):
        other = self._same(other)
        if other is NotImplemented:
            return other
        return GridFunction(self.grid, self.samples + other.samples)

    def __sub__(self, other):
        other = self._same(other)
        if other is NotImplemented:
            return other
        return GridFunction(self.grid, self.samples - other.samples)

    def __mul__(self, c):
        if isinstance(c, GridFunction):
            return NotImplemented
        return GridFunction(self.grid, self.samples * complex(c))

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(self.grid, -self.samples)

    def is_zero(self) -> bool:
        return not np.any(self.samples)

    def support_indices(self) -> tuple[int, int]:
        """Half-open index range holding all nonzero samples."""
        nz = np.flatnonzero(self.samples)
        if nz.size == 0:
            return 0, 0
        return int(nz[0]), int(nz[-1]) + 1

    def shift(self, k: int) -> "GridFunction":
        """Translate by ``k`` nodes (right if positive); mass past T is lost."""
        out = np.zeros_like(self.samples)
        n = self.grid.n
        if k >= 0:
            if k < n:
                out[k:] = self.samples[: n - k]
        elif -k < n:
            out[: n + k] = self.samples[-k:]
        return GridFunction(self.grid, out)

    # constructors

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls(grid, np.zeros(grid.n))

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable[[np.ndarray], np.ndarray]):
        return cls(grid, fn(grid.t))

    @classmethod
    def box(cls, grid: Grid, a: float, b: float, height: complex = 1.0) -> "GridFunction":
        """``height`` on the nodes in ``[a, b)``."""
        t = grid.t
        return cls(grid, np.where((t >= a) & (t < b), height, 0.0))

    @classmethod
    def bump(cls, grid: Grid, center: float, radius: float, amplitude: complex = 1.0):
        """C-infinity bump ``amplitude * exp(1 - 1/(1-x^2))``, ``x = (t-center)/radius``."""
        if radius <= 0:
            raise ParameterError("bump radius must be positive")
        x = (grid.t - center) / radius
        inside = np.abs(x) < 1
        vals = np.zeros(grid.n)
        vals[inside] = np.exp(1.0 - 1.0 / (1.0 - x[inside] ** 2))
        return cls(grid, amplitude * vals)

    @classmethod
    def exp_decay(cls, grid: Grid, rate: float = 1.0) -> "GridFunction":
        return cls(grid, np.exp(-rate * grid.t))

    # serialization

    def to_csv(self, path: str | Path | None = None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "re", "im"])
        for t, z in zip(self.t, self.samples):
            writer.writerow([repr(float(t)), repr(float(z.real)), repr(float(z.imag))])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path: str | Path, grid: Grid | None = None) -> "GridFunction":
        return cls.from_csv_text(Path(path).read_text(), grid)

    @classmethod
    def from_csv_text(cls, text: str, grid: Grid | None = None) -> "GridFunction":
        rows = list(csv.DictReader(io.StringIO(text)))
        t = np.array([float(r["t"]) for r in rows])
        z = np.array([float(r["re"]) + 1j * float(r["im"]) for r in rows])
        if grid is None:
            grid = Grid(float(t[1] - t[0]), float(t[-1]))
        if t.size != grid.n or not np.allclose(t, grid.t, rtol=0, atol=grid.h * 1e-6):
            raise GridMismatchError("CSV nodes do not match the grid")
        return cls(grid, z)


def function_from_dict(d: dict[str, Any], grid: Grid) -> GridFunction:
    kind = d.get("kind")
    try:
        if kind == "box":
            return GridFunction.box(grid, float(d["a"]), float(d["b"]), float(d.get("height", 1.0)))
        if kind == "bump":
            return GridFunction.bump(grid, float(d["center"]), float(d["radius"]),
                                     float(d.get("amplitude", 1.0)))
        if kind == "exp_decay":
            return GridFunction.exp_decay(grid, float(d.get("rate", 1.0)))
        if kind == "approx_identity":
            return approximate_identity(int(d["k"]), grid)
        if kind == "samples":
            re = np.asarray(d["re"], dtype=float)
            im = np.asarray(d.get("im", np.zeros_like(re)), dtype=float)
            return GridFunction(grid, re + 1j * im)
    except KeyError as exc:
        raise ParameterError(f"function {kind!r} missing field {exc}") from None
    raise ParameterError(f"unknown function kind {kind!r}")


FUNCTION_KINDS = {
    "box": {"a": "real", "b": "real", "height": "real (default 1)"},
    "bump": {"center": "real", "radius": "real > 0", "amplitude": "real (default 1)"},
    "exp_decay": {"rate": "real (default 1)"},
    "approx_identity": {"k": "positive integer"},
    "samples": {"re": "list of N reals", "im": "list of N reals (optional)"},
}


# --- algebra --------------------------------------------------------------


def _raw_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.size * b.size <= DIRECT_LIMIT:
        return np.convolve(a, b)
    return fftconvolve(a, b)


def convolve(f: GridFunction, g: GridFunction) -> GridFunction:
    """Left-rectangle causal convolution truncated at ``T``.

    Operands are put in a canonical order first, so ``convolve(f, g)`` and
    ``convolve(g, f)`` run the identical computation.
    """
    f._same(g)
    grid = f.grid
    if f.is_zero() or g.is_zero():
        return GridFunction.zeros(grid)
    if (g.samples.size, g.samples.tobytes()) < (f.samples.size, f.samples.tobytes()):
        f, g = g, f
    i0, i1 = f.support_indices()
    j0, j1 = g.support_indices()
    start = i0 + j0
    out = np.zeros(grid.n, dtype=np.complex128)
    if start < grid.n:
        prod = _raw_convolve(f.samples[i0:i1], g.samples[j0:j1])
        stop = min(grid.n, start + prod.size)
        out[start:stop] = prod[: stop - start]
    return GridFunction(grid, grid.h * out)


def weighted_norm(f: GridFunction, w: Weight) -> float:
    """``h * sum |f_j| w(t_j)``."""
    i0, i1 = f.support_indices()
    if i0 == i1:
        return 0.0
    t = f.t[i0:i1]
    return float(f.grid.h * np.sum(np.abs(f.samples[i0:i1]) * w(t)))


def apply_X(f: GridFunction) -> GridFunction:
    """Pointwise multiplication by ``t``."""
    return GridFunction(f.grid, f.samples * f.t)


def laplace(f: GridFunction, z: complex) -> complex:
    """``h * sum f_j exp(-z t_j)`` for ``Re z >= 0``."""
    z = complex(z)
    if z.real < 0:
        raise DomainError("characters live on Re z >= 0")
    return complex(f.grid.h * np.sum(f.samples * np.exp(-z * f.t)))


def dual_pairing(f: GridFunction, h_fn: GridFunction) -> complex:
    """``<f, h> = h * sum f_j h_j``."""
    f._same(h_fn)
    return complex(f.grid.h * np.sum(f.samples * h_fn.samples))


def sup_norm_over_weight(h_fn: GridFunction, w: Weight) -> float:
    """``max_j |h(t_j)| / w(t_j)``."""
    return float(np.max(np.abs(h_fn.samples) * np.exp(-w.log_eval(h_fn.t))))


def alpha_support(f: GridFunction, eps_rel: float = DEFAULT_EPS_REL) -> float:
    """First node where ``|f|`` exceeds ``eps_rel * max|f|``; ``inf`` for zero."""
    if eps_rel <= 0:
        raise ParameterError("eps_rel must be positive")
    mag = np.abs(f.samples)
    top = mag.max()
    if top == 0:
        return math.inf
    return float(f.t[np.argmax(mag > eps_rel * top)])


def approximate_identity(k: int, grid: Grid) -> GridFunction:
    """``e_k = k`` on ``[0, 1/k)``, zero after."""
    if k < 1:
        raise ParameterError("k must be a positive integer")
    if 1.0 / k < grid.h:
        raise ResolutionError(f"e_{k} is narrower than one grid cell (h={grid.h})")
    return GridFunction.box(grid, 0.0, 1.0 / k, float(k))


def norms_profile(f: GridFunction, fam, n_max: int) -> list[float]:
    """``[||f||_{w_1}, ..., ||f||_{w_n_max}]`` for a weight family."""
    return [weighted_norm(f, fam.member(n)) for n in range(1, n_max + 1)]


def eventually_decreasing(values: Sequence[float]) -> bool:
    """Nonincreasing from the position of the maximum onward."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return False
    tail = v[int(np.argmax(v)):]
    return bool(np.all(np.diff(tail) <= 0))


def check_approximate_identity(f: GridFunction, w: Weight, k_list: Iterable[int],
                               tol: float = 1e-3) -> CheckReport:
    """``||e_k||_w -> 1`` and ``||e_k * f - f||_w -> 0`` along ``k_list``.

    Pass iff both sequences are eventually decreasing and end within ``tol``.
    """
    ks = list(k_list)
    norms, residuals = [], []
    for k in ks:
        e = approximate_identity(k, f.grid)
        norms.append(weighted_norm(e, w))
        residuals.append(weighted_norm(convolve(e, f) - f, w))
    gaps = [abs(x - 1) for x in norms]
    ok = (eventually_decreasing(gaps) and gaps[-1] <= tol
          and eventually_decreasing(residuals) and residuals[-1] <= tol)
    witness = () if ok else [(float(ks[-1]), gaps[-1]), (float(ks[-1]), residuals[-1])]
    return CheckReport(
        "approximate_identity",
        Verdict.PASS if ok else Verdict.FAIL,
        witness=witness,
        extremum=max(gaps[-1], residuals[-1]),
        parameters={"weight": w.to_dict(), "k_list": ks, "tol": tol},
        evidence=NUMERIC,
        details={"norms": norms, "residuals": residuals},
    )


def check_character(f: GridFunction, g: GridFunction, zs: Iterable[complex],
                    tol: float = 1e-2) -> CheckReport:
    """``|L(f*g)(z) - L(f)(z) L(g)(z)| <= tol`` at every ``z``."""
    fg = convolve(f, g)
    zs = [complex(z) for z in zs]
    errs = [abs(laplace(fg, z) - laplace(f, z) * laplace(g, z)) for z in zs]
    bad = [(abs(z), e) for z, e in zip(zs, errs) if e > tol]
    return CheckReport(
        "character",
        Verdict.FAIL if bad else Verdict.PASS,
        witness=bad,
        extremum=max(errs),
        parameters={"z": zs, "tol": tol, "h": f.grid.h},
        details={"errors": errs},
    )


def random_test_function(grid: Grid, rng: np.random.Generator, max_end: float) -> GridFunction:
    """A box or a smooth bump supported inside ``[0, max_end]``."""
    if rng.random() < 0.5:
        a = rng.uniform(0, 0.8 * max_end)
        b = rng.uniform(a + 2 * grid.h, max_end)
        return GridFunction.box(grid, a, b, rng.uniform(0.2, 2.0))
    radius = rng.uniform(4 * grid.h, max_end / 2)
    center = rng.uniform(radius, max_end - radius)
    return GridFunction.bump(grid, center, radius, rng.uniform(0.2, 2.0))


def check_banach_inequality(w: Weight, grid: Grid, rng: np.random.Generator,
                            n_pairs: int = 100, slack: float = 1e-6) -> CheckReport:
    """``||f*g||_w <= ||f||_w ||g||_w (1 + slack)`` on random pairs whose
    supports sum to less than ``T``."""
    worst, witness = 0.0, []
    for k in range(n_pairs):
        f = random_test_function(grid, rng, grid.T / 2)
        g = random_test_function(grid, rng, grid.T / 2)
        lhs = weighted_norm(convolve(f, g), w)
        rhs = weighted_norm(f, w) * weighted_norm(g, w)
        ratio = lhs / rhs
        worst = max(worst, ratio)
        if lhs > rhs * (1 + slack):
            witness.append((float(k), ratio))
    return CheckReport(
        "banach_inequality",
        Verdict.FAIL if witness else Verdict.PASS,
        witness=witness,
        extremum=worst,
        parameters={"weight": w.to_dict(), "n_pairs": n_pairs, "slack": slack},
    )
