"""Triangular lattice fields and the unilateral autoregressive recursion.

The process lives on ``{(k, l): k + l >= 0}`` with

    X[k, l] = alpha * X[k-1, l] + beta * X[k, l-1] + eps[k, l]   (k + l >= 1)
    X[k, l] = 0                                                  (k + l == 0)

and is observed on the triangle ``T_n = {(i, j): i + j >= 1, i <= n, j <= n}``.
Values are stored diagonal-major: anti-diagonal ``s = k + l`` runs from 1 to
``2n``, and inside a diagonal ``k`` increases.  Diagonal ``s`` holds
``2n - s + 1`` cells, so ``|T_n| = n(2n + 1)``.
"""

from __future__ import annotations

import csv
import enum
import functools
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import InvalidArgumentError
from .kernels import kernel_weight
from .serialize import dumps17


class Stability(str, enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    EXPLOSIVE = "explosive"


def _sign(x: float) -> int:
    return 1 if x > 0 else -1


@dataclass(frozen=True)
class ModelParams:
    """Coefficients of the west (``alpha``) and south (``beta``) neighbours."""

    alpha: float
    beta: float

    def __post_init__(self):
        for name in ("alpha", "beta"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidArgumentError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, float(value))

    @property
    def rho(self) -> float:
        return abs(self.alpha) + abs(self.beta)

    @property
    def stability(self) -> Stability:
        if self.rho < 1.0:
            return Stability.STABLE
        if self.rho == 1.0:
            return Stability.UNSTABLE
        return Stability.EXPLOSIVE

    @property
    def sign_alpha(self) -> int | None:
        return _sign(self.alpha) if self.alpha * self.beta != 0 else None

    @property
    def sign_beta(self) -> int | None:
        return _sign(self.beta) if self.alpha * self.beta != 0 else None

    @property
    def signs(self) -> tuple[int, int]:
        """``(sign alpha, sign beta)``; requires ``alpha * beta != 0``."""
        if self.alpha * self.beta == 0:
            raise InvalidArgumentError("sign pattern is undefined when alpha*beta == 0")
        return _sign(self.alpha), _sign(self.beta)

    @classmethod
    def unstable(cls, alpha: float, sign_beta: int = 1) -> "ModelParams":
        """Parameters on the unit-root boundary, ``|beta| = 1 - |alpha|``."""
        return cls(alpha, sign_beta * (1.0 - abs(alpha)))


@dataclass(frozen=True)
class NoiseSpec:
    kind: rng.NoiseKind = rng.NoiseKind.STANDARD_NORMAL
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", rng.NoiseKind(self.kind))
        if not 0 <= int(self.seed) < 1 << 64:
            raise InvalidArgumentError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        object.__setattr__(self, "seed", int(self.seed))


def cell_count(n: int) -> int:
    return n * (2 * n + 1)


def diagonal_offset(n: int, s: int) -> int:
    """Position of the first cell of anti-diagonal ``s`` in storage."""
    return (s - 1) * (2 * n + 1) - (s - 1) * s // 2


@functools.lru_cache(maxsize=64)
def _layout(n: int):
    ks, ls = [], []
    for s in range(1, 2 * n + 1):
        k = np.arange(s - n, n + 1, dtype=np.int64)
        ks.append(k)
        ls.append(s - k)
    k = np.concatenate(ks)
    ell = np.concatenate(ls)
    size = k.size
    # neighbours on the boundary diagonal map to the sentinel slot ``size``
    west = np.where(k + ell >= 2, _index(n, k - 1, ell), size)
    south = np.where(k + ell >= 2, _index(n, k, ell - 1), size)
    for arr in (k, ell, west, south):
        arr.setflags(write=False)
    return k, ell, west, south


def _index(n, k, ell):
    s = k + ell
    return (s - 1) * (2 * n + 1) - (s - 1) * s // 2 + n - ell


def lattice_coords(n: int):
    """``(k, l)`` arrays of ``T_n`` in storage order."""
    k, ell, _, _ = _layout(n)
    return k, ell


def _check_n(n) -> int:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise InvalidArgumentError(f"triangle order n must be a positive integer, got {n}")
    return int(n)


class TriangularField:
    """Real values on ``T_n`` with implicit zeros on the diagonal ``k + l = 0``."""

    def __init__(self, n, values, params=None, noise_spec=None, eps=None):
        self.n = _check_n(n)
        values = np.array(values, dtype=float)
        if values.shape != (cell_count(self.n),):
            raise InvalidArgumentError(
                f"expected {cell_count(self.n)} values for n={self.n}, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("field values must be finite")
        values.setflags(write=False)
        self.values = values
        self.params = params
        self.noise_spec = noise_spec
        self.eps = None if eps is None else TriangularField(self.n, getattr(eps, "values", eps))

    def __len__(self):
        return self.values.size

    def __repr__(self):
        return f"TriangularField(n={self.n}, params={self.params}, noise={self.noise_spec})"

    def contains(self, k: int, ell: int) -> bool:
        return k + ell >= 1 and k <= self.n and ell <= self.n

    def index(self, k: int, ell: int) -> int:
        if not self.contains(k, ell):
            raise InvalidArgumentError(f"({k}, {ell}) is not in T_{self.n}")
        return int(_index(self.n, k, ell))

    def __getitem__(self, key) -> float:
        k, ell = key
        if k + ell == 0 and -self.n <= k <= self.n:
            return 0.0
        return float(self.values[self.index(k, ell)])

    @property
    def coords(self):
        return lattice_coords(self.n)

    def diagonal(self, s: int):
        """Values on anti-diagonal ``s`` (``s = 0`` is the zero boundary)."""
        if s == 0:
            return np.zeros(2 * self.n + 1)
        start = diagonal_offset(self.n, s)
        return self.values[start : start + 2 * self.n - s + 1]

    def neighbours(self):
        """``(west, south)`` arrays: ``X[k-1, l]`` and ``X[k, l-1]`` per cell."""
        _, _, west, south = _layout(self.n)
        ext = np.append(self.values, 0.0)
        return ext[west], ext[south]

    def grid(self):
        """Dense ``(2n+1, 2n+1)`` array indexed ``[k + n, l + n]``, zero off ``T_n``."""
        k, ell = self.coords
        out = np.zeros((2 * self.n + 1, 2 * self.n + 1))
        out[k + self.n, ell + self.n] = self.values
        return out

    def with_values(self, values) -> "TriangularField":
        return TriangularField(self.n, values)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["k", "ell", "value"])
        k, ell = self.coords
        for kk, ll, v in zip(k.tolist(), ell.tolist(), self.values.tolist()):
            writer.writerow([kk, ll, format(v, ".17g")])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "TriangularField":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [c.strip() for c in rows[0]] != ["k", "ell", "value"]:
            raise InvalidArgumentError("field CSV must start with header k,ell,value")
        body = [r for r in rows[1:] if r]
        # |T_n| = n(2n+1) determines n
        n = int(round((-1 + math.sqrt(1 + 8 * len(body))) / 4))
        if n < 1 or cell_count(n) != len(body):
            raise InvalidArgumentError(f"{len(body)} rows do not form a triangle T_n")
        values = np.empty(len(body))
        seen = np.zeros(len(body), dtype=bool)
        for row in body:
            k, ell, v = int(row[0]), int(row[1]), float(row[2])
            if not (k + ell >= 1 and k <= n and ell <= n):
                raise InvalidArgumentError(f"({k}, {ell}) is not in T_{n}")
            i = int(_index(n, k, ell))
            values[i] = v
            seen[i] = True
        if not seen.all():
            raise InvalidArgumentError("field CSV has duplicate cells")
        return cls(n, values)

    def to_dict(self) -> dict:
        out = {"n": self.n}
        if self.params is not None:
            out["params"] = {"alpha": self.params.alpha, "beta": self.params.beta}
        if self.noise_spec is not None:
            out["noise"] = {"kind": self.noise_spec.kind.value, "seed": self.noise_spec.seed}
        out["values"] = self.values.tolist()
        return out

    def to_json(self) -> str:
        return dumps17(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "TriangularField":
        try:
            params = data.get("params")
            if params is not None:
                params = ModelParams(params["alpha"], params["beta"])
            noise = data.get("noise")
            if noise is not None:
                noise = NoiseSpec(noise["kind"], noise["seed"])
            return cls(data["n"], data["values"], params=params, noise_spec=noise)
        except (KeyError, TypeError) as exc:
            raise InvalidArgumentError(f"malformed field JSON: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "TriangularField":
        return cls.from_dict(json.loads(text))


def noise_field(n: int, spec: NoiseSpec):
    """Innovations on ``T_n`` in storage order."""
    k, ell = lattice_coords(_check_n(n))
    return rng.cell_noise(spec.seed, k, ell, spec.kind)


def simulate_triangle(n: int, params: ModelParams, noise) -> TriangularField:
    """Run the zero-start recursion over ``T_n``.

    ``noise`` is either a :class:`NoiseSpec` or an explicit array of
    innovations in storage order (useful for impulse and replay tests).  The
    realised innovations are kept on the result as ``field.eps``.
    """
    n = _check_n(n)
    if not isinstance(params, ModelParams):
        raise InvalidArgumentError("params must be a ModelParams instance")
    if isinstance(noise, NoiseSpec):
        spec, eps = noise, noise_field(n, noise)
    else:
        spec, eps = None, np.asarray(noise, dtype=float)
        if eps.shape != (cell_count(n),):
            raise InvalidArgumentError(f"noise must have {cell_count(n)} entries")
    a, b = params.alpha, params.beta
    values = np.empty(cell_count(n))
    prev = np.zeros(2 * n + 1)
    for s in range(1, 2 * n + 1):
        start = diagonal_offset(n, s)
        stop = start + 2 * n - s + 1
        # west neighbour of cell j is prev[j], south neighbour is prev[j + 1]
        cur = a * prev[:-1] + b * prev[1:] + eps[start:stop]
        values[start:stop] = cur
        prev = cur
    return TriangularField(n, values, params=params, noise_spec=spec, eps=eps)


def ma_representation(k: int, ell: int, params: ModelParams, eps) -> float:
    """``X[k, l]`` as the binomial-weighted sum of innovations on ``T_{k,l}``."""
    if k + ell < 1:
        raise InvalidArgumentError(f"need k + l >= 1, got ({k}, {ell})")
    if not isinstance(eps, TriangularField):
        raise InvalidArgumentError("eps must be a TriangularField")
    if k > eps.n or ell > eps.n:
        raise InvalidArgumentError(f"noise on T_{eps.n} does not cover T_({k},{ell})")
    m, r = triangle_lags(k + ell)
    i, j = k - r, ell - (m - r)
    w = kernel_weight(m, r, params.alpha, params.beta)
    return float(np.dot(w, eps.values[_index(eps.n, i, j)]))


@functools.lru_cache(maxsize=32)
def triangle_lags(s: int):
    """Lag pairs ``(m, r)`` covering ``T_{k,l}`` for ``k + l = s``.

    Cell ``(i, j)`` has total lag ``m = k + l - i - j`` in ``0..s-1`` and west
    lag ``r = k - i`` in ``0..m``.
    """
    m = np.repeat(np.arange(s, dtype=np.int64), np.arange(1, s + 1))
    starts = np.repeat(np.cumsum(np.arange(s + 1))[:-1], np.arange(1, s + 1))
    r = np.arange(m.size, dtype=np.int64) - starts
    m.setflags(write=False)
    r.setflags(write=False)
    return m, r


class FlipMode(str, enum.Enum):
    BOTH = "both"  # (-1)^(k+l)
    ROW_ONLY = "row"  # (-1)^k
    COL_ONLY = "col"  # (-1)^l


def sign_pattern_array(n: int, mode) -> np.ndarray:
    k, ell = lattice_coords(n)
    mode = FlipMode(mode)
    exponent = {FlipMode.BOTH: k + ell, FlipMode.ROW_ONLY: k, FlipMode.COL_ONLY: ell}[mode]
    return np.where(exponent % 2 == 0, 1.0, -1.0)


def sign_flip(field: TriangularField, mode=FlipMode.BOTH) -> TriangularField:
    """Multiply the field pointwise by a checkerboard sign pattern."""
    signs = sign_pattern_array(field.n, mode)
    eps = None if field.eps is None else signs * field.eps.values
    return TriangularField(field.n, signs * field.values, eps=eps)
