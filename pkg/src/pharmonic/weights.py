"""Positive weights on the real line, assembled from typed segments.

A weight tiles its domain with segments of four kinds:

* ``constant``: ``w(x) = value``
* ``power``: ``w(x) = coef * ((x - center)^2 + quad_shift)^(exponent / 2)``,
  i.e. a power of a distance-like quantity; ``quad_shift = 0`` gives
  ``coef * |x - center|^exponent`` and ``quad_shift = 1`` with exponent
  ``2q`` gives ``coef * (1 + (x - center)^2)^q``.
* ``exponential``: ``w(x) = coef * exp(rate * (x - center))``, or with
  ``|x - center|`` when ``absolute`` is set.
* ``table``: linear interpolation through ``(x, w)`` pairs.

Zeros of the weight must be structural (a power kind with
``quad_shift = 0``, or an explicit zero table node); those points are
declared singular so the quadrature can march into them, while any other
nonpositive sample raises ``NonPositiveWeight``.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainMismatch, InvalidConfig, NonPositiveWeight

_TILE_TOL = 1e-12

SEGMENT_KINDS = ("constant", "power", "exponential", "table")


def _parse_endpoint(v) -> float:
    if isinstance(v, str):
        s = v.strip().lower().lstrip("+")
        if s == "inf" or s == "infinity":
            return math.inf
        if s == "-inf" or s == "-infinity":
            return -math.inf
        raise InvalidConfig(f"unrecognized interval endpoint {v!r}")
    try:
        return float(v)
    except (TypeError, ValueError):
        raise InvalidConfig(f"unrecognized interval endpoint {v!r}") from None


@dataclass(frozen=True)
class WeightSegment:
    """One tile of the weight: an interval plus a pointwise rule."""

    lo: float
    hi: float
    kind: str
    params: dict

    def __post_init__(self):
        if self.kind not in SEGMENT_KINDS:
            raise InvalidConfig(
                f"unknown segment kind {self.kind!r}; expected one of "
                f"{SEGMENT_KINDS}"
            )
        if not self.lo < self.hi:
            raise InvalidConfig(
                f"segment interval [{self.lo!r}, {self.hi!r}] is empty"
            )
        if self.kind == "constant":
            if float(self.params.get("value", 0.0)) <= 0.0:
                raise InvalidConfig("constant segment needs value > 0")
        elif self.kind == "power":
            if "exponent" not in self.params:
                raise InvalidConfig("power segment needs an exponent")
            if float(self.params.get("coef", 1.0)) <= 0.0:
                raise InvalidConfig("power segment needs coef > 0")
            if float(self.params.get("quad_shift", 0.0)) < 0.0:
                raise InvalidConfig("power segment needs quad_shift >= 0")
        elif self.kind == "exponential":
            if "rate" not in self.params:
                raise InvalidConfig("exponential segment needs a rate")
            if float(self.params.get("coef", 1.0)) <= 0.0:
                raise InvalidConfig("exponential segment needs coef > 0")
        elif self.kind == "table":
            pts = self.params.get("points")
            if not pts or len(pts) < 2:
                raise InvalidConfig("table segment needs at least 2 points")
            xs = [float(x) for x, _ in pts]
            ws = [float(w) for _, w in pts]
            if any(b <= a for a, b in zip(xs[:-1], xs[1:])):
                raise InvalidConfig("table x-values must be strictly increasing")
            if any(w < 0 for w in ws):
                raise InvalidConfig("table weight values must be >= 0")
            if xs[0] > self.lo or xs[-1] < self.hi:
                raise InvalidConfig(
                    f"table points must span the segment [{self.lo}, {self.hi}]"
                )

    # -- evaluation -------------------------------------------------------

    def eval_array(self, x: np.ndarray) -> np.ndarray:
        p = self.params
        if self.kind == "constant":
            return np.full_like(x, float(p["value"]))
        if self.kind == "power":
            c = float(p.get("coef", 1.0))
            x0 = float(p.get("center", 0.0))
            e = float(p["exponent"])
            shift = float(p.get("quad_shift", 0.0))
            base = (x - x0) ** 2 + shift
            with np.errstate(divide="ignore"):
                return c * np.power(base, e / 2.0)
        if self.kind == "exponential":
            c = float(p.get("coef", 1.0))
            rate = float(p["rate"])
            x0 = float(p.get("center", 0.0))
            arg = np.abs(x - x0) if p.get("absolute") else (x - x0)
            with np.errstate(over="ignore"):
                return c * np.exp(rate * arg)
        # table
        pts = p["points"]
        xs = np.array([float(q[0]) for q in pts])
        ws = np.array([float(q[1]) for q in pts])
        return np.interp(x, xs, ws)

    def eval_scalar(self, x: float) -> float:
        p = self.params
        if self.kind == "constant":
            return float(p["value"])
        if self.kind == "power":
            c = float(p.get("coef", 1.0))
            x0 = float(p.get("center", 0.0))
            e = float(p["exponent"])
            shift = float(p.get("quad_shift", 0.0))
            base = (x - x0) * (x - x0) + shift
            if base == 0.0:
                return 0.0 if e > 0 else math.inf
            return c * base ** (e / 2.0)
        if self.kind == "exponential":
            c = float(p.get("coef", 1.0))
            rate = float(p["rate"])
            x0 = float(p.get("center", 0.0))
            arg = abs(x - x0) if p.get("absolute") else (x - x0)
            try:
                return c * math.exp(rate * arg)
            except OverflowError:
                return math.inf
        pts = p["points"]
        xs = [float(q[0]) for q in pts]
        ws = [float(q[1]) for q in pts]
        i = min(max(bisect_right(xs, x) - 1, 0), len(xs) - 2)
        t = (x - xs[i]) / (xs[i + 1] - xs[i])
        t = min(max(t, 0.0), 1.0)
        return ws[i] + t * (ws[i + 1] - ws[i])

    # -- structure --------------------------------------------------------

    def underflow_ok(self) -> bool:
        """Whether an exact float zero can only come from underflow.

        Exponentials and quad-shifted powers are strictly positive in exact
        arithmetic, so a sampled zero is a float underflow, not a weight
        touching zero.
        """
        if self.kind == "exponential":
            return True
        if self.kind == "power" and float(self.params.get("quad_shift", 0.0)) > 0.0:
            return True
        return False

    def singular_points(self) -> list[float]:
        """Points inside the segment where w is allowed to hit 0 or inf."""
        if self.kind == "power" and float(self.params.get("quad_shift", 0.0)) == 0.0:
            c = float(self.params.get("center", 0.0))
            if self.lo <= c <= self.hi and float(self.params["exponent"]) != 0.0:
                return [c]
        if self.kind == "table":
            return [
                float(x)
                for x, w in self.params["points"]
                if float(w) == 0.0 and self.lo <= float(x) <= self.hi
            ]
        return []

    def kink_points(self) -> list[float]:
        """Interior points where w is continuous but not smooth."""
        pts: list[float] = []
        if self.kind == "exponential" and self.params.get("absolute"):
            c = float(self.params.get("center", 0.0))
            if self.lo < c < self.hi:
                pts.append(c)
        if self.kind == "power":
            c = float(self.params.get("center", 0.0))
            if self.lo < c < self.hi:
                pts.append(c)
        if self.kind == "table":
            pts.extend(
                float(x) for x, _ in self.params["points"] if self.lo < float(x) < self.hi
            )
        return pts

    def to_config(self) -> dict:
        def enc(v: float):
            if v == math.inf:
                return "inf"
            if v == -math.inf:
                return "-inf"
            return v

        return {"interval": [enc(self.lo), enc(self.hi)], "kind": self.kind, **self.params}


class Weight:
    """A positive weight w on an interval of the real line, with exponent p.

    Houses the measure density of ``d(mu) = w dx`` and the exponent
    ``1 < p < inf`` used throughout the weighted-line analysis.
    """

    def __init__(self, segments: Sequence[WeightSegment], p: float):
        if not 1.0 < p < math.inf:
            raise InvalidConfig(f"exponent p must satisfy 1 < p < inf, got {p!r}")
        if not segments:
            raise InvalidConfig("a weight needs at least one segment")
        segs = sorted(segments, key=lambda s: s.lo)
        for left, right in zip(segs[:-1], segs[1:]):
            gap = right.lo - left.hi
            scale = max(1.0, abs(left.hi)) if math.isfinite(left.hi) else 1.0
            if abs(gap) > _TILE_TOL * scale:
                kind = "gap" if gap > 0 else "overlap"
                raise InvalidConfig(
                    f"segments leave a {kind} between x={left.hi!r} and "
                    f"x={right.lo!r}"
                )
        self.segments = list(segs)
        self.p = float(p)
        self.lo = segs[0].lo
        self.hi = segs[-1].hi
        self._bounds = [s.lo for s in segs]
        self._singular = sorted({x for s in segs for x in s.singular_points()})

    # -- basic queries ----------------------------------------------------

    @property
    def domain(self) -> tuple[float, float]:
        return (self.lo, self.hi)

    @property
    def conjugate_exponent(self) -> float:
        return 1.0 / (1.0 - self.p)

    def singular_points(self) -> list[float]:
        return list(self._singular)

    def breakpoints(self) -> list[float]:
        """Interior points where the quadrature must split."""
        pts = {s.lo for s in self.segments[1:]}
        for s in self.segments:
            pts.update(s.kink_points())
        pts.update(self._singular)
        return sorted(p for p in pts if math.isfinite(p))

    def require_domain(self, a: float, b: float) -> None:
        if a < self.lo or b > self.hi:
            raise DomainMismatch(
                f"weight is defined on [{self.lo!r}, {self.hi!r}], "
                f"requested [{a!r}, {b!r}]"
            )

    def _segment_at(self, x: float) -> WeightSegment:
        i = min(max(bisect_right(self._bounds, x) - 1, 0), len(self.segments) - 1)
        return self.segments[i]

    # -- evaluation -------------------------------------------------------

    def __call__(self, x: float) -> float:
        if x < self.lo or x > self.hi:
            raise DomainMismatch(f"x={x!r} outside weight domain {self.domain}")
        seg = self._segment_at(x)
        w = seg.eval_scalar(x)
        if w < 0.0:
            raise NonPositiveWeight(f"w({x!r}) = {w!r}")
        if w == 0.0 and x not in self._singular and not seg.underflow_ok():
            raise NonPositiveWeight(f"w({x!r}) = 0.0 at an undeclared point")
        return w

    def eval_array(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.size and (x.min() < self.lo or x.max() > self.hi):
            raise DomainMismatch("array evaluation outside weight domain")
        out = np.empty_like(x)
        bounds = np.array(self._bounds)
        idx = np.clip(np.searchsorted(bounds, x, side="right") - 1, 0, len(self.segments) - 1)
        for i, seg in enumerate(self.segments):
            mask = idx == i
            if mask.any():
                out[mask] = seg.eval_array(x[mask])
        if (out < 0.0).any():
            x_bad = float(x[out < 0.0][0])
            raise NonPositiveWeight(f"w({x_bad!r}) < 0")
        zero = out == 0.0
        if zero.any():
            bad = zero & ~np.isin(x, self._singular)
            for i, seg in enumerate(self.segments):
                if seg.underflow_ok():
                    bad &= idx != i
            if bad.any():
                x_bad = float(x[bad][0])
                raise NonPositiveWeight(f"w({x_bad!r}) = 0.0 at an undeclared point")
        return out

    def conjugate(self, x: float) -> float:
        """The conjugate integrand w(x)^(1/(1-p))."""
        w = self(x)
        if w == 0.0:
            return math.inf
        if w == math.inf:
            return 0.0
        return w**self.conjugate_exponent


# -- constructors ----------------------------------------------------------


def constant_weight(p: float, value: float = 1.0,
                    lo: float = -math.inf, hi: float = math.inf) -> Weight:
    return Weight([WeightSegment(lo, hi, "constant", {"value": value})], p)


def power_weight(p: float, exponent: float, *, coef: float = 1.0,
                 center: float = 0.0, quad_shift: float = 0.0,
                 lo: float = -math.inf, hi: float = math.inf) -> Weight:
    seg = WeightSegment(
        lo, hi, "power",
        {"coef": coef, "center": center, "exponent": exponent,
         "quad_shift": quad_shift},
    )
    return Weight([seg], p)


def exponential_weight(p: float, rate: float, *, coef: float = 1.0,
                       center: float = 0.0, absolute: bool = False,
                       lo: float = -math.inf, hi: float = math.inf) -> Weight:
    seg = WeightSegment(
        lo, hi, "exponential",
        {"coef": coef, "rate": rate, "center": center, "absolute": absolute},
    )
    return Weight([seg], p)


def arctan_type_weight(p: float) -> Weight:
    """w(x) = (1 + x^2)^(p-1), whose conjugate integrand is 1/(1+x^2)."""
    return power_weight(p, exponent=2.0 * (p - 1.0), quad_shift=1.0)


def weight_from_config(cfg: dict) -> Weight:
    """Build a Weight from a parsed config dict; see the README schema."""
    if not isinstance(cfg, dict):
        raise InvalidConfig("weight config must be a JSON object")
    if "p" not in cfg:
        raise InvalidConfig("weight config needs an exponent field 'p'")
    try:
        p = float(cfg["p"])
    except (TypeError, ValueError):
        raise InvalidConfig(f"invalid exponent p: {cfg['p']!r}") from None
    raw = cfg.get("segments")
    if not isinstance(raw, list) or not raw:
        raise InvalidConfig("weight config needs a nonempty 'segments' list")
    segments = []
    for i, item in enumerate(raw):
        if not isinstance(item, dict):
            raise InvalidConfig(f"segment {i} must be an object")
        if "interval" not in item or "kind" not in item:
            raise InvalidConfig(f"segment {i} needs 'interval' and 'kind'")
        iv = item["interval"]
        if not isinstance(iv, (list, tuple)) or len(iv) != 2:
            raise InvalidConfig(f"segment {i}: interval must be [lo, hi]")
        lo = _parse_endpoint(iv[0])
        hi = _parse_endpoint(iv[1])
        params = {k: v for k, v in item.items() if k not in ("interval", "kind")}
        segments.append(WeightSegment(lo, hi, str(item["kind"]), params))
    return Weight(segments, p)


def weight_to_config(w: Weight) -> dict:
    return {"p": w.p, "segments": [s.to_config() for s in w.segments]}
