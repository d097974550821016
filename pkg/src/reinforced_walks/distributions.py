"""Step laws for the reinforced walks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

RADEMACHER = "rademacher"
DISCRETE = "custom-discrete"
GAUSSIAN = "centered-gaussian"
KINDS = (RADEMACHER, DISCRETE, GAUSSIAN)

# integer codes consumed by the numba kernels
KIND_CODES = {RADEMACHER: 0, DISCRETE: 1, GAUSSIAN: 2}

_PROB_TOL = 1e-12


@dataclass(frozen=True)
class StepDistribution:
    """A step law together with the moments the normalizations need.

    ``values``/``probs`` are populated for the discrete kinds (rademacher is
    stored as the support {-1, +1}); ``sd`` only for the centered gaussian.
    """

    kind: str
    values: tuple = ()
    probs: tuple = ()
    sd: float = 0.0
    m1: float = 0.0
    m2: float = 0.0
    m3abs: float = 0.0
    sigma0sq: float = 0.0
    _cdf: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def is_discrete(self) -> bool:
        return self.kind != GAUSSIAN

    @property
    def sigma0(self) -> float:
        return math.sqrt(self.sigma0sq)

    def kernel_args(self):
        """(kind code, support values, cumulative probabilities, sd) for the kernels."""
        if self.is_discrete:
            values = np.asarray(self.values, dtype=np.float64)
            cdf = self._cdf
        else:
            values = np.zeros(1)
            cdf = np.ones(1)
        return KIND_CODES[self.kind], values, cdf, float(self.sd)

    def pmf(self) -> dict:
        if not self.is_discrete:
            raise ValueError("gaussian step law has no pmf")
        return dict(zip(self.values, self.probs))

    def describe(self) -> dict:
        if self.kind == RADEMACHER:
            return {"kind": RADEMACHER}
        if self.kind == DISCRETE:
            return {"kind": DISCRETE, "support": {repr(v): q for v, q in zip(self.values, self.probs)}}
        return {"kind": GAUSSIAN, "sd": self.sd}


def _discrete(kind: str, support: Mapping[float, float]) -> StepDistribution:
    if not support:
        raise ValueError("empty support")
    items = sorted((float(v), float(q)) for v, q in support.items())
    values = tuple(v for v, _ in items)
    probs = tuple(q for _, q in items)
    if any(q < 0 or not math.isfinite(q) for q in probs):
        raise ValueError(f"probabilities must be nonnegative and finite: {probs}")
    total = math.fsum(probs)
    if abs(total - 1.0) > _PROB_TOL:
        raise ValueError(f"probabilities sum to {total!r}, not 1")
    if any(not math.isfinite(v) for v in values):
        raise ValueError("support values must be finite")
    m1 = math.fsum(v * q for v, q in items)
    m2 = math.fsum(v * v * q for v, q in items)
    m3abs = math.fsum(abs(v) ** 3 * q for v, q in items)
    sigma0sq = math.fsum(((v - m1) ** 2) * q for v, q in items)
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    return StepDistribution(kind, values, probs, 0.0, m1, m2, m3abs, max(sigma0sq, 0.0), cdf)


def rademacher() -> StepDistribution:
    return StepDistribution(
        RADEMACHER, (-1.0, 1.0), (0.5, 0.5), 0.0, 0.0, 1.0, 1.0, 1.0, np.array([0.5, 1.0])
    )


def discrete(support: Mapping[float, float]) -> StepDistribution:
    return _discrete(DISCRETE, support)


def gaussian(sd: float) -> StepDistribution:
    if not sd > 0 or not math.isfinite(sd):
        raise ValueError(f"gaussian standard deviation must be positive, got {sd}")
    m2 = sd * sd
    m3abs = 2.0 * sd**3 * math.sqrt(2.0 / math.pi)
    return StepDistribution(GAUSSIAN, (), (), float(sd), 0.0, m2, m3abs, m2)


def make_distribution(spec) -> StepDistribution:
    """Build a step law from ``"rademacher"`` or a dict description.

    Accepted dicts: ``{"kind": "rademacher"}``,
    ``{"kind": "custom-discrete", "support": {value: prob, ...}}`` and
    ``{"kind": "centered-gaussian", "sd": s}``.  Keys and numbers may be
    strings (as they arrive from JSON).
    """
    if isinstance(spec, StepDistribution):
        return spec
    if isinstance(spec, str):
        spec = {"kind": spec}
    if not isinstance(spec, Mapping) or "kind" not in spec:
        raise ValueError(f"unrecognised distribution description: {spec!r}")
    kind = spec["kind"]
    if kind == RADEMACHER:
        return rademacher()
    if kind == DISCRETE:
        support = spec.get("support")
        if not isinstance(support, Mapping):
            raise ValueError("custom-discrete requires a 'support' mapping value -> probability")
        return discrete({float(v): float(q) for v, q in support.items()})
    if kind == GAUSSIAN:
        if "sd" not in spec:
            raise ValueError("centered-gaussian requires 'sd'")
        return gaussian(float(spec["sd"]))
    raise ValueError(f"unknown distribution kind {kind!r}; expected one of {KINDS}")


def integer_support(dist: StepDistribution):
    """Scale a finite support to integers exactly.

    Returns ``(scale, int_values)`` with ``value == int_value / scale``.  Values
    are read through their shortest decimal repr, so ``0.1`` counts as 1/10.
    """
    if not dist.is_discrete:
        raise ValueError("integer scaling needs a finite-support law")
    fracs = [Fraction(repr(v)) for v in dist.values]
    scale = 1
    for f in fracs:
        scale = scale * f.denominator // math.gcd(scale, f.denominator)
    return scale, tuple(int(f * scale) for f in fracs)
