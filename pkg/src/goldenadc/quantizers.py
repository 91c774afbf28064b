"""1-bit quantizers: exact, flaky, and the two-input linear-threshold family.

A flaky quantizer outputs 0 below its lower threshold ``nu1`` and 1 at or
above its upper threshold ``nu2``; inside the half-open band ``[nu1, nu2)``
the decision is delegated to an injected resolver policy. Resolvers are
never hard-coded into the dynamics, so worst-case (adversarial) selections
can be tested alongside random ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

__all__ = [
    "AlwaysZero",
    "AlwaysOne",
    "RandomUniformThreshold",
    "PerCycleSequence",
    "Resolver",
    "QuantizerSpec",
    "q_tau",
    "flaky_q",
    "q_alpha",
    "counter_uniform",
]

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def counter_uniform(seed: int, cycle: int) -> float:
    """Deterministic uniform in [0, 1) at position ``cycle`` of the
    splitmix64 stream keyed by ``seed``.

    Stateless by construction: evaluating out of order, repeatedly, or from
    concurrent workers always yields the same value for the same arguments.
    """
    z = (seed + (cycle + 1) * _GAMMA) & _MASK64
    return (_mix64(z) >> 11) / float(1 << 53)


@dataclass(frozen=True)
class AlwaysZero:
    """Adversarial resolver: every in-band decision is 0."""

    def decide(self, u: float, nu1: float, nu2: float, cycle: int) -> int:
        return 0

    def describe(self) -> dict:
        return {"kind": "zero"}


@dataclass(frozen=True)
class AlwaysOne:
    """Adversarial resolver: every in-band decision is 1."""

    def decide(self, u: float, nu1: float, nu2: float, cycle: int) -> int:
        return 1

    def describe(self) -> dict:
        return {"kind": "one"}


@dataclass(frozen=True)
class RandomUniformThreshold:
    """Per-cycle threshold tau_n ~ Uniform[nu1, nu2), drawn statelessly
    from (seed, cycle). The cycle-n decision equals q_tau(u, tau_n)."""

    seed: int = 0

    def threshold(self, nu1: float, nu2: float, cycle: int) -> float:
        return nu1 + counter_uniform(self.seed, cycle) * (nu2 - nu1)

    def decide(self, u: float, nu1: float, nu2: float, cycle: int) -> int:
        return int(u >= self.threshold(nu1, nu2, cycle))

    def describe(self) -> dict:
        return {"kind": "random", "seed": self.seed}


class PerCycleSequence:
    """Explicit threshold schedule, one tau per cycle."""

    def __init__(self, taus: Sequence[float]):
        self.taus = tuple(float(t) for t in taus)

    def threshold(self, nu1: float, nu2: float, cycle: int) -> float:
        if cycle >= len(self.taus):
            raise ValueError(
                f"threshold schedule has {len(self.taus)} entries, cycle {cycle} requested"
            )
        return self.taus[cycle]

    def decide(self, u: float, nu1: float, nu2: float, cycle: int) -> int:
        return int(u >= self.threshold(nu1, nu2, cycle))

    def describe(self) -> dict:
        return {"kind": "per-cycle", "taus": list(self.taus)}

    def __repr__(self):
        return f"PerCycleSequence({len(self.taus)} thresholds)"


Resolver = Union[AlwaysZero, AlwaysOne, RandomUniformThreshold, PerCycleSequence]


@dataclass(frozen=True)
class QuantizerSpec:
    """Two-input linear-threshold quantizer with gain ``alpha`` and flaky
    band ``[nu1, nu2)``.

    ``alpha`` may be a single gain or a per-cycle sequence of gains (a flaky
    multiplier). A non-empty band requires a resolver.
    """

    alpha: Union[float, tuple] = 1.0
    nu1: float = 1.0
    nu2: float = 1.0
    resolver: Resolver | None = None

    def __post_init__(self):
        if not isinstance(self.alpha, (int, float)):
            object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
        if self.nu1 > self.nu2:
            raise ValueError(f"nu1={self.nu1} exceeds nu2={self.nu2}")
        if self.nu1 < self.nu2 and self.resolver is None:
            raise ValueError("non-empty flaky band requires a resolver")
        if isinstance(self.resolver, PerCycleSequence):
            for t in self.resolver.taus:
                if not (self.nu1 <= t <= self.nu2):
                    raise ValueError(f"scheduled threshold {t} outside [{self.nu1}, {self.nu2}]")

    @classmethod
    def exact(cls, alpha: float = 1.0, tau: float = 1.0) -> "QuantizerSpec":
        """Deterministic quantizer with a single threshold (empty band)."""
        return cls(alpha=alpha, nu1=tau, nu2=tau)

    @property
    def is_exact(self) -> bool:
        return self.nu1 == self.nu2

    def alpha_at(self, cycle: int) -> float:
        if isinstance(self.alpha, tuple):
            if cycle >= len(self.alpha):
                raise ValueError(
                    f"gain schedule has {len(self.alpha)} entries, cycle {cycle} requested"
                )
            return self.alpha[cycle]
        return self.alpha

    def describe(self) -> dict:
        """JSON-friendly parameter snapshot."""
        alpha = list(self.alpha) if isinstance(self.alpha, tuple) else self.alpha
        d = {"alpha": alpha, "nu1": self.nu1, "nu2": self.nu2}
        if self.resolver is not None:
            d["resolver"] = self.resolver.describe()
        return d


def q_tau(u: float, tau: float) -> int:
    """1-bit quantizer with threshold ``tau``: 0 iff u < tau."""
    return int(u >= tau)


def flaky_q(u: float, spec: QuantizerSpec, cycle: int = 0) -> int:
    """Flaky 1-bit quantizer: 0 below nu1, 1 at or above nu2, resolver
    decides inside [nu1, nu2)."""
    if u < spec.nu1:
        return 0
    if u >= spec.nu2:
        return 1
    return spec.resolver.decide(u, spec.nu1, spec.nu2, cycle)


def q_alpha(u: float, v: float, spec: QuantizerSpec, cycle: int = 0) -> int:
    """Two-input quantizer: flaky threshold applied to u + alpha * v."""
    return flaky_q(u + spec.alpha_at(cycle) * v, spec, cycle)
