"""Comparison encoders: successive-approximation PCM, base-beta encoders
with greedy/lazy/cautious/flaky selection, first-order sigma-delta, and the
order-k sigma-delta companion-form state machine with a pluggable bit rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .framework import BitStream, Scheme
from .quantizers import QuantizerSpec, Resolver, flaky_q, q_tau

__all__ = [
    "pcm_encode",
    "pcm_states",
    "BetaSpec",
    "beta_encode",
    "beta_states",
    "sd1_encode",
    "sd1_states",
    "sd1_decode",
    "SigmaDeltaKSpec",
    "sdk_step",
    "sdk_encode",
    "sdk_states",
    "companion_matrix",
]


# ---------------------------------------------------------------------------
# PCM successive approximation


def pcm_states(x: float, n_bits: int, tau: Union[float, Sequence[float]] = 1.0):
    """Doubling recursion b_n = q_tau(u_n), u_{n+1} = 2 (u_n - b_n), u_0 = x.

    ``tau`` may be a per-cycle sequence to model a drifting threshold.
    Returns (BitStream, states u_0..u_N).
    """
    if not (0.0 <= x <= 2.0):
        raise ValueError(f"x={x} outside [0, 2]")
    if n_bits < 1:
        raise ValueError("n_bits must be at least 1")
    taus = tau if isinstance(tau, (int, float)) else list(tau)
    if not isinstance(taus, (int, float)) and len(taus) < n_bits:
        raise ValueError("per-cycle threshold schedule shorter than n_bits")
    u = float(x)
    bits = np.empty(n_bits, dtype=np.int8)
    states = np.empty(n_bits + 1)
    states[0] = u
    for n in range(n_bits):
        t = taus if isinstance(taus, (int, float)) else taus[n]
        b = q_tau(u, t)
        u = 2.0 * (u - b)
        bits[n] = b
        states[n + 1] = u
    params = {"x": x, "tau": tau if isinstance(tau, (int, float)) else list(taus)}
    return BitStream(bits, Scheme.PCM, params), states


def pcm_encode(x: float, n_bits: int, tau: float = 1.0) -> BitStream:
    """Successive-approximation binary encoding of x in [0, 2]."""
    stream, _ = pcm_states(x, n_bits, tau)
    return stream


# ---------------------------------------------------------------------------
# beta encoder


@dataclass(frozen=True)
class BetaSpec:
    """Base-beta encoder parameters: base in (1, 2], threshold band inside
    the admissible interval [1, 1/(beta-1)], and the flaky-band resolver."""

    beta: float
    nu1: float
    nu2: float
    resolver: Optional[Resolver] = None

    def __post_init__(self):
        if not (1.0 < self.beta <= 2.0):
            raise ValueError(f"beta={self.beta} outside (1, 2]")
        hi = 1.0 / (self.beta - 1.0)
        if not (1.0 <= self.nu1 <= self.nu2 <= hi + 1e-12):
            raise ValueError(
                f"band [{self.nu1}, {self.nu2}] outside admissible [1, {hi}]"
            )

    @classmethod
    def greedy(cls, beta: float) -> "BetaSpec":
        return cls(beta, 1.0, 1.0)

    @classmethod
    def lazy(cls, beta: float) -> "BetaSpec":
        hi = 1.0 / (beta - 1.0)
        return cls(beta, hi, hi)

    @classmethod
    def with_tau(cls, beta: float, tau: float) -> "BetaSpec":
        return cls(beta, tau, tau)

    def quantizer(self) -> QuantizerSpec:
        return QuantizerSpec(alpha=0.0, nu1=self.nu1, nu2=self.nu2, resolver=self.resolver)

    def state_bound(self) -> float:
        """States stay in [0, beta/(beta-1)] for any admissible selection."""
        return self.beta / (self.beta - 1.0)


def beta_states(x: float, n_bits: int, spec: BetaSpec):
    """b_n = q(u_n), u_{n+1} = beta (u_n - b_n), u_0 = x; the threshold may
    wander in the cautious band. Returns (BitStream, states)."""
    hi = spec.state_bound()
    if not (0.0 <= x <= hi):
        raise ValueError(f"x={x} outside [0, {hi}]")
    if n_bits < 1:
        raise ValueError("n_bits must be at least 1")
    q = spec.quantizer()
    u = float(x)
    bits = np.empty(n_bits, dtype=np.int8)
    states = np.empty(n_bits + 1)
    states[0] = u
    for n in range(n_bits):
        b = flaky_q(u, q, n)
        u = spec.beta * (u - b)
        bits[n] = b
        states[n + 1] = u
    params = {"x": x, "beta": spec.beta, "nu1": spec.nu1, "nu2": spec.nu2}
    if spec.resolver is not None:
        params["resolver"] = spec.resolver.describe()
    return BitStream(bits, Scheme.BETA, params), states


def beta_encode(x: float, n_bits: int, spec: BetaSpec) -> BitStream:
    stream, _ = beta_states(x, n_bits, spec)
    return stream


# ---------------------------------------------------------------------------
# first-order sigma-delta


def sd1_states(x: float, n_bits: int, u0: float = 0.0):
    """b_n = q_1(u_n + x), u_{n+1} = u_n + x - b_n; states stay in [0, 1]."""
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"x={x} outside [0, 1]")
    if not (0.0 <= u0 <= 1.0):
        raise ValueError(f"u0={u0} outside [0, 1]")
    if n_bits < 1:
        raise ValueError("n_bits must be at least 1")
    u = float(u0)
    bits = np.empty(n_bits, dtype=np.int8)
    states = np.empty(n_bits + 1)
    states[0] = u
    for n in range(n_bits):
        b = q_tau(u + x, 1.0)
        u = u + x - b
        bits[n] = b
        states[n + 1] = u
    return BitStream(bits, Scheme.SIGMA_DELTA_1, {"x": x, "u0": u0}), states


def sd1_encode(x: float, n_bits: int, u0: float = 0.0) -> BitStream:
    stream, _ = sd1_states(x, n_bits, u0)
    return stream


def sd1_decode(bits) -> float:
    """Running-mean decoder; error is O(1/N) by state boundedness."""
    arr = np.asarray(getattr(bits, "bits", bits), dtype=float)
    if arr.size == 0:
        raise ValueError("empty bitstream")
    return float(arr.mean())


# ---------------------------------------------------------------------------
# order-k sigma-delta, companion form


def companion_matrix(k: int) -> np.ndarray:
    """Companion matrix of the k-th difference update: subdiagonal shift
    with last row a_j = (-1)^(k-1-j) C(k, j)."""
    if k < 1:
        raise ValueError("order must be at least 1")
    L = np.zeros((k, k))
    for i in range(k - 1):
        L[i, i + 1] = 1.0
    for j in range(k):
        L[k - 1, j] = (-1.0) ** (k - 1 - j) * math.comb(k, j)
    return L


@dataclass(frozen=True)
class SigmaDeltaKSpec:
    """Order-k sigma-delta configuration.

    ``rule`` maps (x, state vector) to a bit and must keep states bounded
    for the scheme to be useful; no default rule is supplied for k >= 2 and
    no stability claim is made on the caller's behalf.
    """

    k: int
    rule: Callable[[float, np.ndarray], int]
    initial: Optional[Sequence[float]] = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("order must be at least 1")
        if self.rule is None:
            raise ValueError("a bit rule is required")
        if self.initial is not None and len(self.initial) != self.k:
            raise ValueError(f"initial state needs dimension {self.k}")


def sdk_step(state, x: float, spec: SigmaDeltaKSpec):
    """One companion-form update: shift the window, apply the difference
    coefficients, add x - b."""
    s = np.asarray(state, dtype=float)
    if s.shape != (spec.k,):
        raise ValueError(f"state must have shape ({spec.k},)")
    b = int(spec.rule(x, s))
    last = x - b
    for j in range(spec.k):
        last += (-1.0) ** (spec.k - 1 - j) * math.comb(spec.k, j) * s[j]
    new = np.empty_like(s)
    new[:-1] = s[1:]
    new[-1] = last
    return b, new


def sdk_states(x: float, n_bits: int, spec: SigmaDeltaKSpec):
    if n_bits < 1:
        raise ValueError("n_bits must be at least 1")
    state = np.zeros(spec.k) if spec.initial is None else np.asarray(spec.initial, dtype=float)
    if state.shape != (spec.k,):
        raise ValueError(f"initial state needs dimension {spec.k}")
    bits = np.empty(n_bits, dtype=np.int8)
    states = np.empty((n_bits + 1, spec.k))
    states[0] = state
    for n in range(n_bits):
        b, state = sdk_step(state, x, spec)
        bits[n] = b
        states[n + 1] = state
    return BitStream(bits, Scheme.SIGMA_DELTA_K, {"x": x, "k": spec.k}), states


def sdk_encode(x: float, n_bits: int, spec: SigmaDeltaKSpec) -> BitStream:
    stream, _ = sdk_states(x, n_bits, spec)
    return stream
