"""Order-L generalization of the golden-ratio scheme.

The recursion u_{n+L} = u_{n+L-1} + ... + u_n - b_n emits a bit expansion
in base beta_L, the dominant root of s^L = s^(L-1) + ... + 1. The root lies
in (1, 2), approaches 2 monotonically as L grows, and all remaining roots
sit inside the unit circle, so bounded state sequences give accuracy
O(beta_L^(-N)).

No bit rule with a boundedness proof is shipped for L >= 3; the default
linear-threshold rule is an experimental heuristic, and every encoding
returns an empirical stability report alongside the stream.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .framework import BitStream, Scheme, Trajectory
from .quantizers import q_tau

__all__ = [
    "polynacci_base",
    "secondary_root_moduli",
    "PolynacciConfig",
    "StabilityReport",
    "polynacci_encode",
    "tail_coefficients",
    "tail_identity_value",
]


def _char_value(s: float, L: int) -> float:
    # s^L - (s^(L-1) + ... + 1), evaluated by Horner on the full polynomial
    acc = 1.0
    for _ in range(L):
        acc = acc * s - 1.0
    return acc


def polynacci_base(L: int, tol: float = 1e-12) -> float:
    """Dominant root beta_L of s^L = s^(L-1) + ... + 1, by bisection on
    (1, 2). The sign change is guaranteed: the polynomial is 1 - L at s=1
    and +1 at s=2."""
    if L < 2:
        raise ValueError("L must be at least 2")
    if not tol > 0:
        raise ValueError("tol must be positive")
    lo, hi = 1.0, 2.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _char_value(mid, L) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def secondary_root_moduli(L: int) -> np.ndarray:
    """Moduli of the non-dominant characteristic roots.

    Uses the equivalent polynomial s^(L+1) - 2 s^L + 1, whose roots are the
    characteristic roots plus s = 1; the spurious root at 1 and the dominant
    root are removed by proximity. All returned moduli are below 1 when the
    dominant root is a Pisot number.
    """
    coeffs = np.zeros(L + 2)
    coeffs[0] = 1.0
    coeffs[1] = -2.0
    coeffs[-1] = 1.0
    roots = np.roots(coeffs)
    beta = polynacci_base(L, tol=1e-13)
    keep = []
    spurious_one_dropped = False
    dominant_dropped = False
    for r in sorted(roots, key=lambda z: -abs(z - 1.0)):
        if not spurious_one_dropped and abs(r - 1.0) < 1e-7:
            spurious_one_dropped = True
            continue
        keep.append(r)
    moduli = []
    for r in sorted(keep, key=lambda z: -abs(z)):
        if not dominant_dropped and abs(r - beta) < 1e-6:
            dominant_dropped = True
            continue
        moduli.append(abs(r))
    return np.array(sorted(moduli, reverse=True))


def tail_coefficients(L: int, beta: float) -> np.ndarray:
    """Weights c_k = 1 + beta^-1 + ... + beta^-k applied to the final L
    states in the telescoped reconstruction error."""
    return np.array([sum(beta ** (-i) for i in range(k + 1)) for k in range(L)])


def tail_identity_value(final_states, beta: float, n_bits: int) -> float:
    """Reconstruction error implied by the final L states:
    beta^(-N) * sum_k c_k u_{N+k}. Exact up to rounding for noiseless runs."""
    tail = np.asarray(final_states, dtype=float)
    c = tail_coefficients(tail.size, beta)
    return beta ** (-n_bits) * float(np.dot(c, tail))


@dataclass(frozen=True)
class PolynacciConfig:
    """Order-L encoder configuration.

    The bit rule thresholds a weighted sum of the state window:
    b = q(threshold, sum_i weights[i] * u_{n+i}). The default weights are
    the tail coefficients c_k = 1 + 1/beta + ... + beta^-k, an experimental
    heuristic with no boundedness proof: they make the weighted sum W evolve
    as W -> beta (W - b), the classical one-dimensional expansion map, which
    keeps W itself bounded for thresholds in [1, 1/(beta-1)] while the
    remaining state directions are contracting. The plain unweighted sum
    (weights of all ones) is empirically unstable for L >= 3.

    A custom ``rule(state, cycle) -> bit`` overrides the linear threshold;
    with L = 2 and a two-input quantizer rule this reproduces the
    golden-ratio encoder bit for bit.
    """

    L: int
    weights: Optional[Sequence[float]] = None
    threshold: float = 1.0
    rule: Optional[Callable[[np.ndarray, int], int]] = None
    escape_bound: float = 100.0

    def __post_init__(self):
        if self.L < 2:
            raise ValueError("L must be at least 2")
        if self.weights is not None:
            if len(self.weights) != self.L:
                raise ValueError(f"weights need length {self.L}")
            object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        else:
            beta = polynacci_base(self.L)
            object.__setattr__(self, "weights", tuple(tail_coefficients(self.L, beta)))

    def decide(self, state: np.ndarray, cycle: int) -> int:
        if self.rule is not None:
            return int(self.rule(state, cycle))
        return q_tau(float(np.dot(self.weights, state)), self.threshold)


@dataclass(frozen=True)
class StabilityReport:
    """Empirical boundedness evidence for one run."""

    max_abs_state: float
    escaped: bool
    escape_index: Optional[int]
    base: float
    error_bound: float  # beta^(-N) * sum_k c_k * max|u|, valid if not escaped


def polynacci_encode(
    x: float, n_bits: int, cfg: PolynacciConfig
) -> tuple[BitStream, Trajectory, StabilityReport]:
    """Run the order-L recursion from (x, 0, ..., 0).

    Instability is reported, never raised: the stream, the full trajectory,
    and a stability report are always returned.
    """
    if x < 0:
        raise ValueError("x must be nonnegative")
    if n_bits < 1:
        raise ValueError("n_bits must be at least 1")
    L = cfg.L
    state = np.zeros(L)
    state[0] = x
    bits = np.empty(n_bits, dtype=np.int8)
    states = np.empty((n_bits + 1, L))
    states[0] = state
    escaped = False
    escape_index = None
    for n in range(n_bits):
        b = cfg.decide(state, n)
        new_last = state.sum() - b
        state = np.roll(state, -1)
        state[-1] = new_last
        bits[n] = b
        states[n + 1] = state
        if not escaped and np.abs(state).max() > cfg.escape_bound:
            escaped = True
            escape_index = n + 1
    beta = polynacci_base(L)
    max_abs = float(np.abs(states).max())
    c = tail_coefficients(L, beta)
    report = StabilityReport(
        max_abs_state=max_abs,
        escaped=escaped,
        escape_index=escape_index,
        base=beta,
        error_bound=beta ** (-n_bits) * float(c.sum()) * max_abs,
    )
    params = {"x": x, "L": L, "threshold": cfg.threshold, "base": beta}
    stream = BitStream(bits, Scheme.POLYNACCI, params)
    traj = Trajectory(states, escaped=escaped, escape_index=escape_index)
    return stream, traj, report
