"""Algorithmic-encoder plumbing shared by every scheme.

An algorithmic encoder is a one-bit-per-cycle state machine: from input x
and state u_n it emits b_n and updates to u_{n+1}. This module holds the
run containers (:class:`EncoderRun`, :class:`BitStream`,
:class:`Trajectory`), the generic dispatcher :func:`run_encoder`, empirical
distortion measurement, serialization, and exact-rational reference
iterations used as test oracles.

All simulation state is double precision. The rational reference functions
(:func:`gre_exact`, :func:`pcm_exact`, :func:`beta_exact`) rerun the same
recursions in ``fractions.Fraction`` arithmetic, which is exact whenever
the input and the quantizer parameters are rational.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np

from .quantizers import PerCycleSequence, QuantizerSpec, Resolver

__all__ = [
    "Scheme",
    "ParamVector",
    "BitStream",
    "Trajectory",
    "EncoderRun",
    "run_encoder",
    "empirical_distortion",
    "gre_exact",
    "pcm_exact",
    "beta_exact",
    "DEFAULT_ESCAPE_BOUND",
]

DEFAULT_ESCAPE_BOUND = 100.0


class Scheme(str, Enum):
    PCM = "PCM"
    BETA = "Beta"
    SIGMA_DELTA_1 = "SigmaDelta1"
    SIGMA_DELTA_K = "SigmaDeltaK"
    GRE = "GRE"
    POLYNACCI = "Polynacci"


#: state-vector dimension per scheme; SigmaDeltaK / Polynacci depend on order
_SCHEME_ORDER = {
    Scheme.PCM: 1,
    Scheme.BETA: 1,
    Scheme.SIGMA_DELTA_1: 1,
    Scheme.GRE: 2,
}


@dataclass(frozen=True)
class ParamVector:
    """Aggregate parameter values for one encoder, with optional per-cycle
    schedules for flaky components.

    ``values`` holds the nominal parameters by name (for example ``alpha``,
    ``nu1``, ``nu2``, ``tau``, ``beta``, ``k``, ``L``). ``per_cycle`` maps a
    parameter name to a length-N schedule; schedule lengths are validated
    against ``n_bits`` when the run executes.
    """

    values: Mapping[str, float] = field(default_factory=dict)
    per_cycle: Optional[Mapping[str, Sequence[float]]] = None

    def get(self, name, default=None):
        return self.values.get(name, default)

    def schedule(self, name):
        if self.per_cycle is None:
            return None
        return self.per_cycle.get(name)


class BitStream:
    """Finite 0/1 sequence plus metadata identifying how it was produced."""

    def __init__(self, bits, scheme, params: dict | None = None):
        arr = np.asarray(bits, dtype=np.int8)
        if arr.ndim != 1:
            raise ValueError("bits must be one-dimensional")
        if arr.size and not np.isin(arr, (0, 1)).all():
            raise ValueError("bits must contain only 0 and 1")
        self.bits = arr
        self.scheme = Scheme(scheme) if not isinstance(scheme, Scheme) else scheme
        self.params = dict(params or {})

    @property
    def n_bits(self) -> int:
        return int(self.bits.size)

    def __len__(self):
        return self.n_bits

    def __eq__(self, other):
        return (
            isinstance(other, BitStream)
            and self.scheme == other.scheme
            and np.array_equal(self.bits, other.bits)
        )

    def __repr__(self):
        shown = "".join(str(b) for b in self.bits[:24])
        if self.n_bits > 24:
            shown += "..."
        return f"BitStream({self.scheme.value}, {self.n_bits} bits: {shown})"

    def _scheme_label(self) -> str:
        if self.scheme is Scheme.POLYNACCI and "L" in self.params:
            return f"Polynacci{int(self.params['L'])}"
        return self.scheme.value

    def to_json(self) -> str:
        obj = {
            "scheme": self._scheme_label(),
            "params": self.params,
            "n_bits": self.n_bits,
            "bits": "".join(str(int(b)) for b in self.bits),
        }
        return json.dumps(obj)

    @classmethod
    def from_json(cls, text: str) -> "BitStream":
        obj = json.loads(text)
        label = obj["scheme"]
        params = dict(obj.get("params", {}))
        m = re.fullmatch(r"Polynacci(\d+)", label)
        if m:
            label = "Polynacci"
            params.setdefault("L", int(m.group(1)))
        bits = np.frombuffer(obj["bits"].encode("ascii"), dtype=np.uint8) - ord("0")
        if bits.size != obj["n_bits"]:
            raise ValueError("bit string length does not match n_bits")
        return cls(bits, Scheme(label), params)


class Trajectory:
    """State time series of one run.

    ``states`` has one row per recorded step; row n is the state vector at
    step n (for the golden-ratio scheme the pair (u_n, u_{n+1})). When an
    escape bound is crossed the run is flagged and, if early stopping was
    requested, recording stops at ``escape_index`` while the bit iteration
    continues so the stream still has its full length.
    """

    def __init__(self, states, escaped: bool = False, escape_index: int | None = None):
        arr = np.asarray(states, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        self.states = arr
        self.escaped = bool(escaped)
        self.escape_index = escape_index

    def __len__(self):
        return self.states.shape[0]

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def scalar_series(self) -> np.ndarray:
        """Unrolled scalar sequence u_0, u_1, ... (overlapping vector states
        contribute each scalar once)."""
        if self.dim == 1:
            return self.states[:, 0].copy()
        return np.concatenate([self.states[:, 0], self.states[-1, 1:]])

    def to_csv(self) -> str:
        lines = ["n,u_n"]
        for n, u in enumerate(self.scalar_series()):
            lines.append(f"{n},{u:.17g}")
        return "\n".join(lines) + "\n"


@dataclass
class EncoderRun:
    """Configuration of one encoding run.

    ``initial_state`` overrides the scheme's standard initialization (PCM,
    beta, GRE and Polynacci start from x; the sigma-delta schemes from 0).
    ``resolver`` supplies the flaky-band policy, ``rule`` the bit decision
    for order-k sigma-delta, ``noise`` a per-cycle additive perturbation for
    the golden-ratio scheme.
    """

    scheme: Scheme
    n_bits: int
    params: ParamVector = field(default_factory=ParamVector)
    initial_state: Optional[Sequence[float]] = None
    resolver: Optional[Resolver] = None
    rule: Optional[Callable] = None
    noise: object = None
    escape_bound: float = DEFAULT_ESCAPE_BOUND
    early_stop: bool = False

    def order(self) -> int:
        if self.scheme is Scheme.SIGMA_DELTA_K:
            return int(self.params.get("k", 1))
        if self.scheme is Scheme.POLYNACCI:
            return int(self.params.get("L", 2))
        return _SCHEME_ORDER[self.scheme]

    def __post_init__(self):
        if self.n_bits < 1:
            raise ValueError("n_bits must be at least 1")
        if self.initial_state is not None and len(self.initial_state) != self.order():
            raise ValueError(
                f"initial state has dimension {len(self.initial_state)}, "
                f"scheme {self.scheme.value} needs {self.order()}"
            )
        if self.params.per_cycle:
            for name, seq in self.params.per_cycle.items():
                if len(seq) != self.n_bits:
                    raise ValueError(
                        f"per-cycle schedule '{name}' has length {len(seq)}, expected {self.n_bits}"
                    )


def _quantizer_from_run(run: EncoderRun) -> QuantizerSpec:
    p = run.params
    alpha = p.schedule("alpha")
    if alpha is None:
        alpha = p.get("alpha", 1.0)
    tau_schedule = p.schedule("tau")
    resolver = run.resolver
    if tau_schedule is not None:
        resolver = PerCycleSequence(tau_schedule)
        nu1 = min(tau_schedule)
        nu2 = max(tau_schedule)
    else:
        tau = p.get("tau")
        if tau is not None:
            nu1 = nu2 = tau
        else:
            nu1 = p.get("nu1", 1.0)
            nu2 = p.get("nu2", 1.0)
    return QuantizerSpec(alpha=alpha, nu1=nu1, nu2=nu2, resolver=resolver)


def run_encoder(run: EncoderRun, x: float) -> tuple[BitStream, Trajectory]:
    """Execute one encoding run and return the bitstream and trajectory.

    Deterministic given (run, x, seeds). Raises ValueError for inputs
    outside the scheme's declared interval or for dimension mismatches.
    """
    from . import baselines, gre, polynacci

    p = run.params
    if run.scheme is Scheme.GRE:
        spec = _quantizer_from_run(run)
        noise = run.noise
        eps = p.schedule("epsilon")
        if eps is not None:
            noise = gre.PerCycleNoise(eps)
        return gre.gre_encode(
            x,
            run.n_bits,
            spec,
            noise=noise,
            initial_state=run.initial_state,
            escape_bound=run.escape_bound,
            early_stop=run.early_stop,
        )
    if run.scheme is Scheme.PCM:
        tau = p.schedule("tau")
        if tau is None:
            tau = p.get("tau", 1.0)
        bits, states = baselines.pcm_states(x, run.n_bits, tau)
        return bits, Trajectory(states)
    if run.scheme is Scheme.BETA:
        spec = baselines.BetaSpec(
            beta=p.get("beta"),
            nu1=p.get("nu1", p.get("tau", 1.0)),
            nu2=p.get("nu2", p.get("tau", 1.0)),
            resolver=run.resolver,
        )
        bits, states = baselines.beta_states(x, run.n_bits, spec)
        return bits, Trajectory(states)
    if run.scheme is Scheme.SIGMA_DELTA_1:
        u0 = run.initial_state[0] if run.initial_state is not None else 0.0
        bits, states = baselines.sd1_states(x, run.n_bits, u0)
        return bits, Trajectory(states)
    if run.scheme is Scheme.SIGMA_DELTA_K:
        if run.rule is None:
            raise ValueError("order-k sigma-delta needs an explicit bit rule")
        spec = baselines.SigmaDeltaKSpec(
            k=int(p.get("k", 1)), rule=run.rule, initial=run.initial_state
        )
        bits, states = baselines.sdk_states(x, run.n_bits, spec)
        return bits, Trajectory(states)
    if run.scheme is Scheme.POLYNACCI:
        cfg = polynacci.PolynacciConfig(
            L=int(p.get("L", 2)),
            threshold=p.get("tau", 1.0),
            escape_bound=run.escape_bound,
            rule=run.rule,
        )
        stream, traj, _report = polynacci.polynacci_encode(x, run.n_bits, cfg)
        return stream, traj
    raise ValueError(f"unknown scheme {run.scheme!r}")


def empirical_distortion(
    encode: Callable[[float], BitStream],
    decode: Callable[[BitStream], float],
    samples: Iterable[float],
) -> float:
    """Worst-case reconstruction error max_x |x - decode(encode(x))| over a
    sample grid (a grid approximation of the sup distortion)."""
    xs = list(samples)
    if not xs:
        raise ValueError("empty sample set")
    return max(abs(x - decode(encode(x))) for x in xs)


# ---------------------------------------------------------------------------
# exact-rational reference iterations (test oracles)


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x)  # exact binary value of the double
    return Fraction(x)


def gre_exact(x, n_bits: int, alpha=1, nu=1):
    """Golden-ratio recursion in exact rational arithmetic.

    Returns (bits, states) where states[n] = (u_n, u_{n+1}) as Fractions.
    Deterministic threshold only (nu1 = nu2 = nu).
    """
    u, v = _as_fraction(x), Fraction(0)
    alpha, nu = _as_fraction(alpha), _as_fraction(nu)
    bits, states = [], [(u, v)]
    for _ in range(n_bits):
        b = 1 if u + alpha * v >= nu else 0
        u, v = v, u + v - b
        bits.append(b)
        states.append((u, v))
    return bits, states


def pcm_exact(x, n_bits: int, tau=1):
    """Successive-approximation doubling recursion in exact rationals."""
    u = _as_fraction(x)
    tau = _as_fraction(tau)
    bits, states = [], [u]
    for _ in range(n_bits):
        b = 1 if u >= tau else 0
        u = 2 * (u - b)
        bits.append(b)
        states.append(u)
    return bits, states


def beta_exact(x, n_bits: int, beta, tau):
    """Base-beta successive approximation in exact rationals."""
    u = _as_fraction(x)
    beta, tau = _as_fraction(beta), _as_fraction(tau)
    bits, states = [], [u]
    for _ in range(n_bits):
        b = 1 if u >= tau else 0
        u = beta * (u - b)
        bits.append(b)
        states.append(u)
    return bits, states
