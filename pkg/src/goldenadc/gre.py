"""Golden-ratio encoder core: recursion, invariant rectangle, admissible
parameter region, and robustness margins.

The encoder runs u_{n+2} = u_{n+1} + u_n - b_n + eps_n with the bit chosen
by a two-input threshold quantizer b_n = Q(u_n, u_{n+1}). With u_0 = x and
u_1 = 0, the emitted bits form a base-phi expansion of x, and the N-term
reconstruction error equals phi^(-N) (u_N + phi u_{N+1}). Boundedness of
the state sequence is therefore equivalent to exponential accuracy.

Geometry: the update map is linear with matrix [[0, 1], [1, 1]] minus a
bit-dependent vertical translation. Its eigenvectors

    E1 = (phi, -1) / sqrt(phi + 2)   (eigenvalue -1/phi, contracting)
    E2 = (1,  phi) / sqrt(phi + 2)   (eigenvalue  phi,   expanding)

are orthonormal. For a noise margin mu there is a rectangle R(mu), aligned
with (E1, E2), that the dynamics map into itself with slack mu whenever the
quantizer's gain and threshold band lie in an explicit admissible region.
All rectangle and region formulas below are closed-form in mu.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .framework import DEFAULT_ESCAPE_BOUND, BitStream, Scheme, Trajectory
from .quantizers import QuantizerSpec, counter_uniform, q_alpha

__all__ = [
    "PHI",
    "SQRT_PHI_PLUS_2",
    "MU_MAX",
    "EIGVEC_CONTRACT",
    "EIGVEC_EXPAND",
    "GREState",
    "NoNoise",
    "UniformAdditive",
    "PerCycleNoise",
    "gre_step",
    "gre_encode",
    "InvariantRect",
    "invariant_rect",
    "ParamRegion",
    "param_region",
    "RobustnessMargin",
    "robustness_margin",
    "InvarianceReport",
    "verify_invariance",
    "error_constant",
    "to_eigen",
    "from_eigen",
]

PHI = (1.0 + math.sqrt(5.0)) / 2.0
SQRT_PHI_PLUS_2 = math.sqrt(PHI + 2.0)

#: upper limit for the noise margin mu; above it the two branch rectangles
#: no longer overlap and no flaky band fits
MU_MAX = 1.0 / (2.0 * PHI**2 * SQRT_PHI_PLUS_2)

EIGVEC_CONTRACT = np.array([PHI, -1.0]) / SQRT_PHI_PLUS_2
EIGVEC_EXPAND = np.array([1.0, PHI]) / SQRT_PHI_PLUS_2


def to_eigen(points):
    """Project (u, v) points onto the orthonormal eigenbasis; returns (s, t)."""
    pts = np.asarray(points, dtype=float)
    s = pts[..., 0] * EIGVEC_CONTRACT[0] + pts[..., 1] * EIGVEC_CONTRACT[1]
    t = pts[..., 0] * EIGVEC_EXPAND[0] + pts[..., 1] * EIGVEC_EXPAND[1]
    return s, t


def from_eigen(s, t):
    """Inverse of :func:`to_eigen`; returns an (..., 2) array of (u, v)."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    return np.stack(
        [
            s * EIGVEC_CONTRACT[0] + t * EIGVEC_EXPAND[0],
            s * EIGVEC_CONTRACT[1] + t * EIGVEC_EXPAND[1],
        ],
        axis=-1,
    )


# ---------------------------------------------------------------------------
# noise models


class NoNoise:
    amplitude = 0.0

    def eps_at(self, cycle: int) -> float:
        return 0.0

    def describe(self):
        return {"kind": "none"}


@dataclass(frozen=True)
class UniformAdditive:
    """I.i.d. additive perturbation, uniform in (-amplitude, amplitude),
    drawn statelessly from (seed, cycle)."""

    amplitude: float
    seed: int = 0

    _STREAM_TAG = 0x517CC1B727220A95  # decorrelates from threshold draws

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError("amplitude must be nonnegative")

    def eps_at(self, cycle: int) -> float:
        u = counter_uniform(self.seed ^ self._STREAM_TAG, cycle)
        return self.amplitude * (2.0 * u - 1.0)

    def describe(self):
        return {"kind": "uniform", "amplitude": self.amplitude, "seed": self.seed}


class PerCycleNoise:
    """Explicit perturbation schedule, one value per cycle."""

    def __init__(self, eps: Sequence[float]):
        self.eps = tuple(float(e) for e in eps)
        self.amplitude = max((abs(e) for e in self.eps), default=0.0)

    def eps_at(self, cycle: int) -> float:
        if cycle >= len(self.eps):
            raise ValueError(f"noise schedule has {len(self.eps)} entries, cycle {cycle} requested")
        return self.eps[cycle]

    def describe(self):
        return {"kind": "per-cycle", "amplitude": self.amplitude}


# ---------------------------------------------------------------------------
# the recursion


class GREState(NamedTuple):
    u: float
    v: float


def gre_step(state, spec: QuantizerSpec, noise: float = 0.0, cycle: int = 0):
    """One cycle: emit b = Q(u, v), move to (v, u + v - b + noise)."""
    u, v = state
    b = q_alpha(u, v, spec, cycle)
    return b, GREState(v, u + v - b + noise)


def gre_encode(
    x: float,
    n_bits: int,
    spec: QuantizerSpec | None = None,
    noise=None,
    initial_state: Optional[Sequence[float]] = None,
    escape_bound: float = DEFAULT_ESCAPE_BOUND,
    early_stop: bool = False,
) -> tuple[BitStream, Trajectory]:
    """Encode x with the golden-ratio recursion.

    Accepts x in [0, 1 + phi); inputs above 1 are allowed but flagged in the
    stream metadata, since the noise-margin guarantees are stated for
    starting states inside R(mu), which covers [0, 1] x {0}.

    Returns the N-bit stream and the trajectory of states (u_n, u_{n+1})
    for n = 0..N. If ``early_stop`` is set, state recording stops once
    |u| exceeds ``escape_bound`` (the bit iteration continues so the stream
    always has n_bits bits).
    """
    if spec is None:
        spec = QuantizerSpec.exact()
    if noise is None:
        noise = NoNoise()
    if n_bits < 1:
        raise ValueError("n_bits must be at least 1")
    if not (0.0 <= x < 1.0 + PHI):
        raise ValueError(f"x={x} outside [0, 1+phi)")
    if isinstance(spec.alpha, tuple) and len(spec.alpha) < n_bits:
        raise ValueError("per-cycle gain schedule shorter than n_bits")

    if initial_state is None:
        u, v = float(x), 0.0
    else:
        if len(initial_state) != 2:
            raise ValueError("initial state must have dimension 2")
        u, v = float(initial_state[0]), float(initial_state[1])

    bits = np.empty(n_bits, dtype=np.int8)
    states = [(u, v)]
    escaped = False
    escape_index = None
    recording = True
    for n in range(n_bits):
        b = q_alpha(u, v, spec, n)
        u, v = v, u + v - b + noise.eps_at(n)
        bits[n] = b
        if not escaped and (abs(u) > escape_bound or abs(v) > escape_bound):
            escaped = True
            escape_index = n + 1
            if early_stop:
                recording = False
        if recording:
            states.append((u, v))

    params = {
        "x": x,
        **spec.describe(),
        "noise": noise.describe(),
        "escape_bound": escape_bound,
    }
    if x > 1.0:
        params["outside_unit_interval"] = True
    stream = BitStream(bits, Scheme.GRE, params)
    traj = Trajectory(np.array(states), escaped=escaped, escape_index=escape_index)
    return stream, traj


# ---------------------------------------------------------------------------
# invariant rectangle


def _geometry(mu: float) -> dict:
    """Closed-form extents of the two branch rectangles for margin mu."""
    s = SQRT_PHI_PLUS_2
    return {
        "r1": PHI / s + PHI**2 * mu,
        "l1": PHI**2 / s + PHI**2 * mu,
        "r2": 2.0 * PHI / s + PHI**2 * mu,
        "l2": 1.0 / s + PHI**2 * mu,
        "h1": PHI / s - 2.0 * PHI * mu,
        "h2": PHI / s - 2.0 * PHI * mu,
        "d1": PHI * mu,
        "d2": 1.0 / s + PHI * mu,
    }


@dataclass(frozen=True)
class InvariantRect:
    """Rectangle R(mu) in eigencoordinates: s along the contracting axis in
    [s_min, s_max], t along the expanding axis in [t_min, t_max]."""

    mu: float
    s_min: float
    s_max: float
    t_min: float
    t_max: float

    def corners(self) -> np.ndarray:
        """Corner points in (u, v) coordinates, counterclockwise from the
        bottom-left corner in eigencoordinates."""
        ss = [self.s_min, self.s_min, self.s_max, self.s_max]
        tt = [self.t_min, self.t_max, self.t_max, self.t_min]
        return from_eigen(ss, tt)

    def contains(self, points, tol: float = 1e-9):
        s, t = to_eigen(points)
        return (
            (s >= self.s_min - tol)
            & (s <= self.s_max + tol)
            & (t >= self.t_min - tol)
            & (t <= self.t_max + tol)
        )

    def distance(self, points) -> np.ndarray:
        """Euclidean distance from each point to the rectangle (0 inside).

        The eigenbasis is orthonormal, so distances computed in (s, t)
        coordinates equal distances in (u, v).
        """
        s, t = to_eigen(points)
        ds = np.maximum(np.maximum(self.s_min - s, s - self.s_max), 0.0)
        dt = np.maximum(np.maximum(self.t_min - t, t - self.t_max), 0.0)
        return np.hypot(ds, dt)

    def to_json_obj(self) -> dict:
        return {
            "mu": self.mu,
            "s_min": self.s_min,
            "s_max": self.s_max,
            "t_min": self.t_min,
            "t_max": self.t_max,
            "corners_uv": self.corners().tolist(),
        }


def invariant_rect(mu: float) -> InvariantRect:
    """Positively invariant rectangle R(mu) for the admissible dynamics.

    Valid for 0 <= mu < MU_MAX (about 0.1004); above that the branch
    rectangles stop overlapping and no flaky band can be tolerated.
    """
    if not (0.0 <= mu < MU_MAX):
        raise ValueError(f"mu={mu} outside [0, {MU_MAX:.6f})")
    g = _geometry(mu)
    return InvariantRect(
        mu=mu,
        s_min=-g["l2"],
        s_max=g["r1"],
        t_min=g["d1"],
        t_max=g["d2"] + g["h2"],
    )


def error_constant(mu: float) -> float:
    """max(u + phi v) over R(mu) plus the mu-ball allowance; the tail-error
    bound for stable runs is error_constant(mu) * phi^(-N).

    At mu = 0 this equals 1 + phi.
    """
    rect = invariant_rect(mu)
    return (rect.t_max + mu) * SQRT_PHI_PLUS_2


def min_robust_input(mu: float) -> float:
    """Smallest input whose initial state (x, 0) lies inside R(mu).

    The rectangle's lower edge sits at phi * mu along the expanding axis, so
    the noise-margin guarantees start at x = phi * mu * sqrt(phi + 2)
    (zero when mu = 0). Inputs below this can diverge under adversarial
    noise: a slightly negative expanding component is amplified by phi each
    step while the quantizer keeps emitting zeros.
    """
    if not (0.0 <= mu < MU_MAX):
        raise ValueError(f"mu={mu} outside [0, {MU_MAX:.6f})")
    return PHI * mu * SQRT_PHI_PLUS_2


# ---------------------------------------------------------------------------
# admissible parameter region


@dataclass(frozen=True)
class ParamRegion:
    """Admissible (alpha, nu) region for noise margin mu.

    For alpha in [alpha_min, alpha_max], every band [nu1, nu2] between
    nu_min(alpha) and nu_max(alpha) keeps R(mu) invariant with slack mu.
    Both bounds are continuous piecewise-linear functions of alpha, with a
    breakpoint at alpha = phi, and are nondecreasing in alpha.
    """

    mu: float
    alpha_min: float
    alpha_max: float

    def _coeffs(self):
        mu, s = self.mu, SQRT_PHI_PLUS_2
        lo_const = 1.0 + mu * PHI * s
        # nu_min upper branch: k1 * alpha + m1
        k1 = (PHI + 1.0) / (PHI + 2.0) + 2.0 * mu * PHI**2 / s
        m1 = (1.0 - PHI) / (PHI + 2.0) - mu * PHI**2 / s
        # nu_max upper branch: k2 * alpha + m2
        k2 = 1.0 / (PHI + 2.0) - 2.0 * mu * PHI**2 / s
        m2 = (1.0 + 2.0 * PHI) / (PHI + 2.0) + mu * PHI**2 / s
        return lo_const, k1, m1, k2, m2

    def nu_min(self, alpha):
        alpha = np.asarray(alpha, dtype=float)
        lo_const, k1, m1, _, _ = self._coeffs()
        out = np.where(alpha <= PHI, lo_const, k1 * alpha + m1)
        return float(out) if out.ndim == 0 else out

    def nu_max(self, alpha):
        alpha = np.asarray(alpha, dtype=float)
        lo_const, _, _, k2, m2 = self._coeffs()
        offset = lo_const - 1.0  # mu * phi * sqrt(phi+2)
        out = np.where(alpha <= PHI, alpha - offset, k2 * alpha + m2)
        return float(out) if out.ndim == 0 else out

    def nu_min_inv(self, y: float) -> float:
        """Rightmost alpha with nu_min(alpha) = y (nu_min is constant below
        the breakpoint, then strictly increasing)."""
        lo_const, k1, m1, _, _ = self._coeffs()
        if y < lo_const - 1e-15:
            raise ValueError(f"nu_min never reaches {y}")
        if y <= lo_const:
            return PHI
        return (y - m1) / k1

    def nu_max_inv(self, y: float) -> float:
        lo_const, _, _, k2, m2 = self._coeffs()
        offset = lo_const - 1.0
        if y <= PHI - offset:
            return y + offset
        return (y - m2) / k2

    def admissible(self, alpha: float, nu1: float, nu2: float, tol: float = 0.0) -> bool:
        if not (self.alpha_min - tol <= alpha <= self.alpha_max + tol):
            return False
        return (
            self.nu_min(alpha) - tol <= nu1
            and nu1 <= nu2
            and nu2 <= self.nu_max(alpha) + tol
        )

    def to_json_obj(self, alpha=None, n_alpha: int = 101) -> dict:
        obj = {"mu": self.mu, "alpha_min": self.alpha_min, "alpha_max": self.alpha_max}
        if alpha is not None:
            obj["alpha"] = alpha
            obj["nu_min"] = self.nu_min(alpha)
            obj["nu_max"] = self.nu_max(alpha)
        else:
            grid = np.linspace(self.alpha_min, self.alpha_max, n_alpha)
            obj["table"] = [
                {"alpha": float(a), "nu_min": float(self.nu_min(a)), "nu_max": float(self.nu_max(a))}
                for a in grid
            ]
        return obj


def param_region(mu: float) -> ParamRegion:
    """Admissible quantizer-parameter region for noise margin mu."""
    if not (0.0 <= mu < MU_MAX):
        raise ValueError(f"mu={mu} outside [0, {MU_MAX:.6f})")
    s = SQRT_PHI_PLUS_2
    alpha_min = 1.0 + 2.0 * mu * PHI * s
    alpha_max = 3.0 - 10.0 * mu * PHI * s / (1.0 + 4.0 * mu * s)
    return ParamRegion(mu=mu, alpha_min=alpha_min, alpha_max=alpha_max)


@dataclass(frozen=True)
class RobustnessMargin:
    """Constructive gain margin: any gain within eta of the nominal one,
    combined with any threshold selection inside [nu1, nu2], keeps states in
    R(mu) with slack mu."""

    alpha: float
    mu: float
    eta: float
    nu1: float
    nu2: float
    alpha_low: float
    alpha_high: float


def robustness_margin(
    alpha: float,
    mu: float,
    alpha_low: float | None = None,
    alpha_high: float | None = None,
) -> RobustnessMargin:
    """Compute a gain jitter margin eta and a threshold band [nu1, nu2] that
    tolerate per-cycle gain drift |alpha' - alpha| < eta, arbitrary in-band
    threshold selections, and additive errors up to mu.

    The construction brackets alpha between interior gains alpha_low and
    alpha_high whose band functions still overlap: nu1 = nu_min(alpha_high)
    and nu2 = nu_max(alpha_low). Optional explicit interior picks override
    the midpoint defaults. Requires alpha strictly inside the admissible
    open interval.
    """
    region = param_region(mu)
    if not (region.alpha_min < alpha < region.alpha_max):
        raise ValueError(
            f"alpha={alpha} not strictly inside ({region.alpha_min}, {region.alpha_max})"
        )
    low_limit = region.nu_max_inv(region.nu_min(alpha))
    if alpha_low is None:
        alpha_low = 0.5 * (low_limit + alpha)
    if not (low_limit < alpha_low < alpha):
        raise ValueError(f"alpha_low must lie in ({low_limit}, {alpha})")
    high_limit = region.nu_min_inv(region.nu_max(alpha_low))
    if alpha_high is None:
        alpha_high = 0.5 * (alpha + high_limit)
    if not (alpha < alpha_high < high_limit):
        raise ValueError(f"alpha_high must lie in ({alpha}, {high_limit})")
    eta = min(alpha - alpha_low, alpha_high - alpha)
    return RobustnessMargin(
        alpha=alpha,
        mu=mu,
        eta=eta,
        nu1=region.nu_min(alpha_high),
        nu2=region.nu_max(alpha_low),
        alpha_low=alpha_low,
        alpha_high=alpha_high,
    )


# ---------------------------------------------------------------------------
# invariance verification


@dataclass
class InvarianceReport:
    mu: float
    grid_density: int
    admissible: bool
    n_points: int
    n_images: int
    violation_count: int
    max_distance: float
    violations: np.ndarray  # rows (u, v, bit, image_u, image_v, distance)

    @property
    def ok(self) -> bool:
        return self.violation_count == 0

    def to_json_obj(self) -> dict:
        return {
            "mu": self.mu,
            "grid_density": self.grid_density,
            "admissible": self.admissible,
            "n_points": self.n_points,
            "n_images": self.n_images,
            "violation_count": self.violation_count,
            "max_distance": self.max_distance,
            "violations": [
                {
                    "u": row[0],
                    "v": row[1],
                    "bit": int(row[2]),
                    "image_u": row[3],
                    "image_v": row[4],
                    "distance": row[5],
                }
                for row in self.violations.tolist()
            ],
        }


def verify_invariance(
    rect: InvariantRect,
    spec: QuantizerSpec,
    mu: float,
    grid_density: int = 1000,
    tol: float = 1e-9,
    max_reported: int = 200,
) -> InvarianceReport:
    """Grid check that the one-step image of ``rect`` stays within distance
    mu of it.

    Every grid point is mapped through each bit value the quantizer can
    produce there: the forced branch outside the flaky band, both branches
    inside it (this quantifies over all resolver policies). Points whose
    image lands farther than mu (plus ``tol``) from the rectangle are
    reported as violations; violations are data, not errors.
    """
    if isinstance(spec.alpha, tuple):
        raise TypeError("invariance check needs a fixed scalar gain")
    alpha, nu1, nu2 = spec.alpha, spec.nu1, spec.nu2
    region = param_region(mu)
    admissible = region.admissible(alpha, nu1, nu2, tol=1e-12)

    s = np.linspace(rect.s_min, rect.s_max, grid_density)
    t = np.linspace(rect.t_min, rect.t_max, grid_density)
    S, T = np.meshgrid(s, t, indexing="ij")
    u = S.ravel() * EIGVEC_CONTRACT[0] + T.ravel() * EIGVEC_EXPAND[0]
    v = S.ravel() * EIGVEC_CONTRACT[1] + T.ravel() * EIGVEC_EXPAND[1]
    q = u + alpha * v

    rows = []
    n_images = 0
    worst = 0.0
    limit = mu + tol
    for bit in (0, 1):
        allowed = (q < nu2) if bit == 0 else (q >= nu1)
        if not allowed.any():
            continue
        iu = v[allowed]
        iv = u[allowed] + v[allowed] - bit
        dist = rect.distance(np.stack([iu, iv], axis=-1))
        n_images += iu.size
        if dist.size:
            worst = max(worst, float(dist.max()))
        bad = dist > limit
        if bad.any():
            uu = u[allowed]
            vv = v[allowed]
            rows.append(
                np.stack(
                    [uu[bad], vv[bad], np.full(bad.sum(), bit, dtype=float), iu[bad], iv[bad], dist[bad]],
                    axis=-1,
                )
            )

    if rows:
        all_rows = np.concatenate(rows, axis=0)
        order = np.argsort(-all_rows[:, 5])
        all_rows = all_rows[order]
        count = all_rows.shape[0]
        reported = all_rows[:max_reported]
    else:
        count = 0
        reported = np.empty((0, 6))
    return InvarianceReport(
        mu=mu,
        grid_density=grid_density,
        admissible=admissible,
        n_points=grid_density * grid_density,
        n_images=n_images,
        violation_count=count,
        max_distance=worst,
        violations=reported,
    )
