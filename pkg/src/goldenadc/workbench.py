"""Seeded Monte Carlo experiments over the golden-ratio encoder.

Each experiment derives one RNG stream per trial from (seed, trial index),
so results are byte-identical for a given (seed, config) regardless of how
trials are batched or parallelized. Tables carry the trial count and seed
in every row.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .decoders import bias_correction
from .gre import PHI, error_constant, invariant_rect, min_robust_input, param_region
from .quantizers import QuantizerSpec

__all__ = [
    "ExperimentTable",
    "trial_rng",
    "simulate_gre_trials",
    "escape_fraction_experiment",
    "rmse_vs_n_experiment",
    "NoiseVarianceResult",
    "noise_variance_check",
    "BiasCheckResult",
    "bias_check",
    "robustness_sweep",
]


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.12g}"


@dataclass
class ExperimentTable:
    """Tagged result rows with a fixed column schema and run metadata."""

    name: str
    columns: list[str]
    rows: list[tuple] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add(self, *values):
        if len(values) != len(self.columns):
            raise ValueError(f"expected {len(self.columns)} values, got {len(values)}")
        self.rows.append(tuple(values))

    def column(self, name: str) -> np.ndarray:
        idx = self.columns.index(name)
        return np.array([row[idx] for row in self.rows], dtype=float)

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_fmt(v) for v in row])
        return buf.getvalue()

    def to_json_obj(self) -> dict:
        return {
            "name": self.name,
            "meta": self.meta,
            "columns": self.columns,
            "rows": [list(map(float, row)) for row in self.rows],
        }

    def write(self, path: str):
        if str(path).endswith(".json"):
            with open(path, "w") as fh:
                json.dump(self.to_json_obj(), fh, indent=2)
                fh.write("\n")
        else:
            with open(path, "w") as fh:
                fh.write(self.to_csv_text())


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Independent generator for one trial, derived from (seed, index)."""
    return np.random.default_rng(np.random.SeedSequence((seed, index)))


def _per_trial_draws(seed: int, trials: int, n_cycles: int, specs: Sequence[tuple]):
    """Fill one array per requested draw kind, row i coming from trial i's
    own stream. ``specs`` entries are (low, high, per_cycle: bool); the
    per-trial draw order is fixed, so adding workers cannot reorder it."""
    out = [np.empty((trials, n_cycles)) if per_cycle else np.empty(trials) for (_, _, per_cycle) in specs]
    for i in range(trials):
        rng = trial_rng(seed, i)
        for arr, (low, high, per_cycle) in zip(out, specs):
            if per_cycle:
                arr[i] = rng.uniform(low, high, n_cycles)
            else:
                arr[i] = rng.uniform(low, high)
    return out


def simulate_gre_trials(
    x: np.ndarray,
    n_cycles: int,
    alphas,
    taus,
    eps=None,
    record_scalars: bool = False,
):
    """Vectorized golden-ratio recursion over a batch of trials.

    ``alphas`` and ``taus`` are scalars or (trials, n_cycles) arrays; the
    bit at cycle n is u + alpha*v >= tau, which covers both the exact and
    the randomly resolved flaky quantizer. Returns a dict with bits,
    final state pair (u_N, u_{N+1}), max |u| over the run, and optionally
    the full scalar series (trials, n_cycles + 2).
    """
    x = np.asarray(x, dtype=float)
    trials = x.size
    u = x.copy()
    v = np.zeros(trials)
    bits = np.empty((trials, n_cycles), dtype=np.int8)
    max_abs = np.abs(u).copy()
    scalars = None
    if record_scalars:
        scalars = np.empty((trials, n_cycles + 2))
        scalars[:, 0] = u
        scalars[:, 1] = v

    def _col(arr, n):
        if arr is None:
            return 0.0
        if np.isscalar(arr):
            return arr
        return arr[:, n]

    for n in range(n_cycles):
        a = _col(alphas, n)
        t = _col(taus, n)
        b = (u + a * v >= t).astype(np.int8)
        w = u + v - b + _col(eps, n)
        u, v = v, w
        bits[:, n] = b
        np.maximum(max_abs, np.abs(w), out=max_abs)
        if record_scalars:
            scalars[:, n + 2] = w
    return {"bits": bits, "u_n": u, "u_next": v, "max_abs": max_abs, "scalars": scalars}


def _decode_matrix(bits: np.ndarray) -> np.ndarray:
    """Partial sums of b_n phi^(-n) for every prefix length; column N-1
    holds the N-bit decode."""
    n = bits.shape[1]
    powers = PHI ** -np.arange(n, dtype=float)
    return np.cumsum(bits * powers, axis=1)


# ---------------------------------------------------------------------------
# experiments


def escape_fraction_experiment(
    delta: float, n_max: int = 60, trials: int = 10000, seed: int = 0
) -> ExperimentTable:
    """Fraction of uniform inputs whose state leaves [-1, 1] by step n when
    the unit-gain threshold wanders per cycle in (1 - delta, 1 + delta).

    One row per n = 1..n_max with the fraction of trials where |u_n| > 1.
    delta = 0 reproduces the exact quantizer and gives identically zero.
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    if trials < 1:
        raise ValueError("trials must be positive")
    xs, taus = _per_trial_draws(
        seed, trials, n_max, [(0.0, 1.0, False), (1.0 - delta, 1.0 + delta, True)]
    )
    sim = simulate_gre_trials(xs, n_max, 1.0, taus, record_scalars=True)
    table = ExperimentTable(
        name="escape_fraction",
        columns=["n", "escape_fraction", "trials", "seed"],
        meta={"delta": delta, "n_max": n_max, "trials": trials, "seed": seed},
    )
    exceed = np.abs(sim["scalars"]) > 1.0
    for n in range(1, n_max + 1):
        table.add(n, float(exceed[:, n].mean()), trials, seed)
    return table


def rmse_vs_n_experiment(
    spec: QuantizerSpec,
    noise_amp: float,
    trials: int = 10000,
    seed: int = 0,
    n_max: int = 60,
) -> ExperimentTable:
    """Root-mean-square reconstruction error per bit count, with per-cycle
    random in-band thresholds and i.i.d. uniform additive noise.

    With nonzero noise the curve decays exponentially and then saturates
    near sqrt(phi/3) * noise_amp.
    """
    if isinstance(spec.alpha, tuple):
        raise TypeError("experiment needs a fixed scalar gain")
    region = param_region(noise_amp) if noise_amp < 0.1 else None
    if region is not None and not region.admissible(spec.alpha, spec.nu1, spec.nu2):
        raise ValueError("quantizer parameters not admissible for this noise level")
    xs, taus, eps = _per_trial_draws(
        seed,
        trials,
        n_max,
        [(0.0, 1.0, False), (spec.nu1, spec.nu2, True), (-noise_amp, noise_amp, True)],
    )
    sim = simulate_gre_trials(xs, n_max, spec.alpha, taus, eps)
    decode = _decode_matrix(sim["bits"])
    err = xs[:, None] - decode
    rmse = np.sqrt((err**2).mean(axis=0))
    table = ExperimentTable(
        name="rmse_vs_n",
        columns=["n", "rmse", "trials", "seed"],
        meta={
            "alpha": spec.alpha,
            "nu1": spec.nu1,
            "nu2": spec.nu2,
            "noise_amp": noise_amp,
            "trials": trials,
            "seed": seed,
        },
    )
    for n in range(1, n_max + 1):
        table.add(n, float(rmse[n - 1]), trials, seed)
    return table


@dataclass(frozen=True)
class NoiseVarianceResult:
    n_bits: int
    sigma: float
    predicted: float
    empirical_noise_sum: float
    empirical_end_to_end: float
    trials: int
    seed: int

    @property
    def ratio_noise_sum(self) -> float:
        return self.empirical_noise_sum / self.predicted

    @property
    def ratio_end_to_end(self) -> float:
        return self.empirical_end_to_end / self.predicted

    def to_table(self) -> "ExperimentTable":
        t = ExperimentTable(
            name="noise_variance",
            columns=["quantity", "value", "trials", "seed"],
            meta={"n_bits": self.n_bits, "sigma": self.sigma},
        )
        rows = [
            ("predicted", self.predicted),
            ("empirical_noise_sum", self.empirical_noise_sum),
            ("empirical_end_to_end", self.empirical_end_to_end),
            ("ratio_noise_sum", self.ratio_noise_sum),
            ("ratio_end_to_end", self.ratio_end_to_end),
        ]
        for i, (_, v) in enumerate(rows):
            t.add(i, v, self.trials, self.seed)
        t.meta["quantities"] = [name for name, _ in rows]
        return t


def noise_variance_check(
    sigma: float, n_bits: int = 40, trials: int = 100000, seed: int = 0
) -> NoiseVarianceResult:
    """Compare the predicted accumulated-noise variance
    sigma^2 (1 - phi^(-2N)) / (1 - phi^(-2)) against Monte Carlo.

    Noise is uniform with standard deviation sigma (amplitude sigma*sqrt(3))
    injected into a stable flaky encoding with gain 1.5 and band [1.2, 1.3].
    Inputs are drawn uniformly over the part of [0, 1] whose initial state
    lies inside the invariant rectangle, so every run is provably stable.
    Empirical variances are reported both for the weighted noise sum alone
    and for the end-to-end reconstruction error.
    """
    amp = sigma * math.sqrt(3.0)
    x_lo = min_robust_input(amp)
    xs, taus, eps = _per_trial_draws(
        seed, trials, n_bits, [(x_lo, 1.0, False), (1.2, 1.3, True), (-amp, amp, True)]
    )
    sim = simulate_gre_trials(xs, n_bits, 1.5, taus, eps)
    powers = PHI ** -np.arange(n_bits, dtype=float)
    noise_sum = eps @ powers
    decode = sim["bits"] @ powers
    end_to_end = xs - decode
    predicted = (1.0 - PHI ** (-2 * n_bits)) / (1.0 - PHI**-2) * sigma**2
    return NoiseVarianceResult(
        n_bits=n_bits,
        sigma=sigma,
        predicted=predicted,
        empirical_noise_sum=float(noise_sum.var()),
        empirical_end_to_end=float(end_to_end.var()),
        trials=trials,
        seed=seed,
    )


@dataclass(frozen=True)
class BiasCheckResult:
    n_bits: int
    mean_error: float
    expected_bias: float
    standard_error: float
    min_error: float
    trials: int
    seed: int

    def to_table(self) -> "ExperimentTable":
        t = ExperimentTable(
            name="bias_check",
            columns=["quantity", "value", "trials", "seed"],
            meta={"n_bits": self.n_bits},
        )
        rows = [
            ("mean_error", self.mean_error),
            ("expected_bias", self.expected_bias),
            ("standard_error", self.standard_error),
            ("min_error", self.min_error),
        ]
        for i, (_, v) in enumerate(rows):
            t.add(i, v, self.trials, self.seed)
        t.meta["quantities"] = [name for name, _ in rows]
        return t


def bias_check(n_bits: int, trials: int = 100000, seed: int = 0) -> BiasCheckResult:
    """Sample mean of the N-bit reconstruction error under exact unit-gain
    encoding of uniform inputs, against the closed-form bias phi^(-N+2)/2."""
    (xs,) = _per_trial_draws(seed, trials, n_bits, [(0.0, 1.0, False)])
    sim = simulate_gre_trials(xs, n_bits, 1.0, 1.0)
    powers = PHI ** -np.arange(n_bits, dtype=float)
    err = xs - sim["bits"] @ powers
    return BiasCheckResult(
        n_bits=n_bits,
        mean_error=float(err.mean()),
        expected_bias=bias_correction(n_bits),
        standard_error=float(err.std(ddof=1) / math.sqrt(trials)),
        min_error=float(err.min()),
        trials=trials,
        seed=seed,
    )


def robustness_sweep(
    mu: float,
    alpha_grid: Sequence[float],
    nu_grid: Sequence[float],
    trials: int = 200,
    seed: int = 0,
    n_bits: int = 48,
    escape_bound: float = 100.0,
) -> ExperimentTable:
    """Classify each grid cell (alpha, nu1 <= nu2) as inside or outside the
    admissible region and measure worst-case behavior empirically.

    Each cell runs ``trials`` encodings per adversarial resolver (all-zero
    and all-one in-band selections, realized as band-edge thresholds) with
    additive noise up to mu, recording escapes, the maximum state magnitude,
    and the maximum decode error at n_bits. Inputs are uniform over the part
    of [0, 1] whose initial state lies inside R(mu), the domain on which the
    inside-region guarantee holds.
    """
    region = param_region(mu)
    powers = PHI ** -np.arange(n_bits, dtype=float)
    xs, eps = _per_trial_draws(
        seed, trials, n_bits, [(min_robust_input(mu), 1.0, False), (-mu, mu, True)]
    )
    if mu == 0:
        eps = None
    table = ExperimentTable(
        name="robustness_sweep",
        columns=[
            "alpha",
            "nu1",
            "nu2",
            "inside_region",
            "escapes",
            "max_abs_state",
            "max_decode_error",
            "trials",
            "seed",
        ],
        meta={"mu": mu, "n_bits": n_bits, "escape_bound": escape_bound},
    )
    for alpha in alpha_grid:
        for i, nu1 in enumerate(nu_grid):
            for nu2 in list(nu_grid)[i:]:
                inside = region.admissible(alpha, nu1, nu2)
                escapes = 0
                max_abs = 0.0
                max_err = 0.0
                # worst-case resolvers: always-0 is threshold nu2, always-1 is nu1
                for tau in (nu2, nu1):
                    sim = simulate_gre_trials(xs, n_bits, alpha, tau, eps)
                    capped = np.minimum(sim["max_abs"], 1e12)
                    escapes += int((capped > escape_bound).sum())
                    max_abs = max(max_abs, float(capped.max()))
                    err = np.abs(xs - sim["bits"] @ powers)
                    max_err = max(max_err, float(err.max()))
                table.add(alpha, nu1, nu2, int(inside), escapes, max_abs, max_err, trials, seed)
    return table
