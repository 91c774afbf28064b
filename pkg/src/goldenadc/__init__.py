"""Golden-ratio and beta-expansion A/D encoder workbench.

A numpy library for simulating one-bit algorithmic encoders whose accuracy
survives imprecise components: the golden-ratio encoder with its invariant
rectangle geometry and robustness margins, baseline PCM / beta / sigma-delta
converters, exact integer requantization, higher-order recursion encoders,
and seeded Monte Carlo experiments over all of them.
"""

from .baselines import (
    BetaSpec,
    SigmaDeltaKSpec,
    beta_encode,
    companion_matrix,
    pcm_encode,
    sd1_decode,
    sd1_encode,
    sdk_encode,
    sdk_step,
)
from .decoders import (
    FixedPointValue,
    bias_correction,
    decode_bias_corrected,
    decode_partial_sum,
    phi_power_mantissas,
    requantize,
    tail_error,
)
from .framework import (
    BitStream,
    EncoderRun,
    ParamVector,
    Scheme,
    Trajectory,
    beta_exact,
    empirical_distortion,
    gre_exact,
    pcm_exact,
    run_encoder,
)
from .gre import (
    MU_MAX,
    PHI,
    InvariantRect,
    NoNoise,
    ParamRegion,
    PerCycleNoise,
    RobustnessMargin,
    UniformAdditive,
    error_constant,
    gre_encode,
    gre_step,
    invariant_rect,
    param_region,
    robustness_margin,
    verify_invariance,
)
from .polynacci import (
    PolynacciConfig,
    StabilityReport,
    polynacci_base,
    polynacci_encode,
    secondary_root_moduli,
)
from .quantizers import (
    AlwaysOne,
    AlwaysZero,
    PerCycleSequence,
    QuantizerSpec,
    RandomUniformThreshold,
    counter_uniform,
    flaky_q,
    q_alpha,
    q_tau,
)
from .workbench import (
    ExperimentTable,
    bias_check,
    escape_fraction_experiment,
    noise_variance_check,
    rmse_vs_n_experiment,
    robustness_sweep,
    simulate_gre_trials,
)

__version__ = "0.1.0"
