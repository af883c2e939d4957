"""Link-level simulator for surface-assisted backscatter over OFDM."""

__version__ = "0.1.0"

from .analysis import (
    BerPoint,
    baseline_ber,
    baseline_qfunc_arg,
    ber_closed_form,
    ber_given_bit0,
    ber_given_bit1,
    bri_im,
    bri_ook,
    data_rate,
    im_bit_count,
    q_function,
    signal_power,
)
from .channel import (
    CompositeGains,
    GainDistribution,
    RisLinkConfig,
    add_awgn,
    apply_flat_channel,
    build_composite,
    composite_gain_aligned,
    coverage_ratio,
    sample_reflector_gains,
)
from .montecarlo import (
    ExperimentConfig,
    SweepPoint,
    SweepResult,
    TrialResult,
    ber_sweep,
    bri_table,
    coverage_sweep,
    run_trial,
    trial_rng,
    wilson_interval,
)
from .ofdm import (
    ComplexSignal,
    Domain,
    OfdmParams,
    SymbolVector,
    dft,
    generate_symbols,
    idft,
    modulation_matrix,
    ofdm_demodulate,
    ofdm_modulate,
)
from .reader import (
    DetectionResult,
    DetectorConfig,
    DetectorMode,
    detect_im,
    detect_ook_exact_ml,
    detect_ook_threshold,
    optimal_threshold,
)
from .tag import (
    Modulation,
    OutOfCodebookError,
    SubcarrierMask,
    TagMessage,
    backscatter,
    backscatter_matrix,
    im_decode,
    im_encode,
    ook_mask,
)

__all__ = [
    "BerPoint",
    "ComplexSignal",
    "CompositeGains",
    "DetectionResult",
    "DetectorConfig",
    "DetectorMode",
    "Domain",
    "ExperimentConfig",
    "GainDistribution",
    "Modulation",
    "OfdmParams",
    "OutOfCodebookError",
    "RisLinkConfig",
    "SubcarrierMask",
    "SweepPoint",
    "SweepResult",
    "SymbolVector",
    "TagMessage",
    "TrialResult",
    "add_awgn",
    "apply_flat_channel",
    "backscatter",
    "backscatter_matrix",
    "baseline_ber",
    "baseline_qfunc_arg",
    "ber_closed_form",
    "ber_given_bit0",
    "ber_given_bit1",
    "ber_sweep",
    "bri_im",
    "bri_ook",
    "bri_table",
    "build_composite",
    "composite_gain_aligned",
    "coverage_ratio",
    "coverage_sweep",
    "data_rate",
    "detect_im",
    "detect_ook_exact_ml",
    "detect_ook_threshold",
    "dft",
    "generate_symbols",
    "idft",
    "im_bit_count",
    "im_decode",
    "im_encode",
    "modulation_matrix",
    "ofdm_demodulate",
    "ofdm_modulate",
    "ook_mask",
    "optimal_threshold",
    "q_function",
    "run_trial",
    "sample_reflector_gains",
    "signal_power",
    "trial_rng",
    "wilson_interval",
]
