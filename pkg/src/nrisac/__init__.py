"""Link-level 5G NR V2I simulator with radar-assisted beam tracking.

The base station reuses its OFDM downlink as a radar waveform: echoes are
turned into range/velocity/angle measurements, an extended Kalman filter
tracks the vehicle and predicts the beams, and the frame ledger quantifies
how many reference-signal resource elements the sensing loop saves over
conventional codebook-based beam management.
"""

from .channel import LinkSample, SnrSpec, path_gains_from_scene, synthesize_echo, transmit_link
from .config import ConfigError, SimConfig, build_sim_config, default_config_dict, load_config
from .frame import (
    FrameConfig,
    ReLedger,
    ThroughputParams,
    build_ledger,
    overhead_fraction,
    overhead_reduction,
    re_positions,
    throughput,
)
from .radar import (
    Measurement,
    MusicResult,
    RangeDopplerMap,
    assemble_measurement,
    bins_to_range_velocity,
    combine_maps,
    detect_peaks,
    estimate_beta,
    matched_division,
    music_doa,
    range_doppler_map,
)
from .scenario import (
    SceneGeometry,
    ScattererSpec,
    TargetParams,
    VehicleState,
    observe,
    propagate,
    trajectory,
)
from .sim import (
    SlotRecord,
    TrialResult,
    rmse_cdf,
    run_codebook_trial,
    run_isac_trial,
    run_trials,
    sweep_snr,
)
from .tracker import (
    EkfState,
    KinState,
    ProcessNoise,
    beam_angles,
    initialize,
    jacobian,
    predict,
    state_transition,
    update,
)
from .upa import Codebook, UpaConfig, conjugate_beamformer, dft_codebook, steering_vector
from .waveform import (
    BitPayload,
    Numerology,
    ResourceGrid,
    build_grid,
    numerology_params,
    qam_demodulate,
    qam_modulate,
)

__version__ = "0.1.0"
