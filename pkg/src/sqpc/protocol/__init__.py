"""Three-party circular semiquantum private comparison."""
from .engine import (
    EQUAL,
    NOT_EQUAL,
    PASS_THROUGH,
    BitSource,
    PassThrough,
    Preparation,
    S1Result,
    S3Result,
    Streams,
    compute_f,
    compute_g,
    draw_private_inputs,
    parse_bits,
    run_protocol,
    run_s1_phase,
    run_s3_phase,
    s1_check,
    s1_transit,
    s3_check,
    s3_transit,
    tp_compare,
    tp_prepare,
)
from .modes import classify_case_s1, classify_case_s3, s1_modes_for, s3_modes_for, sample_modes
from .particles import ChiSystem, Fake, Slot, is_genuine, load_into, prepare_fresh, z_measure
from .types import (
    Abort,
    AliceModeS1,
    AliceModeS3,
    BobModeS1,
    BobModeS3,
    CaseS1,
    CaseS3,
    CaseStats,
    ConfigError,
    InsufficientSample,
    Leg,
    Message,
    ModeS1,
    ModeS3,
    PairRecordS3,
    ParticleRecordS1,
    Phase,
    PrepChoice,
    PrivateInputs,
    ProtocolConfig,
    ProtocolError,
    ProtocolOutcome,
    ResourceCounters,
    Sampling,
    Sender,
    Transcript,
    Visibility,
)
