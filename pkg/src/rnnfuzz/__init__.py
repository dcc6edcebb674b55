"""Coverage-guided metamorphic testing for stateful recurrent transcribers.

The pipeline: record concrete hidden-state traces of a recurrent
transcriber, abstract them into a grid-quantized Markov decision process,
measure five state/transition coverage criteria against it, and drive a
mutation-based fuzz loop over audio inputs that admits mutants on coverage
gain and flags transcription failures via word error rate.
"""

from .abstraction import (
    AbstractState,
    GridConfig,
    Projection,
    abstract_state,
    boundary_region,
    distance,
    fit_grid,
    fit_projection,
    project,
)
from .audio import (
    AppliedTransform,
    AudioClip,
    MutationRecord,
    TransformCategory,
    TransformKind,
    apply_transform,
    check_category_constraint,
    load_wav,
    pick_transform,
    save_wav,
)
from .coverage import (
    CRITERIA,
    CoverageProfile,
    bscov,
    btcov,
    coverage_report,
    criterion_value,
    iscov,
    jaccard,
    ksbcov,
    merge,
    profile_traces,
    wicov,
)
from .errors import (
    ConfigurationError,
    FullyTrimmedError,
    RnnFuzzError,
    StartupError,
    TraceFormatError,
    UndefinedDistributionError,
    UnsupportedFormatError,
    ValidationError,
)
from .fuzzer import (
    FuzzConfig,
    FuzzReport,
    SeedEntry,
    coverage_increase,
    run_campaign,
    run_loop,
    select_seed,
)
from .mdp import (
    AbstractInput,
    AbstractTransition,
    MdpModel,
    abstract_trace,
    build_model,
    enabled_inputs,
    load_model,
    save_model,
    transition_probability,
)
from .sut import (
    ToyRnnWeights,
    cer,
    extract_features,
    load_vocab,
    load_weights,
    make_random_weights,
    rnn_step,
    save_vocab,
    save_weights,
    transcribe,
    wer,
)
from .traces import Trace, TraceSet, TraceStep, load_traces, save_traces, trace_transitions

__version__ = "0.1.0"
