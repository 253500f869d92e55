"""Kinematic phrases: sign-categorized kinematic indicators of 3D human motion,
with a templated prompt benchmark, white-box hit protocols and oracle motion
synthesis."""

__version__ = "0.1.0"

from .catalog import Axis, PhraseCatalog, PhraseDescriptor, PhraseType, build_catalog, describe
from .config import Config, load_config
from .corpus import CorpusManifest, CorpusStats, build_kb, compute_stats, read_manifest
from .errors import (
    ConfigError,
    DegenerateFrameError,
    DegenerateLimbError,
    IntegrityError,
    KPError,
    ParseError,
    SchemaError,
    SynthesisError,
)
from .evaluate import EvalConfig, EvalReport, HitVerdict, eval_prompt, evaluate_suite
from .extract import IndicatorSequence, PhraseSequence, categorize, compute_indicators, extract, find_runs
from .prompts import Prompt, PromptSuite, generate_suite, read_suite, write_suite
from .skeleton import (
    JOINT_NAMES,
    ReferenceFrameSeries,
    SkeletonSequence,
    compute_reference_frames,
    gravity_align,
    load_sequence,
    mirror,
    normalize,
    resample,
    save_sequence,
)
from .synth import SynthSpec, confusers, realises, synth_for_prompt, synth_atomic, synth_repetitive, synth_rest_pose, synth_sequential, synth_simultaneous, synthesize

__all__ = [name for name in dir() if not name.startswith("_")]
