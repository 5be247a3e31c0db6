"""Desk-scale laboratory for multi-attribute controlled text generation."""

__version__ = "0.1.0"

from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .data import IngestConfig, PreparedCorpus, SplitSpec, ingest, load_prepared
from .encoder import FeatureEncoder, IntegrationMode
from .errors import (
    ConfigError,
    EmptyDocumentError,
    InsufficientDataError,
    LingLabError,
    NoRootError,
    TrainingDivergedError,
    UnknownAttributeError,
)
from .evaluation import attribute_mse, pairwise, run_eval, sweep
from .generation import generate, generate_batch, generate_vanilla
from .masking import (
    Dropout,
    FixedRate,
    MaskDraw,
    MaskingStrategy,
    NoMasking,
    ParetoMaskConfig,
    PMasking,
    calibrate_shape,
    draw_mask,
    pmask_cdf,
    pmask_density,
    sample_rate,
)
from .model import AttrRegressor, DecoderLM, ModelConfig, lm_loss
from .textstats import (
    DEFAULT_SCHEMA,
    AttributeSchema,
    Lexicons,
    NormStats,
    count_syllables,
    denormalize,
    extract,
    fit_normalizer,
    normalize,
    segment_and_tokenize,
)
from .training import TrainConfig, train_discriminator, train_lm
from .vocab import Vocabulary, build_vocab, detokenize, lm_tokenize
