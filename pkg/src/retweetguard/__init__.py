"""retweetguard: collusive-retweeter detection from account behavior.

The pipeline loads immutable user records, extracts a fixed 64-feature
behavioral vector per user, trains any of eight from-scratch classifiers,
evaluates them with stratified cross-validation, and serves predictions
over HTTP with confidence-gated feedback and periodic retraining.
"""

from .corpus import (
    BINARY_CLASSES,
    BOT,
    CUSTOMER,
    Corpus,
    CorpusError,
    FOUR_CLASSES,
    GENUINE,
    LabelMap,
    NORMAL,
    PROMOTIONAL,
    Post,
    Profile,
    UserRecord,
    load_corpus,
    load_labels,
    save_corpus,
    save_labels,
)
from .features import (
    FAMILY_SLICES,
    FEATURE_NAMES,
    ExtractionConfig,
    FeatureVector,
    LabeledDataset,
    build_dataset,
    extract_all,
    extract_matrix,
    hourly_entropy,
    steadiness,
)
from .models import ModelSpec, TrainedModel, load_model, predict, predict_batch, save_model, train
from .evaluation import MetricsReport, cross_validate, kfold_split, metrics, single_feature_importance, spearman
from .analysis import FlowMatrix, RetweetThread, filter_and_rebin, heatmap_bins, thread_stats
from .synth import (
    DEFAULT_PRESETS,
    BehaviorPreset,
    bot_preset,
    generate,
    genuine_preset,
    normal_customer_preset,
    promotional_preset,
)
from .service import FeedbackPolicy, ScoringService, create_app

__version__ = "0.1.0"
