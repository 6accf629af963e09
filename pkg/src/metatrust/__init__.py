"""Metadata-based fake image detection.

Image metadata is compared between an original and a candidate copy; the
spatial, temporal and contextual differences are placed in a 3-D space where
fitted "intention planes" classify how ill-intentioned the modification is,
and a context profile turns that into a fakeness verdict.
"""

__version__ = "0.1.0"

from .deltas import DeltaVector, NormalizedDelta, Normalizer, haversine_km, temporal_manhattan, contextual_jaccard
from .errors import MetaTrustError
from .fakeness import ContextProfile, FakenessReport, resolve_weight, keyword_significance, translate, train_translator
from .harness import generate_corpus, mutate
from .intention import IntentionLevel, IntentionPlane, fit_planes, point_plane_distance, assign_nearest_plane, kmeans
from .lsa import SemanticSpace, build_matrix, fit_space, embed, semantic_distance
from .model import IntentionModel, estimate_intention, load_default_model, train_model
from .records import ImageServiceRecord, ServicePair, TimePoint, parse_sidecar, pair_records, validate

__all__ = [
    "ContextProfile",
    "DeltaVector",
    "FakenessReport",
    "ImageServiceRecord",
    "IntentionLevel",
    "IntentionModel",
    "IntentionPlane",
    "MetaTrustError",
    "NormalizedDelta",
    "Normalizer",
    "SemanticSpace",
    "ServicePair",
    "TimePoint",
    "assign_nearest_plane",
    "build_matrix",
    "contextual_jaccard",
    "embed",
    "estimate_intention",
    "fit_planes",
    "fit_space",
    "generate_corpus",
    "haversine_km",
    "keyword_significance",
    "load_default_model",
    "kmeans",
    "mutate",
    "pair_records",
    "parse_sidecar",
    "point_plane_distance",
    "resolve_weight",
    "semantic_distance",
    "temporal_manhattan",
    "train_model",
    "train_translator",
    "translate",
    "validate",
]
