"""
Similarity Module

Weighted cosine similarity over transfer features, threshold filtering of
the history store and grouping of survivors into sessions.
"""

from .features import FEATURE_WEIGHTS, FeatureVector, query_features, normalize, build_vector
from .cosine import cosine_similarity, similarity_scores
from .filtering import FilterResult, filter_similar
from .grouping import MIN_GROUP, EntryGroup, group_by_session

__all__ = [
    'FEATURE_WEIGHTS',
    'FeatureVector',
    'query_features',
    'normalize',
    'build_vector',
    'cosine_similarity',
    'similarity_scores',
    'FilterResult',
    'filter_similar',
    'MIN_GROUP',
    'EntryGroup',
    'group_by_session',
]
