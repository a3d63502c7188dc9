"""
Cosine similarity between feature vectors.
"""

import numpy as np

from core.errors import ZeroVectorError


def _array(vector):
    if hasattr(vector, 'as_array'):
        return vector.as_array()
    return np.asarray(vector, dtype=float)


def cosine_similarity(a, b) -> float:
    """
    sum(a*b) / (|a| |b|), clipped to [0, 1].

    Raises:
        ZeroVectorError: if either vector is all zeros
    """
    x, y = _array(a), _array(b)
    nx, ny = np.linalg.norm(x), np.linalg.norm(y)
    if nx == 0 or ny == 0:
        raise ZeroVectorError("cosine similarity is undefined for an all-zero vector")
    return float(np.clip(np.dot(x, y) / (nx * ny), 0.0, 1.0))


def similarity_scores(matrix, query) -> np.ndarray:
    """
    Similarity of every row to the query, for filtering.

    Zero vectors are allowed here: two zero vectors are identical (1.0); a
    zero vector against a non-zero one shares nothing (0.0).
    """
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    q = _array(query)
    row_norms = np.linalg.norm(matrix, axis=1)
    q_norm = np.linalg.norm(q)

    scores = np.zeros(len(matrix))
    both = (row_norms > 0) & (q_norm > 0)
    if both.any():
        scores[both] = matrix[both] @ q / (row_norms[both] * q_norm)
    if q_norm == 0:
        scores[row_norms == 0] = 1.0
    return np.clip(scores, 0.0, 1.0)
