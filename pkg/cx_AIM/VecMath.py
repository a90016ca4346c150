"""Defines the flat vector arithmetic used throughout the library. All
   parameters and gradients are one dimensional arrays of doubles."""

import numpy

from . import Exceptions

__all__ = [ "AsVector", "Cosine", "CosineMatrix", "Dot", "Norm", "Project",
        "ProjectionCoefficients", "ZERO_NORM" ]

# gradients with a norm below this value are treated as zero
ZERO_NORM = 1e-12

def AsVector(values):
    """Return the values as a one dimensional array of finite doubles."""
    vector = numpy.asarray(values, dtype = numpy.float64)
    if vector.ndim != 1:
        vector = vector.reshape(-1)
    finite = numpy.isfinite(vector)
    if not finite.all():
        raise Exceptions.NonFiniteValues(length = vector.shape[0],
                count = int((~finite).sum()))
    return vector


def _CheckLengths(a, b):
    if a.shape[0] != b.shape[0]:
        raise Exceptions.DimensionError(expected = a.shape[0],
                actual = b.shape[0])


def Dot(a, b):
    """Return the dot product of the two vectors."""
    a = AsVector(a)
    b = AsVector(b)
    _CheckLengths(a, b)
    return float(numpy.dot(a, b))


def Norm(a):
    """Return the Euclidean norm of the vector."""
    a = AsVector(a)
    return float(numpy.sqrt(numpy.dot(a, a)))


def Cosine(a, b):
    """Return the cosine of the angle between the two vectors, clamped to
       [-1, 1]. A vector with a norm below ZERO_NORM conflicts with nothing
       and its cosine with anything is 0."""
    a = AsVector(a)
    b = AsVector(b)
    _CheckLengths(a, b)
    normA = Norm(a)
    normB = Norm(b)
    if normA < ZERO_NORM or normB < ZERO_NORM:
        return 0.0
    value = float(numpy.dot(a, b)) / (normA * normB)
    return min(1.0, max(-1.0, value))


def Project(a, b):
    """Return the vector projection of a onto b; a zero vector is returned
       when b has a norm below ZERO_NORM."""
    a = AsVector(a)
    b = AsVector(b)
    _CheckLengths(a, b)
    normSquared = float(numpy.dot(b, b))
    if numpy.sqrt(normSquared) < ZERO_NORM:
        return numpy.zeros_like(a)
    return (float(numpy.dot(a, b)) / normSquared) * b


def CosineMatrix(grads):
    """Return the N x N matrix of pairwise cosines for the rows of grads. The
       diagonal holds the placeholder value 1."""
    grads = numpy.asarray(grads, dtype = numpy.float64)
    norms = numpy.sqrt(numpy.einsum("ij,ij->i", grads, grads))
    dots = grads @ grads.T
    denominator = numpy.outer(norms, norms)
    valid = denominator > 0
    valid &= numpy.outer(norms >= ZERO_NORM, norms >= ZERO_NORM)
    cos = numpy.zeros_like(dots)
    numpy.divide(dots, denominator, out = cos, where = valid)
    numpy.clip(cos, -1.0, 1.0, out = cos)
    numpy.fill_diagonal(cos, 1.0)
    return cos


def ProjectionCoefficients(grads):
    """Return the N x N matrix c where c[i, j] * g_j is the projection of g_i
       onto g_j; columns for gradients below ZERO_NORM are zero."""
    grads = numpy.asarray(grads, dtype = numpy.float64)
    dots = grads @ grads.T
    normsSquared = numpy.diag(dots).copy()
    valid = numpy.sqrt(normsSquared) >= ZERO_NORM
    coefficients = numpy.zeros_like(dots)
    numpy.divide(dots, normsSquared[numpy.newaxis, :], out = coefficients,
            where = valid[numpy.newaxis, :])
    return coefficients
