"""Tests for the flat vector arithmetic."""

import math

import numpy
import pytest

from cx_AIM import Exceptions, VecMath

def TestDotAndNorm():
    assert VecMath.Dot([1, 2, 3], [4, 5, 6]) == 32.0
    assert VecMath.Norm([3, 4]) == 5.0


def TestDotLengthMismatch():
    with pytest.raises(Exceptions.DimensionError):
        VecMath.Dot([1, 2], [1, 2, 3])


def TestCosine():
    assert VecMath.Cosine([1, 0], [0, 1]) == 0.0
    assert VecMath.Cosine([1, 0], [-2, 0]) == -1.0
    assert VecMath.Cosine([1, 1], [1, 0]) == pytest.approx(1 / math.sqrt(2))


def TestCosineZeroVector():
    assert VecMath.Cosine([0, 0], [1, 0]) == 0.0
    assert VecMath.Cosine([1e-14, 0], [1, 0]) == 0.0


def TestCosineIsClamped():
    v = numpy.array([0.1, 0.2, 0.3]) * 1e5
    assert -1.0 <= VecMath.Cosine(v, v * 3) <= 1.0


def TestProject():
    numpy.testing.assert_allclose(VecMath.Project([1, 0], [-1, 1]),
            [0.5, -0.5])
    numpy.testing.assert_array_equal(VecMath.Project([1, 2], [0, 0]), [0, 0])


def TestCosineMatrixMatchesPairwise():
    rng = numpy.random.default_rng(3)
    grads = rng.standard_normal((4, 7))
    grads[2] = 0
    matrix = VecMath.CosineMatrix(grads)
    for i in range(4):
        assert matrix[i, i] == 1.0
        for j in range(4):
            if i != j:
                assert matrix[i, j] == pytest.approx(
                        VecMath.Cosine(grads[i], grads[j]), abs = 1e-14)


def TestProjectionCoefficients():
    grads = numpy.array([[1.0, 0.0], [-1.0, 1.0], [0.0, 0.0]])
    coefficients = VecMath.ProjectionCoefficients(grads)
    for i in range(3):
        for j in range(3):
            numpy.testing.assert_allclose(coefficients[i, j] * grads[j],
                    VecMath.Project(grads[i], grads[j]), atol = 1e-15)
    numpy.testing.assert_array_equal(coefficients[:, 2], 0)


def TestNonFiniteEntriesRejected():
    with pytest.raises(Exceptions.NonFiniteValues):
        VecMath.Dot([1.0, math.nan], [1.0, 2.0])
    with pytest.raises(Exceptions.NonFiniteValues):
        VecMath.Norm([math.inf, 0.0])
    with pytest.raises(Exceptions.NonFiniteValues):
        VecMath.Project([1.0, 2.0], [-math.inf, 1.0])


def TestProjectionResidualIsOrthogonal():
    rng = numpy.random.default_rng(11)
    for dim in (2, 5, 64):
        for i in range(20):
            a = rng.standard_normal(dim)
            b = rng.standard_normal(dim)
            residual = a - VecMath.Project(a, b)
            assert abs(VecMath.Dot(residual, b)) <= \
                    1e-10 * VecMath.Norm(a) * VecMath.Norm(b)


def TestProjectOntoItself():
    rng = numpy.random.default_rng(12)
    for i in range(20):
        v = rng.standard_normal(9)
        numpy.testing.assert_allclose(VecMath.Project(v, v), v, rtol = 1e-12,
                atol = 1e-15)


def TestCosineSymmetricAndScaleInvariant():
    rng = numpy.random.default_rng(13)
    for i in range(50):
        a = rng.standard_normal(6)
        b = rng.standard_normal(6)
        scaleA, scaleB = rng.uniform(1e-3, 1e3, size = 2)
        cos = VecMath.Cosine(a, b)
        assert VecMath.Cosine(b, a) == pytest.approx(cos, abs = 1e-14)
        assert VecMath.Cosine(scaleA * a, scaleB * b) == \
                pytest.approx(cos, abs = 1e-12)


def TestDotIsBilinear():
    rng = numpy.random.default_rng(14)
    for i in range(50):
        a, b, c = rng.standard_normal((3, 8))
        alpha, beta = rng.standard_normal(2)
        expected = alpha * VecMath.Dot(a, c) + beta * VecMath.Dot(b, c)
        assert VecMath.Dot(alpha * a + beta * b, c) == \
                pytest.approx(expected, rel = 1e-10, abs = 1e-12)
        assert VecMath.Dot(c, alpha * a + beta * b) == \
                pytest.approx(expected, rel = 1e-10, abs = 1e-12)
