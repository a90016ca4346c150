"""Tests for linear scalarization and PCGrad."""

import numpy
import pytest

from cx_AIM import Baselines, Exceptions, Policy

def _Bundle(grads):
    grads = numpy.asarray(grads, dtype = numpy.float64)
    return Policy.GradientBundle(grads, numpy.ones(grads.shape[0]))


def TestLinearScalarization():
    numpy.testing.assert_array_equal(
            Baselines.LinearScalarization(_Bundle([[1, 2]])), [1, 2])
    numpy.testing.assert_array_equal(
            Baselines.LinearScalarization(_Bundle([[1, 0], [-1, 0]])), [0, 0])
    numpy.testing.assert_array_equal(
            Baselines.LinearScalarization(_Bundle([[1, 0], [-1, 1]])), [0, 1])


def TestPCGradHandExample():
    numpy.testing.assert_allclose(Baselines.PCGrad(_Bundle([[1, 0], [-1, 1]])),
            [0.5, 1.5], atol = 1e-15)


def TestPCGradSingleTask():
    numpy.testing.assert_array_equal(Baselines.PCGrad(_Bundle([[3, -1]])),
            [3, -1])


def TestPCGradWithoutConflicts():
    grads = [[1, 0, 0], [1, 1, 0], [0, 1, 1]]
    numpy.testing.assert_array_equal(Baselines.PCGrad(_Bundle(grads)),
            Baselines.LinearScalarization(_Bundle(grads)))


def TestPCGradUsesCurrentGradient():
    # after projecting off g2 the first gradient no longer conflicts with g3
    grads = numpy.array([[1.0, 0.0], [-1.0, 1.0], [-1.0, -3.0]])
    bundle = _Bundle(grads)
    current = grads[0] - (grads[0] @ grads[1]) / (grads[1] @ grads[1]) * \
            grads[1]
    assert current @ grads[2] < 0
    current = current - (current @ grads[2]) / (grads[2] @ grads[2]) * \
            grads[2]
    result = Baselines.PCGrad(bundle)
    second = grads[1].copy()
    for j in (0, 2):
        dot = second @ grads[j]
        if dot < 0:
            second = second - dot / (grads[j] @ grads[j]) * grads[j]
    third = grads[2].copy()
    for j in (0, 1):
        dot = third @ grads[j]
        if dot < 0:
            third = third - dot / (grads[j] @ grads[j]) * grads[j]
    numpy.testing.assert_allclose(result, current + second + third,
            rtol = 1e-12)


def TestPCGradShuffleIsSeeded():
    rng = numpy.random.default_rng(1)
    bundle = _Bundle(rng.standard_normal((5, 10)))
    first = Baselines.PCGrad(bundle, shuffleSeed = 42)
    numpy.testing.assert_array_equal(first,
            Baselines.PCGrad(bundle, shuffleSeed = 42))


def TestCombineUnknownMethod():
    with pytest.raises(Exceptions.UnknownMethod):
        Baselines.Combine("nash", _Bundle([[1, 0]]))


def TestPCGradTwoTasksIgnoresShuffleSeed():
    rng = numpy.random.default_rng(2)
    for i in range(20):
        bundle = _Bundle(rng.standard_normal((2, 6)))
        expected = Baselines.PCGrad(bundle)
        for seed in (0, 7, 12345):
            numpy.testing.assert_array_equal(
                    Baselines.PCGrad(bundle, shuffleSeed = seed), expected)


def TestPCGradRemovesSingleConflict():
    rng = numpy.random.default_rng(3)
    checked = 0
    while checked < 50:
        grads = rng.standard_normal((2, 8)) * rng.uniform(1e-3, 1e3, (2, 1))
        if grads[0] @ grads[1] >= 0:
            continue
        modified = Baselines.PCGradGradients(_Bundle(grads))
        tolerance = 1e-10 * numpy.linalg.norm(grads[0]) * \
                numpy.linalg.norm(grads[1])
        assert modified[0] @ grads[1] >= -tolerance
        assert modified[1] @ grads[0] >= -tolerance
        checked += 1


def TestPCGradSingleConflictAmongThree():
    # only the first two gradients conflict; the third agrees with both
    grads = numpy.array([[1.0, 0.2, 0.3], [-1.0, 0.5, 0.3], [0.0, 0.1, 1.0]])
    modified = Baselines.PCGradGradients(_Bundle(grads))
    tolerance = 1e-10 * numpy.linalg.norm(grads[0]) * \
            numpy.linalg.norm(grads[1])
    assert modified[0] @ grads[1] >= -tolerance
    assert modified[1] @ grads[0] >= -tolerance
    numpy.testing.assert_array_equal(modified[2], grads[2])
