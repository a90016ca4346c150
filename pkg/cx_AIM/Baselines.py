"""Defines the reference multi-task gradient combiners: linear scalarization
   and projecting conflicting gradients (PCGrad)."""

import numpy

from . import Exceptions, VecMath

__all__ = [ "Combine", "LinearScalarization", "PCGrad", "PCGradGradients",
        "BASELINE_METHODS" ]

BASELINE_METHODS = ("ls", "pcgrad")


def LinearScalarization(bundle):
    """Return the sum of the task gradients (uniform weights)."""
    return bundle.grads.sum(axis = 0)


def PCGradGradients(bundle, shuffleSeed = None):
    """Return the modified task gradients of PCGrad. Each task gradient is
       projected sequentially off every other original gradient it currently
       conflicts with, visiting the others in index order or, when a seed is
       given, in a seeded shuffled order."""
    grads = bundle.grads
    numTasks = grads.shape[0]
    normsSquared = numpy.einsum("ij,ij->i", grads, grads)
    rng = None
    if shuffleSeed is not None:
        rng = numpy.random.default_rng(shuffleSeed)
    modified = grads.copy()
    for i in range(numTasks):
        order = [j for j in range(numTasks) if j != i]
        if rng is not None:
            order = [order[p] for p in rng.permutation(len(order))]
        current = modified[i]
        for j in order:
            dot = float(numpy.dot(current, grads[j]))
            if dot < 0 and normsSquared[j] >= VecMath.ZERO_NORM ** 2:
                current = current - (dot / normsSquared[j]) * grads[j]
        modified[i] = current
    return modified


def PCGrad(bundle, shuffleSeed = None):
    """Return the PCGrad combined gradient."""
    return PCGradGradients(bundle, shuffleSeed).sum(axis = 0)


def Combine(method, bundle, shuffleSeed = None):
    """Return the combined gradient for the named baseline method."""
    if method == "ls":
        return LinearScalarization(bundle)
    elif method == "pcgrad":
        return PCGrad(bundle, shuffleSeed)
    raise Exceptions.UnknownMethod(method = method,
            valid = ", ".join(BASELINE_METHODS))
