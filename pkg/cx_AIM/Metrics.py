"""Defines the metrics used to compare multi-task methods."""

import numpy
import scipy.stats

from . import Exceptions

__all__ = [ "DeltaM", "MeanRank" ]

def DeltaM(methodMae, stlMae):
    """Return the mean percentage change of the errors relative to the
       single-task reference errors; all tasks are lower-is-better so lower
       values are better."""
    methodMae = numpy.asarray(methodMae, dtype = numpy.float64)
    stlMae = numpy.asarray(stlMae, dtype = numpy.float64)
    if methodMae.shape != stlMae.shape:
        raise Exceptions.DimensionError(expected = stlMae.shape,
                actual = methodMae.shape)
    if numpy.any(stlMae <= 0):
        raise Exceptions.ConfigurationError(
                reason = "reference errors must be positive: %s" % \
                        stlMae.tolist())
    return float(100.0 * ((methodMae - stlMae) / stlMae).mean())


def MeanRank(maeTable):
    """Return the mean rank of each method (rows) across tasks (columns);
       methods are ranked by increasing error and ties share the average
       rank."""
    maeTable = numpy.asarray(maeTable, dtype = numpy.float64)
    if maeTable.ndim != 2 or not numpy.all(numpy.isfinite(maeTable)):
        raise Exceptions.ConfigurationError(
                reason = "error table must be a complete finite matrix")
    ranks = scipy.stats.rankdata(maeTable, method = "average", axis = 0)
    return ranks.mean(axis = 1)
