"""Defines the first order optimizers and learning rate schedulers used to
   train both the model parameters and the policy thresholds."""

import math

import cx_Logging
import numpy

from . import Exceptions

__all__ = [ "AdamState", "CosineRestartScheduler", "PlateauScheduler",
        "SgdState", "CreateOptimizer" ]

# improvement smaller than this is not considered an improvement
IMPROVEMENT_THRESHOLD = 1e-8


class AdamState(object):
    """State of the Adam optimizer with bias correction. Parameters may be of
       any shape (including a zero dimensional array for a scalar)."""

    def __init__(self, shape, lr = 1e-3, beta1 = 0.9, beta2 = 0.999,
            eps = 1e-8):
        if not lr > 0:
            raise Exceptions.ConfigurationError(
                    reason = "learning rate must be positive, got %r" % lr)
        if not 0 <= beta1 < 1 or not 0 <= beta2 < 1:
            raise Exceptions.ConfigurationError(
                    reason = "betas must lie in [0, 1), got (%r, %r)" % \
                            (beta1, beta2))
        if not eps > 0:
            raise Exceptions.ConfigurationError(
                    reason = "eps must be positive, got %r" % eps)
        self.m = numpy.zeros(shape, dtype = numpy.float64)
        self.v = numpy.zeros(shape, dtype = numpy.float64)
        self.t = 0
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.lr = lr
        self.warnings = []

    def Delta(self, grad):
        """Update the moments with the gradient and return the displacement
           to subtract from the parameters. A non-finite gradient leaves the
           state unchanged, records a warning and returns a zero
           displacement."""
        grad = numpy.asarray(grad, dtype = numpy.float64)
        if grad.shape != self.m.shape:
            raise Exceptions.DimensionError(expected = self.m.shape,
                    actual = grad.shape)
        if not numpy.all(numpy.isfinite(grad)):
            message = "Adam step %d skipped: non-finite gradient" % \
                    (self.t + 1)
            self.warnings.append(message)
            cx_Logging.Warning("%s", message)
            return numpy.zeros_like(self.m)
        self.t += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1 - self.beta2) * grad * grad
        mHat = self.m / (1 - self.beta1 ** self.t)
        vHat = self.v / (1 - self.beta2 ** self.t)
        return self.lr * mHat / (numpy.sqrt(vHat) + self.eps)

    def Step(self, params, grad):
        """Perform one Adam step and return the updated parameters."""
        params = numpy.asarray(params, dtype = numpy.float64)
        if params.shape != self.m.shape:
            raise Exceptions.DimensionError(expected = self.m.shape,
                    actual = params.shape)
        return params - self.Delta(grad)


class SgdState(object):
    """State of plain stochastic gradient descent."""

    def __init__(self, shape, lr = 1e-3):
        if not lr > 0:
            raise Exceptions.ConfigurationError(
                    reason = "learning rate must be positive, got %r" % lr)
        self.shape = shape
        self.lr = lr
        self.t = 0
        self.warnings = []

    def Delta(self, grad):
        """Return the displacement for the gradient; a non-finite gradient
           records a warning and returns a zero displacement."""
        grad = numpy.asarray(grad, dtype = numpy.float64)
        if not numpy.all(numpy.isfinite(grad)):
            message = "SGD step %d skipped: non-finite gradient" % \
                    (self.t + 1)
            self.warnings.append(message)
            cx_Logging.Warning("%s", message)
            return numpy.zeros_like(grad)
        self.t += 1
        return self.lr * grad

    def Step(self, params, grad):
        """Perform one SGD step and return the updated parameters."""
        params = numpy.asarray(params, dtype = numpy.float64)
        grad = numpy.asarray(grad, dtype = numpy.float64)
        if grad.shape != params.shape:
            raise Exceptions.DimensionError(expected = params.shape,
                    actual = grad.shape)
        return params - self.Delta(grad)


def CreateOptimizer(name, shape, lr):
    """Return a new optimizer state of the given name."""
    if name == "adam":
        return AdamState(shape, lr = lr)
    elif name == "sgd":
        return SgdState(shape, lr = lr)
    raise Exceptions.ConfigurationError(
            reason = 'unknown optimizer "%s"; use adam or sgd' % name)


class PlateauScheduler(object):
    """Reduces the learning rate when the monitored metric stops improving."""

    def __init__(self, lr, patience = 10, factor = 0.5, minLr = 1e-6):
        if not 0 < factor < 1:
            raise Exceptions.ConfigurationError(
                    reason = "plateau factor must lie in (0, 1), got %r" % \
                            factor)
        self.bestMetric = math.inf
        self.epochsSinceImprove = 0
        self.patience = patience
        self.factor = factor
        self.currentLr = max(lr, minLr)
        self.minLr = minLr

    def Step(self, metric):
        """Record the metric for one epoch and return the learning rate."""
        if metric < self.bestMetric - IMPROVEMENT_THRESHOLD:
            self.bestMetric = metric
            self.epochsSinceImprove = 0
        else:
            self.epochsSinceImprove += 1
        if self.epochsSinceImprove > self.patience:
            newLr = max(self.currentLr * self.factor, self.minLr)
            if newLr < self.currentLr:
                cx_Logging.Debug("plateau: learning rate %.6g -> %.6g",
                        self.currentLr, newLr)
            self.currentLr = newLr
            self.epochsSinceImprove = 0
        return self.currentLr


class CosineRestartScheduler(object):
    """Cosine annealing of the learning rate with warm restarts; the cycle
       length starts at t0 epochs and is multiplied by tMult at each
       restart."""

    def __init__(self, etaMax, t0 = 20, tMult = 1, etaMin = 1e-6):
        if t0 < 1 or tMult < 1:
            raise Exceptions.ConfigurationError(
                    reason = "t0 and t_mult must be at least 1")
        self.t0 = t0
        self.tMult = tMult
        self.etaMin = etaMin
        self.etaMax = etaMax
        self.epochInCycle = 0
        self.cycleLength = t0

    def LearningRate(self):
        """Return the learning rate for the current epoch."""
        angle = math.pi * self.epochInCycle / self.cycleLength
        return self.etaMin + 0.5 * (self.etaMax - self.etaMin) * \
                (1 + math.cos(angle))

    def Step(self):
        """Advance by one epoch and return the new learning rate."""
        self.epochInCycle += 1
        if self.epochInCycle >= self.cycleLength:
            self.epochInCycle = 0
            self.cycleLength *= self.tMult
        return self.LearningRate()
