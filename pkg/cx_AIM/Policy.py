"""Defines the adaptive intervention policy: the soft projection of
   conflicting task gradients, the augmented policy objective and its
   analytic gradient with respect to the conflict thresholds."""

import cx_Logging
import numpy
import scipy.special

from . import Exceptions, Optim, VecMath

__all__ = [ "GradientBundle", "InterventionResult", "PolicyLossBreakdown",
        "PolicyState", "Intervene", "PolicyGrad", "PolicyLoss", "PolicyStep",
        "ProjectionWeight", "SCALAR", "MATRIX" ]

SCALAR = "scalar"
MATRIX = "matrix"


class PolicyState(object):
    """The learnable policy: the conflict thresholds (one global value or one
       per ordered pair of tasks), the temperature, the weights of the policy
       objective and the optimizer state for the thresholds."""

    def __init__(self, mode, numTasks, temperature = 10.0, lambdaG = 1.0,
            lambdaM = 0.01, lambdaP = 0.08, lr = 5e-4, optimizer = "adam"):
        if mode not in (SCALAR, MATRIX):
            raise Exceptions.ConfigurationError(
                    reason = 'policy mode must be "scalar" or "matrix"')
        if not temperature > 0:
            raise Exceptions.ConfigurationError(
                    reason = "temperature must be positive, got %r" % \
                            temperature)
        if min(lambdaG, lambdaM, lambdaP) < 0:
            raise Exceptions.ConfigurationError(
                    reason = "loss weights must be non-negative")
        self.mode = mode
        self.numTasks = numTasks
        if mode == SCALAR:
            self.tau = numpy.zeros((), dtype = numpy.float64)
        else:
            self.tau = numpy.zeros((numTasks, numTasks), dtype = numpy.float64)
        self.temperature = temperature
        self.lambdaG = lambdaG
        self.lambdaM = lambdaM
        self.lambdaP = lambdaP
        self.optimizer = Optim.CreateOptimizer(optimizer, self.tau.shape, lr)

    @property
    def warnings(self):
        return self.optimizer.warnings

    def TauMatrix(self, numTasks = None):
        """Return the thresholds as an N x N matrix; a scalar policy may be
           expanded for any number of tasks."""
        if self.mode == SCALAR:
            if numTasks is None:
                numTasks = self.numTasks
            return numpy.full((numTasks, numTasks), float(self.tau))
        return self.tau.copy()


class GradientBundle(object):
    """The per-task gradients and losses computed on one batch."""

    def __init__(self, grads, losses):
        self.grads = numpy.array(grads, dtype = numpy.float64, ndmin = 2)
        self.losses = numpy.array(losses, dtype = numpy.float64).reshape(-1)
        if self.grads.shape[0] < 1:
            raise Exceptions.ConfigurationError(
                    reason = "a gradient bundle needs at least one task")
        if self.losses.shape[0] != self.grads.shape[0]:
            raise Exceptions.DimensionError(expected = self.grads.shape[0],
                    actual = self.losses.shape[0])

    def __len__(self):
        return self.grads.shape[0]

    @property
    def dimension(self):
        return self.grads.shape[1]


class InterventionResult(object):

    def __init__(self, intervened, modifiedGrads, cosMatrix, weightMatrix,
            tauMatrix, coefficients):
        self.intervened = intervened
        self.modifiedGrads = modifiedGrads
        self.cosMatrix = cosMatrix
        self.weightMatrix = weightMatrix
        self.tauMatrix = tauMatrix
        self.coefficients = coefficients


class PolicyLossBreakdown(object):

    def __init__(self, guide, magnitude, progress, total, alphas):
        self.guide = guide
        self.magnitude = magnitude
        self.progress = progress
        self.total = total
        self.alphas = alphas

    def __repr__(self):
        return "<PolicyLossBreakdown guide=%.6g magnitude=%.6g " \
                "progress=%.6g total=%.6g>" % (self.guide, self.magnitude,
                self.progress, self.total)


def ProjectionWeight(cos, tau, k):
    """Return the soft projection weight sigma(k * (tau - cos)). Accepts
       scalars or arrays."""
    return scipy.special.expit(k * (numpy.asarray(tau) - numpy.asarray(cos)))


def _CheckShape(bundle, policy):
    if policy.mode == MATRIX and policy.numTasks != len(bundle):
        raise Exceptions.ConfigurationError(
                reason = "policy built for %d tasks but bundle has %d" % \
                        (policy.numTasks, len(bundle)))


def Intervene(bundle, policy):
    """Return the result of applying the policy to the task gradients. Each
       modified gradient removes the weighted projections of the original
       gradient onto every other original gradient, so the result does not
       depend on task order."""
    _CheckShape(bundle, policy)
    grads = bundle.grads
    cosMatrix = VecMath.CosineMatrix(grads)
    tauMatrix = policy.TauMatrix(len(bundle))
    weightMatrix = ProjectionWeight(cosMatrix, tauMatrix, policy.temperature)
    coefficients = VecMath.ProjectionCoefficients(grads)
    removal = weightMatrix * coefficients
    numpy.fill_diagonal(removal, 0.0)
    modifiedGrads = grads - removal @ grads
    intervened = modifiedGrads.sum(axis = 0)
    return InterventionResult(intervened, modifiedGrads, cosMatrix,
            weightMatrix, tauMatrix, coefficients)


def _Alphas(guideLosses):
    guideLosses = numpy.asarray(guideLosses, dtype = numpy.float64)
    total = guideLosses.sum()
    if total <= 0:
        cx_Logging.Warning("guidance losses sum to %r; using uniform task "
                "weights", float(total))
        return numpy.full(guideLosses.shape, 1.0 / guideLosses.shape[0])
    return guideLosses / total


def PolicyLoss(result, bundle, guideLosses, policy):
    """Return the breakdown of the augmented policy objective."""
    guideLosses = numpy.asarray(guideLosses, dtype = numpy.float64)
    if guideLosses.shape[0] != len(bundle):
        raise Exceptions.DimensionError(expected = len(bundle),
                actual = guideLosses.shape[0])
    guide = float(guideLosses.sum())
    norms = numpy.sqrt(numpy.einsum("ij,ij->i", bundle.grads, bundle.grads))
    intervenedNorm = VecMath.Norm(result.intervened)
    magnitude = (intervenedNorm - float(norms.sum())) ** 2
    alphas = _Alphas(guideLosses)
    progress = -float(alphas @ (bundle.grads @ result.intervened))
    total = policy.lambdaG * guide + policy.lambdaM * magnitude + \
            policy.lambdaP * progress
    return PolicyLossBreakdown(guide, magnitude, progress, total, alphas)


def PolicyGrad(bundle, guideLosses, policy, result = None):
    """Return the gradient of the total policy loss with respect to the
       thresholds (same shape as policy.tau) together with the loss
       breakdown. The raw gradients are constants and the guidance losses do
       not depend on the thresholds, so only the magnitude and progress terms
       contribute. A result already computed for the same bundle and policy
       may be passed to avoid repeating the intervention."""
    if result is None:
        result = Intervene(bundle, policy)
    breakdown = PolicyLoss(result, bundle, guideLosses, policy)
    grad = numpy.zeros(policy.tau.shape, dtype = numpy.float64)
    if len(bundle) < 2:
        return grad, breakdown

    # gradient of the loss with respect to the intervened gradient
    grads = bundle.grads
    intervened = result.intervened
    norms = numpy.sqrt(numpy.einsum("ij,ij->i", grads, grads))
    intervenedNorm = VecMath.Norm(intervened)
    upstream = -policy.lambdaP * (breakdown.alphas @ grads)
    if intervenedNorm >= VecMath.ZERO_NORM:
        upstream += policy.lambdaM * 2.0 * \
                (intervenedNorm - norms.sum()) * intervened / intervenedNorm

    # d(intervened)/d(w_ij) = -c_ij g_j and dw/dtau = k w (1 - w)
    weights = result.weightMatrix
    lossByWeight = -result.coefficients * (grads @ upstream)[numpy.newaxis, :]
    lossByTau = lossByWeight * policy.temperature * weights * (1.0 - weights)
    numpy.fill_diagonal(lossByTau, 0.0)
    if policy.mode == SCALAR:
        grad[...] = lossByTau.sum()
    else:
        grad[...] = lossByTau
    return grad, breakdown


def PolicyStep(policy, grad, lr = None):
    """Apply one optimizer step to the thresholds. The temperature and loss
       weights are left unchanged. A non-finite gradient skips the step."""
    optimizer = policy.optimizer
    if lr is not None:
        if not lr > 0:
            raise Exceptions.ConfigurationError(
                    reason = "policy learning rate must be positive")
        optimizer.lr = lr
    grad = numpy.asarray(grad, dtype = numpy.float64)
    policy.tau = numpy.asarray(optimizer.Step(policy.tau, grad),
            dtype = numpy.float64).reshape(policy.tau.shape)
    return policy
