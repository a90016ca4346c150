"""Defines the synthetic multi-task regression benchmark: a generator of
   datasets whose task targets are arranged at a controllable angle and a
   small fully connected network that returns per-task gradients over its
   shared parameters."""

import csv
import math

import cx_Logging
import numpy

from . import Exceptions, Policy, Utils

__all__ = [ "Dataset", "DatasetSplit", "MlpModel", "SyntheticSpec",
        "ExportCsv", "Generate", "ImportCsv", "SplitGuidance" ]

GRAM_EXACT = "exact"
GRAM_NEAREST = "nearest"
EIGEN_TOLERANCE = 1e-10


class SyntheticSpec(object):
    """Describes a synthetic dataset; generation is a pure function of the
       values held here."""

    def __init__(self, options = None):
        self.nTasks = 4
        self.inputDim = 8
        self.nTrain = 5000
        self.nVal = 500
        self.nTest = 1000
        self.conflictAngle = 120.0
        self.noiseStd = 0.1
        self.seed = 0
        self.gramMode = GRAM_NEAREST
        Utils.SetOptions(self, options)
        self.Validate()

    def AsDict(self):
        return dict(n_tasks = self.nTasks, input_dim = self.inputDim,
                n_train = self.nTrain, n_val = self.nVal, n_test = self.nTest,
                conflict_angle = self.conflictAngle,
                noise_std = self.noiseStd, seed = self.seed,
                gram_mode = self.gramMode)

    def Validate(self):
        if self.nTasks < 2:
            raise Exceptions.ConfigurationError(
                    reason = "n_tasks must be at least 2")
        if min(self.inputDim, self.nTrain, self.nVal, self.nTest) < 1:
            raise Exceptions.ConfigurationError(
                    reason = "input_dim and split sizes must be at least 1")
        if not 0 <= self.conflictAngle <= 180:
            raise Exceptions.ConfigurationError(
                    reason = "conflict_angle must lie in [0, 180]")
        if self.noiseStd < 0:
            raise Exceptions.ConfigurationError(
                    reason = "noise_std must be non-negative")
        if self.gramMode not in (GRAM_EXACT, GRAM_NEAREST):
            raise Exceptions.ConfigurationError(
                    reason = 'gram_mode must be "exact" or "nearest"')


class Dataset(object):
    """Inputs and targets of a generated or imported dataset; samples are
       stored train pool first, then validation, then test."""

    def __init__(self, inputs, targets, nTrain, nVal, nTest,
            taskWeights = None, spec = None):
        self.inputs = inputs
        self.targets = targets
        self.taskWeights = taskWeights
        self.spec = spec
        self.train = numpy.arange(nTrain)
        self.validation = nTrain + numpy.arange(nVal)
        self.test = nTrain + nVal + numpy.arange(nTest)

    @property
    def inputDim(self):
        return self.inputs.shape[1]

    @property
    def numTasks(self):
        return self.targets.shape[1]

    def Batch(self, indices, task = None):
        """Return the inputs and targets for the given indices, optionally
           restricted to a single task."""
        targets = self.targets[indices]
        if task is not None:
            targets = targets[:, task:task + 1]
        return self.inputs[indices], targets

    def TrainSubset(self, size):
        """Return the first size indices of the train pool."""
        if not 1 <= size <= len(self.train):
            raise Exceptions.ConfigurationError(
                    reason = "train subset size %d outside [1, %d]" % \
                            (size, len(self.train)))
        return self.train[:size]


class DatasetSplit(object):

    def __init__(self, primary, guidance, validation = None, test = None):
        self.primary = primary
        self.guidance = guidance
        self.validation = validation
        self.test = test


def _TaskGram(spec):
    """Return the Gram matrix of the task weight vectors."""
    cos = math.cos(math.radians(spec.conflictAngle))
    gram = numpy.full((spec.nTasks, spec.nTasks), cos)
    numpy.fill_diagonal(gram, 1.0)
    eigenvalues, eigenvectors = numpy.linalg.eigh(gram)
    if eigenvalues.min() >= -EIGEN_TOLERANCE:
        return gram, eigenvalues, eigenvectors
    if spec.gramMode == GRAM_EXACT:
        raise Exceptions.ConfigurationError(
                reason = "%d tasks cannot be arranged pairwise at %g " \
                        "degrees (Gram matrix not positive semidefinite)" % \
                        (spec.nTasks, spec.conflictAngle))
    clipped = numpy.clip(eigenvalues, 0.0, None)
    gram = (eigenvectors * clipped) @ eigenvectors.T
    scale = numpy.sqrt(numpy.diag(gram))
    gram = gram / numpy.outer(scale, scale)
    eigenvalues, eigenvectors = numpy.linalg.eigh(gram)
    offDiagonal = gram[~numpy.eye(spec.nTasks, dtype = bool)]
    angle = math.degrees(math.acos(max(-1.0, min(1.0, offDiagonal.mean()))))
    cx_Logging.Trace("requested angle %g infeasible for %d tasks; using "
            "nearest arrangement with mean angle %.4f", spec.conflictAngle,
            spec.nTasks, angle)
    return gram, eigenvalues, eigenvectors


def Generate(spec):
    """Return the dataset described by the synthetic spec. The task weight
       vectors have unit norm and the pairwise Gram matrix of the task
       arrangement; they are embedded in the input space through a seeded
       orthonormal basis."""
    gram, eigenvalues, eigenvectors = _TaskGram(spec)
    keep = eigenvalues > EIGEN_TOLERANCE * max(1.0, eigenvalues.max())
    rank = int(keep.sum())
    if rank > spec.inputDim:
        raise Exceptions.ConfigurationError(
                reason = "task arrangement needs %d dimensions but " \
                        "input_dim is %d" % (rank, spec.inputDim))
    factor = eigenvectors[:, keep] * numpy.sqrt(eigenvalues[keep])
    rng = numpy.random.default_rng(spec.seed)
    basis, _ = numpy.linalg.qr(rng.standard_normal((spec.inputDim, rank)))
    taskWeights = factor @ basis.T
    numSamples = spec.nTrain + spec.nVal + spec.nTest
    inputs = rng.standard_normal((numSamples, spec.inputDim))
    noise = rng.standard_normal((numSamples, spec.nTasks)) * spec.noiseStd
    targets = inputs @ taskWeights.T + noise
    return Dataset(inputs, targets, spec.nTrain, spec.nVal, spec.nTest,
            taskWeights, spec)


def SplitGuidance(numTrain, fraction, seed):
    """Partition range(numTrain) once into disjoint primary and guidance
       index arrays; the guidance set holds round(fraction * numTrain)
       indices (halves round up)."""
    if not 0 < fraction < 1:
        raise Exceptions.ConfigurationError(
                reason = "guidance fraction must lie in (0, 1), got %r" % \
                        fraction)
    numGuidance = int(math.floor(fraction * numTrain + 0.5))
    if numGuidance < 1:
        raise Exceptions.ConfigurationError(
                reason = "guidance fraction %r of %d samples is empty" % \
                        (fraction, numTrain))
    if numGuidance >= numTrain:
        raise Exceptions.ConfigurationError(
                reason = "guidance fraction %r of %d samples leaves no " \
                        "primary samples" % (fraction, numTrain))
    permutation = numpy.random.default_rng(seed).permutation(numTrain)
    return DatasetSplit(numpy.sort(permutation[numGuidance:]),
            numpy.sort(permutation[:numGuidance]))


class MlpModel(object):
    """A shared tanh trunk with one hidden layer followed by one linear head
       per task. All weights live in one flat parameter vector laid out as
       trunk weights, trunk biases and then, for each task, its head weights
       followed by its head bias."""

    def __init__(self, inputDim, numTasks, hiddenSize = 32, params = None):
        self.inputDim = inputDim
        self.numTasks = numTasks
        self.hiddenSize = hiddenSize
        self.layout = {}
        offset = 0
        for name, shape in (("trunkWeights", (hiddenSize, inputDim)),
                ("trunkBiases", (hiddenSize,))):
            size = int(numpy.prod(shape))
            self.layout[name] = (slice(offset, offset + size), shape)
            offset += size
        self.headStart = offset
        for task in range(numTasks):
            self.layout["head%d" % task] = \
                    (slice(offset, offset + hiddenSize + 1),
                     (hiddenSize + 1,))
            offset += hiddenSize + 1
        self.numParams = offset
        if params is None:
            params = numpy.zeros(offset)
        self.params = numpy.asarray(params, dtype = numpy.float64)

    @classmethod
    def Initial(cls, inputDim, numTasks, hiddenSize = 32, seed = 0):
        """Return a model with seeded initial weights. Trunk weights are
           scaled by 1/sqrt(inputDim); every task head starts from the same
           weights (scaled by 1/sqrt(hiddenSize)) so that conflicting targets
           show up as conflicting trunk gradients; biases start at zero."""
        model = cls(inputDim, numTasks, hiddenSize)
        rng = numpy.random.default_rng(seed)
        trunk = rng.standard_normal((hiddenSize, inputDim)) / \
                math.sqrt(inputDim)
        head = rng.standard_normal(hiddenSize) / math.sqrt(hiddenSize)
        model.params[model.layout["trunkWeights"][0]] = trunk.reshape(-1)
        for task in range(numTasks):
            model.params[model.layout["head%d" % task][0]][:hiddenSize] = head
        return model

    def Copy(self):
        return MlpModel(self.inputDim, self.numTasks, self.hiddenSize,
                self.params.copy())

    def Unpack(self, params = None):
        """Return (trunk weights, trunk biases, head weights, head biases)."""
        if params is None:
            params = self.params
        trunkSlice, trunkShape = self.layout["trunkWeights"]
        biasSlice, biasShape = self.layout["trunkBiases"]
        heads = params[self.headStart:].reshape(self.numTasks,
                self.hiddenSize + 1)
        return params[trunkSlice].reshape(trunkShape), params[biasSlice], \
                heads[:, :self.hiddenSize], heads[:, self.hiddenSize]

    def Forward(self, inputs, params = None):
        """Return the hidden activations and the predictions (batch x
           tasks)."""
        trunkWeights, trunkBiases, headWeights, headBiases = \
                self.Unpack(params)
        hidden = numpy.tanh(inputs @ trunkWeights.T + trunkBiases)
        return hidden, hidden @ headWeights.T + headBiases

    def TaskLosses(self, inputs, targets, params = None):
        """Return the mean squared error of each task."""
        hidden, predictions = self.Forward(inputs, params)
        return ((predictions - targets) ** 2).mean(axis = 0)

    def MeanAbsoluteErrors(self, inputs, targets, params = None):
        """Return the mean absolute error of each task."""
        hidden, predictions = self.Forward(inputs, params)
        return numpy.abs(predictions - targets).mean(axis = 0)

    def TaskGradients(self, inputs, targets, params = None):
        """Return the gradient bundle of the per-task mean squared errors
           computed by backpropagation. Each task gradient spans the full
           parameter vector with zeros on the heads of the other tasks."""
        if inputs.shape[0] < 1:
            raise Exceptions.ConfigurationError(reason = "empty batch")
        trunkWeights, trunkBiases, headWeights, headBiases = \
                self.Unpack(params)
        batchSize = inputs.shape[0]
        hidden, predictions = self.Forward(inputs, params)
        residuals = predictions - targets
        losses = (residuals ** 2).mean(axis = 0)
        outputGrads = 2.0 * residuals / batchSize

        # head gradients
        headWeightGrads = outputGrads.T @ hidden
        headBiasGrads = outputGrads.sum(axis = 0)

        # trunk gradients, one set per task
        hiddenGrads = outputGrads.T[:, :, numpy.newaxis] * \
                headWeights[:, numpy.newaxis, :]
        preActivationGrads = hiddenGrads * (1.0 - hidden ** 2)
        trunkWeightGrads = numpy.einsum("tbh,bd->thd", preActivationGrads,
                inputs)
        trunkBiasGrads = preActivationGrads.sum(axis = 1)

        grads = numpy.zeros((self.numTasks, self.numParams))
        grads[:, self.layout["trunkWeights"][0]] = \
                trunkWeightGrads.reshape(self.numTasks, -1)
        grads[:, self.layout["trunkBiases"][0]] = trunkBiasGrads
        for task in range(self.numTasks):
            headSlice = self.layout["head%d" % task][0]
            grads[task, headSlice] = numpy.append(headWeightGrads[task],
                    headBiasGrads[task])
        return Policy.GradientBundle(grads, losses)


def ExportCsv(dataset, fileName):
    """Write the dataset samples to a CSV file with columns x_0..x_{d-1} and
       y_0..y_{T-1}."""
    header = ["x_%d" % i for i in range(dataset.inputDim)] + \
            ["y_%d" % i for i in range(dataset.numTasks)]
    rows = (list(x) + list(y) for x, y in \
            zip(dataset.inputs.tolist(), dataset.targets.tolist()))
    Utils.WriteCsv(fileName, header, rows)


def ImportCsv(fileName, nVal = 0, nTest = 0):
    """Read a dataset written by ExportCsv; the trailing nVal and nTest rows
       form the validation and test pools and the rest the train pool."""
    with open(fileName, encoding = "utf-8", newline = "") as inFile:
        reader = csv.reader(inFile)
        header = next(reader)
        rows = [[float(v) for v in r] for r in reader]
    inputDim = sum(1 for n in header if n.startswith("x_"))
    values = numpy.array(rows, dtype = numpy.float64).reshape(len(rows), -1)
    nTrain = values.shape[0] - nVal - nTest
    if nTrain < 1:
        raise Exceptions.ConfigurationError(
                reason = "%s holds %d rows, too few for the requested " \
                        "splits" % (fileName, values.shape[0]))
    return Dataset(values[:, :inputDim], values[:, inputDim:], nTrain, nVal,
            nTest)
