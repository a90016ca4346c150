"""Defines the training loop for the adaptive intervention policy and the
   baseline combiners, including early stopping, the learning rate schedules
   and recording of the run."""

import math
import os
import time

import cx_Logging
import numpy

from . import Baselines, Diagnostics, Exceptions, Optim, Policy, SynthBench
from . import Utils

__all__ = [ "MultiTaskTrainer", "RunRecord", "StepInfo", "TrainConfig",
        "AimTrainStep", "BaselineTrainStep", "EarlyStopCheck", "TrainStl",
        "METHODS" ]

METHODS = ("ls", "pcgrad", "aim_scalar", "aim_matrix")
AIM_MODES = dict(aim_scalar = Policy.SCALAR, aim_matrix = Policy.MATRIX)


class TrainConfig(object):
    """Settings of one training run."""

    def __init__(self, options = None):
        self.method = "aim_matrix"
        self.epochs = 300
        self.patience = 75
        self.batchSize = 32
        self.mainLr = 1e-3
        self.policyLr = 5e-4
        self.guidanceFraction = 0.1
        self.seed = 0
        self.lambdaG = 1.0
        self.lambdaM = 0.01
        self.lambdaP = 0.08
        self.temperature = 10.0
        self.tauInit = 0.0
        self.policyOptimizer = "adam"
        self.hiddenSize = 32
        self.plateauPatience = 10
        self.plateauFactor = 0.5
        self.minLr = 1e-6
        self.cosineT0 = 20
        self.cosineTMult = 1
        self.cosineEtaMin = 1e-6
        self.diagEvery = 10
        self.pcgradShuffle = False
        Utils.SetOptions(self, options)
        self.Validate()

    def AsDict(self):
        """Return the configuration keyed by configuration key names."""
        return dict((Utils.KeyName(n), v) for n, v in vars(self).items())

    def Copy(self, **overrides):
        values = self.AsDict()
        values.update((Utils.KeyName(n), v) for n, v in overrides.items())
        return TrainConfig(values)

    def Validate(self):
        if self.method not in METHODS:
            raise Exceptions.UnknownMethod(method = self.method,
                    valid = ", ".join(METHODS))
        if self.epochs < 1:
            raise Exceptions.ConfigurationError(
                    reason = "epochs must be at least 1")
        if not 1 <= self.patience <= self.epochs:
            raise Exceptions.ConfigurationError(
                    reason = "patience must lie in [1, epochs]")
        if not 0 < self.guidanceFraction < 1:
            raise Exceptions.ConfigurationError(
                    reason = "guidance_fraction must lie in (0, 1)")
        if self.batchSize < 1 or self.diagEvery < 1:
            raise Exceptions.ConfigurationError(
                    reason = "batch_size and diag_every must be at least 1")
        if not self.mainLr > 0 or self.policyLr < 0:
            raise Exceptions.ConfigurationError(
                    reason = "main_lr must be positive and policy_lr " \
                            "non-negative")


class StepInfo(object):
    """What one training step computed."""

    def __init__(self, bundle, applied, result = None, breakdown = None,
            guideLosses = None):
        self.bundle = bundle
        self.applied = applied
        self.result = result
        self.breakdown = breakdown
        self.guideLosses = guideLosses


def _CheckLosses(losses, epoch, step):
    if not numpy.all(numpy.isfinite(losses)):
        raise Exceptions.NonFiniteLoss(epoch = epoch, step = step,
                losses = numpy.asarray(losses).tolist())


def AimTrainStep(model, policy, primaryBatch, guidanceBatch, adamState,
        policyLr = None, epoch = 0, step = 0):
    """Perform one update: raw task gradients on the primary batch, the
       intervention, the policy loss and gradient using the guidance batch
       losses, then the policy step followed by the model step. A policy
       learning rate of zero leaves the policy unchanged."""
    bundle = model.TaskGradients(*primaryBatch)
    _CheckLosses(bundle.losses, epoch, step)
    result = Policy.Intervene(bundle, policy)
    guideLosses = model.TaskLosses(*guidanceBatch)
    _CheckLosses(guideLosses, epoch, step)
    grad, breakdown = Policy.PolicyGrad(bundle, guideLosses, policy, result)
    if policyLr is None or policyLr > 0:
        Policy.PolicyStep(policy, grad, policyLr)
    model.params = adamState.Step(model.params, result.intervened)
    return StepInfo(bundle, result.intervened, result, breakdown, guideLosses)


def BaselineTrainStep(model, method, primaryBatch, adamState,
        shuffleSeed = None, epoch = 0, step = 0):
    """Perform one update with a baseline combiner."""
    bundle = model.TaskGradients(*primaryBatch)
    _CheckLosses(bundle.losses, epoch, step)
    applied = Baselines.Combine(method, bundle, shuffleSeed)
    model.params = adamState.Step(model.params, applied)
    return StepInfo(bundle, applied)


def EarlyStopCheck(valHistory, patience):
    """Return (stop, bestEpoch) for the validation history; epochs are
       numbered from 1. Training stops once the best value has not improved
       by more than the threshold for patience consecutive epochs."""
    if not valHistory:
        raise Exceptions.ConfigurationError(
                reason = "validation history is empty")
    bestValue = valHistory[0]
    bestEpoch = 1
    for epoch, value in enumerate(valHistory[1:], 2):
        if value < bestValue - Optim.IMPROVEMENT_THRESHOLD:
            bestValue = value
            bestEpoch = epoch
    return len(valHistory) - bestEpoch >= patience, bestEpoch


class RunRecord(object):
    """The record of a training run."""

    def __init__(self, config, seed):
        self.config = config
        self.seed = seed
        self.metrics = []
        self.testMae = None
        self.frames = []
        self.wallClock = 0.0
        self.bestEpoch = None
        self.split = None
        self.extraConfig = {}

    @property
    def epochsExecuted(self):
        return len(self.metrics)

    def Write(self, dirName):
        """Write the record to the directory."""
        os.makedirs(dirName, exist_ok = True)
        Utils.WriteCsv(os.path.join(dirName, "metrics.csv"),
                ["epoch", "train_loss", "val_loss", "lr_main", "lr_policy"],
                self.metrics)
        Utils.WriteCsv(os.path.join(dirName, "test_mae.csv"),
                ["task", "mae"],
                [(t, float(v)) for t, v in enumerate(self.testMae)])
        for frame in self.frames:
            frame.Write(dirName)
        config = self.config.AsDict()
        config.update(self.extraConfig)
        Utils.WriteJson(os.path.join(dirName, "config.json"), config)
        if self.split is not None:
            Utils.WriteJson(os.path.join(dirName, "split.json"),
                    dict(primary = self.split.primary.tolist(),
                         guidance = self.split.guidance.tolist(),
                         validation = self.split.validation.tolist(),
                         test = self.split.test.tolist()))


class MultiTaskTrainer(object):
    """Trains one multi-task model on a dataset with the configured
       method."""

    def __init__(self, config, dataset, trainIndices, logPrefix = ""):
        self.config = config
        self.dataset = dataset
        self.logPrefix = logPrefix
        trainIndices = numpy.asarray(trainIndices)
        if config.method in AIM_MODES:
            split = SynthBench.SplitGuidance(len(trainIndices),
                    config.guidanceFraction, config.seed)
            primary = trainIndices[split.primary]
            guidance = trainIndices[split.guidance]
        else:
            primary = trainIndices.copy()
            guidance = trainIndices[:0]
        self.split = SynthBench.DatasetSplit(primary, guidance,
                dataset.validation, dataset.test)
        self.model = SynthBench.MlpModel.Initial(dataset.inputDim,
                dataset.numTasks, config.hiddenSize, config.seed)
        self.adam = Optim.AdamState(self.model.params.shape,
                lr = config.mainLr)
        self.plateau = Optim.PlateauScheduler(config.mainLr,
                patience = config.plateauPatience,
                factor = config.plateauFactor, minLr = config.minLr)
        self.policy = self.cosine = None
        if config.method in AIM_MODES:
            self.policy = Policy.PolicyState(AIM_MODES[config.method],
                    dataset.numTasks, temperature = config.temperature,
                    lambdaG = config.lambdaG, lambdaM = config.lambdaM,
                    lambdaP = config.lambdaP, lr = config.policyLr or 1.0,
                    optimizer = config.policyOptimizer)
            self.policy.tau[...] = config.tauInit
            if config.policyLr > 0:
                self.cosine = Optim.CosineRestartScheduler(config.policyLr,
                        t0 = config.cosineT0, tMult = config.cosineTMult,
                        etaMin = config.cosineEtaMin)
        self.primaryRng = numpy.random.default_rng([config.seed, 1])
        self.guidanceRng = numpy.random.default_rng([config.seed, 2])
        self.shuffleRng = numpy.random.default_rng([config.seed, 3])
        self.guidanceQueue = []

    def PrimaryBatches(self):
        """Return the primary batches (dataset indices) for one epoch."""
        order = self.split.primary[self.primaryRng.permutation(
                len(self.split.primary))]
        size = self.config.batchSize
        return [order[i:i + size] for i in range(0, len(order), size)]

    def GuidanceBatch(self):
        """Return the next guidance batch; the guidance set is reshuffled
           each time it is exhausted."""
        size = min(self.config.batchSize, len(self.split.guidance))
        if len(self.guidanceQueue) < size:
            order = self.split.guidance[self.guidanceRng.permutation(
                    len(self.split.guidance))]
            self.guidanceQueue = list(order)
        batch = numpy.array(self.guidanceQueue[:size])
        del self.guidanceQueue[:size]
        return batch

    def Step(self, primaryIndices, epoch, step, policyLr = None):
        """Perform one training step on the primary batch."""
        primaryBatch = self.dataset.Batch(primaryIndices)
        if self.policy is None:
            shuffleSeed = None
            if self.config.pcgradShuffle:
                shuffleSeed = int(self.shuffleRng.integers(2 ** 31))
            return BaselineTrainStep(self.model, self.config.method,
                    primaryBatch, self.adam, shuffleSeed, epoch, step)
        guidanceBatch = self.dataset.Batch(self.GuidanceBatch())
        if self.cosine is None:
            policyLr = 0.0
        return AimTrainStep(self.model, self.policy, primaryBatch,
                guidanceBatch, self.adam, policyLr, epoch, step)

    def ValidationLoss(self):
        losses = self.model.TaskLosses(*self.dataset.Batch(
                self.split.validation))
        return float(losses.mean())

    def Train(self):
        """Train the model and return the run record."""
        config = self.config
        record = RunRecord(config, config.seed)
        record.split = self.split
        startTime = time.time()
        valHistory = []
        bestParams = self.model.params.copy()
        for epoch in range(1, config.epochs + 1):
            lrMain = self.adam.lr
            lrPolicy = 0.0
            if self.cosine is not None:
                lrPolicy = self.cosine.LearningRate()
            window = []
            trainLosses = []
            for step, indices in enumerate(self.PrimaryBatches()):
                info = self.Step(indices, epoch, step, lrPolicy)
                trainLosses.append(float(info.bundle.losses.mean()))
                if info.result is not None:
                    window.append(info.result)
            valLoss = self.ValidationLoss()
            if not math.isfinite(valLoss):
                raise Exceptions.NonFiniteLoss(epoch = epoch, step = "val",
                        losses = valLoss)
            trainLoss = float(numpy.mean(trainLosses))
            record.metrics.append((epoch, trainLoss, valLoss, lrMain,
                    lrPolicy))
            self.adam.lr = self.plateau.Step(valLoss)
            if self.cosine is not None:
                self.cosine.Step()
            if self.policy is not None and epoch % config.diagEvery == 0:
                record.frames.append(Diagnostics.RecordDiagnostics(window,
                        self.policy, epoch))
            cx_Logging.Debug("%sepoch %d: train %.6g val %.6g lr %.3g",
                    self.logPrefix, epoch, trainLoss, valLoss, lrMain)
            valHistory.append(valLoss)
            stop, bestEpoch = EarlyStopCheck(valHistory, config.patience)
            if bestEpoch == epoch:
                bestParams = self.model.params.copy()
            if stop:
                cx_Logging.Trace("%sstopping early at epoch %d (best %d)",
                        self.logPrefix, epoch, bestEpoch)
                break
        self.model.params = bestParams
        record.bestEpoch = bestEpoch
        record.testMae = self.model.MeanAbsoluteErrors(*self.dataset.Batch(
                self.split.test))
        record.wallClock = time.time() - startTime
        cx_Logging.Trace("%s%s: %d epochs, best %d, test MAE %s (%.1fs)",
                self.logPrefix, config.method, record.epochsExecuted,
                bestEpoch, ", ".join("%.4g" % v for v in record.testMae),
                record.wallClock)
        return record


def TrainStl(config, dataset, task, trainIndices = None, logPrefix = ""):
    """Train a single-task reference model for the task on the training
       indices (the whole train pool by default) and return the test mean
       absolute error of the task."""
    if trainIndices is None:
        trainIndices = dataset.train
    stlDataset = SynthBench.Dataset(dataset.inputs,
            dataset.targets[:, task:task + 1], len(dataset.train),
            len(dataset.validation), len(dataset.test))
    trainer = MultiTaskTrainer(config.Copy(method = "ls"), stlDataset,
            trainIndices,
            logPrefix = "%sSTL task %d: " % (logPrefix, task))
    record = trainer.Train()
    return float(record.testMae[0]), record
