"""Defines the diagnostics that make the learned policy interpretable: per
   epoch thresholds, conflict rates, gradient cosines and projection
   weights, their file format and the long format export."""

import json
import os
import re

import numpy

from . import Exceptions, Utils

__all__ = [ "DiagnosticsFrame", "ExportDiagnostics", "ReadFrame",
        "RecordDiagnostics", "DIAG_METRICS" ]

DIAG_METRICS = ("tau", "conflict_rate", "mean_cos", "mean_weight")
FILE_PATTERN = re.compile(r"^diag_epoch_(\d+)\.json$")


class DiagnosticsFrame(object):
    """The four N x N diagnostic matrices recorded for one epoch."""

    def __init__(self, epoch, tau, meanCos, conflictRate, meanWeight):
        self.epoch = epoch
        self.tau = tau
        self.meanCos = meanCos
        self.conflictRate = conflictRate
        self.meanWeight = meanWeight

    def __repr__(self):
        return "<DiagnosticsFrame epoch=%d tasks=%d>" % \
                (self.epoch, self.tau.shape[0])

    @property
    def numTasks(self):
        return self.tau.shape[0]

    def Matrix(self, metric):
        return getattr(self, Utils.AttributeName(metric))

    def AsDict(self):
        """Return the frame as a dictionary with the matrices flattened in
           row-major order."""
        values = dict(epoch = self.epoch, n_tasks = self.numTasks)
        for metric in DIAG_METRICS:
            values[metric] = [float(v) for v in self.Matrix(metric).ravel()]
        return values

    def FileName(self):
        return "diag_epoch_%d.json" % self.epoch

    def Write(self, dirName):
        Utils.WriteJson(os.path.join(dirName, self.FileName()),
                self.AsDict())


def RecordDiagnostics(window, policy, epoch):
    """Return the diagnostics frame summarising the intervention results of
       the steps in the window."""
    if not window:
        raise Exceptions.ConfigurationError(
                reason = "diagnostics window for epoch %d is empty" % epoch)
    cosines = numpy.array([r.cosMatrix for r in window])
    weights = numpy.array([r.weightMatrix for r in window])
    conflictRate = (cosines < 0).mean(axis = 0)
    return DiagnosticsFrame(epoch, policy.TauMatrix(), cosines.mean(axis = 0),
            conflictRate, weights.mean(axis = 0))


def ReadFrame(fileName):
    """Read a diagnostics frame written by DiagnosticsFrame.Write()."""
    with open(fileName, encoding = "utf-8") as inFile:
        values = json.load(inFile)
    numTasks = int(values["n_tasks"])
    matrices = []
    for metric in DIAG_METRICS:
        matrix = numpy.array(values[metric], dtype = numpy.float64)
        matrices.append(matrix.reshape(numTasks, numTasks))
    tau, conflictRate, meanCos, meanWeight = matrices
    return DiagnosticsFrame(int(values["epoch"]), tau, meanCos, conflictRate,
            meanWeight)


def ExportDiagnostics(runDir, fileName = None):
    """Write (or return, if no file name is given) the long format rows
       (epoch, i, j, metric, value) for every diagnostics file in the run
       directory, ordered by epoch."""
    if not os.path.isdir(runDir):
        raise Exceptions.DiagnosticsFilesError(dirName = runDir,
                fileNames = "directory does not exist")
    fileNames = []
    for name in os.listdir(runDir):
        match = FILE_PATTERN.match(name)
        if match is not None:
            fileNames.append((int(match.group(1)), name))
    if not fileNames:
        raise Exceptions.DiagnosticsFilesError(dirName = runDir,
                fileNames = "no diag_epoch_<e>.json files")
    fileNames.sort()
    frames = []
    badFileNames = []
    for epoch, name in fileNames:
        path = os.path.join(runDir, name)
        try:
            frame = ReadFrame(path)
        except (OSError, ValueError, KeyError, TypeError):
            badFileNames.append(path)
            continue
        frames.append(frame)
    if badFileNames:
        error = Exceptions.DiagnosticsFilesError(dirName = runDir,
                fileNames = ", ".join(badFileNames))
        error.details.extend(badFileNames)
        raise error
    rows = []
    for frame in frames:
        for metric in DIAG_METRICS:
            matrix = frame.Matrix(metric)
            for i in range(frame.numTasks):
                for j in range(frame.numTasks):
                    rows.append((frame.epoch, i, j, metric,
                            float(matrix[i, j])))
    if fileName is not None:
        Utils.WriteCsv(fileName, ["epoch", "i", "j", "metric", "value"], rows)
    return rows
