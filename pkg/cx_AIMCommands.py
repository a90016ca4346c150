"""Command line interface for running the toy landscapes and the synthetic
   benchmark and for exporting the recorded policy diagnostics."""

import argparse
import concurrent.futures
import json
import os
import sys

import cx_Logging
import numpy

from cx_AIM import Diagnostics, Exceptions, Metrics, SynthBench, ToyLand
from cx_AIM import Trainer, Utils

LOG_LEVELS = dict(debug = cx_Logging.DEBUG, info = cx_Logging.INFO,
        warning = cx_Logging.WARNING, error = cx_Logging.ERROR,
        critical = cx_Logging.CRITICAL)

# errors that are reported with the usage exit code
USAGE_ERRORS = (Exceptions.UnknownMethod, Exceptions.UnknownProblem,
        Exceptions.DiagnosticsFilesError)

# keys of the synthetic benchmark that are not part of the dataset or the
# training configuration
SWEEP_DEFAULTS = dict(sizes = None, methods = list(Trainer.METHODS),
        seeds = 3, workers = 1)

PRESETS = {
    "low-data" : dict(n_tasks = 4, conflict_angle = 120.0,
            gram_mode = "nearest", sizes = [500, 5000], seeds = 3,
            methods = list(Trainer.METHODS))
}


def _IntList(value):
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expecting comma separated "
                "integers, got %r" % value)


def _MethodList(value):
    methods = [v.strip() for v in value.split(",") if v.strip()]
    for method in methods:
        if method not in Trainer.METHODS:
            raise argparse.ArgumentTypeError("invalid method %r (choose "
                    "from %s)" % (method, ", ".join(Trainer.METHODS)))
    return methods


def _AddSettingOptions(parser, defaults, skip = ()):
    """Add one option per configuration key with the default value's type;
       defaults stay None so that unset flags do not override the
       configuration file."""
    for key, default in sorted(defaults.items()):
        if key in skip:
            continue
        flag = "--" + key.replace("_", "-")
        helpText = "override the %s setting (default %r)" % (key, default)
        if isinstance(default, bool):
            parser.add_argument(flag, dest = key, default = None,
                    action = argparse.BooleanOptionalAction, help = helpText)
        else:
            valueType = str if isinstance(default, str) else type(default)
            parser.add_argument(flag, dest = key, default = None,
                    type = valueType, help = helpText)


def CreateParser():
    common = argparse.ArgumentParser(add_help = False)
    common.add_argument("--config", metavar = "PATH",
            help = "JSON configuration document; flags override its values")
    common.add_argument("--out", metavar = "DIR",
            default = os.environ.get("AIM_OUT_DIR", "aim_out"),
            help = "output root directory (default $AIM_OUT_DIR or aim_out)")
    common.add_argument("--seed", type = int,
            help = "base seed for data generation and training")
    common.add_argument("--seeds", type = int,
            help = "number of independent runs (seed, seed + 1, ...)")
    common.add_argument("--log-level", default = "info",
            choices = sorted(LOG_LEVELS), help = "logging level")
    common.add_argument("--log-file", metavar = "FILE",
            help = "log to this file instead of stderr")
    parser = argparse.ArgumentParser(prog = "aim",
            description = "adaptive intervention for multi-task learning")
    subparsers = parser.add_subparsers(dest = "command", required = True)

    toyParser = subparsers.add_parser("run-toy", parents = [common],
            help = "compare methods on a two-task toy landscape")
    toyParser.add_argument("--problem", choices = ToyLand.PROBLEMS)
    toyParser.add_argument("--method",
            choices = ToyLand.TOY_METHODS + ("all",))
    toyParser.add_argument("--steps", type = int)
    toyParser.add_argument("--lr", type = float)
    toyParser.add_argument("--resolution", type = int,
            help = "grid points per axis used for the Pareto front")
    toyParser.add_argument("--policy-lr", dest = "policy_lr", type = float)
    toyParser.add_argument("--temperature", type = float)
    toyParser.set_defaults(func = RunToy)

    synthParser = subparsers.add_parser("run-synth", parents = [common],
            help = "train the methods on the synthetic benchmark")
    synthParser.add_argument("--sizes", type = _IntList,
            help = "comma separated training subset sizes")
    synthParser.add_argument("--methods", type = _MethodList,
            help = "comma separated methods (%s)" % \
                    ", ".join(Trainer.METHODS))
    synthParser.add_argument("--workers", type = int,
            help = "number of worker processes (default 1)")
    synthParser.add_argument("--preset", choices = sorted(PRESETS),
            help = "start from a predefined experiment")
    _AddSettingOptions(synthParser, SynthBench.SyntheticSpec().AsDict(),
            skip = ("seed",))
    _AddSettingOptions(synthParser, Trainer.TrainConfig().AsDict(),
            skip = ("seed", "method"))
    synthParser.set_defaults(func = RunSynth)

    diagParser = subparsers.add_parser("export-diag", parents = [common],
            help = "export the diagnostics of a run in long format")
    diagParser.add_argument("runDir", metavar = "RUN_DIR",
            help = "run directory containing diag_epoch_<e>.json files")
    diagParser.add_argument("--output", metavar = "FILE",
            help = "output file (default RUN_DIR/diagnostics.csv)")
    diagParser.set_defaults(func = ExportDiag)
    return parser


def ResolveSettings(options, validKeys, defaults = None):
    """Return the settings resolved from the defaults, the configuration
       document and the command line flags, in that order."""
    values = dict(defaults or {})
    if options.config is not None:
        values.update(Utils.LoadConfig(options.config, validKeys))
    for key in validKeys:
        value = getattr(options, key, None)
        if value is not None:
            values[key] = value
    return values


def _WriteError(error, dirName):
    Utils.WriteJson(os.path.join(dirName, "error.json"), error.ErrorRecord())


def RunToy(options):
    """Run the toy comparison and write the front and trajectories."""
    validKeys = list(ToyLand.ToyConfig().AsDict())
    config = ToyLand.ToyConfig(ResolveSettings(options, validKeys))
    problem = ToyLand.ToyProblem(config.problem)
    outDir = os.path.join(options.out, "toy", config.problem)
    front, trajectories = ToyLand.CompareMethods(problem, config.methods,
            steps = config.steps, lr = config.lr,
            resolution = config.resolution, policyLr = config.policyLr,
            temperature = config.temperature)
    Utils.WriteJson(os.path.join(outDir, "config.json"), config.AsDict())
    Utils.WriteCsv(os.path.join(outDir, "front.csv"),
            ["x", "y", "L1", "L2"], front.points.tolist())
    header = ["step", "x", "y", "L1", "L2", "dist_front"]
    finalRows = []
    for method in config.methods:
        for startIndex, start in enumerate(ToyLand.START_GRID):
            trajectory = trajectories[method, start]
            fileName = os.path.join(outDir,
                    "trajectory_%s_start%d.csv" % (method, startIndex))
            Utils.WriteCsv(fileName, header, trajectory.rows)
            distance = trajectory.rows[-1][-1]
            finalRows.append((method, startIndex, start[0], start[1],
                    distance))
            print("%s start %d (%g, %g): final distance to front %.6g" % \
                    (method, startIndex, start[0], start[1], distance))
    Utils.WriteCsv(os.path.join(outDir, "final_distances.csv"),
            ["method", "start", "x0", "y0", "dist_front"], finalRows)
    cx_Logging.Trace("toy results written to %s", outDir)
    return finalRows


def _TrainJob(job):
    """Train one run; module level so that it can be sent to a worker
       process."""
    configValues, dataset, size, runDir, logPrefix = job
    config = Trainer.TrainConfig(configValues)
    trainer = Trainer.MultiTaskTrainer(config, dataset,
            dataset.TrainSubset(size), logPrefix)
    try:
        return trainer.Train()
    except Exceptions.BaseError as error:
        _WriteError(error, runDir)
        raise


def _StlJob(job):
    configValues, dataset, task, runDir, logPrefix = job
    config = Trainer.TrainConfig(configValues)
    try:
        return Trainer.TrainStl(config, dataset, task, logPrefix = logPrefix)
    except Exceptions.BaseError as error:
        _WriteError(error, runDir)
        raise


def _Map(function, jobs, workers):
    if workers <= 1:
        return [function(j) for j in jobs]
    with concurrent.futures.ProcessPoolExecutor(workers) as executor:
        return list(executor.map(function, jobs))


def SummaryRows(maeTables, stlMae, methods, sizes, seeds):
    """Return the summary rows (method, size, delta_m_mean, delta_m_std,
       mean_rank) from the test errors of every run; maeTables maps (method,
       size, seed) to the per-task errors and stlMae maps seed to the single
       task reference errors."""
    rows = []
    for size in sizes:
        ranks = []
        for seed in seeds:
            table = [maeTables[m, size, seed] for m in methods]
            ranks.append(Metrics.MeanRank(table))
        meanRanks = numpy.mean(ranks, axis = 0)
        for methodIndex, method in enumerate(methods):
            deltas = [Metrics.DeltaM(maeTables[method, size, s], stlMae[s]) \
                    for s in seeds]
            rows.append((method, size, float(numpy.mean(deltas)),
                    float(numpy.std(deltas)), float(meanRanks[methodIndex])))
    return rows


def LowDataTrend(rows):
    """Return the rows (size, ls_delta_m, best_aim_method, best_aim_delta_m,
       gap) comparing the best adaptive method with linear scalarization at
       each size, and whether the adaptive advantage holds at the smallest
       size and shrinks at the largest one. No rows are returned unless both
       linear scalarization and an adaptive method were run."""
    lsValues = {}
    aimValues = {}
    for method, size, deltaMean, deltaStd, meanRank in rows:
        if method == "ls":
            lsValues[size] = deltaMean
        elif method in Trainer.AIM_MODES:
            best = aimValues.get(size)
            if best is None or deltaMean < best[1]:
                aimValues[size] = (method, deltaMean)
    sizes = sorted(set(lsValues) & set(aimValues))
    trendRows = []
    for size in sizes:
        method, aimDelta = aimValues[size]
        trendRows.append((size, lsValues[size], method, aimDelta,
                aimDelta - lsValues[size]))
    if not trendRows:
        return trendRows, False
    smallGap = trendRows[0][-1]
    largeGap = trendRows[-1][-1]
    holds = smallGap < 0 and (len(trendRows) == 1 or \
            abs(smallGap) > abs(largeGap))
    cx_Logging.Trace("adaptive minus LS delta_m: %s",
            ", ".join("%g at size %d" % (r[-1], r[0]) for r in trendRows))
    return trendRows, holds


def RunSynth(options):
    """Train the single task references and then every method on every
       training subset size for every seed and write the summary."""
    specKeys = list(SynthBench.SyntheticSpec().AsDict())
    trainKeys = [k for k in Trainer.TrainConfig().AsDict() if k != "method"]
    validKeys = sorted(set(specKeys + trainKeys + list(SWEEP_DEFAULTS)))
    defaults = dict(SWEEP_DEFAULTS)
    if options.preset is not None:
        defaults.update(PRESETS[options.preset])
    values = ResolveSettings(options, validKeys, defaults)
    for method in values["methods"]:
        if method not in Trainer.METHODS:
            raise Exceptions.UnknownMethod(method = method,
                    valid = ", ".join(Trainer.METHODS))
    spec = SynthBench.SyntheticSpec(dict((k, values[k]) \
            for k in specKeys if k in values))
    if values["sizes"] is None:
        values["sizes"] = [spec.nTrain]
    sizes = [int(s) for s in values["sizes"]]
    if not sizes or min(sizes) < 1 or max(sizes) > spec.nTrain:
        raise Exceptions.ConfigurationError(
                reason = "sizes must lie in [1, n_train]")
    if values["seeds"] < 1 or values["workers"] < 1:
        raise Exceptions.ConfigurationError(
                reason = "seeds and workers must be at least 1")
    trainValues = dict((k, values[k]) for k in trainKeys if k in values)
    baseConfig = Trainer.TrainConfig(trainValues)
    values.update(spec.AsDict())
    values.update(baseConfig.AsDict())
    del values["method"]
    outDir = options.out
    Utils.WriteJson(os.path.join(outDir, "config.json"), values)

    dataset = SynthBench.Generate(spec)
    seeds = [baseConfig.seed + i for i in range(values["seeds"])]
    methods = values["methods"]
    extraConfig = dict(dataset = spec.AsDict())

    # single task references on the whole training pool
    stlJobs = []
    for seed in seeds:
        configValues = baseConfig.Copy(seed = seed).AsDict()
        for task in range(spec.nTasks):
            runDir = os.path.join(outDir, "stl", "seed_%d" % seed,
                    "task_%d" % task)
            stlJobs.append((configValues, dataset, task, runDir,
                    "seed %d: " % seed))
    stlMae = {}
    for job, (mae, record) in zip(stlJobs, _Map(_StlJob, stlJobs,
            values["workers"])):
        configValues, dataset, task, runDir, logPrefix = job
        record.extraConfig = dict(extraConfig, task = task)
        record.Write(runDir)
        stlMae.setdefault(configValues["seed"], []).append(mae)
    Utils.WriteCsv(os.path.join(outDir, "stl_mae.csv"),
            ["seed", "task", "mae"],
            [(s, t, v) for s in seeds for t, v in enumerate(stlMae[s])])

    # every method on every size and seed
    jobs = []
    for method in methods:
        for size in sizes:
            for seed in seeds:
                config = baseConfig.Copy(method = method, seed = seed)
                runDir = os.path.join(outDir, "runs", method,
                        "size_%d" % size, "seed_%d" % seed)
                logPrefix = "%s size %d seed %d: " % (method, size, seed)
                jobs.append((config.AsDict(), dataset, size, runDir,
                        logPrefix))
    maeTables = {}
    for job, record in zip(jobs, _Map(_TrainJob, jobs, values["workers"])):
        configValues, dataset, size, runDir, logPrefix = job
        record.extraConfig = dict(extraConfig, train_size = size)
        record.Write(runDir)
        maeTables[configValues["method"], size, configValues["seed"]] = \
                record.testMae

    rows = SummaryRows(maeTables, stlMae, methods, sizes, seeds)
    Utils.WriteCsv(os.path.join(outDir, "summary.csv"),
            ["method", "size", "delta_m_mean", "delta_m_std", "mean_rank"],
            rows)
    for method, size, deltaMean, deltaStd, meanRank in rows:
        print("%-10s size %6d: delta_m %8.3f%% +/- %.3f, mean rank %.2f" % \
                (method, size, deltaMean, deltaStd, meanRank))
    trendRows, holds = LowDataTrend(rows)
    if trendRows:
        Utils.WriteCsv(os.path.join(outDir, "trend.csv"),
                ["size", "ls_delta_m", "best_aim_method", "best_aim_delta_m",
                 "gap"], trendRows)
        print("low-data trend %s" % ("holds" if holds else "does not hold"))
    cx_Logging.Trace("synthetic results written to %s", outDir)
    return rows


def ExportDiag(options):
    """Export the diagnostics of the run directory as long format rows."""
    fileName = options.output
    if fileName is None:
        fileName = os.path.join(options.runDir, "diagnostics.csv")
    rows = Diagnostics.ExportDiagnostics(options.runDir, fileName)
    print("%d rows written to %s" % (len(rows), fileName))
    return rows


def Main(argv = None):
    parser = CreateParser()
    try:
        options = parser.parse_args(argv)
    except SystemExit as exitInfo:
        return exitInfo.code
    if options.log_file is not None:
        cx_Logging.StartLogging(options.log_file,
                LOG_LEVELS[options.log_level])
    else:
        cx_Logging.StartLoggingStderr(LOG_LEVELS[options.log_level])
    try:
        options.func(options)
    except Exceptions.BaseError as error:
        cx_Logging.Error("%s", error.message)
        print(json.dumps(error.ErrorRecord(), sort_keys = True),
                file = sys.stderr)
        if isinstance(error, USAGE_ERRORS):
            return 2
        return 1
    finally:
        cx_Logging.StopLogging()
    return 0


if __name__ == "__main__":
    sys.exit(Main())
