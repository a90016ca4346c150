"""Tests for the toy landscapes, the Pareto front oracle and trajectory
   recording."""

import math

import numpy
import pytest

from cx_AIM import Exceptions, ToyLand

# mean final distances to the front (grid of 1201 points per axis) measured
# from the fixed starts with the default budget and policy settings
VALLEY_MEAN_DISTANCES = dict(ls = 4.53e-4, pcgrad = 1.59e-3,
        aim_scalar = 1.26e-3, aim_matrix = 9.76e-4)


@pytest.fixture(scope = "module")
def convexFront():
    problem = ToyLand.ToyProblem(ToyLand.CONVEX_PAIR)
    return ToyLand.DefaultFront(problem)


@pytest.fixture(scope = "module")
def valleyComparison():
    problem = ToyLand.ToyProblem(ToyLand.CONFLICT_VALLEY)
    front = ToyLand.ParetoFrontOracle(problem, 1201)
    return ToyLand.CompareMethods(problem, front = front)


def TestConvexPairExamples():
    problem = ToyLand.ToyProblem(ToyLand.CONVEX_PAIR)
    loss1, loss2, grad1, grad2 = problem.Evaluate((-1.0, 0.0))
    assert loss1 == 0.0
    numpy.testing.assert_array_equal(grad1, [0.0, 0.0])
    loss1, loss2, grad1, grad2 = problem.Evaluate((0.0, 0.0))
    assert (loss1, loss2) == (1.0, 1.0)


@pytest.mark.parametrize("name", ToyLand.PROBLEMS)
def TestGradientsMatchFiniteDifferences(name):
    problem = ToyLand.ToyProblem(name)
    rng = numpy.random.default_rng(8)
    step = 1e-6
    for point in rng.uniform(-5.5, 5.5, (25, 2)):
        loss1, loss2, grad1, grad2 = problem.Evaluate(point)
        for axis in range(2):
            offset = numpy.zeros(2)
            offset[axis] = step
            plus = problem.Evaluate(point + offset)
            minus = problem.Evaluate(point - offset)
            for task, grad in enumerate((grad1, grad2)):
                numeric = (plus[task] - minus[task]) / (2 * step)
                assert grad[axis] == pytest.approx(numeric, rel = 1e-6,
                        abs = 1e-6)


def TestEvaluateOutsideDomain():
    problem = ToyLand.ToyProblem(ToyLand.CONFLICT_VALLEY)
    with pytest.raises(Exceptions.DomainError):
        problem.Evaluate((6.5, 0.0))


def TestUnknownProblem():
    with pytest.raises(Exceptions.UnknownProblem):
        ToyLand.ToyProblem("rosenbrock")


def TestConvexFrontLiesOnSegment():
    problem = ToyLand.ToyProblem(ToyLand.CONVEX_PAIR)
    front = ToyLand.ParetoFrontOracle(problem, 1201)
    cell = 12.0 / 1200
    points = front.points
    assert numpy.all(numpy.abs(points[:, 1]) <= cell)
    assert numpy.all(points[:, 0] >= -1 - cell)
    assert numpy.all(points[:, 0] <= 1 + cell)


def TestFrontIsNondominated():
    problem = ToyLand.ToyProblem(ToyLand.CONFLICT_VALLEY)
    front = ToyLand.ParetoFrontOracle(problem, 301)
    losses = front.losses
    noWorse = numpy.all(losses[:, numpy.newaxis, :] <= \
            losses[numpy.newaxis, :, :], axis = 2)
    better = numpy.any(losses[:, numpy.newaxis, :] < \
            losses[numpy.newaxis, :, :], axis = 2)
    assert not numpy.any(noWorse & better)


def TestRefinementNeverIncreasesDistance():
    problem = ToyLand.ToyProblem(ToyLand.CONVEX_PAIR)
    coarse = ToyLand.ParetoFrontOracle(problem, 301)
    fine = ToyLand.ParetoFrontOracle(problem, 601)
    for query in ((2.0, 2.0), (0.3, 3.5), (4.0, 0.2)):
        assert ToyLand.DistanceToFront(query, fine) <= \
                ToyLand.DistanceToFront(query, coarse) + 1e-12


def TestDistanceToFront(convexFront):
    problem = ToyLand.ToyProblem(ToyLand.CONVEX_PAIR)
    loss1, loss2, grad1, grad2 = problem.Evaluate((0.0, 1.0))
    assert (loss1, loss2) == (2.0, 2.0)
    assert ToyLand.DistanceToFront((loss1, loss2), convexFront) == \
            pytest.approx(math.sqrt(2), rel = 1e-6)
    assert ToyLand.DistanceToFront((1.0, 1.0), convexFront) < 1e-6


def TestDistanceToEmptyFront():
    front = ToyLand.ParetoFront(numpy.empty((0, 4)), 100)
    with pytest.raises(Exceptions.EmptyFront):
        ToyLand.DistanceToFront((1.0, 1.0), front)


def TestConvexPairAllMethodsReachFront(convexFront):
    problem = ToyLand.ToyProblem(ToyLand.CONVEX_PAIR)
    front, trajectories = ToyLand.CompareMethods(problem, front = convexFront)
    assert len(trajectories) == len(ToyLand.TOY_METHODS) * \
            len(ToyLand.START_GRID)
    for (method, start), trajectory in trajectories.items():
        assert len(trajectory.rows) == ToyLand.DEFAULT_STEPS + 1
        assert trajectory.rows[-1][-1] < 1e-2, (method, start)


def TestConflictValleyMethodsApproachFront(valleyComparison):
    front, trajectories = valleyComparison
    for method in ToyLand.TOY_METHODS:
        runs = [trajectories[method, s] for s in ToyLand.START_GRID]
        initial = numpy.mean([t.rows[0][-1] for t in runs])
        final = numpy.mean([t.rows[-1][-1] for t in runs])
        assert math.isfinite(final) and final >= 0
        assert final < initial, method
        for trajectory in runs:
            assert numpy.all(numpy.abs(trajectory.final) <= 6.0)


def _MeanFinalDistances(trajectories):
    return dict((m, float(numpy.mean([trajectories[m, s].rows[-1][-1] \
            for s in ToyLand.START_GRID]))) for m in ToyLand.TOY_METHODS)


def TestConflictValleyFinalDistances(valleyComparison):
    front, trajectories = valleyComparison
    distances = _MeanFinalDistances(trajectories)
    for method, expected in VALLEY_MEAN_DISTANCES.items():
        assert distances[method] == pytest.approx(expected, rel = 1e-2), \
                method
    assert distances["aim_matrix"] <= 1.1 * distances["pcgrad"]
    assert distances["aim_matrix"] < distances["aim_scalar"]


@pytest.mark.parametrize("method", ToyLand.TOY_METHODS)
def TestReplayIsBitwiseExact(method):
    problem = ToyLand.ToyProblem(ToyLand.CONFLICT_VALLEY)
    trajectory = ToyLand.RunTrajectory(problem, method, (-3.0, 3.0),
            steps = 300)
    assert len(trajectory.updates) == 300
    numpy.testing.assert_array_equal(ToyLand.ReplayTrajectory(trajectory),
            trajectory.final)


def TestAdaptivePolicyIsUpdated():
    problem = ToyLand.ToyProblem(ToyLand.CONVEX_PAIR)
    trajectory = ToyLand.RunTrajectory(problem, "aim_matrix", (3.0, 3.0),
            steps = 50)
    assert trajectory.policy is not None
    assert numpy.any(trajectory.policy.tau != 0)


def TestToyConfig():
    config = ToyLand.ToyConfig(dict(problem = "conflict_valley",
            method = "ls", policy_lr = 1e-3))
    assert config.methods == ("ls",)
    assert config.policyLr == 1e-3
    assert ToyLand.ToyConfig().methods == ToyLand.TOY_METHODS
    with pytest.raises(Exceptions.UnknownMethod):
        ToyLand.ToyConfig(dict(method = "nash"))


def TestAnalyticFrontAgreesWithGrid():
    problem = ToyLand.ToyProblem(ToyLand.CONVEX_PAIR)
    analytic = ToyLand.AnalyticFront(problem)
    grid = ToyLand.ParetoFrontOracle(problem, 601)
    numpy.testing.assert_array_equal(analytic.points[:, 1], 0.0)
    assert analytic.points[0, 0] == -1.0 and analytic.points[-1, 0] == 1.0
    for query in ((2.0, 2.0), (0.3, 3.5), (4.0, 0.2), (1.0, 1.0)):
        assert ToyLand.DistanceToFront(query, analytic) <= \
                ToyLand.DistanceToFront(query, grid) + 1e-3


def TestAnalyticFrontOnlyForConvexPair():
    problem = ToyLand.ToyProblem(ToyLand.CONFLICT_VALLEY)
    with pytest.raises(Exceptions.ConfigurationError):
        ToyLand.AnalyticFront(problem)
    assert ToyLand.DefaultFront(problem, 301).resolution == 301


def TestDistancesToFrontMatchPointwise(convexFront):
    rng = numpy.random.default_rng(9)
    losses = rng.uniform(0.0, 10.0, (150, 2))
    distances = ToyLand.DistancesToFront(losses, convexFront)
    assert distances.shape == (150,)
    for row, distance in zip(losses, distances):
        assert ToyLand.DistanceToFront(row, convexFront) == \
                pytest.approx(distance, rel = 1e-14, abs = 1e-15)


def TestBaselineTrajectoryHasNoPolicy():
    problem = ToyLand.ToyProblem(ToyLand.CONVEX_PAIR)
    trajectory = ToyLand.RunTrajectory(problem, "pcgrad", (0.0, 3.0),
            steps = 5)
    assert trajectory.policy is None
    assert all(math.isnan(r[-1]) for r in trajectory.rows)
