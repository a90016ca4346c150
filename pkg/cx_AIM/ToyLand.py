"""Defines the two-task toy landscapes with analytic gradients, a grid based
   Pareto front oracle and trajectory recording for comparing methods."""

import math

import cx_Logging
import numpy

from . import Baselines, Exceptions, Optim, Policy, Utils

__all__ = [ "CONVEX_PAIR", "CONFLICT_VALLEY", "PROBLEMS", "START_GRID",
        "TOY_METHODS", "ParetoFront", "ToyConfig", "ToyProblem", "Trajectory",
        "AnalyticFront", "CombinedGradient", "CompareMethods", "DefaultFront",
        "DistanceToFront", "DistancesToFront", "ParetoFrontOracle",
        "ReplayTrajectory", "RunTrajectory" ]

CONVEX_PAIR = "convex_pair"
CONFLICT_VALLEY = "conflict_valley"
PROBLEMS = (CONVEX_PAIR, CONFLICT_VALLEY)
TOY_METHODS = ("ls", "pcgrad", "aim_scalar", "aim_matrix")
START_GRID = ((0.0, 3.0), (3.0, 3.0), (-3.0, 3.0), (3.0, -3.0), (-3.0, -3.0))
DEFAULT_STEPS = 2000
DEFAULT_LR = 0.01
DEFAULT_RESOLUTION = 4801
ANALYTIC_POINTS = 4001

# rows of steps per block when measuring distances to the front
DISTANCE_BLOCK = 64


class ToyConfig(object):
    """Settings of a toy comparison run."""

    def __init__(self, options = None):
        self.problem = CONVEX_PAIR
        self.method = "all"
        self.steps = DEFAULT_STEPS
        self.lr = DEFAULT_LR
        self.resolution = None
        self.policyLr = 5e-4
        self.temperature = 10.0
        self.seed = 0
        Utils.SetOptions(self, options)
        self.Validate()

    def AsDict(self):
        return dict((Utils.KeyName(n), v) for n, v in vars(self).items())

    @property
    def methods(self):
        if self.method == "all":
            return TOY_METHODS
        return (self.method,)

    def Validate(self):
        if self.problem not in PROBLEMS:
            raise Exceptions.UnknownProblem(problem = self.problem,
                    valid = ", ".join(PROBLEMS))
        if self.method != "all" and self.method not in TOY_METHODS:
            raise Exceptions.UnknownMethod(method = self.method,
                    valid = ", ".join(TOY_METHODS + ("all",)))
        if self.steps < 1 or not self.lr > 0 or \
                (self.resolution is not None and self.resolution < 100):
            raise Exceptions.ConfigurationError(
                    reason = "steps must be at least 1, lr positive and "
                            "resolution at least 100")


class ToyProblem(object):
    """A two-task problem over a square domain. Losses are evaluated on
       arrays of points so the same code serves single points and grids."""

    def __init__(self, name, low = -6.0, high = 6.0):
        if name not in PROBLEMS:
            raise Exceptions.UnknownProblem(problem = name,
                    valid = ", ".join(PROBLEMS))
        self.name = name
        self.low = low
        self.high = high

    def __repr__(self):
        return "<ToyProblem %s>" % self.name

    def Losses(self, x, y):
        """Return the two task losses for arrays of coordinates."""
        if self.name == CONVEX_PAIR:
            loss1 = (x + 1) ** 2 + y ** 2
            loss2 = (x - 1) ** 2 + y ** 2
        else:
            bump = 1.5 * numpy.exp(-((x + 1) ** 2 + (y - 1.5) ** 2))
            loss1 = 0.05 * ((x - 4) ** 2 + y ** 2) + bump
            loss2 = (x + 4) ** 2 + 0.5 * (y + 1) ** 2
        return loss1, loss2

    def Gradients(self, x, y):
        """Return the analytic gradients of both losses at a point."""
        if self.name == CONVEX_PAIR:
            grad1 = numpy.array([2 * (x + 1), 2 * y])
            grad2 = numpy.array([2 * (x - 1), 2 * y])
        else:
            bump = 1.5 * math.exp(-((x + 1) ** 2 + (y - 1.5) ** 2))
            grad1 = numpy.array([0.1 * (x - 4) - 2 * (x + 1) * bump,
                    0.1 * y - 2 * (y - 1.5) * bump])
            grad2 = numpy.array([2 * (x + 4), (y + 1)])
        return grad1, grad2

    def Evaluate(self, theta):
        """Return (L1, L2, g1, g2) at the point theta."""
        x, y = (float(v) for v in theta)
        if not (self.low <= x <= self.high and self.low <= y <= self.high):
            raise Exceptions.DomainError(point = (x, y), low = self.low,
                    high = self.high)
        loss1, loss2 = self.Losses(x, y)
        grad1, grad2 = self.Gradients(x, y)
        return float(loss1), float(loss2), grad1, grad2

    def Bundle(self, theta):
        """Return the gradient bundle at the point theta."""
        loss1, loss2, grad1, grad2 = self.Evaluate(theta)
        return Policy.GradientBundle([grad1, grad2], [loss1, loss2])


class ParetoFront(object):
    """Nondominated samples (x, y, L1, L2) sorted by increasing L1."""

    def __init__(self, points, resolution):
        self.points = points
        self.resolution = resolution

    def __len__(self):
        return self.points.shape[0]

    @property
    def losses(self):
        return self.points[:, 2:4]


def _Nondominated(points):
    """Return the nondominated rows of points (x, y, L1, L2), sorted by L1
       then L2; duplicated loss pairs are kept once."""
    order = numpy.lexsort((points[:, 3], points[:, 2]))
    points = points[order]
    bestL2 = numpy.minimum.accumulate(points[:, 3])
    keep = numpy.ones(points.shape[0], dtype = bool)
    keep[1:] = points[1:, 3] < bestL2[:-1]
    return points[keep]


def ParetoFrontOracle(problem, resolution = DEFAULT_RESOLUTION):
    """Return the nondominated subset of a resolution x resolution grid over
       the problem domain. The grid is processed one row at a time and merged
       into a running front."""
    if resolution < 100:
        raise Exceptions.ConfigurationError(
                reason = "front resolution must be at least 100 per axis")
    axis = numpy.linspace(problem.low, problem.high, resolution)
    front = numpy.empty((0, 4))
    for y in axis:
        ys = numpy.full(resolution, y)
        loss1, loss2 = problem.Losses(axis, ys)
        row = numpy.column_stack((axis, ys, loss1, loss2))
        front = _Nondominated(numpy.concatenate((front, _Nondominated(row))))
    cx_Logging.Debug("front for %s at resolution %d has %d points",
            problem.name, resolution, front.shape[0])
    return ParetoFront(front, resolution)


def AnalyticFront(problem, numPoints = ANALYTIC_POINTS):
    """Return the front of a problem whose Pareto set is known in closed
       form, sampled at evenly spaced points of that set. Only ConvexPair has
       one: the segment from (-1, 0) to (1, 0)."""
    if problem.name != CONVEX_PAIR:
        raise Exceptions.ConfigurationError(
                reason = "no analytic front is known for %s" % problem.name)
    if numPoints < 2:
        raise Exceptions.ConfigurationError(
                reason = "an analytic front needs at least 2 points")
    xs = numpy.linspace(-1.0, 1.0, numPoints)
    ys = numpy.zeros(numPoints)
    loss1, loss2 = problem.Losses(xs, ys)
    points = _Nondominated(numpy.column_stack((xs, ys, loss1, loss2)))
    return ParetoFront(points, numPoints)


def DefaultFront(problem, resolution = None):
    """Return the front used to measure trajectories: the analytic front when
       one is known and no grid resolution is requested, otherwise the grid
       oracle."""
    if resolution is None and problem.name == CONVEX_PAIR:
        return AnalyticFront(problem)
    if resolution is None:
        resolution = DEFAULT_RESOLUTION
    return ParetoFrontOracle(problem, resolution)


def DistancesToFront(losses, front):
    """Return the distance to the front for each row (L1, L2) of losses."""
    if front is None or len(front) == 0:
        raise Exceptions.EmptyFront()
    losses = numpy.asarray(losses, dtype = numpy.float64).reshape(-1, 2)
    distances = numpy.empty(losses.shape[0])
    for start in range(0, losses.shape[0], DISTANCE_BLOCK):
        block = losses[start:start + DISTANCE_BLOCK]
        delta = front.losses[numpy.newaxis, :, :] - block[:, numpy.newaxis, :]
        squared = numpy.einsum("ijk,ijk->ij", delta, delta)
        distances[start:start + block.shape[0]] = \
                numpy.sqrt(squared.min(axis = 1))
    return distances


def DistanceToFront(losses, front):
    """Return the minimum Euclidean distance in loss space from the pair of
       losses to any point of the front."""
    return float(DistancesToFront(losses, front)[0])


class Trajectory(object):
    """Record of a run: the start point, each applied update and the points
       and losses visited, plus the policy of the adaptive methods."""

    def __init__(self, problem, method, start, policy = None):
        self.problem = problem
        self.method = method
        self.start = numpy.asarray(start, dtype = numpy.float64)
        self.policy = policy
        self.updates = []
        self.rows = []

    @property
    def final(self):
        if self.rows:
            return numpy.array(self.rows[-1][1:3])
        return self.start.copy()

    def AddRow(self, step, theta, loss1, loss2, distance = math.nan):
        self.rows.append((step, float(theta[0]), float(theta[1]), loss1,
                loss2, distance))

    def MeasureDistances(self, front):
        """Fill in the distance to the front of every recorded row."""
        losses = [r[3:5] for r in self.rows]
        distances = DistancesToFront(losses, front)
        self.rows = [r[:5] + (float(d),) for r, d in zip(self.rows, distances)]


def _Clip(problem, theta):
    return numpy.clip(theta, problem.low, problem.high)


def CombinedGradient(method, bundle, policy = None, guideLosses = None):
    """Return the combined gradient for the method; for the adaptive methods
       the policy is updated first, in the same order as the training loop."""
    if method in Baselines.BASELINE_METHODS:
        return Baselines.Combine(method, bundle), None
    if method not in TOY_METHODS:
        raise Exceptions.UnknownMethod(method = method,
                valid = ", ".join(TOY_METHODS))
    result = Policy.Intervene(bundle, policy)
    if guideLosses is None:
        guideLosses = bundle.losses
    grad, breakdown = Policy.PolicyGrad(bundle, guideLosses, policy,
            result)
    Policy.PolicyStep(policy, grad)
    return result.intervened, result


def RunTrajectory(problem, method, start, front = None,
        steps = DEFAULT_STEPS, lr = DEFAULT_LR, policyLr = 5e-4,
        temperature = 10.0):
    """Run Adam from the start point using the combined gradient of the
       method and return the recorded trajectory. The guidance losses for the
       adaptive methods are the landscape losses at the current point."""
    policy = None
    if method in ("aim_scalar", "aim_matrix"):
        mode = Policy.SCALAR if method == "aim_scalar" else Policy.MATRIX
        policy = Policy.PolicyState(mode, 2, temperature = temperature,
                lr = policyLr)
    trajectory = Trajectory(problem, method, start, policy)
    theta = trajectory.start.copy()
    adam = Optim.AdamState(theta.shape, lr = lr)
    for step in range(steps + 1):
        bundle = problem.Bundle(theta)
        loss1, loss2 = (float(v) for v in bundle.losses)
        trajectory.AddRow(step, theta, loss1, loss2)
        if step == steps:
            break
        grad, result = CombinedGradient(method, bundle, policy)
        update = adam.Delta(grad)
        trajectory.updates.append(update)
        theta = _Clip(problem, theta - update)
    if front is not None:
        trajectory.MeasureDistances(front)
    return trajectory


def ReplayTrajectory(trajectory):
    """Return the final point obtained by re-applying the recorded updates to
       the start point."""
    theta = trajectory.start.copy()
    for update in trajectory.updates:
        theta = _Clip(trajectory.problem, theta - update)
    return theta


def CompareMethods(problem, methods = TOY_METHODS, starts = START_GRID,
        steps = DEFAULT_STEPS, lr = DEFAULT_LR, resolution = None,
        front = None, policyLr = 5e-4, temperature = 10.0):
    """Run every method from every start and return the front together with
       a dictionary mapping (method, start) to the trajectory."""
    if front is None:
        front = DefaultFront(problem, resolution)
    trajectories = {}
    for method in methods:
        for start in starts:
            trajectory = RunTrajectory(problem, method, start, front,
                    steps = steps, lr = lr, policyLr = policyLr,
                    temperature = temperature)
            trajectories[method, tuple(start)] = trajectory
            cx_Logging.Trace("%s %s from %s: final distance to front %.6g",
                    problem.name, method, start, trajectory.rows[-1][-1])
    return front, trajectories
