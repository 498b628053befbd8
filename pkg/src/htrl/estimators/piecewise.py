"""Piecewise-constant functions on [0, 1] and regression data containers."""

import json
import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class PiecewiseConstantFn:
    """f(x) = levels[s] for breakpoints[s] <= x < breakpoints[s+1].

    ``breakpoints`` starts at 0 and ends at 1. Values exactly at an interior
    breakpoint take the right-hand level; this is a null set for L2 risk.
    """

    breakpoints: np.ndarray
    levels: np.ndarray
    level_bound: float = 1.0

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        lv = np.asarray(self.levels, dtype=float)
        if bp.ndim != 1 or lv.ndim != 1 or bp.size != lv.size + 1:
            raise ValueError("need len(breakpoints) == len(levels) + 1")
        if bp[0] != 0.0 or bp[-1] != 1.0:
            raise ValueError("breakpoints must start at 0 and end at 1")
        if np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if not self.level_bound > 0:
            raise ValueError("level_bound must be positive")
        if np.any(np.abs(lv) > self.level_bound):
            raise ValueError(f"levels exceed level_bound={self.level_bound}")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "levels", lv)

    @classmethod
    def constant(cls, c=0.0, level_bound=1.0):
        return cls(np.array([0.0, 1.0]), np.array([float(c)]), level_bound)

    @classmethod
    def from_segments(cls, bounds, levels, level_bound=1.0):
        """Build from possibly degenerate segments, merging equal neighbours."""
        bounds = np.asarray(bounds, dtype=float)
        levels = np.asarray(levels, dtype=float)
        bp = [0.0]
        lv = []
        for s, c in enumerate(levels):
            if bounds[s + 1] <= bounds[s]:
                continue
            if lv and lv[-1] == c:
                bp[-1] = bounds[s + 1]
            else:
                lv.append(float(c))
                bp.append(float(bounds[s + 1]))
        bp[0], bp[-1] = 0.0, 1.0
        return cls(np.array(bp), np.array(lv), level_bound)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.breakpoints, x, side="right") - 1
        idx = np.clip(idx, 0, self.levels.size - 1)
        return self.levels[idx]

    def to_dict(self):
        return {"breakpoints": self.breakpoints.tolist(), "levels": self.levels.tolist()}


def l2_risk(fn, truth):
    """Exact L2([0, 1]) distance between two piecewise-constant functions."""
    grid = np.union1d(fn.breakpoints, truth.breakpoints)
    mids = 0.5 * (grid[:-1] + grid[1:])
    diff = fn(mids) - truth(mids)
    return math.sqrt(float(np.sum(diff * diff * np.diff(grid))))


@dataclass(frozen=True)
class RegressionData:
    """Responses y at design points x in [0, 1]; ``xi`` is the true noise if known.

    Sorted copies are built once; ``order`` maps sorted positions back to the
    input positions.
    """

    x: np.ndarray
    y: np.ndarray
    xi: np.ndarray | None = None
    order: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.shape != y.shape or x.ndim != 1:
            raise ValueError("x and y must be 1-d arrays of equal length")
        if x.size and (x.min() < 0 or x.max() > 1):
            raise ValueError("design points must lie in [0, 1]")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if self.xi is not None:
            xi = np.asarray(self.xi, dtype=float)
            if xi.shape != x.shape:
                raise ValueError("xi must match x in length")
            object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "order", np.argsort(x, kind="stable"))

    def __len__(self):
        return self.x.size

    @property
    def xs(self):
        return self.x[self.order]

    @property
    def ys(self):
        return self.y[self.order]


@dataclass(frozen=True)
class FitResult:
    """A fitted function together with its in-sample loss."""

    fn: PiecewiseConstantFn
    loss: float
    loss_name: str = "rss"

    def __iter__(self):
        yield self.fn
        yield self.loss

    def to_json(self):
        record = self.fn.to_dict()
        record[self.loss_name] = self.loss
        return json.dumps(record, sort_keys=True)


def fit_from_json(text, level_bound=1.0):
    record = json.loads(text)
    loss_name = "sad" if "sad" in record else "rss"
    fn = PiecewiseConstantFn(np.array(record["breakpoints"]), np.array(record["levels"]),
                             level_bound)
    return FitResult(fn, float(record[loss_name]), loss_name)


def segments_to_fn(xs, ends, levels, level_bound=1.0):
    """Turn in-sample segments (last sorted index of each) into a function.

    Boundaries sit at midpoints between the neighbouring design points.
    """
    n = xs.size
    bounds = [0.0]
    for e in ends[:-1]:
        bounds.append(0.5 * (xs[e] + xs[e + 1]))
    bounds.append(1.0)
    assert ends[-1] == n - 1
    return PiecewiseConstantFn.from_segments(bounds, levels, level_bound)
