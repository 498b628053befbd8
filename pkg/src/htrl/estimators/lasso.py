"""Lasso by cyclic coordinate descent and related diagnostics.

Objective: (1/n) ||Y - X theta||_2^2 + lambda ||theta||_1.
"""

import csv
import itertools
import math
from dataclasses import dataclass

import numpy as np

from ..noise_models import lp1_norm
from ..rng import make_rng


@dataclass(frozen=True)
class LassoProblem:
    design: np.ndarray
    response: np.ndarray
    lam: float

    def __post_init__(self):
        X = np.asarray(self.design, dtype=float)
        Y = np.asarray(self.response, dtype=float)
        if X.ndim != 2 or Y.shape != (X.shape[0],):
            raise ValueError("design must be n x d and response length n")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
            raise ValueError("design and response must be finite")
        if not self.lam >= 0:
            raise ValueError("lambda must be non-negative")
        object.__setattr__(self, "design", X)
        object.__setattr__(self, "response", Y)

    @property
    def n(self):
        return self.design.shape[0]

    def objective(self, theta):
        r = self.response - self.design @ theta
        return float(r @ r) / self.n + self.lam * float(np.abs(theta).sum())


@dataclass(frozen=True)
class LassoFit:
    theta: np.ndarray
    dual_gap: float
    n_iter: int
    converged: bool


def _soft(z, t):
    return math.copysign(max(abs(z) - t, 0.0), z)


def dual_gap(problem, theta):
    """Duality gap at theta using the rescaled residual as dual point."""
    X, Y, n, lam = problem.design, problem.response, problem.n, problem.lam
    r = Y - X @ theta
    grad = 2.0 / n * np.abs(X.T @ r).max() if X.shape[1] else 0.0
    s = 1.0 if grad <= lam else lam / grad
    u = s * r
    dual = (2.0 * float(u @ Y) - float(u @ u)) / n
    return max(problem.objective(theta) - dual, 0.0)


def kkt_violation(problem, theta):
    """Largest violation of the subgradient optimality conditions."""
    X, n, lam = problem.design, problem.n, problem.lam
    g = 2.0 / n * (X.T @ (problem.response - X @ theta))
    nz = theta != 0
    viol = np.where(nz, np.abs(g - lam * np.sign(theta)), np.maximum(np.abs(g) - lam, 0.0))
    return float(viol.max()) if viol.size else 0.0


def kkt_check(problem, theta, tol):
    return kkt_violation(problem, theta) <= 10.0 * tol


def fit_lasso_cd(problem, tol=1e-8, max_iter=10_000, theta0=None):
    """Cyclic coordinate descent with soft thresholding on the Gram matrix.

    Stops once a full sweep moves no coordinate by ``tol`` or more and the
    subgradient conditions hold within ``tol``. Hitting ``max_iter`` sweeps
    is reported through ``converged=False``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    X, Y, n, lam = problem.design, problem.response, problem.n, problem.lam
    d = X.shape[1]
    G = X.T @ X / n
    b = X.T @ Y / n
    theta = np.zeros(d) if theta0 is None else np.array(theta0, dtype=float)
    Gt = G @ theta
    diag = np.diag(G)
    converged = False
    sweeps = 0
    for sweeps in range(1, max_iter + 1):
        max_step = 0.0
        for j in range(d):
            if diag[j] == 0.0:
                continue
            old = theta[j]
            z = 2.0 * (b[j] - Gt[j] + diag[j] * old)
            new = _soft(z, lam) / (2.0 * diag[j])
            if new != old:
                Gt += G[:, j] * (new - old)
                theta[j] = new
                max_step = max(max_step, abs(new - old))
        if max_step < tol:
            grad = 2.0 * (b - Gt)
            nz = theta != 0
            viol = np.where(nz, np.abs(grad - lam * np.sign(theta)),
                            np.maximum(np.abs(grad) - lam, 0.0))
            if viol.size == 0 or viol.max() <= tol:
                converged = True
                break
            Gt = G @ theta  # refresh accumulated drift before continuing
    return LassoFit(theta, dual_gap(problem, theta), sweeps, converged)


def lasso_lambda_rule(law, alpha, L, n, d):
    """lambda = 2 L ||xi||_{1/alpha,1} sqrt(log d / n)."""
    if not 0.25 <= alpha <= 0.5:
        raise ValueError("alpha must lie in [1/4, 1/2]")
    if not L > 0:
        raise ValueError("L must be positive")
    if d < 2 or n < 1:
        raise ValueError("need d >= 2 and n >= 1")
    norm = lp1_norm(law, 1.0 / alpha)
    if not norm.is_finite:
        raise ValueError(f"||xi||_(1/alpha,1) is infinite for {law} at alpha={alpha}; "
                         "use a larger tail index or a larger alpha")
    return 2.0 * L * norm.value * math.sqrt(math.log(d) / n)


# -- compatibility constant ------------------------------------------------

def _project_simplex(v, radius=1.0):
    """Euclidean projection onto {w >= 0, sum w = radius}."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - radius
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    return np.maximum(v - css[rho] / (rho + 1.0), 0.0)


def _project_l1_ball(v, radius):
    if radius <= 0:
        return np.zeros_like(v)
    if np.abs(v).sum() <= radius:
        return v
    return np.sign(v) * _project_simplex(np.abs(v), radius)


def _min_on_orthant(A, B, L, sign, iters):
    """min ||A t - B w||^2 over t in the signed unit simplex and ||w||_1 <= L (FISTA)."""
    As = A * sign
    M = np.hstack([As, -B])
    k = A.shape[1]
    step = 1.0 / max(np.linalg.norm(M, 2) ** 2, 1e-300)
    z = np.concatenate([np.full(k, 1.0 / k), np.zeros(B.shape[1])])
    y = z.copy()
    tk = 1.0
    best = math.inf
    for _ in range(iters):
        g = M.T @ (M @ y)
        nxt = y - step * g
        nxt = np.concatenate([_project_simplex(nxt[:k]), _project_l1_ball(nxt[k:], L)])
        val = float(np.sum((M @ nxt) ** 2))
        best = min(best, val)
        t1 = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * tk * tk))
        y = nxt + (tk - 1.0) / t1 * (nxt - z)
        z, tk = nxt, t1
    return best


def estimate_compatibility(design, S, L, search_budget=64, seed=0, iters=400):
    """Upper estimate of phi(L, S).

    phi(L,S) = sqrt|S| min{ ||X t_S - X t_Sc||_2 / sqrt(n) : ||t_S||_1 = 1, ||t_Sc||_1 <= L }.
    Fixing the sign pattern of t_S makes the problem convex; patterns are
    enumerated when there are at most ``search_budget`` of them and sampled
    otherwise, each solved by accelerated projected gradient.
    """
    X = np.asarray(design, dtype=float)
    n, d = X.shape
    S = sorted(set(int(j) for j in S))
    if not S:
        raise ValueError("S must be nonempty")
    Sc = [j for j in range(d) if j not in S]
    A = X[:, S]
    B = X[:, Sc] if Sc else np.zeros((n, 0))
    k = len(S)
    if 2 ** k <= search_budget:
        patterns = [np.array(p) for p in itertools.product((1.0, -1.0), repeat=k)]
    else:
        rng = make_rng(seed, k)
        patterns = [np.where(rng.random(k) < 0.5, -1.0, 1.0) for _ in range(search_budget)]
    best = min(_min_on_orthant(A, B, float(L), sg, iters) for sg in patterns)
    return math.sqrt(k) * math.sqrt(best / n)


def gaussian_approx_bound(k, d, M4):
    """(k log^3 d (M4 v log^2 d))^{1/4} + (k log d)^{1/2}, constants dropped."""
    if d < 2:
        raise ValueError("d must be >= 2")
    if k < 1 or M4 < 0:
        raise ValueError("need k >= 1 and M4 >= 0")
    ld = math.log(d)
    return (k * ld ** 3 * max(M4, ld * ld)) ** 0.25 + math.sqrt(k * ld)


def gaussian_approx_ratios(d, ks, reps=200, seed=0):
    """MC of E max_j |sum_{i<=k} eps_i X_ij| over the bound, X_ij uniform on [-1, 1].

    M4 = E max_j |X_1j|^4 = d / (d + 4) for this design.
    """
    M4 = d / (d + 4.0)
    rows = []
    for k in ks:
        vals = np.empty(reps)
        for r in range(reps):
            rng = make_rng(seed, k, r)
            X = rng.uniform(-1.0, 1.0, size=(k, d))
            eps = np.where(rng.random(k) < 0.5, -1.0, 1.0)
            vals[r] = np.abs(eps @ X).max()
        mean = float(vals.mean())
        rows.append((int(k), mean, mean / gaussian_approx_bound(k, d, M4)))
    return rows


def load_lasso_csv(path, lam):
    """Response in the first column, design in the rest; a header row is skipped."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if rows and not _is_numeric(rows[0]):
        rows = rows[1:]
    data = np.array([[float(v) for v in row] for row in rows if row])
    if data.ndim != 2 or data.shape[1] < 2:
        raise ValueError(f"{path}: need a response column and at least one design column")
    return LassoProblem(data[:, 1:], data[:, 0], lam)


def _is_numeric(row):
    try:
        [float(v) for v in row]
    except ValueError:
        return False
    return True
