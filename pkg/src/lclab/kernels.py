"""Linear-algebra kernels: SPD solves, power iteration, dense symmetric spectra.

The heavy lifting is delegated to LAPACK via numpy/scipy; every kernel
checks its own contract (residual, symmetry, spectral identities) after
the fact so downstream experiments never consume a silently bad solve.
"""

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ContractError, ConvergenceError, ResourceLimitError

DEFAULT_SOLVE_TOL = 1e-10
MAX_DENSE_DIM = 4096


def require_symmetric(mat, tol=1e-14):
    """Raise unless the sparse/dense matrix is symmetric to relative ``tol``."""
    if sp.issparse(mat):
        gap = abs(mat - mat.T)
        worst = gap.max() if gap.nnz else 0.0
        scale = abs(mat).max()
    else:
        worst = np.abs(mat - mat.T).max()
        scale = np.abs(mat).max()
    if worst > tol * max(scale, 1.0):
        raise ContractError(f"matrix not symmetric: |A-A^T| = {worst:.3e}")


class _Factorization:
    """Cached direct factorization of a symmetric positive definite matrix.

    Tridiagonal systems go through banded Cholesky (the 1D grids are
    tridiagonal after assembly); everything else through sparse LU.
    """

    def __init__(self, mat):
        mat = sp.csr_matrix(mat)
        self.mat = mat
        self.n = mat.shape[0]
        coo = mat.tocoo()
        bandwidth = int(np.max(np.abs(coo.row - coo.col))) if coo.nnz else 0
        if bandwidth <= 1:
            ab = np.zeros((2, self.n))
            ab[1] = mat.diagonal()
            if self.n > 1:
                ab[0, 1:] = np.asarray(mat.diagonal(1)).ravel()
            self._banded = scipy.linalg.cholesky_banded(ab, lower=False)
            self._solve = lambda b: scipy.linalg.cho_solve_banded(
                (self._banded, False), b)
        else:
            lu = spla.splu(mat.tocsc(), permc_spec="MMD_AT_PLUS_A")
            self._solve = lu.solve

    def solve(self, rhs):
        return self._solve(np.asarray(rhs, dtype=float))


def solve_spd(mat, rhs, tol=DEFAULT_SOLVE_TOL, cache=None):
    """Solve ``mat @ x = rhs`` for symmetric positive definite ``mat``.

    The normwise backward error ||mat x - rhs|| / (||mat|| ||x|| + ||rhs||)
    is verified against ``tol`` after the solve (with one round of
    iterative refinement if needed); a violation raises ConvergenceError
    with the measured residual attached.  The backward-error metric is
    the one a direct solver can actually meet uniformly in the mesh: the
    raw ||.||/||rhs|| ratio is floored by eps * ||mat|| ||x|| / ||rhs||,
    which exceeds 1e-10 on the finest stiffness-scaled grids.
    """
    if not 0.0 < tol <= 1e-6:
        raise ContractError(f"solve tolerance {tol} outside (0, 1e-6]")
    fact = cache if cache is not None else _Factorization(mat)
    rhs = np.asarray(rhs, dtype=float)
    rhs_norm = np.linalg.norm(rhs)
    if rhs_norm == 0.0:
        return np.zeros_like(rhs)
    mat_scale = spla.norm(fact.mat, np.inf) if sp.issparse(fact.mat) \
        else np.linalg.norm(fact.mat, np.inf)

    def backward_error(x):
        gap = np.linalg.norm(fact.mat @ x - rhs)
        return gap / (mat_scale * np.linalg.norm(x) + rhs_norm)

    x = fact.solve(rhs)
    residual = backward_error(x)
    for _ in range(3):  # iterative refinement against the residual contract
        if residual <= 0.1 * tol:
            break
        x = x + fact.solve(rhs - fact.mat @ x)
        residual = backward_error(x)
    if not residual <= tol:
        raise ConvergenceError(
            f"SPD solve backward error {residual:.3e} exceeds tol {tol:.1e}",
            residual=residual)
    return x


def _check_action_symmetry(action, dim, rng, weights, trials=3, tol=1e-10):
    w = weights if weights is not None else 1.0
    for _ in range(trials):
        x = rng.standard_normal(dim)
        y = rng.standard_normal(dim)
        ax, ay = action(x), action(y)
        lhs = np.sum(w * ax * y)
        rhs = np.sum(w * x * ay)
        scale = (np.linalg.norm(ax) * np.linalg.norm(y)
                 + np.linalg.norm(x) * np.linalg.norm(ay) + 1e-300)
        if abs(lhs - rhs) > tol * scale:
            raise ContractError(
                f"operator action not symmetric: |(Ax,y)-(x,Ay)| = "
                f"{abs(lhs - rhs):.3e} vs scale {scale:.3e}")


def power_iteration_sym(action, dim, tol=1e-8, weights=None, n_values=1,
                        max_iter=5000, seed=0, check_symmetry=True):
    """Dominant eigenvalues (by modulus) of a symmetric operator action.

    ``action`` maps a vector to a vector; symmetry is with respect to the
    (optionally weighted) inner product and is spot-checked on random
    pairs before iterating.  Returns ``(values, vectors)`` with
    ``n_values`` entries obtained by deflation, values sorted by
    decreasing modulus.  Convergence is on the Rayleigh quotient.
    """
    rng = np.random.default_rng(seed)
    w = np.ones(dim) if weights is None else np.asarray(weights, dtype=float)
    if check_symmetry:
        _check_action_symmetry(action, dim, rng, w)

    def dot(a, b):
        return float(np.sum(w * a * b))

    values, vectors = [], []
    for _ in range(n_values):
        v = rng.standard_normal(dim)
        for prev in vectors:
            v = v - dot(v, prev) * prev
        nv = np.sqrt(dot(v, v))
        if nv == 0.0:
            raise ConvergenceError("deflation exhausted the space")
        v /= nv
        mu = 0.0
        mu_prev = None
        for _ in range(max_iter):
            av = action(v)
            for prev in vectors:
                av = av - dot(av, prev) * prev
            # norm quotient, not the Rayleigh quotient: it converges to the
            # spectral radius even when the top eigenvalues come in +/- pairs
            mu = np.sqrt(dot(av, av))
            if mu == 0.0:
                break
            v = av / mu
            if mu_prev is not None and abs(mu - mu_prev) <= tol * max(mu, 1e-300):
                break
            mu_prev = mu
        else:
            raise ConvergenceError(
                f"power iteration stagnated after {max_iter} iterations "
                f"(last value {mu:.6e})")
        values.append(mu)
        vectors.append(v)
    if n_values == 1:
        return values[0], vectors[0]
    return values, vectors


def dense_eigen(mat, spot_checks=10, seed=0):
    """Full ascending spectrum of a dense symmetric matrix.

    Residuals ||A v - mu v|| <= 1e-9 ||A|| are spot-checked on random
    eigenpairs; LAPACK's symmetric solver makes this a formality but the
    contract is kept hot.
    """
    mat = np.asarray(mat, dtype=float)
    n = mat.shape[0]
    if n > MAX_DENSE_DIM:
        raise ResourceLimitError(f"dense eigensolve of dim {n} > {MAX_DENSE_DIM}")
    require_symmetric(mat, tol=1e-12)
    vals, vecs = np.linalg.eigh(mat)
    scale = max(np.abs(vals).max() if n else 0.0, 1e-300)
    rng = np.random.default_rng(seed)
    for idx in rng.choice(n, size=min(spot_checks, n), replace=False):
        res = np.linalg.norm(mat @ vecs[:, idx] - vals[idx] * vecs[:, idx])
        if res > 1e-9 * scale:
            raise ContractError(f"eigenpair residual {res:.3e} exceeds 1e-9*|A|")
    return vals


def loglog_fit(x, y):
    """Least-squares slope/intercept/R^2 of log10(y) against log10(x)."""
    lx = np.log10(np.asarray(x, dtype=float))
    ly = np.log10(np.asarray(y, dtype=float))
    slope, intercept = np.polyfit(lx, ly, 1)
    fitted = slope * lx + intercept
    ss_res = float(np.sum((ly - fitted) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    return float(slope), float(intercept), r_squared
