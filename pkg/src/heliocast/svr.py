"""Epsilon-insensitive Support Vector Regression with linear, polynomial
and RBF kernels.

The dual is solved in the beta formulation (beta_i = alpha_i - alpha_i*),
which halves the variable count: maximize

    W(beta) = y.beta - eps*sum|beta_i| - 1/2 beta.K.beta

subject to sum(beta) = 0 and -C <= beta_i <= C, by SMO-style pairwise
coordinate ascent. Each pairwise subproblem is a concave piecewise
quadratic in one variable (kinks where a beta crosses zero) and is solved
exactly, so the dual objective never decreases.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_TINY_ETA = 1e-12


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "rbf"  # linear | polynomial | rbf
    gamma: float = 1.0
    coef0: float = 0.0
    degree: int = 3

    def validate(self) -> None:
        if self.kind not in ("linear", "polynomial", "rbf"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind in ("polynomial", "rbf") and not self.gamma > 0.0:
            raise ValueError("gamma must be > 0 for polynomial/rbf kernels")
        if self.kind == "polynomial" and self.degree < 1:
            raise ValueError("polynomial degree must be >= 1")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "gamma": self.gamma, "coef0": self.coef0, "degree": self.degree}

    @classmethod
    def from_dict(cls, d: dict) -> "KernelSpec":
        return cls(
            kind=d["kind"],
            gamma=float(d["gamma"]),
            coef0=float(d["coef0"]),
            degree=int(d["degree"]),
        )


@dataclass
class SvrModel:
    support_vectors: np.ndarray  # (m, d)
    dual_coefficients: np.ndarray  # (m,), each alpha_i - alpha_i*
    bias: float
    kernel: KernelSpec
    C: float
    epsilon: float
    converged: bool = True
    # Dual objective recorded after each optimization pass (not serialized).
    objective_history: list[float] = field(default_factory=list)


def kernel_eval(u: np.ndarray, v: np.ndarray, spec: KernelSpec) -> float:
    """Evaluate the kernel on one pair of vectors."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise ValueError("kernel_eval needs two vectors of equal dimension")
    spec.validate()
    if spec.kind == "linear":
        return float(u @ v)
    if spec.kind == "polynomial":
        return float((spec.gamma * (u @ v) + spec.coef0) ** spec.degree)
    diff = u - v
    return float(np.exp(-spec.gamma * (diff @ diff)))


def kernel_matrix(A: np.ndarray, B: np.ndarray, spec: KernelSpec) -> np.ndarray:
    """Kernel Gram block K[i, j] = k(A_i, B_j)."""
    spec.validate()
    if spec.kind == "linear":
        return A @ B.T
    if spec.kind == "polynomial":
        return (spec.gamma * (A @ B.T) + spec.coef0) ** spec.degree
    d2 = (
        np.sum(A * A, axis=1)[:, None]
        - 2.0 * (A @ B.T)
        + np.sum(B * B, axis=1)[None, :]
    )
    np.maximum(d2, 0.0, out=d2)
    return np.exp(-spec.gamma * d2)


def scale_gamma(X: np.ndarray) -> float:
    """Default kernel width 1 / (d * var(X)) over all matrix entries."""
    X = np.asarray(X, dtype=np.float64)
    v = float(X.var())
    if v == 0.0:
        v = 1.0
    return 1.0 / (X.shape[1] * v)


def _dual_objective(beta, y, f, epsilon) -> float:
    return float(y @ beta - epsilon * np.abs(beta).sum() - 0.5 * (beta @ f))


def _solve_pair(i, j, beta, y, f, K, C, epsilon):
    """Exact maximizer of the dual restricted to (beta_i, beta_j) with
    beta_i + beta_j fixed. Returns the new beta_i or None if no move."""
    bi, bj = beta[i], beta[j]
    s = bi + bj
    lo = max(-C, s - C)
    hi = min(C, s + C)
    if hi - lo <= 0.0:
        return None
    kii, kjj, kij = K[i, i], K[j, j], K[i, j]
    eta = kii + kjj - 2.0 * kij
    gi = y[i] - (f[i] - kii * bi - kij * bj)
    gj = y[j] - (f[j] - kij * bi - kjj * bj)

    def value(t):
        u = s - t
        return (
            gi * t
            + gj * u
            - epsilon * (abs(t) + abs(u))
            - 0.5 * (kii * t * t + kjj * u * u + 2.0 * kij * t * u)
        )

    candidates = [lo, hi]
    for kink in (0.0, s):
        if lo < kink < hi:
            candidates.append(kink)
    if eta > _TINY_ETA:
        # Piece boundaries at t = 0 and t = s; each piece has constant
        # signs sigma1 = sign(t), sigma2 = sign(s - t).
        k1, k2 = sorted((0.0, s))
        pieces = [(lo, min(k1, hi)), (max(k1, lo), min(k2, hi)), (max(k2, lo), hi)]
        for a, b in pieces:
            if b <= a:
                continue
            mid = (a + b) / 2.0
            sigma1 = 1.0 if mid >= 0.0 else -1.0
            sigma2 = 1.0 if (s - mid) >= 0.0 else -1.0
            t_star = ((gi - gj) - epsilon * (sigma1 - sigma2) + (kjj - kij) * s) / eta
            candidates.append(min(max(t_star, a), b))

    best_t = bi
    best_v = value(bi)
    for t in candidates:
        v = value(t)
        if v > best_v + 1e-15 * max(1.0, abs(best_v)):
            best_v = v
            best_t = t
    if best_t == bi:
        return None
    return best_t


def fit_svr(
    ds,
    kernel: KernelSpec,
    C: float = 1.0,
    epsilon: float = 0.1,
    tolerance: float = 1e-3,
    max_passes: int = 1000,
    seed: int = 42,
) -> SvrModel:
    """Fit epsilon-SVR by pairwise dual coordinate ascent.

    One pass is a sweep of up to n pair updates. The first pair element is
    the maximal KKT violator; its partner maximizes the estimated objective
    change, with random pairs (from the seeded generator) as a fallback
    when progress stalls. Stops when every KKT violation is below
    ``tolerance`` or after ``max_passes`` passes; in the latter case the
    model is returned with ``converged=False``.
    """
    kernel.validate()
    if ds.n < 2:
        raise ValueError("need at least 2 samples to fit SVR")
    if C <= 0.0:
        raise ValueError("C must be > 0")
    if epsilon < 0.0:
        raise ValueError("epsilon must be >= 0")

    X = np.ascontiguousarray(ds.features, dtype=np.float64)
    y = np.ascontiguousarray(ds.target, dtype=np.float64)
    n = ds.n
    K = kernel_matrix(X, X, kernel)
    beta = np.zeros(n)
    f = np.zeros(n)  # K @ beta, maintained incrementally
    rng = np.random.default_rng(seed)

    def derivatives():
        d_up = y - f - epsilon * np.where(beta >= 0.0, 1.0, -1.0)
        d_down = y - f - epsilon * np.where(beta > 0.0, 1.0, -1.0)
        return d_up, d_down

    snap = 1e-12 * max(1.0, C)

    def snapped(v: float) -> float:
        # Roundoff dust near 0 or +-C flips the sign/bound classification
        # of a coefficient and fabricates phantom KKT violations that no
        # pair update can act on; pull such values onto the magnet.
        if abs(v) < snap:
            return 0.0
        if abs(v - C) < snap:
            return C
        if abs(v + C) < snap:
            return -C
        return v

    def apply(i, j, t_new):
        old_i, old_j = beta[i], beta[j]
        new_i = snapped(t_new)
        new_j = snapped(old_j - (t_new - old_i))
        # Keep sum(beta) exact when one side is interior and can absorb
        # the snap error (otherwise the drift is bounded by `snap`).
        err = (new_i + new_j) - (old_i + old_j)
        if err != 0.0:
            if new_j not in (0.0, C, -C):
                new_j -= err
            elif new_i not in (0.0, C, -C):
                new_i -= err
        if new_i == old_i and new_j == old_j:
            return False
        beta[i] = new_i
        beta[j] = new_j
        f[:] = f + (new_i - old_i) * K[:, i] + (new_j - old_j) * K[:, j]
        return True

    converged = False
    history: list[float] = []
    for _ in range(max_passes):
        improved = False
        for _ in range(n):
            d_up, d_down = derivatives()
            can_up = beta < C
            can_down = beta > -C
            up_vals = np.where(can_up, d_up, -np.inf)
            down_vals = np.where(can_down, d_down, np.inf)
            i = int(np.argmax(up_vals))
            j_min = int(np.argmin(down_vals))
            violation = up_vals[i] - down_vals[j_min]
            if violation < tolerance:
                converged = True
                break

            # Partner maximizing the second-order gain estimate.
            delta_g = up_vals[i] - down_vals
            delta_g[i] = -np.inf
            eta = K[i, i] + np.diag(K) - 2.0 * K[:, i]
            np.maximum(eta, _TINY_ETA, out=eta)
            gain = np.where(delta_g > 0.0, delta_g * delta_g / eta, -np.inf)
            j = int(np.argmax(gain))

            moved = False
            if np.isfinite(gain[j]):
                t_new = _solve_pair(i, j, beta, y, f, K, C, epsilon)
                if t_new is not None:
                    moved = apply(i, j, t_new)
            if not moved and j_min != i:
                t_new = _solve_pair(i, j_min, beta, y, f, K, C, epsilon)
                if t_new is not None:
                    moved = apply(i, j_min, t_new)
            if not moved:
                # Stalled: try random pairs before giving up on the sweep.
                for _ in range(n):
                    a, b = rng.integers(0, n, size=2)
                    if a == b:
                        continue
                    t_new = _solve_pair(int(a), int(b), beta, y, f, K, C, epsilon)
                    if t_new is not None and apply(int(a), int(b), t_new):
                        moved = True
                        break
            if not moved:
                break
            improved = True
        history.append(_dual_objective(beta, y, f, epsilon))
        if converged or not improved:
            break

    if not history:
        history.append(_dual_objective(beta, y, f, epsilon))
    if not converged:
        d_up, d_down = derivatives()
        up_vals = np.where(beta < C, d_up, -np.inf)
        down_vals = np.where(beta > -C, d_down, np.inf)
        converged = float(np.max(up_vals) - np.min(down_vals)) < tolerance

    # Bias from unbounded support vectors; midpoint of the KKT interval
    # when none exist (e.g. all duals zero inside the epsilon tube).
    margin = 1e-8 * C
    unbounded = (np.abs(beta) > margin) & (np.abs(beta) < C - margin)
    if np.any(unbounded):
        bias = float(np.mean(y[unbounded] - f[unbounded] - epsilon * np.sign(beta[unbounded])))
    else:
        d_up, d_down = derivatives()
        up_vals = np.where(beta < C, d_up, -np.inf)
        down_vals = np.where(beta > -C, d_down, np.inf)
        hi = float(np.max(up_vals))
        lo = float(np.min(down_vals))
        if not np.isfinite(hi):
            bias = lo
        elif not np.isfinite(lo):
            bias = hi
        else:
            bias = (hi + lo) / 2.0

    keep = beta != 0.0
    return SvrModel(
        support_vectors=X[keep].copy(),
        dual_coefficients=beta[keep].copy(),
        bias=bias,
        kernel=kernel,
        C=C,
        epsilon=epsilon,
        converged=converged,
        objective_history=history,
    )


def predict_svr(model: SvrModel, row: np.ndarray) -> float:
    """sum_i dual_i * k(sv_i, row) + bias."""
    row = np.asarray(row, dtype=np.float64)
    if model.support_vectors.shape[0] == 0:
        return model.bias
    if row.ndim != 1 or row.shape[0] != model.support_vectors.shape[1]:
        raise ValueError(
            f"row dimension {row.shape} does not match support vectors "
            f"({model.support_vectors.shape[1]} features)"
        )
    k = kernel_matrix(model.support_vectors, row.reshape(1, -1), model.kernel)[:, 0]
    return float(model.dual_coefficients @ k + model.bias)


def predict_svr_many(model: SvrModel, rows: np.ndarray) -> np.ndarray:
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim == 1:
        rows = rows.reshape(1, -1)
    if model.support_vectors.shape[0] == 0:
        return np.full(rows.shape[0], model.bias)
    if rows.shape[1] != model.support_vectors.shape[1]:
        raise ValueError(
            f"rows have {rows.shape[1]} features, support vectors have "
            f"{model.support_vectors.shape[1]}"
        )
    k = kernel_matrix(rows, model.support_vectors, model.kernel)
    return k @ model.dual_coefficients + model.bias
