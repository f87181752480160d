"""Switch-based hybrid design by QR decomposition with quadratic update (SHD-QRQU).

The log-det objective is lower bounded by the same expression evaluated on
the squared diagonal of the R factor of ``H_1 F_RF``.  Column ``i`` of the
analog matrix is chosen to maximize ``|R_ii|^2 = f^H A_i f`` where
``A_i = H_1^H P_i H_1`` and ``P_i`` projects onto the orthogonal complement
of the ``i - 1`` columns already fixed.  Each column subproblem is solved by
linearizing the convex quadratic and maximizing over the unit box.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .connectivity import ConnectivitySpec, check_feasible
from .metrics import (
    DEFAULT_RANK_TOL,
    HybridPrecoder,
    LinkBudget,
    RankError,
    channel_svd,
    mi_from_gains,
    mutual_information,
    numerical_rank,
)
from .nm import DesignReport, _qr_update, check_dimensions, solve_box_lp

__all__ = [
    "QrquConfig",
    "ProjectionState",
    "projection_complement",
    "quad_objective",
    "quad_gradient_step",
    "qr_diagonal_gains",
    "qr_lower_bound",
    "singular_value_mi",
    "design_shd_qrqu",
]


@dataclass(frozen=True)
class QrquConfig:
    inner_iters: int = 20
    rank_tol: float = DEFAULT_RANK_TOL
    psd_floor: float = 1e-10
    reg_eps: float = 1e-10
    seed: int = 0
    rel_change_tol: float = 1e-9

    def __post_init__(self):
        if self.inner_iters < 1:
            raise ValueError("inner_iters must be >= 1")
        if self.reg_eps <= 0:
            raise ValueError("reg_eps must be positive")


@dataclass
class ProjectionState:
    """``a = H_1^H P H_1`` for the projector built from ``columns_fixed`` columns."""

    a: np.ndarray
    columns_fixed: int = 0

    @classmethod
    def initial(cls, h1):
        return cls(_hermitian(h1.conj().T @ h1), 0)

    def advance(self, h1, f_fixed, reg_eps):
        proj = projection_complement(h1 @ f_fixed, reg_eps)
        return ProjectionState(_hermitian(h1.conj().T @ proj @ h1), f_fixed.shape[1])


def _hermitian(a):
    return (a + a.conj().T) / 2


def projection_complement(x, reg_eps: float = 1e-10) -> np.ndarray:
    """``I - X (X^H X + reg_eps I)^{-1} X^H``."""
    x = np.asarray(x)
    if x.ndim == 1:
        x = x[:, None]
    gram = x.conj().T @ x + reg_eps * np.eye(x.shape[1])
    proj = np.eye(x.shape[0]) - x @ np.linalg.solve(gram, x.conj().T)
    return _hermitian(proj)


def quad_objective(a_i, f) -> float:
    f = np.asarray(f)
    return float(np.real(f.conj() @ a_i @ f))


def quad_gradient_step(a_i, f_prev, mask_column=None) -> np.ndarray:
    """One linearize-and-maximize step for ``f^H A f`` over ``[0, 1]^N``.

    For real ``f`` the gradient is ``(A + A^T) f = 2 real(A) f``.
    """
    f_prev = np.asarray(f_prev, dtype=float)
    grad = np.real((a_i + a_i.T) @ f_prev)
    return solve_box_lp(grad, mask_column, previous=f_prev)


def qr_diagonal_gains(m) -> np.ndarray:
    """``|R_ii|^2`` from a column-pivoted QR of ``m``, in descending order."""
    r = scipy.linalg.qr(np.asarray(m), mode="r", pivoting=True)[0]
    return np.sort(np.abs(np.diag(r)) ** 2)[::-1]


def qr_lower_bound(m, budget: LinkBudget) -> float:
    """Mutual information from the leading ``N_s`` pivoted-QR diagonal gains."""
    return mi_from_gains(qr_diagonal_gains(m)[:budget.n_streams], budget.scale)


def singular_value_mi(m, budget: LinkBudget) -> float:
    s = np.linalg.svd(np.asarray(m), compute_uv=False)[:budget.n_streams]
    return mi_from_gains(s ** 2, budget.scale)


def _solve_column(a, allowed, rng, config):
    f = rng.random(a.shape[0]) * allowed
    trace = [quad_objective(a, f)]
    steps = 0
    for _ in range(config.inner_iters):
        f_new = quad_gradient_step(a, f, allowed)
        val = quad_objective(a, f_new)
        steps += 1
        trace.append(val)
        moved = not np.array_equal(f_new, f)
        f = f_new
        if not moved or abs(val - trace[-2]) <= config.rel_change_tol * max(abs(val), 1e-300):
            break
    return f, trace, steps


def design_shd_qrqu(h, budget: LinkBudget, k_t: int, config: QrquConfig | None = None,
                    mask: ConnectivitySpec | None = None) -> DesignReport:
    """Run SHD-QRQU on channel ``h``.

    The analog design does not depend on ``budget.rho``; only ``n_streams``
    is used until the final mutual-information evaluation.
    """
    config = config or QrquConfig()
    h = np.asarray(h)
    n_s = budget.n_streams
    n_t = h.shape[1]
    check_dimensions(h, n_s, k_t, mask)
    if numerical_rank(h, config.rank_tol) < n_s:
        raise RankError(f"channel rank below {n_s}")
    svd = channel_svd(h)
    h1 = (svd.u[:, :n_s] * svd.s[:n_s]) @ svd.v[:, :n_s].conj().T
    check_feasible(mask, h1, n_s, k_t, config.rank_tol)
    allowed = mask.bool_mask if mask is not None else np.ones((n_t, k_t), dtype=bool)

    rng = np.random.default_rng(config.seed)
    f_rf = np.zeros((n_t, k_t))
    state = ProjectionState.initial(h1)
    column_traces, final_values = [], []
    total_steps = 0
    for i in range(k_t):
        for attempt in range(2):
            f, trace, steps = _solve_column(state.a, allowed[:, i], rng, config)
            total_steps += steps
            f_rf[:, i] = f
            if i >= n_s:
                break
            fixed = (f_rf[:, :i + 1] >= 0.5).astype(float)
            if numerical_rank(h1 @ fixed, config.rank_tol) == i + 1:
                break
            # stalled on a rank-reducing vertex: one fresh start, then move on
        column_traces.append(trace)
        final_values.append(trace[-1])
        state = state.advance(h1, f_rf[:, :i + 1], config.reg_eps)

    f_rf = np.where(allowed, f_rf >= 0.5, False).astype(float)
    f_bb, repaired = _qr_update(h, f_rf, n_s, config.psd_floor)
    precoder = HybridPrecoder(f_rf=f_rf, f_bb=f_bb)
    mi = mutual_information(h, precoder, budget)
    return DesignReport(
        precoder=precoder,
        mutual_information=mi,
        mi_trace=[mi],
        surrogate_trace=final_values,
        outer_iters=total_steps,
        random_draws=0,
        converged=numerical_rank(h1 @ f_rf, config.rank_tol) == n_s,
        psd_repaired=repaired,
        column_traces=column_traces,
    )
