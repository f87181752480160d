"""Switch-based hybrid design by norm maximization (SHD-NM).

The analog matrix is found by sequential convex programming on the
surrogate ``||V_1^H F_RF||_F^2``: at every step the surrogate is linearized
at the current iterate and maximized over the box ``0 <= F_RF <= 1``.  A
step is accepted only when it keeps ``rank(H_1 F_RF) = N_s`` and does not
decrease the true mutual information; otherwise the linearization point is
moved by Gaussian randomization around the last accepted iterate.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .connectivity import ConnectivitySpec, check_feasible
from .metrics import (
    DEFAULT_RANK_TOL,
    HybridPrecoder,
    LinkBudget,
    RankError,
    channel_svd,
    frobenius_surrogate,
    mutual_information,
    nearest_psd_fix,
    numerical_rank,
)

__all__ = [
    "NmConfig",
    "DesignReport",
    "linearized_gradient",
    "solve_box_lp",
    "gaussian_perturb",
    "baseband_update_qr",
    "baseband_update_scaled",
    "design_shd_nm",
    "check_dimensions",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class NmConfig:
    max_outer: int = 1000
    max_random: int = 1000
    rank_tol: float = DEFAULT_RANK_TOL
    psd_floor: float = 1e-10
    improvement_tol: float = 0.0
    seed: int = 0
    # early stop after `stall_steps` consecutive accepted steps gaining < stall_tol
    stall_tol: float = 1e-6
    stall_steps: int = 5
    max_init_draws: int = 50
    # baseband update used to score candidates inside the loop: "qr" or "scaled"
    inner_update: str = "qr"
    # draw is N(F, scale^2 I); a radius shrinks longer displacements onto that sphere
    perturb_scale: float = 1.0
    perturb_radius: float | None = None

    def __post_init__(self):
        if self.max_outer < 1 or self.max_random < 1:
            raise ValueError("max_outer and max_random must be >= 1")
        if self.inner_update not in ("scaled", "qr"):
            raise ValueError(f"unknown inner_update {self.inner_update!r}")


@dataclass
class DesignReport:
    precoder: HybridPrecoder
    mutual_information: float
    mi_trace: list = field(default_factory=list)
    surrogate_trace: list = field(default_factory=list)
    outer_iters: int = 0
    random_draws: int = 0
    converged: bool = False
    psd_repaired: bool = False
    column_traces: list = field(default_factory=list)

    def to_dict(self):
        f_bb = self.precoder.f_bb
        return {
            "mutual_information": self.mutual_information,
            "outer_iters": self.outer_iters,
            "random_draws": self.random_draws,
            "converged": self.converged,
            "psd_repaired": self.psd_repaired,
            "mi_trace": list(map(float, self.mi_trace)),
            "surrogate_trace": list(map(float, self.surrogate_trace)),
            "column_traces": [list(map(float, t)) for t in self.column_traces],
            "f_rf": self.precoder.f_rf.astype(int).tolist(),
            "f_bb_real": f_bb.real.tolist(),
            "f_bb_imag": f_bb.imag.tolist(),
        }


def linearized_gradient(v1, f_rf_prev) -> np.ndarray:
    """Gradient ``2 real(V_1 V_1^H) F`` of the surrogate at a real point ``F``."""
    v1 = np.asarray(v1)
    return 2.0 * np.real(v1 @ (v1.conj().T @ f_rf_prev))


def solve_box_lp(gradient, mask: ConnectivitySpec | np.ndarray | None = None, previous=None) -> np.ndarray:
    """Maximize ``<gradient, F>`` over ``0 <= F <= 1`` with masked entries fixed at 0.

    The objective is separable so the optimum is 1 where the gradient is
    positive and 0 where it is negative.  Entries with exactly zero gradient
    keep their ``previous`` value (0 when not given).
    """
    gradient = np.asarray(gradient, dtype=float)
    prev = np.zeros_like(gradient) if previous is None else np.asarray(previous, dtype=float)
    out = np.where(gradient > 0, 1.0, np.where(gradient < 0, 0.0, prev))
    if mask is not None:
        allowed = mask.bool_mask if isinstance(mask, ConnectivitySpec) else np.asarray(mask, dtype=bool)
        out = np.where(allowed, out, 0.0)
    return out


def gaussian_perturb(f_rf, rng: np.random.Generator, radius: float | None = None,
                     scale: float = 1.0) -> np.ndarray:
    """Draw from ``N(vec(F), scale^2 I)`` and clamp to the box.

    With ``radius`` set, a displacement longer than ``radius`` is shrunk onto
    the sphere of that radius before clamping.
    """
    f_rf = np.asarray(f_rf, dtype=float)
    step = scale * rng.standard_normal(f_rf.shape)
    if radius is not None:
        norm = np.linalg.norm(step)
        if norm > radius:
            step *= radius / norm
    return np.clip(f_rf + step, 0.0, 1.0)


def _inv_sqrt(gram):
    w, q = np.linalg.eigh(gram)
    return (q / np.sqrt(w)) @ q.conj().T


def _right_singular(m, k):
    _, _, vh = np.linalg.svd(m, full_matrices=False)
    return vh[:k].conj().T


def _qr_update(h, f_rf, n_streams, psd_floor):
    f_rf = np.asarray(f_rf, dtype=float)
    k_t = f_rf.shape[1]
    if k_t < n_streams:
        raise ValueError(f"k_t={k_t} RF chains cannot carry {n_streams} streams")
    if not np.any(f_rf):
        raise RankError("analog precoder is all zeros")
    gram = f_rf.T @ f_rf
    repaired = bool(np.linalg.eigvalsh(gram)[0] < psd_floor)
    if repaired:
        gram = nearest_psd_fix(gram, psd_floor)
    root = _inv_sqrt(gram)
    u_rf = f_rf @ root
    g = _right_singular(h @ u_rf, n_streams)
    f_bb = root @ g
    if repaired:
        f_bb *= np.sqrt(n_streams) / np.linalg.norm(f_rf @ f_bb)
    return f_bb, repaired


def baseband_update_qr(h, f_rf, budget: LinkBudget | int, psd_floor: float = 1e-10) -> np.ndarray:
    """Equal-power baseband precoder for a fixed analog matrix.

    With ``U_RF = F_RF (F_RF^H F_RF)^{-1/2}`` and ``G`` the top right singular
    vectors of ``H U_RF``, returns ``F_BB = (F_RF^H F_RF)^{-1/2} G`` so that
    ``F_RF F_BB = U_RF G`` is semi-unitary.  A singular Gram matrix is
    floored at ``psd_floor`` and the product rescaled to power ``N_s``.
    """
    n_streams = budget.n_streams if isinstance(budget, LinkBudget) else int(budget)
    return _qr_update(h, f_rf, n_streams, psd_floor)[0]


def baseband_update_scaled(h1, f_rf, n_streams: int, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Right singular vectors of ``H_1 F_RF`` rescaled so ``||F_RF F_BB||_F^2 = N_s``."""
    ht = h1 @ f_rf
    if numerical_rank(ht, rank_tol) < n_streams:
        raise RankError(f"rank(H1 F_RF) < {n_streams}")
    f_bb = _right_singular(ht, n_streams)
    return f_bb * (np.sqrt(n_streams) / np.linalg.norm(f_rf @ f_bb))


def check_dimensions(h, n_streams, k_t, mask=None):
    n_t = h.shape[1]
    if not n_streams <= k_t <= n_t:
        raise ValueError(f"need N_s <= k_t <= N_t, got N_s={n_streams}, k_t={k_t}, N_t={n_t}")
    if n_streams > h.shape[0]:
        raise ValueError(f"N_s={n_streams} exceeds N_r={h.shape[0]}")
    if mask is not None and mask.g.shape != (n_t, k_t):
        raise ValueError(f"mask shape {mask.g.shape} does not match ({n_t}, {k_t})")


def _initial_point(h1, n_streams, k_t, allowed, rng, config):
    n_t = h1.shape[1]
    for _ in range(config.max_init_draws):
        f = ((rng.random((n_t, k_t)) < 0.5) & allowed).astype(float)
        if numerical_rank(h1 @ f, config.rank_tol) == n_streams:
            return f
    raise RankError(f"no rank-{n_streams} initial analog matrix in {config.max_init_draws} draws")


def design_shd_nm(h, budget: LinkBudget, k_t: int, config: NmConfig | None = None,
                  mask: ConnectivitySpec | None = None) -> DesignReport:
    """Run SHD-NM on channel ``h``; returns the finalized binary design."""
    config = config or NmConfig()
    h = np.asarray(h)
    n_s = budget.n_streams
    check_dimensions(h, n_s, k_t, mask)

    svd = channel_svd(h)
    if numerical_rank(h, config.rank_tol) < n_s:
        raise RankError(f"channel rank below {n_s}")
    v1 = svd.v[:, :n_s]
    h1 = (svd.u[:, :n_s] * svd.s[:n_s]) @ v1.conj().T
    check_feasible(mask, h1, n_s, k_t, config.rank_tol)
    allowed = mask.bool_mask if mask is not None else np.ones((h.shape[1], k_t), dtype=bool)

    rng = np.random.default_rng(config.seed)

    def score(f):
        if config.inner_update == "qr":
            f_bb = _qr_update(h, f, n_s, config.psd_floor)[0]
        else:
            f_bb = baseband_update_scaled(h1, f, n_s, config.rank_tol)
        return mutual_information(h, f @ f_bb, budget)

    accepted = _initial_point(h1, n_s, k_t, allowed, rng, config)
    mi = score(accepted)
    mi_trace = [mi]
    surrogate_trace = [frobenius_surrogate(v1, accepted)]

    ell, i, draws, stall = 1, 0, 0, 0
    early_stop = False
    while ell <= config.max_outer and i <= config.max_random:
        if i == 0:
            point = accepted
        else:
            point = gaussian_perturb(accepted, rng, config.perturb_radius, config.perturb_scale)
            point = np.where(allowed, point, 0.0)
            draws += 1
        cand = solve_box_lp(linearized_gradient(v1, point), allowed, previous=point)

        if (not np.array_equal(cand, accepted)
                and numerical_rank(h1 @ cand, config.rank_tol) == n_s):
            mi_cand = score(cand)
            if mi_cand >= mi - config.improvement_tol:
                gain = mi_cand - mi
                accepted, mi = cand, mi_cand
                mi_trace.append(mi)
                surrogate_trace.append(frobenius_surrogate(v1, accepted))
                ell += 1
                i = 0
                stall = stall + 1 if gain < config.stall_tol else 0
                if stall >= config.stall_steps:
                    early_stop = True
                    break
                continue
        i += 1

    converged = early_stop or i > config.max_random
    f_rf = np.where(allowed, accepted >= 0.5, False).astype(float)
    if numerical_rank(h1 @ f_rf, config.rank_tol) < n_s:
        # rounding only touches tie-kept entries; fall back to the raw iterate's support
        log.warning("rounding reduced rank; keeping every nonzero entry")
        f_rf = np.where(allowed, accepted > 0, False).astype(float)
    f_bb, repaired = _qr_update(h, f_rf, n_s, config.psd_floor)
    precoder = HybridPrecoder(f_rf=f_rf, f_bb=f_bb)
    return DesignReport(
        precoder=precoder,
        mutual_information=mutual_information(h, precoder, budget),
        mi_trace=mi_trace,
        surrogate_trace=surrogate_trace,
        outer_iters=ell - 1,
        random_draws=draws,
        converged=converged,
        psd_repaired=repaired,
    )
