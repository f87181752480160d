"""Spectral efficiency, the unconstrained optimal precoder, and shared linear algebra."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "LinkBudget",
    "HybridPrecoder",
    "SvdBundle",
    "channel_svd",
    "mutual_information",
    "mi_from_gains",
    "optimal_precoder",
    "optimal_mutual_information",
    "truncated_channel",
    "frobenius_surrogate",
    "numerical_rank",
    "nearest_psd_fix",
    "RankError",
]

DEFAULT_RANK_TOL = 1e-8


class RankError(ValueError):
    """Requested stream count exceeds the rank available."""


@dataclass(frozen=True)
class LinkBudget:
    """Average received power ``rho``, noise variance and stream count."""

    rho: float
    n_streams: int
    noise_var: float = 1.0

    def __post_init__(self):
        if self.rho <= 0 or self.noise_var <= 0:
            raise ValueError("rho and noise_var must be positive")
        if self.n_streams < 1:
            raise ValueError("n_streams must be >= 1")

    @classmethod
    def from_snr_db(cls, snr_db: float, n_streams: int, noise_var: float = 1.0):
        return cls(noise_var * 10.0 ** (snr_db / 10.0), n_streams, noise_var)

    @property
    def snr_db(self) -> float:
        return 10.0 * np.log10(self.rho / self.noise_var)

    @property
    def scale(self) -> float:
        """``rho / (N_s sigma^2)``, the per-stream SNR factor."""
        return self.rho / (self.n_streams * self.noise_var)


@dataclass
class HybridPrecoder:
    f_rf: np.ndarray
    f_bb: np.ndarray

    @property
    def f(self) -> np.ndarray:
        return self.f_rf @ self.f_bb

    @property
    def power(self) -> float:
        return float(np.linalg.norm(self.f) ** 2)


@dataclass
class SvdBundle:
    u: np.ndarray
    s: np.ndarray
    v: np.ndarray


def _fix_phase(v):
    # rotate every column so its largest-magnitude entry is real positive
    idx = np.argmax(np.abs(v), axis=0)
    pivot = v[idx, np.arange(v.shape[1])]
    rot = np.ones_like(pivot)
    nz = np.abs(pivot) > 0
    rot[nz] = np.abs(pivot[nz]) / pivot[nz]
    return v * rot, rot


def channel_svd(h: np.ndarray) -> SvdBundle:
    """Thin SVD with a deterministic column-phase convention."""
    u, s, vh = np.linalg.svd(h, full_matrices=False)
    v, rot = _fix_phase(vh.conj().T)
    return SvdBundle(u=u * rot, s=s, v=v)


def mi_from_gains(gains, scale: float) -> float:
    """``sum log2(1 + scale * g)`` over effective power gains."""
    gains = np.clip(np.asarray(gains, dtype=float), 0.0, None)
    return float(np.sum(np.log2(1.0 + scale * gains)))


def mutual_information(h, precoder, budget: LinkBudget) -> float:
    """Transmit-side mutual information in bits/s/Hz.

    ``precoder`` is either a :class:`HybridPrecoder` or the full ``N_t x N_s``
    matrix.  Evaluated on the small Gram matrix ``(HF)^H (HF)``.
    """
    f = precoder.f if isinstance(precoder, HybridPrecoder) else np.asarray(precoder)
    h = np.asarray(h)
    if f.ndim != 2 or h.shape[1] != f.shape[0]:
        raise ValueError(f"dimension mismatch: H is {h.shape}, F is {f.shape}")
    hf = h @ f
    gram = hf.conj().T @ hf
    eig = np.linalg.eigvalsh((gram + gram.conj().T) / 2)
    return mi_from_gains(eig, budget.scale)


def numerical_rank(m, rel_tol: float = DEFAULT_RANK_TOL) -> int:
    m = np.asarray(m)
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))


def _check_streams(h, n_streams, rel_tol):
    r = numerical_rank(h, rel_tol)
    if n_streams > r:
        raise RankError(f"{n_streams} streams requested but channel rank is {r}")


def optimal_precoder(h, n_streams: int, rel_tol: float = DEFAULT_RANK_TOL) -> HybridPrecoder:
    """Unconstrained optimum with equal power: the top ``n_streams`` right singular vectors.

    The analog part is the identity, so ``precoder.f`` is ``V_{N_s}`` itself.
    """
    _check_streams(h, n_streams, rel_tol)
    v = channel_svd(h).v[:, :n_streams]
    return HybridPrecoder(f_rf=np.eye(h.shape[1]), f_bb=v)


def optimal_mutual_information(h, budget: LinkBudget) -> float:
    """Closed form of :func:`mutual_information` at the optimal precoder."""
    s = np.linalg.svd(h, compute_uv=False)[:budget.n_streams]
    return mi_from_gains(s ** 2, budget.scale)


def truncated_channel(h, n_streams: int, rel_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Best rank-``n_streams`` approximation ``U_Ns S_Ns V_Ns^H``."""
    _check_streams(h, n_streams, rel_tol)
    u, s, vh = np.linalg.svd(h, full_matrices=False)
    k = n_streams
    return (u[:, :k] * s[:k]) @ vh[:k]


def frobenius_surrogate(v1, f_rf) -> float:
    """``||V_1^H F_RF||_F^2``."""
    return float(np.linalg.norm(np.asarray(v1).conj().T @ f_rf) ** 2)


def nearest_psd_fix(g, floor: float) -> np.ndarray:
    """Raise eigenvalues of a Hermitian matrix below ``floor`` to ``floor``.

    Returns ``g`` unchanged when it is already above the floor.
    """
    g = np.asarray(g)
    scale = max(1.0, float(np.max(np.abs(g)))) if g.size else 1.0
    if not np.allclose(g, g.conj().T, rtol=0.0, atol=1e-10 * scale):
        raise ValueError("nearest_psd_fix requires a Hermitian matrix")
    w, q = np.linalg.eigh(g)
    if w[0] >= floor:
        return g
    w = np.maximum(w, floor)
    out = (q * w) @ q.conj().T
    return (out + out.conj().T) / 2
