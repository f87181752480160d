"""Shared fixtures and independent reference computations for the test suite."""

import itertools

import numpy as np
import pytest

from switchbf.channel import ArrayGeometry, ChannelConfig, generate_channel
from switchbf.metrics import LinkBudget, numerical_rank, truncated_channel


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def small_channel(seed):
    """Clustered 4x6 channel: 3x2 sectorized transmitter, 2x2 omni receiver."""
    cfg = ChannelConfig(8, 10, ArrayGeometry.sector(3, 2), ArrayGeometry(2, 2), seed=seed)
    return generate_channel(cfg).h


def logdet_mi(h, f, rho, n_s, noise_var=1.0):
    """Mutual information through the N_r x N_r determinant (slogdet)."""
    n_r = h.shape[0]
    m = np.eye(n_r) + rho / (n_s * noise_var) * (h @ f @ f.conj().T @ h.conj().T)
    sign, val = np.linalg.slogdet(m)
    assert sign.real > 0
    return val / np.log(2)


def qr_baseband_reference(h, f_rf, n_s):
    """Equal-power baseband for a full-column-rank analog matrix via polar factor.

    Independent of the library: U_RF comes from the polar decomposition of
    F_RF (SVD-based), and the optimum over semi-unitary U_RF G is the top N_s
    right singular vectors of H U_RF.
    """
    p, _, qh = np.linalg.svd(f_rf, full_matrices=False)
    u_rf = p @ qh
    _, _, vh = np.linalg.svd(h @ u_rf)
    return u_rf @ vh[:n_s].conj().T


def exhaustive_optimum(h, k_t, n_s, rho=1.0):
    """Best MI over all binary N_t x k_t analog matrices with rank(H_1 F) >= N_s."""
    n_t = h.shape[1]
    h1 = truncated_channel(h, n_s)
    best = -np.inf
    for bits in itertools.product((0.0, 1.0), repeat=n_t * k_t):
        f_rf = np.array(bits).reshape(n_t, k_t)
        if numerical_rank(h1 @ f_rf) < n_s:
            continue
        if np.linalg.matrix_rank(f_rf) < k_t:
            # rank-deficient F_RF: drop duplicate/zero columns, the span is what matters
            q, r, piv = _independent_columns(f_rf)
            f_rf = f_rf[:, piv]
            if f_rf.shape[1] < n_s:
                continue
        f = qr_baseband_reference(h, f_rf, n_s)
        best = max(best, logdet_mi(h, f, rho, n_s))
    return best


def _independent_columns(f):
    import scipy.linalg
    q, r, piv = scipy.linalg.qr(f, pivoting=True)
    d = np.abs(np.diag(r))
    k = int(np.sum(d > 1e-9 * max(d[0], 1e-300)))
    return q, r, np.sort(piv[:k])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def budget2():
    return LinkBudget(1.0, 2)
