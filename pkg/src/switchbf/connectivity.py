"""Connectivity masks for partially connected switch networks.

A :class:`ConnectivitySpec` holds the binary ``N_t x k_t`` matrix ``G``
whose column ``l`` lists the antennas reachable from splitter ``l``.  Every
column must select ``s_t`` antennas and every antenna must be fed by
``c_t`` splitters, so ``k_t * s_t == N_t * c_t``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .metrics import numerical_rank, DEFAULT_RANK_TOL

__all__ = [
    "ConnectivitySpec",
    "Violation",
    "InfeasibleMaskError",
    "validate",
    "fully_connected",
    "subset_partition",
    "interleaved_spec",
    "apply_mask",
    "check_feasible",
    "write_spec",
    "read_spec",
]


class InfeasibleMaskError(ValueError):
    pass


@dataclass(frozen=True)
class Violation:
    kind: str  # "column", "row", "count" or "binary"
    index: int
    expected: int
    actual: int


@dataclass(frozen=True, eq=False)
class ConnectivitySpec:
    g: np.ndarray
    s_t: int
    c_t: int

    def __post_init__(self):
        g = np.asarray(self.g)
        if g.ndim != 2 or g.shape[0] < 1 or g.shape[1] < 1:
            raise ValueError(f"connectivity matrix must be 2-D and non-empty, got shape {g.shape}")
        object.__setattr__(self, "g", g.astype(np.int8))
        self.g.flags.writeable = False

    @property
    def n_t(self) -> int:
        return self.g.shape[0]

    @property
    def k_t(self) -> int:
        return self.g.shape[1]

    @property
    def n_connections(self) -> int:
        return int(self.g.sum())

    @property
    def bool_mask(self) -> np.ndarray:
        return self.g.astype(bool)

    def __eq__(self, other):
        if not isinstance(other, ConnectivitySpec):
            return NotImplemented
        return (self.s_t, self.c_t) == (other.s_t, other.c_t) and np.array_equal(self.g, other.g)


def validate(spec: ConnectivitySpec) -> list[Violation]:
    """Return every violated constraint; an empty list means the mask is valid."""
    g = spec.g
    out = []
    bad = np.argwhere((g != 0) & (g != 1))
    for r, _c in bad:
        out.append(Violation("binary", int(r), 1, int(g[r, _c])))
    for col, total in enumerate(g.sum(axis=0)):
        if total != spec.s_t:
            out.append(Violation("column", col, spec.s_t, int(total)))
    for row, total in enumerate(g.sum(axis=1)):
        if total != spec.c_t:
            out.append(Violation("row", row, spec.c_t, int(total)))
    if spec.k_t * spec.s_t != spec.n_t * spec.c_t:
        out.append(Violation("count", -1, spec.k_t * spec.s_t, spec.n_t * spec.c_t))
    return out


def fully_connected(n_t: int, k_t: int) -> ConnectivitySpec:
    return ConnectivitySpec(np.ones((n_t, k_t), dtype=np.int8), s_t=n_t, c_t=k_t)


def subset_partition(n_t: int, k_t: int) -> ConnectivitySpec:
    """Mutually exclusive contiguous antenna blocks, one per RF chain (``c_t = 1``)."""
    if k_t < 1 or n_t % k_t:
        raise ValueError(f"k_t={k_t} must divide n_t={n_t}")
    s_t = n_t // k_t
    g = np.kron(np.eye(k_t, dtype=np.int8), np.ones((s_t, 1), dtype=np.int8))
    return ConnectivitySpec(g, s_t=s_t, c_t=1)


def interleaved_spec(n_t: int, k_t: int, period: int = 2) -> ConnectivitySpec:
    """Row ``r`` connects to every column ``c`` with ``c % period == r % period``.

    ``interleaved_spec(64, 4, 2)`` gives the alternating ``[1,0,1,0]`` /
    ``[0,1,0,1]`` pattern with ``s_t = 32`` and ``c_t = 2``.
    """
    if period < 1 or k_t % period or n_t % period:
        raise ValueError(f"period={period} must divide both n_t={n_t} and k_t={k_t}")
    rows = np.arange(n_t)[:, None] % period
    cols = np.arange(k_t)[None, :] % period
    g = (rows == cols).astype(np.int8)
    return ConnectivitySpec(g, s_t=n_t // period, c_t=k_t // period)


def apply_mask(f_rf, spec: ConnectivitySpec | None) -> np.ndarray:
    f_rf = np.asarray(f_rf)
    if spec is None:
        return f_rf
    if f_rf.shape != spec.g.shape:
        raise ValueError(f"mask is {spec.g.shape}, matrix is {f_rf.shape}")
    return np.where(spec.bool_mask, f_rf, 0)


def check_feasible(spec: ConnectivitySpec | None, h1, n_streams: int, k_t: int,
                   rel_tol: float = DEFAULT_RANK_TOL) -> None:
    """Raise :class:`InfeasibleMaskError` when rank ``n_streams`` is unreachable.

    The reachable antennas (rows used by at least one column) must give the
    truncated channel ``h1`` at least ``n_streams`` independent columns, and
    at least ``n_streams`` RF chains must have a connection.
    """
    n_t = h1.shape[1]
    if spec is None:
        return
    if spec.g.shape != (n_t, k_t):
        raise InfeasibleMaskError(f"mask shape {spec.g.shape} does not match ({n_t}, {k_t})")
    live_cols = int(np.sum(spec.g.any(axis=0)))
    if live_cols < n_streams:
        raise InfeasibleMaskError(f"only {live_cols} RF chains are connected, {n_streams} streams needed")
    rows = spec.g.any(axis=1)
    r = numerical_rank(h1[:, rows], rel_tol) if rows.any() else 0
    if r < n_streams:
        raise InfeasibleMaskError(f"masked channel rank {r} < {n_streams} streams")


# -- CONNSPEC1 text format ---------------------------------------------------

def write_spec(path, spec: ConnectivitySpec) -> None:
    lines = [f"CONNSPEC1 {spec.n_t} {spec.k_t} {spec.s_t} {spec.c_t}"]
    lines += [" ".join(str(int(x)) for x in row) for row in spec.g]
    Path(path).write_text("\n".join(lines) + "\n")


def read_spec(path) -> ConnectivitySpec:
    text = Path(path).read_text().split("\n")
    rows = [ln.split() for ln in text if ln.strip()]
    if not rows or rows[0][0] != "CONNSPEC1" or len(rows[0]) != 5:
        raise ValueError(f"{path}: missing 'CONNSPEC1 N_t k_t s_t c_t' header")
    n_t, k_t, s_t, c_t = (int(x) for x in rows[0][1:])
    body = rows[1:]
    if len(body) != n_t or any(len(r) != k_t for r in body):
        raise ValueError(f"{path}: expected {n_t} rows of {k_t} digits")
    g = np.array([[int(x) for x in r] for r in body], dtype=np.int8)
    return ConnectivitySpec(g, s_t=s_t, c_t=c_t)
