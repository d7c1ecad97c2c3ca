"""Angular RF beamformer and regularized zero-forcing baseband precoders.

The RF stage is built once per realization from the groups' AoD supports.
It is a set of orthogonal DFT-like URA beams, so ``F^H F = I``. Every
subcarrier then gets its own RZF precoder computed on the reduced K x N_RF
effective channel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import steering_vector
from .errors import InvalidConfigError, InvalidInputError

__all__ = [
    "AngleGrid",
    "RfBeamformer",
    "SubcarrierPrecoder",
    "quantized_grid",
    "coverage_scores",
    "select_group_beams",
    "select_all_beams",
    "build_rf_beamformer",
    "effective_channel",
    "rzf_precoder",
    "fdp_precoder",
    "subcarrier_precoder",
]

SUPPORT_SAMPLES = 64


@dataclass(frozen=True)
class AngleGrid:
    lambda_x: np.ndarray
    lambda_y: np.ndarray

    @property
    def size(self) -> int:
        return len(self.lambda_x) * len(self.lambda_y)


def quantized_grid(geometry) -> AngleGrid:
    """The M orthogonal direction-cosine pairs, ``-1 + (2u - 1) / M_x`` per axis."""
    u = np.arange(1, geometry.m_x + 1)
    n = np.arange(1, geometry.m_y + 1)
    return AngleGrid(-1.0 + (2 * u - 1) / geometry.m_x, -1.0 + (2 * n - 1) / geometry.m_y)


def _support_samples(group, n: int = SUPPORT_SAMPLES):
    theta = np.deg2rad(
        np.linspace(group.mean_eaod_deg - group.eaod_spread_deg,
                    group.mean_eaod_deg + group.eaod_spread_deg, n)
    )
    psi = np.deg2rad(
        np.linspace(group.mean_aaod_deg - group.aaod_spread_deg,
                    group.mean_aaod_deg + group.aaod_spread_deg, n)
    )
    t, p = np.meshgrid(theta, psi, indexing="ij")
    return (np.sin(t) * np.cos(p)).ravel(), (np.sin(t) * np.sin(p)).ravel()


def coverage_scores(group, grid: AngleGrid) -> tuple[np.ndarray, np.ndarray]:
    """Coverage fraction and centroid distance of every grid pair for one group.

    The group's (EAoD, AAoD) support is sampled on a 64x64 grid and mapped to
    direction cosines. Pair (u, n) scores the fraction of samples within
    half a bin of it on both axes. Both outputs have shape (m_x, m_y).
    """
    gx, gy = _support_samples(group)
    half_x = 1.0 / len(grid.lambda_x)
    half_y = 1.0 / len(grid.lambda_y)
    in_x = np.abs(gx[None, :] - grid.lambda_x[:, None]) <= half_x + 1e-12
    in_y = np.abs(gy[None, :] - grid.lambda_y[:, None]) <= half_y + 1e-12
    score = (in_x.astype(float) @ in_y.T.astype(float)) / gx.size
    cx, cy = gx.mean(), gy.mean()
    dist = np.hypot(grid.lambda_x[:, None] - cx, grid.lambda_y[None, :] - cy)
    return score, dist


def _ranked_pairs(group, grid: AngleGrid) -> list[tuple[float, float, int, int]]:
    score, dist = coverage_scores(group, grid)
    mx, my = score.shape
    entries = [(score[u, n], dist[u, n], u, n) for u in range(mx) for n in range(my)]
    # best score first, then closest to the support centroid, then (u, n)
    entries.sort(key=lambda e: (-e[0], e[1], e[2], e[3]))
    return entries


def select_group_beams(group, grid: AngleGrid, n_rf_g: int) -> list[tuple[int, int]]:
    """Top ``n_rf_g`` grid pairs (0-based ``(u, n)``) for a single group."""
    if n_rf_g < 1 or n_rf_g > grid.size:
        raise InvalidConfigError(f"cannot select {n_rf_g} beams from a grid of {grid.size}")
    return [(u, n) for _, _, u, n in _ranked_pairs(group, grid)[:n_rf_g]]


def select_all_beams(groups, grid: AngleGrid, n_rf_g: int) -> list[list[tuple[int, int]]]:
    """Disjoint beam sets for all groups.

    Candidates from every group are visited in decreasing score order; a
    contested pair goes to the group that scores it higher and the other
    group moves on to its next-best pair.
    """
    if n_rf_g * len(groups) > grid.size:
        raise InvalidConfigError(
            f"{len(groups)} groups x {n_rf_g} beams exceed a grid of {grid.size}"
        )
    candidates = []
    for g, group in enumerate(groups):
        for rank, (score, dist, u, n) in enumerate(_ranked_pairs(group, grid)):
            candidates.append((-score, dist, rank, g, u, n))
    candidates.sort()
    taken: set[tuple[int, int]] = set()
    chosen: list[list[tuple[int, int]]] = [[] for _ in groups]
    for _, _, _, g, u, n in candidates:
        if len(chosen[g]) == n_rf_g or (u, n) in taken:
            continue
        taken.add((u, n))
        chosen[g].append((u, n))
    return chosen


@dataclass
class RfBeamformer:
    """Shared analog beamformer ``F`` (M x N_RF) with its per-group column blocks."""

    matrix_f: np.ndarray
    group_blocks: list[slice]
    selected_pairs: list[tuple[int, int]]

    @property
    def n_rf(self) -> int:
        return self.matrix_f.shape[1]


def build_rf_beamformer(groups, grid: AngleGrid, geometry, n_rf_g: int,
                        selections=None) -> RfBeamformer:
    """Concatenate per-group steering-vector blocks ``[F_1, ..., F_G]``.

    ``selections`` overrides the automatic beam selection; it must hold one
    list of (u, n) pairs per group with no pair repeated across groups.
    """
    if selections is None:
        selections = select_all_beams(groups, grid, n_rf_g)
    flat = [pair for sel in selections for pair in sel]
    if len(set(flat)) != len(flat):
        raise InvalidConfigError("beam selections overlap between groups")
    blocks, start = [], 0
    for sel in selections:
        blocks.append(slice(start, start + len(sel)))
        start += len(sel)
    u = np.array([p[0] for p in flat], dtype=int)
    n = np.array([p[1] for p in flat], dtype=int)
    f = steering_vector(grid.lambda_x[u], grid.lambda_y[n], geometry).T
    return RfBeamformer(matrix_f=f, group_blocks=blocks, selected_pairs=flat)


def effective_channel(h_i: np.ndarray, f) -> np.ndarray:
    """``H[i] F``; works on a single K x M matrix or a (C, K, M) stack."""
    mat = f.matrix_f if isinstance(f, RfBeamformer) else np.asarray(f)
    if h_i.shape[-1] != mat.shape[0]:
        raise InvalidInputError(
            f"channel has {h_i.shape[-1]} antennas but F has {mat.shape[0]} rows"
        )
    return h_i @ mat


def rzf_precoder(eff: np.ndarray, alpha: float, k_users: int | None = None) -> np.ndarray:
    """Solve ``(eff^H eff + K alpha I) B = eff^H`` for B.

    ``eff`` may carry leading batch dimensions (one matrix per subcarrier).
    A singular system raises ``numpy.linalg.LinAlgError``.
    """
    if not alpha > 0:
        raise InvalidConfigError(f"regularization alpha must be positive, got {alpha}")
    eff = np.asarray(eff)
    if k_users is None:
        k_users = eff.shape[-2]
    eff_h = np.conj(np.swapaxes(eff, -1, -2))
    n = eff.shape[-1]
    gram = eff_h @ eff + k_users * alpha * np.eye(n)
    b = np.linalg.solve(gram, eff_h)
    if not np.all(np.isfinite(b)):
        raise np.linalg.LinAlgError("RZF precoder is not finite")
    return b


def fdp_precoder(h_i: np.ndarray, alpha: float, k_users: int | None = None) -> np.ndarray:
    """Fully digital RZF: the same solve on the full K x M channel."""
    return rzf_precoder(h_i, alpha, k_users)


@dataclass
class SubcarrierPrecoder:
    effective_channel: np.ndarray
    precoder_b: np.ndarray
    regularization_alpha: float


def subcarrier_precoder(h_i: np.ndarray, f, alpha: float) -> SubcarrierPrecoder:
    eff = effective_channel(h_i, f)
    return SubcarrierPrecoder(eff, rzf_precoder(eff, alpha, eff.shape[-2]), alpha)
