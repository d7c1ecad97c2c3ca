"""URA phase responses and per-subcarrier multipath channel synthesis."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "ChannelRealization",
    "phase_response",
    "steering_vector",
    "user_channel",
    "user_channel_factored",
    "assemble_channel",
    "dump_channel",
    "load_channel",
]


def _axis_response(gamma, n: int, d: float) -> np.ndarray:
    # trailing axis runs over the n elements of one array axis
    m = np.arange(n)
    return np.exp(-2j * np.pi * d * np.multiply.outer(np.asarray(gamma, dtype=float), m))


def phase_response(gamma_x, gamma_y, geometry) -> np.ndarray:
    """Kronecker (x then y) product of the per-axis progressive phase vectors.

    Scalar direction cosines give a length-M vector; arrays of shape ``s``
    give shape ``s + (M,)``.
    """
    ax = _axis_response(gamma_x, geometry.m_x, geometry.spacing_d)
    ay = _axis_response(gamma_y, geometry.m_y, geometry.spacing_d)
    out = ax[..., :, None] * ay[..., None, :]
    return out.reshape(out.shape[:-2] + (geometry.n_antennas,))


def steering_vector(gamma_x, gamma_y, geometry) -> np.ndarray:
    """Unit-norm beam ``conj(phase_response) / sqrt(M)``."""
    return np.conj(phase_response(gamma_x, gamma_y, geometry)) / np.sqrt(geometry.n_antennas)


def _delay_phases(n_paths: int, subcarriers, n_subcarriers: int) -> np.ndarray:
    # path l (1-based) acts as delay tap l at subcarrier i (1-based)
    taps = np.arange(1, n_paths + 1)
    return np.exp(-2j * np.pi * np.multiply.outer(np.asarray(subcarriers), taps) / n_subcarriers)


def _path_amplitudes(paths, path_loss_exponent: float) -> np.ndarray:
    return paths.distances_m ** (-path_loss_exponent) * paths.gains


def user_channel(paths, i: int, config) -> np.ndarray:
    """Channel vector of one user at subcarrier ``i`` (1-based), as a path sum."""
    C = config.subcarriers
    if not 1 <= i <= C:
        raise InvalidInputError(f"subcarrier index {i} outside 1..{C}")
    amps = _path_amplitudes(paths, config.path_loss_exponent)
    gx, gy = paths.gamma_x, paths.gamma_y
    h = np.zeros(config.geometry.n_antennas, dtype=complex)
    for l in range(len(amps)):
        h += (
            amps[l]
            * phase_response(gx[l], gy[l], config.geometry)
            * np.exp(-2j * np.pi * (l + 1) * i / C)
        )
    return h


def user_channel_factored(paths, i: int, config) -> np.ndarray:
    """Same channel as :func:`user_channel`, computed as ``z^T Phi``."""
    C = config.subcarriers
    if not 1 <= i <= C:
        raise InvalidInputError(f"subcarrier index {i} outside 1..{C}")
    z = _path_amplitudes(paths, config.path_loss_exponent) * _delay_phases(len(paths.gains), i, C)
    phi = phase_response(paths.gamma_x, paths.gamma_y, config.geometry)
    return z @ phi


@dataclass
class ChannelRealization:
    """``per_subcarrier[i]`` is the K x M channel matrix of subcarrier i+1."""

    per_subcarrier: np.ndarray
    users: list

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.per_subcarrier.shape

    def group_rows(self) -> list[slice]:
        """Row range of each group within every H[i]."""
        bounds = []
        start = 0
        groups = [u.group_index for u in self.users]
        for g in sorted(set(groups)):
            n = groups.count(g)
            bounds.append(slice(start, start + n))
            start += n
        return bounds


def assemble_channel(users, config) -> ChannelRealization:
    """Stack all users' channels into a (C, K, M) tensor, group by group."""
    groups = [u.group_index for u in users]
    if any(b < a for a, b in zip(groups, groups[1:])):
        raise InvalidInputError("users must be ordered by group index")
    if not users:
        raise InvalidInputError("no users to assemble")
    C = config.subcarriers
    n_paths = len(users[0].gains)
    # (K, L) amplitudes and (K, L, M) phase responses
    amps = np.stack([_path_amplitudes(u, config.path_loss_exponent) for u in users])
    gx = np.stack([u.gamma_x for u in users])
    gy = np.stack([u.gamma_y for u in users])
    phi = phase_response(gx, gy, config.geometry)
    delays = _delay_phases(n_paths, np.arange(1, C + 1), C)  # (C, L)
    h = np.einsum("kl,cl,klm->ckm", amps, delays, phi, optimize=True)
    return ChannelRealization(per_subcarrier=h, users=list(users))


def dump_channel(realization: ChannelRealization, path: str | Path, fmt: str = "binary") -> None:
    """Write the (C, K, M) tensor for regression fixtures.

    ``binary`` writes raw little-endian float64 pairs (re, im) in C order;
    ``json`` writes ``{"shape": [...], "data": [re, im, ...]}``.
    """
    h = np.ascontiguousarray(realization.per_subcarrier, dtype="<c16")
    flat = h.view("<f8").ravel()
    if fmt == "binary":
        flat.tofile(path)
    elif fmt == "json":
        with open(path, "w", encoding="utf-8") as fh:
            json.dump({"shape": list(h.shape), "data": flat.tolist()}, fh)
    else:
        raise ValueError(f"unknown channel dump format {fmt!r}")


def load_channel(path: str | Path, shape: tuple[int, int, int] | None = None) -> np.ndarray:
    """Read a tensor written by :func:`dump_channel`.

    Binary dumps carry no header, so ``shape`` is required for them.
    """
    path = Path(path)
    if path.suffix == ".json":
        with open(path, encoding="utf-8") as fh:
            blob = json.load(fh)
        flat = np.asarray(blob["data"], dtype="<f8")
        shape = tuple(blob["shape"])
    else:
        if shape is None:
            raise ValueError("shape is required to read a binary channel dump")
        flat = np.fromfile(path, dtype="<f8")
    return flat.view("<c16").reshape(shape).astype(complex)
