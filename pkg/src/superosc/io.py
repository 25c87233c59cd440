"""Plain-text loaders for spectra, states, observables and spectral densities.

All formats are whitespace- or comma-separated numbers; '#' starts a comment.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .approximation import BandLimitedFunction
from .errors import DomainError
from .spectral import SpectralDensity
from .weakvalues import Observable, QuantumState


def _rows(path) -> list[list[float]]:
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].replace(",", " ").strip()
        if not line:
            continue
        try:
            rows.append([float(tok) for tok in line.split()])
        except ValueError as exc:
            raise DomainError(f"{path}:{lineno}: not numeric ({exc})") from None
    if not rows:
        raise DomainError(f"{path}: no data")
    return rows


def _table(path, ncols: int) -> np.ndarray:
    rows = _rows(path)
    bad = [i for i, r in enumerate(rows) if len(r) != ncols]
    if bad:
        raise DomainError(f"{path}: expected {ncols} columns, row {bad[0] + 1} has {len(rows[bad[0]])}")
    return np.array(rows)


def load_bandlimited(path) -> BandLimitedFunction:
    """Columns lam, Re psi_hat, Im psi_hat on a uniform symmetric grid [-B, B]."""
    t = _table(path, 3)
    lam = t[:, 0]
    if len(lam) < 3:
        raise DomainError("need at least three spectral samples")
    steps = np.diff(lam)
    h = float(np.mean(steps))
    if np.max(np.abs(steps - h)) > 1e-9 * max(1.0, abs(h)) or abs(lam[0] + lam[-1]) > 1e-9 * abs(lam[-1]):
        raise DomainError("spectral grid must be uniform and symmetric about 0")
    return BandLimitedFunction(float(lam[-1]), t[:, 1] + 1j * t[:, 2], h)


def load_density(path) -> SpectralDensity:
    """Columns lam, weight; weights are renormalised to sum to one."""
    t = _table(path, 2)
    if np.any(t[:, 1] < 0):
        raise DomainError("density weights must be nonnegative")
    return SpectralDensity.normalized(t[:, 0], t[:, 1])


def _header_dim(rows: list[list[float]], path) -> int:
    head = rows[0]
    if len(head) != 1 or head[0] != int(head[0]) or head[0] < 2:
        raise DomainError(f"{path}: first line must be the dimension d >= 2")
    return int(head[0])


def load_state(path) -> QuantumState:
    """Dimension header, then d rows 'Re Im'."""
    rows = _rows(path)
    d = _header_dim(rows, path)
    body = rows[1:]
    if len(body) != d or any(len(r) != 2 for r in body):
        raise DomainError(f"{path}: expected {d} rows of 'Re Im'")
    return QuantumState([complex(r[0], r[1]) for r in body])


def load_observable(path) -> Observable:
    """Dimension header, then d rows of d 'Re Im' pairs."""
    rows = _rows(path)
    d = _header_dim(rows, path)
    body = rows[1:]
    if len(body) != d or any(len(r) != 2 * d for r in body):
        raise DomainError(f"{path}: expected {d} rows of {d} 'Re Im' pairs")
    m = np.array([[complex(r[2 * j], r[2 * j + 1]) for j in range(d)] for r in body])
    return Observable(m)
