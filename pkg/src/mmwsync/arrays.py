"""Uniform planar array geometry, steering vectors and direction sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ArrayGeometry:
    """Rectangular antenna array, element spacing in wavelengths (default half)."""

    rows: int
    cols: int
    spacing_wl: float = 0.5

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("array needs at least one element per axis")
        if self.spacing_wl <= 0:
            raise ValueError("element spacing must be positive")

    @property
    def n_elements(self) -> int:
        return self.rows * self.cols


@dataclass(frozen=True)
class Direction:
    """Azimuth in [-pi, pi), elevation in [-pi/2, pi/2], radians."""

    azimuth: float
    elevation: float

    def __post_init__(self):
        if not -np.pi <= self.azimuth <= np.pi:
            raise ValueError("azimuth out of range")
        if not -np.pi / 2 <= self.elevation <= np.pi / 2:
            raise ValueError("elevation out of range")


def steering_vector(geom: ArrayGeometry, direction: Direction) -> np.ndarray:
    """Unit-norm array response for the given direction.

    Element (m, n) carries phase 2*pi*spacing*(m*sin(el) + n*cos(el)*sin(az));
    rows run along the elevation axis, columns along the azimuth axis.
    """
    m = np.arange(geom.rows)[:, None]
    n = np.arange(geom.cols)[None, :]
    se = np.sin(direction.elevation)
    ca = np.cos(direction.elevation) * np.sin(direction.azimuth)
    phase = 2.0 * np.pi * geom.spacing_wl * (m * se + n * ca)
    return (np.exp(1j * phase) / np.sqrt(geom.n_elements)).ravel()


def steering_many(geom: ArrayGeometry, azimuths: np.ndarray, elevations: np.ndarray) -> np.ndarray:
    """Steering vectors for many directions at once, shape (n_dirs, n_elements)."""
    m = np.repeat(np.arange(geom.rows), geom.cols)
    n = np.tile(np.arange(geom.cols), geom.rows)
    se = np.sin(elevations)[:, None]
    ca = (np.cos(elevations) * np.sin(azimuths))[:, None]
    phase = 2.0 * np.pi * geom.spacing_wl * (m[None, :] * se + n[None, :] * ca)
    return np.exp(1j * phase) / np.sqrt(geom.n_elements)


def random_direction(rng: np.random.Generator, mode: str = "sphere") -> Direction:
    """Draw a direction; 'sphere' makes sin(elevation) uniform so points cover
    the sphere uniformly, 'angles' draws the elevation angle itself uniformly."""
    az = rng.uniform(-np.pi, np.pi)
    if mode == "sphere":
        el = np.arcsin(rng.uniform(-1.0, 1.0))
    elif mode == "angles":
        el = rng.uniform(-np.pi / 2, np.pi / 2)
    else:
        raise ValueError(f"unknown direction draw mode {mode!r}")
    return Direction(az, el)


def random_directions(rng: np.random.Generator, n: int, mode: str = "sphere") -> tuple[np.ndarray, np.ndarray]:
    """Vectorized random_direction: returns (azimuths, elevations) arrays."""
    az = rng.uniform(-np.pi, np.pi, size=n)
    if mode == "sphere":
        el = np.arcsin(rng.uniform(-1.0, 1.0, size=n))
    elif mode == "angles":
        el = rng.uniform(-np.pi / 2, np.pi / 2, size=n)
    else:
        raise ValueError(f"unknown direction draw mode {mode!r}")
    return az, el


def max_bf_gain(geom: ArrayGeometry) -> float:
    """Maximal single-path beamforming gain: the element count."""
    return float(geom.n_elements)


def beam_coverage_factor(geom: ArrayGeometry) -> float:
    """Mean of N*|a(d1)* a(d2)|^2 over independent sphere-uniform directions.

    Equals 1 for a half-wavelength linear array.  For a planar array the
    steering continuum covers only the unit disk of the direction-cosine
    square, so random beams overlap more than orthogonal ones and the mean
    pairwise gain exceeds 1/N (about 4/pi for large square arrays).  Closed
    form: (1/N) * sum_ij sinc(rho_ij) ^ 2 with rho the element offset in units
    of spacing (valid for spacing = 0.5 wavelengths).
    """
    m = np.repeat(np.arange(geom.rows), geom.cols)
    n = np.tile(np.arange(geom.cols), geom.rows)
    rho = np.hypot(m[:, None] - m[None, :], n[:, None] - n[None, :]) * (2.0 * geom.spacing_wl)
    return float(np.sum(np.sinc(rho) ** 2) / geom.n_elements)
