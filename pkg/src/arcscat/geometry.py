"""Smooth open arcs x(t), t in [-1, 1], with normals and the edge weight.

The unit normal is nu(t) = (x2'(t), -x1'(t)) / |x'(t)| for every arc.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

ArcMap = Callable[[np.ndarray], np.ndarray]

_CHECK_POINTS = 101
_FD_TOL = 1e-6


@dataclass(frozen=True)
class ArcParametrization:
    """Position and derivative maps t -> (..., 2); jacobian and normal derived."""

    name: str
    position_fn: ArcMap
    derivative_fn: ArcMap

    def position(self, t):
        return self.position_fn(np.asarray(t, dtype=float))

    def derivative(self, t):
        return self.derivative_fn(np.asarray(t, dtype=float))

    def jacobian(self, t):
        return np.linalg.norm(self.derivative(t), axis=-1)

    def normal(self, t):
        d = self.derivative(t)
        n = np.stack([d[..., 1], -d[..., 0]], axis=-1)
        return n / np.linalg.norm(d, axis=-1)[..., None]

    def tangent(self, t):
        d = self.derivative(t)
        return d / np.linalg.norm(d, axis=-1)[..., None]


def weight(t):
    """Edge weight w(x(t)) = sqrt(1 - t**2)."""
    t = np.asarray(t, dtype=float)
    return np.sqrt(np.clip((1.0 - t) * (1.0 + t), 0.0, None))


def _flat_pos(t):
    return np.stack([t, np.zeros_like(t)], axis=-1)


def _flat_der(t):
    return np.stack([np.ones_like(t), np.zeros_like(t)], axis=-1)


def _spiral_pos(t):
    e = np.exp(t)
    return np.stack([e * np.cos(5 * t), e * np.sin(5 * t)], axis=-1)


def _spiral_der(t):
    e = np.exp(t)
    c, s = np.cos(5 * t), np.sin(5 * t)
    return np.stack([e * (c - 5 * s), e * (s + 5 * c)], axis=-1)


def _fish_pos(t):
    rad = 1.0 + 0.7 * np.cos(1.6 * np.pi * t)
    a = 0.8 * np.pi * t
    return np.stack([rad * np.cos(a), rad * np.sin(a)], axis=-1)


def _fish_der(t):
    rad = 1.0 + 0.7 * np.cos(1.6 * np.pi * t)
    drad = -0.7 * 1.6 * np.pi * np.sin(1.6 * np.pi * t)
    a = 0.8 * np.pi * t
    da = 0.8 * np.pi
    return np.stack(
        [drad * np.cos(a) - rad * da * np.sin(a), drad * np.sin(a) + rad * da * np.cos(a)],
        axis=-1,
    )


_BUILTIN = {
    "flat_strip": (_flat_pos, _flat_der),
    "spiral": (_spiral_pos, _spiral_der),
    "fish": (_fish_pos, _fish_der),
}

ARC_NAMES = tuple(_BUILTIN)


def make_arc(name: str) -> ArcParametrization:
    """One of the built-in arcs: ``flat_strip``, ``spiral`` or ``fish``."""
    try:
        pos, der = _BUILTIN[name]
    except KeyError:
        raise ValueError(f"unknown arc {name!r}; expected one of {ARC_NAMES}") from None
    return ArcParametrization(name=name, position_fn=pos, derivative_fn=der)


def make_custom_arc(pos: ArcMap, deriv: ArcMap, name: str = "custom") -> ArcParametrization:
    """Wrap user maps after sampling |x'| > 0 and x' against central differences."""
    t = np.linspace(-1.0, 1.0, _CHECK_POINTS)
    d = np.asarray(deriv(t), dtype=float)
    p = np.asarray(pos(t), dtype=float)
    if d.shape != (_CHECK_POINTS, 2) or p.shape != (_CHECK_POINTS, 2):
        raise ValueError("position and derivative maps must return arrays of shape (n, 2)")
    if np.any(np.linalg.norm(d, axis=-1) < 1e-12):
        raise ValueError("degenerate parametrization: |x'(t)| vanishes")
    h = 1e-5
    tc = t[1:-1]
    fd = (np.asarray(pos(tc + h)) - np.asarray(pos(tc - h))) / (2 * h)
    scale = max(1.0, float(np.max(np.abs(d))))
    if np.max(np.abs(fd - d[1:-1])) > _FD_TOL * scale:
        raise ValueError("derivative map inconsistent with position map")
    return ArcParametrization(name=name, position_fn=pos, derivative_fn=deriv)
