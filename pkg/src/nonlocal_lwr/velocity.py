"""Velocity laws ``V(xi)`` on ``[0, 1]``, all nonincreasing."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np


class VelocityFamily(str, enum.Enum):
    GREENSHIELDS = "greenshields"
    KRYSTEK = "krystek"
    UNDERWOOD = "underwood"
    CLIPPED_GREENSHIELDS = "clipped_greenshields"


@dataclass(frozen=True)
class VelocityModel:
    family: VelocityFamily
    evaluator: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray]
    sup_norm: float
    lip_norm: float
    nonincreasing: bool = True

    @property
    def name(self) -> str:
        return self.family.value

    def __call__(self, xi):
        return self.evaluator(xi)


def _greenshields_prime(xi):
    return -np.ones_like(xi)


def _krystek_prime(xi):
    return -4.0 * (1.0 - xi) ** 3


def _underwood_prime(xi):
    return -np.exp(-xi)


def _clipped_prime(xi):
    return np.where(np.asarray(xi) < 1.0, -1.0, 0.0)


def _greenshields(xi):
    return 1.0 - xi


def _krystek(xi):
    return (1.0 - xi) ** 4


def _underwood(xi):
    return np.exp(-xi)


def _clipped(xi):
    return np.maximum(1.0 - xi, 0.0)


GREENSHIELDS = VelocityModel(
    VelocityFamily.GREENSHIELDS, _greenshields, _greenshields_prime, 1.0, 1.0)
KRYSTEK = VelocityModel(
    VelocityFamily.KRYSTEK, _krystek, _krystek_prime, 1.0, 4.0)
UNDERWOOD = VelocityModel(
    VelocityFamily.UNDERWOOD, _underwood, _underwood_prime, 1.0, 1.0)
# used when W may exceed 1, e.g. with unnormalized weights
CLIPPED_GREENSHIELDS = VelocityModel(
    VelocityFamily.CLIPPED_GREENSHIELDS, _clipped, _clipped_prime, 1.0, 1.0)

_MODELS = {m.family: m for m in (GREENSHIELDS, KRYSTEK, UNDERWOOD, CLIPPED_GREENSHIELDS)}


def get_velocity(name: str | VelocityFamily) -> VelocityModel:
    try:
        return _MODELS[VelocityFamily(name)]
    except ValueError:
        raise ValueError(f"unknown velocity model {name!r}") from None
