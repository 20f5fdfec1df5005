"""Plantas contínuas, discretização ZOH e modelo do quadrotor."""

from .continuous import (
    ContinuousPlant,
    DiscretePlant,
    continuous_oracle_step,
    discretize,
    scalar_plant,
)
from .quadrotor import QuadrotorParams, default_noise_densities, quadrotor_hover_plant

__all__ = [
    'ContinuousPlant',
    'DiscretePlant',
    'QuadrotorParams',
    'continuous_oracle_step',
    'default_noise_densities',
    'discretize',
    'quadrotor_hover_plant',
    'scalar_plant',
]
