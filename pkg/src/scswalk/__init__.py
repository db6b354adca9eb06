"""Minuscule random walks, Weyl characters and Whittaker functions.

Submodules:

- ``root_system``: root data, Weyl groups and minuscule coweights.
- ``spectral``: characters, Whittaker values and related closed forms.
- ``walks``: lattice walks, reflection principle and survival probabilities.
- ``padic_field``: truncated Laurent series over a finite field.
- ``borel_sim``: Borel-subgroup random walks for PGL_n.
"""
from .root_system import RootDatum, build_root_datum, minuscule_coweights, weyl_orbit
from .spectral import SpectralPoint, scs_whittaker, weyl_character
from .walks import increment_law, survival_reflection

__version__ = "0.1.0"

__all__ = [
    "RootDatum",
    "build_root_datum",
    "minuscule_coweights",
    "weyl_orbit",
    "SpectralPoint",
    "weyl_character",
    "scs_whittaker",
    "increment_law",
    "survival_reflection",
]
