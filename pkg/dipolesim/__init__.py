"""
dipolesim: collective light scattering by driven sub-wavelength arrays of two-level emitters.
"""

from .version import get_cached_version

__version__ = get_cached_version()
