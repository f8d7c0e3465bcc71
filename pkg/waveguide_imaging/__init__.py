"""
Waveguide Imaging

Electromagnetic scattering in a rectangular waveguide from its mode
expansion, with reverse time migration and sparse l1 imaging of the
reflectors from array measurements.
"""

__version__ = "1.0.0"
__author__ = "Patroclo Picchiaduro"
__email__ = "patroclo.wanted@gmail.com"
__description__ = "Modal forward modeling and array imaging in electromagnetic waveguides"

# Make main function available at package level
from .main import main

__all__ = ["main", "__version__", "__author__", "__email__", "__description__"]
