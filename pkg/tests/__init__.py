"""
Test suite for Waveguide Imaging.

Unit tests run on a small guide; tests marked ``slow`` use the reference
configurations and ``integration`` tests drive whole pipeline runs.
"""
