"""
EPDC Toolkit
Characterization of click/no-click threshold detectors, resolved by the
photon number that triggers them, from click statistics under coherent probing.
"""

__version__ = "0.1.0"
