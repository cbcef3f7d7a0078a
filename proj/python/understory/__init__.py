"""Hardware-free toolkit for detection under sparse forest canopy: procedural
multi-view scene synthesis, synthetic-aperture (AOS) refocusing, MST-SR
visible-thermal fusion, and IoU/AP/mAP detection scoring."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
