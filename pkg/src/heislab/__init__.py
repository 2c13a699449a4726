"""Computational laboratory for generalized Heisenberg groups.

Builds step-two algebras of Heisenberg type over the four real normed
division algebras, their simply connected groups in exponential coordinates
with the Koranyi gauge metric, the gauge inversion with certification of
its exact distance identity, and desk-scale inversion, sphericalization and
distortion machinery for finite metric spaces.
"""

from heislab import algebra, distortion, finite_metric, hgroup, hlie, inversion, util

__all__ = ["algebra", "distortion", "finite_metric", "hgroup", "hlie", "inversion", "util"]
__version__ = "0.1.0"
