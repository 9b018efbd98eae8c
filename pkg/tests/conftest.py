import os
import sys

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from box_geometry import Front  # noqa: E402


@pytest.fixture
def staircase():
    """Three boxes that all contribute exactly 1"""
    return Front([(3, 1), (2, 2), (1, 3)])


@pytest.fixture
def two_boxes():
    """Contributions 2 and 4"""
    return Front([(4, 1), (2, 3)])


@pytest.fixture
def cube_front():
    """
    Box 0 = (2,2,2) is cut to the bounding box [1,2]^3 by boxes 1-3;
    box 4 covers [1,1.5]^2 x [1,2] of it, so its contribution is 0.75.
    """
    return Front([(2, 2, 2), (3, 3, 1), (1, 3, 3), (3, 1, 3), (1.5, 1.5, 3)])
