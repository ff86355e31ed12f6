"""Shared fixtures.

Reference trees used across the suite (labels are arrival times, vertex 1
is the root):

  T4   parents (2,3,4) -> (1,1,3)     root with children 2,3; 3 has child 4
       sizes [4,1,2,1], Jordan [2,3,2,3], closeness [4,6,4,6]
  P3   path 1-2-3                      parents (1,2)
  S4   star, all attached to the root  parents (1,1,1)
"""

import pytest

from rootrank import RecursiveTree


@pytest.fixture
def t4() -> RecursiveTree:
    return RecursiveTree([1, 1, 3])


@pytest.fixture
def p3() -> RecursiveTree:
    return RecursiveTree([1, 2])


@pytest.fixture
def s4() -> RecursiveTree:
    return RecursiveTree([1, 1, 1])
