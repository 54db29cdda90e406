import numpy as np
import pytest

from scenario_cert.distributions import UniformNormBall
from scenario_cert.model import Layer, NetworkModel
from scenario_cert.safeset import Row, SafeSet


@pytest.fixture(scope="session")
def coordinate_relu_model():
    """f_i(x) = max(0, x_i) on R^2."""
    return NetworkModel((Layer(np.eye(2), np.zeros(2), "relu"),))


@pytest.fixture(scope="session")
def diamond_input():
    """Uniform l1 ball centered at (1, 0) with radius 1."""
    return UniformNormBall(center=np.array([1.0, 0.0]), radius=1.0, norm="l1")


@pytest.fixture(scope="session")
def upper_halfplane_safe():
    """Safe set y_2 + 0.5 >= 0."""
    return SafeSet(np.array([[0.0, 1.0]]), np.array([0.5]))


@pytest.fixture(scope="session")
def upper_row():
    return Row(np.array([0.0, 1.0]), 0.5)


@pytest.fixture(scope="session")
def triangle_fill():
    """Dense deterministic fill of the triangle hull{(0,0),(2,0),(1,1)} —
    the reachable outputs of the coordinate ReLU under the diamond input."""
    pts = []
    verts = np.array([[0.0, 0.0], [2.0, 0.0], [1.0, 1.0]])
    m = 40
    for i in range(m + 1):
        for j in range(m + 1 - i):
            u, v = i / m, j / m
            pts.append((1 - u - v) * verts[0] + u * verts[1] + v * verts[2])
    return np.array(pts)
