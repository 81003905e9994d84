import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


def bm(rows: list[str]) -> np.ndarray:
    """Binary mask from strings: '#' is true, anything else false."""
    return np.array([[c == "#" for c in row] for row in rows], dtype=bool)


def lm(rows: list[list[int]]) -> np.ndarray:
    """Label mask from nested int lists."""
    return np.array(rows, dtype=np.int32)


@pytest.fixture
def static_spec() -> dict:
    """20-frame static scene: one rectangle that never moves."""
    return {
        "name": "static",
        "width": 64,
        "height": 48,
        "frames": 20,
        "seed": 7,
        "objects": [
            {"id": 1, "shape": "rectangle", "size": [12, 10], "position": [6, 8]},
        ],
    }


@pytest.fixture
def jump_spec() -> dict:
    """20-frame piecewise-static scene: the rectangle teleports at frame 10."""
    return {
        "name": "jump",
        "width": 64,
        "height": 48,
        "frames": 20,
        "seed": 7,
        "objects": [
            {
                "id": 1,
                "shape": "rectangle",
                "size": [12, 10],
                "position": [6, 8],
                "teleports": [[10, 40, 30]],
            },
        ],
    }
