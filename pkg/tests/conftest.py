import pytest
import sys
from pathlib import Path

import numpy as np

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.core.spectra import SpectralDataset, WavelengthGrid, default_grid
from src.ingest.dataset_csv import read_dataset_csv

REPO_ROOT = Path(__file__).parent.parent
DATA_DIR = REPO_ROOT / "data"
PROTOCOL_DIR = REPO_ROOT / "src" / "config" / "protocols"

SAMPLE_CLASSES = {
    "green_vegetation": 50,
    "bare_soil": 30,
    "rangeland": 84,
    "concrete": 13,
}


def random_dataset(rng: np.random.Generator, n: int, d: int, name: str = "random") -> SpectralDataset:
    """n smooth-ish random spectra on a d-point grid, values inside (0, 1)"""
    grid = WavelengthGrid(400.0, 400.0 + (d - 1), 1.0)
    base = rng.uniform(0.2, 0.6, size=d)
    matrix = base + rng.uniform(-0.15, 0.15, size=(n, d))
    return SpectralDataset.from_matrix(name, grid, matrix)


@pytest.fixture
def grid():
    """Default working grid (400-900 nm, 501 points)"""
    return default_grid()


@pytest.fixture
def small_grid():
    """Three-point grid"""
    return WavelengthGrid(400.0, 402.0, 1.0)


@pytest.fixture
def rng():
    """Seeded generator so random suites are reproducible"""
    return np.random.default_rng(20240611)


@pytest.fixture
def tiny_dataset(small_grid):
    """Three hand-built spectra on a three-point grid"""
    return SpectralDataset.from_matrix(
        "tiny",
        small_grid,
        [[0.1, 0.2, 0.3], [0.3, 0.3, 0.3], [0.2, 0.4, 0.6]],
        labels=["a", "b", "c"],
    )


@pytest.fixture
def low_rank_dataset(grid):
    """Spectra exactly in the span of a mean plus three smooth shapes"""
    w = grid.wavelengths
    x = (w - 400.0) / 500.0
    shapes = np.vstack([np.ones_like(x), x, np.sin(3 * np.pi * x)])
    rng = np.random.default_rng(7)
    coefficients = rng.uniform(-0.05, 0.05, size=(12, 3))
    matrix = 0.3 + 0.1 * x + coefficients @ shapes
    return SpectralDataset.from_matrix("low_rank", grid, matrix)


@pytest.fixture(scope="session")
def sample_datasets():
    """Bundled canonical datasets, keyed by class"""
    return {
        name: read_dataset_csv(DATA_DIR / "processed" / f"{name}.csv")
        for name in SAMPLE_CLASSES
    }


@pytest.fixture
def make_random_dataset():
    """Factory for random datasets of a given shape"""
    return random_dataset
