from pathlib import Path

import pytest

import sparsegrid as sg

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def fixture_paths():
    paths = sorted(DATA_DIR.glob("*.pgm"))
    assert len(paths) >= 5, "bundled fixture images missing"
    return paths


@pytest.fixture(scope="session")
def fixture_images(fixture_paths):
    return [sg.load_pgm(p) for p in fixture_paths]
