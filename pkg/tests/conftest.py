"""Shared fixtures: the bundled small dataset and a fused two-group tally."""

from pathlib import Path

import pytest

from consensus_rank import build_tally, load_dataset, load_manifest

from helpers import two_group_tally

FIXTURE_DIR = Path(__file__).parent / "data" / "fixture_small"


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return FIXTURE_DIR


@pytest.fixture(scope="session")
def small_manifest():
    return load_manifest(FIXTURE_DIR / "manifest.json")


@pytest.fixture(scope="session")
def small_dataset(small_manifest):
    return load_dataset(small_manifest)


@pytest.fixture(scope="session")
def small_tally(small_dataset):
    return build_tally(small_dataset)


@pytest.fixture(scope="session")
def two_group():
    """(tally, true_mu) with items 0-4 at ability 2.0 and items 5-9 at 0.0."""
    return two_group_tally(seed=7)
