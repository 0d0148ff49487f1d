import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from irstdbench import detectors, synthgen


@pytest.fixture(scope="session")
def suite():
    return synthgen.standard_suite()


@pytest.fixture(scope="session")
def suite_maps(suite):
    """Saliency map of every (scene, detector) pair, computed once."""
    cfg = detectors.DetectorConfig()
    return {(i, algo): detectors.run(algo, scene.image, cfg)
            for i, scene in enumerate(suite)
            for algo in detectors.DETECTORS}
