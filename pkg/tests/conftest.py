import numpy as np
import pytest

from blurmm.synth import CorpusSpec, gen_corpus_arrays


@pytest.fixture(scope="session")
def small_corpus():
    """A 12-slide corpus shared by tests that only need plausible tiles."""
    spec = CorpusSpec(n_slides=12, tiles_per_slide=4, tile_size=64)
    return gen_corpus_arrays(spec, master_seed=2)


@pytest.fixture
def rng():
    return np.random.default_rng(42)
