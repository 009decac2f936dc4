import pytest

from data.synth import SynthSpec, SynthTask, generate
from interfaces.stack import LayerStack
from numerics.tensor import make_prng


@pytest.fixture
def rng():
    return make_prng(1234)


@pytest.fixture
def random_stack(rng):
    def build(num_layers=5, num_frames=7, dim=8):
        return LayerStack(rng.standard_normal((num_layers, num_frames, dim)))
    return build


@pytest.fixture(scope="session")
def collision_dir(tmp_path_factory):
    """Default collision dataset (n=2000, seed 42)."""
    out = tmp_path_factory.mktemp("collision")
    generate(SynthSpec.defaults(SynthTask.COLLISION, seed=42), out)
    return out


@pytest.fixture(scope="session")
def layer_select_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("layer_select")
    generate(SynthSpec.defaults(SynthTask.LAYER_SELECT, seed=42), out)
    return out


@pytest.fixture(scope="session")
def small_dataset_dir(tmp_path_factory):
    """A small layer-select dataset for fast plumbing tests."""
    out = tmp_path_factory.mktemp("small")
    generate(SynthSpec.defaults(SynthTask.LAYER_SELECT, n=60, num_layers=5, num_frames=6, dim=4, seed=7), out)
    return out
