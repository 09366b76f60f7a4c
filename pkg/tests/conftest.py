import pytest

from nnsb import CodecKind, CodecSpec, ToyConfig, quantize_model, requantize, train_toy


@pytest.fixture(scope="session")
def toy():
    """One trained toy model shared by every test that needs it."""
    model, heldout = train_toy(ToyConfig(seed=0))
    return model, heldout


@pytest.fixture(scope="session")
def toy_bundle16(toy):
    """The toy model stored as plain 16-bit binary expansion, global grid."""
    model, _ = toy
    return quantize_model(model, CodecSpec(CodecKind.BINARY_EXPANSION, 16), "global")


@pytest.fixture(scope="session")
def toy_bundle_parity(toy_bundle16):
    """Equal-stored-bits parity variant: 15 data bits + check bit."""
    return requantize(toy_bundle16, CodecSpec(CodecKind.BINARY_EXPANSION, 16, parity=True))
