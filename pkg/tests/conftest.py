import numpy as np
import pytest

from spikecam import EncoderConfig, GrayFrame, encode_sequence


def gray(values, bit_depth=255):
    return GrayFrame(np.asarray(values, dtype=np.int64), bit_depth=bit_depth)


def constant_frames(value, *, width=4, height=4, count=1):
    return [gray(np.full((height, width), value, dtype=np.int64))] * count


def constant_stream(value, *, width=4, height=4, moments=8, omega=256):
    frames = constant_frames(value, width=width, height=height, count=moments)
    stream, _ = encode_sequence(frames, EncoderConfig(omega=omega))
    return stream


@pytest.fixture
def rng():
    return np.random.default_rng(20260815)
