import numpy as np


def kaiming_uniform(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int) -> np.ndarray:
    """
    Uniform samples in [-sqrt(6 / fan_in), sqrt(6 / fan_in)], the ReLU-gain Kaiming range.
    """
    bound = np.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape)
