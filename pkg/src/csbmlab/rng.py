"""Splittable, path-addressed random streams."""

from __future__ import annotations

from typing import Union

import numpy as np


class RngStream:
    """A random stream identified by ``(master_seed, path)``.

    Child streams hash the parent's seed material together with the extra
    path elements (numpy ``SeedSequence`` spawn keys), so the stream for a
    given path never depends on how many other streams were drawn before it.
    A stream instance is meant to have a single owner.
    """

    def __init__(self, master_seed: int, path=()):
        self.master_seed = int(master_seed) & 0xFFFFFFFFFFFFFFFF
        self.path = tuple(int(p) for p in path)
        if any(p < 0 for p in self.path):
            raise ValueError("path elements must be non-negative")
        self._generator = None

    def child(self, *path) -> "RngStream":
        return RngStream(self.master_seed, self.path + tuple(path))

    @property
    def seed_sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(self.master_seed, spawn_key=self.path)

    @property
    def generator(self) -> np.random.Generator:
        if self._generator is None:
            self._generator = np.random.Generator(np.random.PCG64(self.seed_sequence))
        return self._generator

    def int_seed(self) -> int:
        """A 32-bit seed for libraries that want a plain integer."""
        return int(self.seed_sequence.generate_state(1, dtype=np.uint32)[0])

    def __repr__(self):
        return f"RngStream({self.master_seed}, {self.path})"


RandomLike = Union[RngStream, np.random.Generator, int, None]


def as_generator(rng: RandomLike) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None or isinstance(rng, (int, np.integer)):
        return np.random.default_rng(rng)
    raise TypeError(f"cannot build a random generator from {type(rng).__name__}")


def as_stream(rng: RandomLike) -> RngStream:
    """Coerce to an :class:`RngStream`; generators donate fresh seed material."""
    if isinstance(rng, RngStream):
        return rng
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng))
    gen = as_generator(rng)
    return RngStream(int(gen.integers(0, 2**63)))
