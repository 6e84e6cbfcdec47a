"""
Counter-based random streams

Every stochastic subsystem owns a stream keyed by (mission seed, subsystem).
A draw is addressed by a counter tuple such as (sample index,) or
(frame index, target id, purpose) instead of by the position in a shared
sequence, so changing how much one subsystem consumes never moves the draws
of another one, and two detector profiles looking at the same frame see the
same numbers.
"""

from enum import IntEnum

import numpy as np

class Subsystem(IntEnum):
    """
    The identity of each stream of the simulator
    """
    IMU = 1
    ULTRASONIC = 2
    DETECTOR = 3
    FALSE_POSITIVE = 4

class Purpose(IntEnum):
    """
    The sub-key separating independent draws on the same detector counter
    """
    HIT = 0
    CONFIDENCE = 1

_MASK_64 = (1 << 64) - 1

class CounterStream:
    """
    A random stream addressed by counters

    The stream is a thin wrapper of `numpy.random.Philox`: the 128-bit key is
    derived from the mission seed and the subsystem, and word 0 of the 256-bit
    counter is left to the generator, so the draws made for one counter tuple
    never overlap the draws made for another one.

    @var seed The 64-bit mission seed
    @var subsystem The `Subsystem` the stream belongs to
    """

    def __init__(self, seed: int, subsystem: Subsystem):
        self.seed = int(seed) & _MASK_64
        self.subsystem = Subsystem(subsystem)
        self._key = np.random.SeedSequence(
            [self.seed, int(self.subsystem)]).generate_state(2, np.uint64)

    def generator(self, index: int, sub_index: int = 0, purpose: int = 0):
        """
        Get the generator for the specified counter

        @param index The sample or frame index
        @param sub_index A secondary key such as the target id
        @param purpose A tertiary key separating unrelated draws
        @return A `numpy.random.Generator` starting at that counter
        """
        counter = np.array(
            [0, int(index) & _MASK_64, int(sub_index) & _MASK_64, int(purpose) & _MASK_64],
            dtype = np.uint64)
        return np.random.Generator(np.random.Philox(counter = counter, key = self._key))

    def __eq__(self, other):
        return (isinstance(other, CounterStream) and
            self.seed == other.seed and self.subsystem == other.subsystem)

    def __repr__(self):
        return "CounterStream(seed={}, subsystem={})".format(
            self.seed, self.subsystem.name)
