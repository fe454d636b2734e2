"""Project random number generator.

Every stochastic operation in the library draws from a single pinned
algorithm, SplitMix64, so that a seed fully determines every output on
every platform. No module touches ``random`` or ``numpy.random``.

SplitMix64 reference: Steele, Lea & Flood (2014), "Fast splittable
pseudorandom number generators". State advances by the golden-gamma
increment 0x9E3779B97F4A7C15; output is the finalizer mix of the state.
"""

from __future__ import annotations

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

RNG_ALGORITHM = "splitmix64"


class SplitMix64:
    """Seeded 64-bit generator with uniform floats, bounded ints, shuffling.

    Instances are cheap and independent; ``split()`` derives a child
    generator whose stream is decorrelated from the parent's remaining
    stream, which is how per-stage sub-seeds are produced.
    """

    __slots__ = ("_state",)

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def next_float(self) -> float:
        """Uniform double in [0, 1), 53 significant bits."""
        return (self.next_u64() >> 11) * 2.0 ** -53

    def next_below(self, n: int) -> int:
        """Uniform integer in [0, n). Rejection sampling, no modulo bias."""
        if n <= 0:
            raise ValueError(f"bound must be positive, got {n}")
        limit = (2 ** 64 // n) * n
        while True:
            u = self.next_u64()
            if u < limit:
                return u % n

    def next_int(self, lo: int, hi: int) -> int:
        """Uniform integer in the inclusive range [lo, hi]."""
        if hi < lo:
            raise ValueError(f"empty range [{lo}, {hi}]")
        return lo + self.next_below(hi - lo + 1)

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle with uniform index draws."""
        for i in range(len(items) - 1, 0, -1):
            j = self.next_below(i + 1)
            items[i], items[j] = items[j], items[i]

    def split(self) -> "SplitMix64":
        """Child generator seeded from this stream."""
        return SplitMix64(self.next_u64())
