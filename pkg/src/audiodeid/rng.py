"""Seeded pseudo-random numbers with a pinned, portable algorithm.

Fold assignment and the white-noise fill must reproduce bit-for-bit across
runs, platforms, and reimplementations in other languages, so instead of a
host RNG this module pins SplitMix64:

    state <- (state + 0x9E3779B97F4A7C15) mod 2^64
    z <- state
    z <- (z XOR (z >> 30)) * 0xBF58476D1CE4E5B9   mod 2^64
    z <- (z XOR (z >> 27)) * 0x94D049BB133111EB   mod 2^64
    output: z XOR (z >> 31)

Derived draws are equally pinned: ``next_below(n)`` is ``next_u64() mod n``
and ``next_unit()`` is ``next_u64() >> 11`` times ``2**-53``.
"""

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


class SplitMix64:
    """Deterministic 64-bit generator; the full sequence is a pure
    function of the seed."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def next_below(self, n: int) -> int:
        """Integer in [0, n). Plain modulo: the bias is immaterial for
        shuffling and noise, and keeping it makes the sequence trivially
        portable."""
        if n <= 0:
            raise ValueError("n must be positive")
        return self.next_u64() % n

    def next_unit(self) -> float:
        """Float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates, iterating i = len-1 .. 1 and swapping
        with ``next_below(i + 1)``."""
        for i in range(len(items) - 1, 0, -1):
            j = self.next_below(i + 1)
            items[i], items[j] = items[j], items[i]
