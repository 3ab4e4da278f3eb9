"""Seedable xorshift64* random generator.

Sampling results must be reproducible from the seed alone, independent of
Python's hash randomization or library versions, so the generator algorithm
is pinned here: state is seeded through one splitmix64 step (guaranteeing a
nonzero state), then advanced with the xorshift64* transition
(x ^= x >> 12; x ^= x << 25; x ^= x >> 27; output = x * 2685821657736338717).
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


class Xorshift64Star:
    def __init__(self, seed: int):
        self._state = _splitmix64(seed & _MASK64)
        if self._state == 0:
            self._state = 0x9E3779B97F4A7C15

    def next_u64(self) -> int:
        x = self._state
        x ^= x >> 12
        x = (x ^ (x << 25)) & _MASK64
        x ^= x >> 27
        self._state = x
        return (x * 2685821657736338717) & _MASK64

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) / float(1 << 53)

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n), unbiased via rejection sampling."""
        if n <= 0:
            raise ValueError("randbelow() requires n > 0")
        limit = _MASK64 - (_MASK64 + 1) % n
        while True:
            r = self.next_u64()
            if r <= limit:
                return r % n

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in the inclusive range [lo, hi]."""
        if hi < lo:
            raise ValueError("randint() requires lo <= hi")
        return lo + self.randbelow(hi - lo + 1)

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def choice(self, items):
        if not items:
            raise ValueError("choice() on empty sequence")
        return items[self.randbelow(len(items))]

    def sample(self, items, k: int) -> list:
        """k distinct items, uniform without replacement (order randomized)."""
        if k < 0 or k > len(items):
            raise ValueError(f"cannot sample {k} from {len(items)} items")
        pool = list(items)
        for i in range(k):
            j = i + self.randbelow(len(pool) - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]
