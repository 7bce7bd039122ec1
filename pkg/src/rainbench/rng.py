"""Deterministic seeded randomness for sampling, splits, and quiz building.

Everything random in this package flows through :class:`SplitMix64`, a tiny
64-bit generator with a published recurrence (Steele, Lea & Flood 2014, as
used by the JDK's SplittableRandom). It was chosen over ``random.Random`` /
``numpy.random`` because its integer-only arithmetic makes the output stream
trivially identical on every platform and every release of this package,
which is what makes manifests byte-reproducible.

Bounded draws use rejection sampling (no modulo bias); subset sampling is a
partial Fisher-Yates shuffle, so ``sample(xs, len(xs))`` is a uniform
permutation.
"""

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    """SplitMix64 stream seeded with an unsigned 64-bit integer."""

    def __init__(self, seed: int):
        if not 0 <= seed <= _MASK64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self._state = seed

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound), unbiased via rejection."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        # Largest multiple of `bound` that fits in 64 bits; values at or
        # above it would skew the distribution and are redrawn.
        limit = ((1 << 64) // bound) * bound
        while True:
            r = self.next_u64()
            if r < limit:
                return r % bound

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        n = len(items)
        for i in range(n - 1):
            j = i + self.below(n - i)
            items[i], items[j] = items[j], items[i]

    def sample(self, items, n: int) -> list:
        """n distinct elements, uniformly without replacement.

        Partial Fisher-Yates: only the first n positions are settled, so a
        full-length draw degenerates to a uniform permutation.
        """
        pool = list(items)
        size = len(pool)
        if n > size:
            raise ValueError(f"cannot sample {n} from population of {size}")
        for i in range(n):
            j = i + self.below(size - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:n]


def derive_seeds(seed: int, n: int) -> list[int]:
    """n independent stage seeds from one master seed.

    Keeps multi-stage pipelines (sample clean, sample rain, assign splits)
    reproducible from a single user-facing --seed value while giving each
    stage its own stream.
    """
    gen = SplitMix64(seed)
    return [gen.next_u64() for _ in range(n)]
