"""Deterministic seed fan-out.

All stochastic code in the package draws from named sub-streams derived
from one master seed.  Streams are derived by hashing (seed, name), never
by sequential splitting, so adding a new consumer does not perturb the
draws of existing ones.

Do NOT use Python's built-in hash() for derivation - it is salted per
process and would break cross-run reproducibility.
"""

from __future__ import annotations

import hashlib

import torch

__all__ = ["stable_seed", "SeedHub", "seed_all", "use_single_thread"]

_MASK_63 = (1 << 63) - 1


def stable_seed(*parts) -> int:
    """Map arbitrary parts to a stable 63-bit seed via SHA-256."""
    text = "|".join(str(p) for p in parts).encode("utf-8")
    return int.from_bytes(hashlib.sha256(text).digest()[:8], "little") & _MASK_63


class SeedHub:
    """Handle over a master seed; hands out named torch generators.

    The same (master seed, stream name) pair always yields a generator in
    the same initial state, so two hubs built from the same seed replay
    each other bit for bit.  Generators are stateful and must not be
    shared across threads; call :meth:`generator` again to get a fresh,
    identically seeded stream.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)

    def child_seed(self, name: str) -> int:
        return stable_seed(self.seed, name)

    def generator(self, name: str) -> torch.Generator:
        gen = torch.Generator()
        gen.manual_seed(self.child_seed(name))
        return gen

    def __repr__(self) -> str:
        return f"SeedHub(seed={self.seed})"


def seed_all(seed: int) -> SeedHub:
    """Create the master RNG handle for a run.

    Every stochastic operation (parameter init, forward noising, data
    shuffling, sampling) must derive its stream from the returned hub;
    nothing may touch torch's global RNG.  Same seed, single-threaded
    execution => bit-identical runs.
    """
    return SeedHub(seed)


def use_single_thread() -> None:
    """Pin torch to one thread; required for bit-exact reproducibility.

    Float32 CPU kernels may pick different reduction strategies per
    thread count, so determinism guarantees hold only after calling this
    (or fixing the thread count to whatever the reference run used).
    """
    torch.set_num_threads(1)


def apply_thread_limit(num_threads: int) -> None:
    """Apply the configured thread limit; 0 leaves torch's default."""
    if num_threads > 0:
        torch.set_num_threads(num_threads)
