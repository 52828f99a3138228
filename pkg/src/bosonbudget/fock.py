"""Occupation-vector combinatorics for M-mode photon states.

Occupation vectors are plain sequences of non-negative integers, one entry
per mode; click patterns are the 0/1 special case. Enumeration is lazy so
distribution builders never hold more than one vector unless they choose to.
"""

from __future__ import annotations

import math
from itertools import combinations, combinations_with_replacement
from typing import Iterator, NamedTuple, Sequence

from .errors import ResourceLimitError

DEFAULT_MAX_OUTCOMES = 5_000_000


def mu(occupations: Sequence[int]) -> int:
    """Product of factorials of the occupation numbers, as an exact integer.

    Kept in arbitrary-precision integers; convert to float only at the
    division site so normalisation ratios do not overflow prematurely.
    """
    out = 1
    for k in occupations:
        k = int(k)
        if k < 0:
            raise ValueError(f"negative occupation {k}")
        out *= math.factorial(k)
    return out


def total_photons(occupations: Sequence[int]) -> int:
    return int(sum(int(k) for k in occupations))


def mode_indices(occupations: Sequence[int]) -> list[int]:
    """Flatten an occupation vector to one mode index per photon.

    Example: (2, 0, 1) -> [0, 0, 2].
    """
    out: list[int] = []
    for mode, k in enumerate(occupations):
        out.extend([mode] * int(k))
    return out


def occupation_from_indices(indices: Sequence[int], modes: int) -> tuple[int, ...]:
    occ = [0] * modes
    for i in indices:
        occ[int(i)] += 1
    return tuple(occ)


def count_outputs(modes: int, photons: int, collision_free: bool = False) -> int:
    """Number of occupation vectors with the given photon total."""
    if modes < 0 or photons < 0:
        raise ValueError("modes and photons must be non-negative")
    if collision_free:
        return math.comb(modes, photons)
    return math.comb(modes + photons - 1, photons)


def enumerate_outputs(
    modes: int,
    photons: int,
    collision_free: bool = False,
    *,
    max_outcomes: int = DEFAULT_MAX_OUTCOMES,
) -> Iterator[tuple[int, ...]]:
    """Lazily yield every occupation vector with ``photons`` photons.

    Order is descending-lexicographic on the occupation tuple, i.e. photons
    fill the lowest-index modes first. With ``collision_free`` occupations
    are restricted to 0/1.

    Raises
    ------
    ResourceLimitError
        If the outcome count exceeds ``max_outcomes`` (the count is named
        in the message).
    """
    n_out = count_outputs(modes, photons, collision_free)
    if n_out > max_outcomes:
        raise ResourceLimitError(
            f"enumeration of {n_out} outcomes exceeds the budget of {max_outcomes}"
        )
    return _generate_outputs(modes, photons, collision_free)


def _generate_outputs(modes: int, photons: int, collision_free: bool) -> Iterator[tuple[int, ...]]:
    chooser = combinations if collision_free else combinations_with_replacement
    for positions in chooser(range(modes), photons):
        occ = [0] * modes
        for p in positions:
            occ[p] += 1
        yield tuple(occ)


class BirthdayBound(NamedTuple):
    exact: float
    bound: float


def birthday_bunching_bound(modes: int, photons: int) -> BirthdayBound:
    """Average chance that some output mode holds more than one photon.

    Returns the exact product expression ``1 - prod_{k<N}(1 - k/M)`` together
    with the closed-form cap ``N(N-1)/(2M)``; the exact value never exceeds
    the cap.
    """
    if photons < 1 or modes < photons:
        raise ValueError(f"need modes >= photons >= 1, got M={modes}, N={photons}")
    prod = 1.0
    for k in range(1, photons):
        prod *= 1.0 - k / modes
    return BirthdayBound(1.0 - prod, photons * (photons - 1) / (2.0 * modes))
