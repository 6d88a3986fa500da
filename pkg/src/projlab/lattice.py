"""Exact integer bookkeeping for the Dirichlet spectrum of [0, pi]^2.

The Dirichlet Laplacian on the square has eigenfunctions sin(mx)sin(ny)
indexed by integer pairs m, n >= 1, with eigenvalue m^2 + n^2.  This module
enumerates modes, counts multiplicities, builds square/ball cutoff families,
detects eigenvalue splitting, extracts bad regions, and measures spectral
gaps.  Everything here is exact integer (or rational) arithmetic.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

from .errors import SplittingError


@dataclass(frozen=True)
class LatticeMode:
    """Index pair (m, n) of the double-sine mode sin(mx)sin(ny)."""

    m: int
    n: int

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ValueError(f"mode indices must be >= 1, got ({self.m}, {self.n})")

    @property
    def eigenvalue(self) -> int:
        return self.m * self.m + self.n * self.n


def listing_key(mode: LatticeMode):
    """Sort key of the canonical eigenvalue listing: ascending (eigenvalue, m, n)."""
    return (mode.eigenvalue, mode.m, mode.n)


@dataclass(frozen=True)
class IndexSet:
    """A finite, duplicate-free collection of lattice modes with a text label."""

    modes: tuple
    label: str = "custom"

    def __post_init__(self):
        pairs = [(mode.m, mode.n) for mode in self.modes]
        if len(set(pairs)) != len(pairs):
            raise ValueError(f"duplicate modes in index set {self.label!r}")

    def __len__(self):
        return len(self.modes)

    def __iter__(self):
        return iter(self.modes)

    def __contains__(self, mode):
        return mode in set(self.modes)

    def mode_pairs(self):
        return frozenset((mode.m, mode.n) for mode in self.modes)

    def eigenvalues(self):
        """All eigenvalues occurring in the set, with multiplicity, ascending."""
        return sorted(mode.eigenvalue for mode in self.modes)

    def distinct_eigenvalues(self):
        return sorted({mode.eigenvalue for mode in self.modes})

    def max_eigenvalue(self):
        return max(mode.eigenvalue for mode in self.modes)


@dataclass(frozen=True)
class SpectrumWindow:
    """Distinct eigenvalues covered by a non-splitting set, plus gap data.

    ``gap_below``/``gap_above`` are the distances from the extreme inside
    values to the nearest distinct eigenvalues outside the window (the
    virtual value 0 is used below the ground state).  ``mu_values`` are the
    exact inverse eigenvalues, aligned with ``distinct_values_inside``.
    ``positions`` are the 0-based indices the window occupies in the
    canonical eigenvalue listing.
    """

    distinct_values_inside: tuple
    gap_below: int
    gap_above: int
    mu_values: tuple
    positions: tuple
    max_index: int
    label: str = ""

    def __post_init__(self):
        if self.gap_below <= 0 or self.gap_above <= 0:
            raise ValueError("spectral gaps must be positive")
        mus = list(self.mu_values)
        if any(a <= b for a, b in zip(mus, mus[1:])):
            raise ValueError("mu values must decrease as eigenvalues increase")

    @property
    def value_below(self):
        return self.distinct_values_inside[0] - self.gap_below

    @property
    def value_above(self):
        return self.distinct_values_inside[-1] + self.gap_above


def enumerate_modes(max_index: int):
    """All modes with 1 <= m, n <= max_index in canonical listing order."""
    if max_index < 1:
        raise ValueError("max_index must be >= 1")
    modes = [
        LatticeMode(m, n)
        for m in range(1, max_index + 1)
        for n in range(1, max_index + 1)
    ]
    modes.sort(key=listing_key)
    return modes


def _required_index(eigenvalue: int) -> int:
    # any representation m^2 + n^2 = eigenvalue has m, n <= isqrt(eigenvalue - 1)
    return isqrt(eigenvalue - 1) if eigenvalue >= 2 else 1


def multiplicity(eigenvalue: int, max_index: int | None = None) -> int:
    """Number of ordered pairs (m, n), m, n >= 1, with m^2 + n^2 = eigenvalue."""
    if eigenvalue < 1:
        raise ValueError("eigenvalue must be positive")
    needed = _required_index(eigenvalue)
    if max_index is not None and max_index < needed:
        raise ValueError(
            f"max_index={max_index} cannot be exhaustive for eigenvalue "
            f"{eigenvalue} (need at least {needed})"
        )
    count = 0
    for m in range(1, needed + 1):
        rest = eigenvalue - m * m
        if rest < 1:
            break
        n = isqrt(rest)
        if n * n == rest:
            count += 1
    return count


def cutoff_square(N: int) -> IndexSet:
    """The square cutoff F_N = {(m, n) : 0 < m, n <= N}."""
    if N < 1:
        raise ValueError("N must be >= 1")
    modes = tuple(sorted(enumerate_modes(N), key=listing_key))
    return IndexSet(modes, label=f"F_{N}")


def cutoff_ball(N: int) -> IndexSet:
    """The ball cutoff B_N = {(m, n) : m^2 + n^2 <= N^2}."""
    if N < 1:
        raise ValueError("N must be >= 1")
    modes = [mode for mode in enumerate_modes(N) if mode.eigenvalue <= N * N]
    return IndexSet(tuple(modes), label=f"B_{N}")


def lowest_modes(count: int) -> IndexSet:
    """The first ``count`` modes of the canonical listing (an eigenvalue window).

    Raises if position ``count`` falls inside a multiplicity cluster, since
    the resulting set would split that eigenvalue.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    bound = 4
    while True:
        listing = enumerate_modes(bound)
        if len(listing) > count and bound * bound >= listing[count].eigenvalue - 1:
            break
        bound *= 2
    if listing[count - 1].eigenvalue == listing[count].eigenvalue:
        raise SplittingError(
            f"the lowest {count} modes cut the eigenvalue "
            f"{listing[count].eigenvalue} cluster"
        )
    return IndexSet(tuple(listing[:count]), label=f"low_{count}")


def splits(F: IndexSet, max_index: int | None = None):
    """Eigenvalues that F splits, with the inside and outside modes of each.

    Returns a list of (eigenvalue, inside_modes, outside_modes) tuples,
    one per split eigenvalue in ascending order; empty iff F does not split.
    """
    if len(F) == 0:
        return []
    needed = _required_index(F.max_eigenvalue())
    if max_index is None:
        max_index = needed
    elif max_index < needed:
        raise ValueError(
            f"max_index={max_index} is not exhaustive for eigenvalues up to "
            f"{F.max_eigenvalue()} (need at least {needed})"
        )
    members = F.mode_pairs()
    by_value = {}
    for mode in enumerate_modes(max_index):
        by_value.setdefault(mode.eigenvalue, []).append(mode)
    out = []
    for value in F.distinct_eigenvalues():
        inside = tuple(m for m in by_value[value] if (m.m, m.n) in members)
        outside = tuple(m for m in by_value[value] if (m.m, m.n) not in members)
        if inside and outside:
            out.append((value, inside, outside))
    return out


def bad_region(N: int) -> IndexSet:
    """Gamma_N: modes of F_N whose eigenvalue also occurs outside F_N."""
    F = cutoff_square(N)
    gamma = []
    for _, inside, _ in splits(F):
        gamma.extend(inside)
    gamma.sort(key=listing_key)
    return IndexSet(tuple(gamma), label=f"Gamma_{N}")


def _previous_eigenvalue(value: int) -> int:
    """Largest distinct eigenvalue strictly below ``value`` (0 if none)."""
    for v in range(value - 1, 1, -1):
        if multiplicity(v) > 0:
            return v
    return 0


def _next_eigenvalue(value: int) -> int:
    """Smallest distinct eigenvalue strictly above ``value``."""
    v = value + 1
    while multiplicity(v) == 0:
        v += 1
    return v


def listing_positions(F: IndexSet, max_index: int | None = None):
    """0-based positions of F's eigenvalues in the canonical listing.

    Valid only for non-splitting F, where the positions are exactly the
    listing slots of all modes sharing F's eigenvalues.
    """
    inside = set(F.distinct_eigenvalues())
    needed = _required_index(max(inside))
    if max_index is None:
        max_index = needed
    elif max_index < needed:
        raise ValueError("max_index too small to position the listing")
    listing = enumerate_modes(max_index)
    return tuple(i for i, mode in enumerate(listing) if mode.eigenvalue in inside)


def spectrum_window(F: IndexSet, max_index: int | None = None) -> SpectrumWindow:
    """Distinct eigenvalues of a non-splitting set, with gaps and mu = 1/lambda.

    Raises SplittingError for splitting F: the contour-projection formula
    downstream is only valid for complete multiplicity clusters.
    """
    if len(F) == 0:
        raise ValueError("index set is empty")
    split_list = splits(F, max_index)
    if split_list:
        values = [entry[0] for entry in split_list]
        raise SplittingError(f"{F.label} splits eigenvalue(s) {values}")
    inside = tuple(F.distinct_eigenvalues())
    below = _previous_eigenvalue(inside[0])
    above = _next_eigenvalue(inside[-1])
    positions = listing_positions(F, max_index)
    return SpectrumWindow(
        distinct_values_inside=inside,
        gap_below=inside[0] - below,
        gap_above=above - inside[-1],
        mu_values=tuple(Fraction(1, v) for v in inside),
        positions=positions,
        max_index=max_index if max_index is not None else _required_index(inside[-1]),
        label=F.label,
    )


def weyl_count(lambda_max: int) -> int:
    """Number of modes, with multiplicity, whose eigenvalue is <= lambda_max."""
    if lambda_max < 1:
        raise ValueError("lambda_max must be >= 1")
    total = 0
    for m in range(1, isqrt(max(lambda_max - 1, 0)) + 1):
        rest = lambda_max - m * m
        if rest < 1:
            break
        total += isqrt(rest)
    return total


def save_index_set(index_set: IndexSet, path):
    """Write one 'm n' pair per line, label in a leading '#' comment."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {index_set.label}\n")
        for mode in index_set.modes:
            fh.write(f"{mode.m} {mode.n}\n")


def load_index_set(path) -> IndexSet:
    label = "custom"
    modes = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                label = line[1:].strip() or label
                continue
            m, n = line.split()
            modes.append(LatticeMode(int(m), int(n)))
    return IndexSet(tuple(modes), label=label)
