import math
from fractions import Fraction

import pytest

from projlab import lattice
from projlab.errors import SplittingError


def brute_force_splits(pair_set, bound):
    """Independent double-loop splitting oracle over (m, n) <= bound."""
    by_value = {}
    for m in range(1, bound + 1):
        for n in range(1, bound + 1):
            by_value.setdefault(m * m + n * n, []).append((m, n))
    found = {}
    for value, pairs in by_value.items():
        inside = [p for p in pairs if p in pair_set]
        outside = [p for p in pairs if p not in pair_set]
        if inside and outside:
            found[value] = (sorted(inside), sorted(outside))
    return found


def test_enumerate_modes_trivial():
    modes = lattice.enumerate_modes(1)
    assert [(m.m, m.n, m.eigenvalue) for m in modes] == [(1, 1, 2)]
    modes = lattice.enumerate_modes(2)
    assert [(m.m, m.n, m.eigenvalue) for m in modes] == [
        (1, 1, 2),
        (1, 2, 5),
        (2, 1, 5),
        (2, 2, 8),
    ]


def test_enumerate_modes_eigenvalue_50():
    modes = lattice.enumerate_modes(8)
    assert len(modes) == 64
    with_50 = sorted((m.m, m.n) for m in modes if m.eigenvalue == 50)
    assert with_50 == [(1, 7), (5, 5), (7, 1)]


def test_enumerate_modes_sorted_by_listing_key():
    modes = lattice.enumerate_modes(7)
    keys = [lattice.listing_key(m) for m in modes]
    assert keys == sorted(keys)


def test_multiplicity_values():
    assert lattice.multiplicity(2) == 1
    assert lattice.multiplicity(50) == 3
    assert lattice.multiplicity(3) == 0
    assert lattice.multiplicity(5) == 2


def test_multiplicity_exhaustive_guard():
    with pytest.raises(ValueError):
        lattice.multiplicity(50, max_index=4)
    assert lattice.multiplicity(50, max_index=7) == 3


def test_multiplicity_matches_enumeration():
    modes = lattice.enumerate_modes(12)
    for value in {m.eigenvalue for m in modes if m.eigenvalue <= 100}:
        count = sum(1 for m in modes if m.eigenvalue == value)
        assert lattice.multiplicity(value) == count


def test_cutoff_square():
    f1 = lattice.cutoff_square(1)
    assert f1.mode_pairs() == frozenset({(1, 1)})
    f6 = lattice.cutoff_square(6)
    assert (5, 5) in f6.mode_pairs()
    assert (1, 7) not in f6.mode_pairs()
    assert len(f6) == 36
    f3 = lattice.cutoff_square(3)
    assert f3.eigenvalues() == [2, 5, 5, 8, 10, 10, 13, 13, 18]


def test_cutoff_ball():
    assert len(lattice.cutoff_ball(1)) == 0
    assert lattice.cutoff_ball(2).mode_pairs() == frozenset({(1, 1)})
    b8 = lattice.cutoff_ball(8)
    with_50 = sorted(p for p in b8.mode_pairs() if p[0] ** 2 + p[1] ** 2 == 50)
    assert with_50 == [(1, 7), (5, 5), (7, 1)]


def test_splits_examples():
    assert lattice.splits(lattice.IndexSet((lattice.LatticeMode(1, 1),))) == []
    f6_splits = lattice.splits(lattice.cutoff_square(6))
    values = {entry[0] for entry in f6_splits}
    assert 50 in values
    entry = next(e for e in f6_splits if e[0] == 50)
    assert sorted((m.m, m.n) for m in entry[1]) == [(5, 5)]
    assert sorted((m.m, m.n) for m in entry[2]) == [(1, 7), (7, 1)]


def test_splits_ball_never_splits():
    for N in range(1, 41):
        assert lattice.splits(lattice.cutoff_ball(N)) == []


def test_splits_against_brute_force():
    for N in range(1, 21):
        F = lattice.cutoff_square(N)
        bound = math.isqrt(2 * N * N - 1) + 1
        expected = brute_force_splits(F.mode_pairs(), bound)
        got = {
            value: (
                sorted((m.m, m.n) for m in inside),
                sorted((m.m, m.n) for m in outside),
            )
            for value, inside, outside in lattice.splits(F)
        }
        assert got == expected


def test_splits_exhaustive_guard():
    F = lattice.cutoff_square(6)
    with pytest.raises(ValueError):
        lattice.splits(F, max_index=6)


def test_bad_region():
    assert len(lattice.bad_region(1)) == 0
    assert len(lattice.bad_region(2)) == 0
    gamma6 = lattice.bad_region(6)
    assert (5, 5) in gamma6.mode_pairs()
    for N in range(1, 25):
        has_gamma = len(lattice.bad_region(N)) > 0
        has_split = len(lattice.splits(lattice.cutoff_square(N))) > 0
        assert has_gamma == has_split


def test_spectrum_window_single_mode():
    F = lattice.IndexSet((lattice.LatticeMode(1, 1),), label="ground")
    window = lattice.spectrum_window(F)
    assert window.distinct_values_inside == (2,)
    assert window.gap_above == 3
    assert window.gap_below == 2
    assert window.mu_values == (Fraction(1, 2),)
    assert window.positions == (0,)


def test_spectrum_window_ball4():
    window = lattice.spectrum_window(lattice.cutoff_ball(4))
    assert window.distinct_values_inside == (2, 5, 8, 10, 13)
    # next sum of two positive squares above 13 is 17
    assert window.gap_above == 4
    mus = window.mu_values
    assert all(a > b for a, b in zip(mus, mus[1:]))


def test_spectrum_window_rejects_splitting():
    with pytest.raises(SplittingError):
        lattice.spectrum_window(lattice.cutoff_square(6))


def test_listing_positions():
    F = lattice.cutoff_ball(4)
    # listing: 2,5,5,8,10,10,13,13,17,...
    assert lattice.listing_positions(F) == (0, 1, 2, 3, 4, 5, 6, 7)
    F2 = lattice.IndexSet((lattice.LatticeMode(2, 2),), label="l8")
    assert lattice.listing_positions(F2) == (3,)


def test_lowest_modes():
    low6 = lattice.lowest_modes(6)
    assert low6.eigenvalues() == [2, 5, 5, 8, 10, 10]
    with pytest.raises(SplittingError):
        lattice.lowest_modes(5)  # would cut the eigenvalue-10 pair


def test_weyl_count():
    assert lattice.weyl_count(2) == 1
    assert lattice.weyl_count(8) == 4
    count = lattice.weyl_count(400)
    area = math.pi / 4 * 400
    assert 0.6 * area <= count <= 1.0 * area


def test_weyl_count_monotone_and_bounded_ratio():
    prev = 0
    for lam in range(100, 10001, 450):
        count = lattice.weyl_count(lam)
        assert count >= prev
        prev = count
        assert 0.55 <= count / lam <= math.pi / 4


def test_index_set_serialization_roundtrip(tmp_path):
    F = lattice.cutoff_ball(5)
    path = tmp_path / "modes.txt"
    lattice.save_index_set(F, path)
    loaded = lattice.load_index_set(path)
    assert loaded.label == "B_5"
    assert loaded.mode_pairs() == F.mode_pairs()
    text = path.read_text()
    assert text.startswith("# B_5\n")
    assert "1 1\n" in text


def test_index_set_rejects_duplicates():
    with pytest.raises(ValueError):
        lattice.IndexSet((lattice.LatticeMode(1, 1), lattice.LatticeMode(1, 1)))
