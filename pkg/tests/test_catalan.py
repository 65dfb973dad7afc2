import math

import pytest
from review_pricing.catalan import (
    brute_force_count,
    build_table,
    catalan_number,
    trapezoid_closed_form,
)
from review_pricing.model import ReviewCount


class TestBuildTable:
    """Tests for the build_table function."""

    def test_quadrilateral_number(self):
        """Test C_3^{1,2}(9, 4) = 570 against 715 unconstrained strings."""
        table = build_table(1, 2, 3, 13)
        assert table.count(9, 4) == 570
        assert math.comb(13, 4) == 715

    def test_no_barrier_gives_binomials(self):
        """Test that an unreachable barrier leaves plain binomial coefficients."""
        table = build_table(1, 2, 100, 13)
        assert table.count(9, 4) == 715
        assert table.diagonal(6) == tuple(math.comb(6, d) for d in range(7))

    def test_origin_and_barrier_cells(self):
        """Test the origin count and a cell below the barrier."""
        table = build_table(1, 1, 0, 4)
        assert table.count(0, 0) == 1
        assert table.count(0, 1) == 0
        assert table.count(1, 2) == 0

    def test_catalan_numbers(self):
        """Test that m = 0 and unit slopes count Dyck paths."""
        table = build_table(1, 1, 0, 20)
        for n in range(11):
            assert table.count(n, n) == catalan_number(n)
        assert catalan_number(5) == 42

    def test_matches_trapezoid(self):
        """Test unit slopes against the trapezoid closed form."""
        for m in range(6):
            table = build_table(1, 1, m, 30)
            for t in range(31):
                for d in range(t + 1):
                    assert table.count(t - d, d) == trapezoid_closed_form(m, ReviewCount(t - d, d))

    @pytest.mark.parametrize('a,b,m', [(1, 2, 3), (2, 1, 0), (1.3, 1, 2.5), (1, 1, 1)])
    def test_matches_brute_force(self, a, b, m):
        """Test against exhaustive enumeration for small cells."""
        table = build_table(a, b, m, 11)
        for t in range(12):
            for d in range(t + 1):
                assert table.count(t - d, d) == brute_force_count(a, b, m, ReviewCount(t - d, d))

    def test_invalid_arguments(self):
        """Test argument validation."""
        with pytest.raises(ValueError):
            build_table(0, 1, 0, 5)
        with pytest.raises(ValueError):
            build_table(1, 1, -1, 5)
        with pytest.raises(ValueError):
            build_table(1, 1, 0, 50, cap=10)

    def test_cell_outside_table(self):
        """Test that cells beyond t_max are rejected."""
        table = build_table(1, 1, 1, 4)
        with pytest.raises(ValueError):
            table.count(3, 2)

    def test_to_frame(self):
        """Test the long-format table."""
        df = build_table(1, 2, 3, 13).to_frame()
        assert list(df.columns) == ['likes', 'dislikes', 'count']
        assert len(df) == 14 * 15 // 2
        row = df[(df['likes'] == 9) & (df['dislikes'] == 4)]
        assert row['count'].iloc[0] == 570


class TestTrapezoid:
    """Tests for the trapezoid_closed_form function."""

    def test_regions(self):
        """Test the three regions of the closed form."""
        assert trapezoid_closed_form(2, ReviewCount(1, 2)) == 3
        assert trapezoid_closed_form(1, ReviewCount(3, 3)) == math.comb(6, 3) - math.comb(6, 1)
        assert trapezoid_closed_form(0, ReviewCount(1, 2)) == 0

    def test_negative_offset(self):
        """Test that a negative offset is rejected."""
        with pytest.raises(ValueError):
            trapezoid_closed_form(-1, ReviewCount(1, 1))
