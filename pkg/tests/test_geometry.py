import math

import numpy as np
import pytest

from rydsense import (
    ArrayGeometry,
    GaussianField,
    GradientField,
    RowSpec,
    SinusoidField,
    TabulatedField,
    UniformField,
    atom_positions,
    field_at,
    midpoint_field,
    pair_field,
)
from rydsense.errors import CrossRowPair, FieldOutOfTableRange
from rydsense.geometry import (
    fig_profile_gaussian,
    fig_profile_gradient,
    fig_profile_sinusoid,
    row_fields,
)

E_RES = 29.787


class TestGeometry:
    def test_single_row_positions(self):
        geom = ArrayGeometry(pitch_x=5.0, rows=(RowSpec(3, 15.0, 0.0),))
        assert atom_positions(geom) == [(0, 0.0, 0.0), (0, 15.0, 0.0), (0, 30.0, 0.0)]

    def test_single_atom_at_origin(self):
        geom = ArrayGeometry(pitch_x=5.0, rows=(RowSpec(1, 5.0, 0.0),))
        assert atom_positions(geom) == [(0, 0.0, 0.0)]

    def test_two_rows_independent(self):
        geom = ArrayGeometry(
            pitch_x=5.0, rows=(RowSpec(2, 15.0, 0.0), RowSpec(3, 20.0, 200.0))
        )
        assert atom_positions(geom) == [
            (0, 0.0, 0.0),
            (0, 15.0, 0.0),
            (1, 0.0, 200.0),
            (1, 20.0, 200.0),
            (1, 40.0, 200.0),
        ]

    def test_y_shift_changes_y_only(self):
        rows = (RowSpec(2, 15.0, 0.0), RowSpec(2, 15.0, 200.0))
        shifted = (RowSpec(2, 15.0, 0.0), RowSpec(2, 15.0, 300.0))
        a = atom_positions(ArrayGeometry(5.0, rows))
        b = atom_positions(ArrayGeometry(5.0, shifted))
        assert [(r, x) for r, x, _ in a] == [(r, x) for r, x, _ in b]

    def test_validation_errors(self):
        with pytest.raises(ValueError):
            ArrayGeometry(pitch_x=0.0, rows=(RowSpec(1, 5.0),))
        with pytest.raises(ValueError):
            ArrayGeometry(pitch_x=5.0, rows=(RowSpec(2, 7.0),))  # not a multiple
        with pytest.raises(ValueError):
            RowSpec(0, 5.0)
        with pytest.raises(ValueError):
            ArrayGeometry(5.0, (RowSpec(2, 5.0, 10.0), RowSpec(2, 5.0, 5.0)))

    def test_row_gap_decoupling_condition(self):
        # gap must reach 5x the largest intra-row spacing (here 40 um)
        with pytest.raises(ValueError):
            ArrayGeometry(5.0, (RowSpec(2, 40.0, 0.0), RowSpec(2, 5.0, 150.0)))
        ArrayGeometry(5.0, (RowSpec(2, 40.0, 0.0), RowSpec(2, 5.0, 200.0)))


class TestFieldAt:
    def test_uniform(self):
        row = RowSpec(7, 15.0)
        for i in range(1, 8):
            assert field_at(UniformField(25.0), row, i) == 25.0

    def test_gradient_center_hits_resonance(self):
        row = RowSpec(19, 15.0)
        profile = fig_profile_gradient(E_RES)
        assert profile == GradientField(e_start=2 * E_RES, e_end=0.0)
        assert field_at(profile, row, 10) == pytest.approx(E_RES, rel=1e-14)
        assert field_at(profile, row, 1) == pytest.approx(2 * E_RES)
        assert field_at(profile, row, 19) == 0.0

    def test_sinusoid_resonant_atoms(self):
        row = RowSpec(19, 15.0)
        profile = fig_profile_sinusoid(E_RES)
        values = row_fields(profile, row)
        assert values[4] == pytest.approx(E_RES, rel=1e-12)   # atom 5
        assert values[14] == pytest.approx(E_RES, rel=1e-12)  # atom 15
        assert values.max() <= E_RES * (1 + 1e-12)

    def test_gaussian_symmetric_about_center(self):
        row = RowSpec(9, 10.0)
        profile = fig_profile_gaussian(E_RES, row)
        for i in range(1, 10):
            left = field_at(profile, row, i)
            right = field_at(profile, row, 10 - i)
            assert left == pytest.approx(right, rel=1e-15)
        assert field_at(profile, row, 5) == pytest.approx(E_RES)

    def test_tabulated_and_length_mismatch(self):
        row = RowSpec(3, 15.0)
        profile = TabulatedField(values=(1.0, 2.0, 3.0))
        assert [field_at(profile, row, i) for i in (1, 2, 3)] == [1.0, 2.0, 3.0]
        with pytest.raises(ValueError):
            field_at(TabulatedField(values=(1.0,)), row, 1)

    def test_span_enforcement(self):
        row = RowSpec(19, 15.0)
        profile = fig_profile_gradient(E_RES)
        span = (0.0, 50.0)
        with pytest.raises(FieldOutOfTableRange):
            field_at(profile, row, 1, span)  # 2*E_res > 50
        assert field_at(profile, row, 10, span) == pytest.approx(E_RES)

    def test_index_bounds(self):
        row = RowSpec(3, 15.0)
        with pytest.raises(ValueError):
            field_at(UniformField(1.0), row, 0)
        with pytest.raises(ValueError):
            field_at(UniformField(1.0), row, 4)


class TestPairField:
    def test_uniform_pair_equals_field(self):
        row = RowSpec(5, 15.0)
        profile = UniformField(25.0)
        for i in range(1, 6):
            for j in range(i + 1, 6):
                assert midpoint_field(profile, row, i, j) == 25.0

    def test_gradient_pair_is_endpoint_average(self):
        row = RowSpec(19, 15.0)
        profile = fig_profile_gradient(E_RES)
        for i, j in ((1, 2), (3, 11), (5, 19)):
            expected = 0.5 * (
                field_at(profile, row, i) + field_at(profile, row, j)
            )
            assert midpoint_field(profile, row, i, j) == pytest.approx(expected)

    def test_gaussian_pair_straddling_peak(self):
        row = RowSpec(9, 10.0)
        profile = GaussianField(baseline=2.0, peak=30.0, center_um=40.0, width_um=12.0)
        # atoms 4 and 6 straddle the peak at x = 40 um; midpoint is the peak
        assert midpoint_field(profile, row, 4, 6) == pytest.approx(30.0)
        # hand evaluation at the midpoint of atoms 2 and 5 (x = 25 um)
        expected = 2.0 + 28.0 * math.exp(-0.5 * ((25.0 - 40.0) / 12.0) ** 2)
        assert midpoint_field(profile, row, 2, 5) == pytest.approx(expected, rel=1e-14)

    def test_tabulated_midpoint_interpolates(self):
        row = RowSpec(4, 15.0)
        profile = TabulatedField(values=(0.0, 2.0, 6.0, 10.0))
        assert midpoint_field(profile, row, 1, 2) == pytest.approx(1.0)
        assert midpoint_field(profile, row, 2, 4) == pytest.approx(6.0)

    def test_cross_row_pair_rejected(self):
        geom = ArrayGeometry(5.0, (RowSpec(3, 15.0, 0.0), RowSpec(3, 15.0, 200.0)))
        with pytest.raises(CrossRowPair):
            pair_field(UniformField(1.0), geom, (0, 1), (1, 2))
        value = pair_field(UniformField(1.0), geom, (1, 1), (1, 3))
        assert value == 1.0

    def test_same_atom_rejected(self):
        row = RowSpec(3, 15.0)
        with pytest.raises(ValueError):
            midpoint_field(UniformField(1.0), row, 2, 2)

    def test_span_enforcement(self):
        row = RowSpec(19, 15.0)
        profile = fig_profile_gradient(E_RES)
        with pytest.raises(FieldOutOfTableRange):
            midpoint_field(profile, row, 1, 2, (0.0, 50.0))


def test_reflection_of_symmetric_profile():
    row = RowSpec(19, 15.0)
    profile = fig_profile_sinusoid(E_RES)
    values = row_fields(profile, row)
    # peaks at atoms 5 and 15 make the profile symmetric about atom 10
    np.testing.assert_allclose(values, values[::-1], rtol=0, atol=1e-12)
