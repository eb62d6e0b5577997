import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fputkin.counting import (
    CountingQuery,
    bound_ratio_scan,
    count_three_vector,
    count_two_vector,
    sine_table,
    write_report_csv,
)
from fputkin.errors import InvalidParameter

# oracle: double loop over the grid in 40-digit arithmetic (105 points)
THREE_VECTOR_N16_REFERENCE = 47.56350921920988
# oracle: single loop in 40-digit arithmetic, k snapped to 19/64 (4 points)
TWO_VECTOR_MINUS_REFERENCE = 1.9521625444443604


def three_vector_oracle(N, T, k_label, m):
    def s(j):
        return abs(mpmath.sinpi(mpmath.mpf(j) / N))

    total, count = mpmath.mpf(0), 0
    for x in range(1, N):
        for y in range(1, N):
            z = (k_label - x + y) % N
            if z and abs(s(x) - s(y) + s(z) - s(k_label) - m) <= mpmath.mpf(1) / T:
                count += 1
                total += s(x) * s(y) * s(z)
    return count, total


def two_vector_minus_oracle(N, T, k_label, m):
    def s(j):
        return abs(mpmath.sinpi(mpmath.mpf(j) / N))

    total, count = mpmath.mpf(0), 0
    for x in range(1, N):
        y = x - k_label
        if 0 < y < N and abs(s(x) - s(y) - m) <= mpmath.mpf(1) / T:
            count += 1
            total += s(x) * s(k_label - x)
    return count, total


def test_three_vector_reference_value():
    rep = count_three_vector(CountingQuery(16, 4.0, 0.5, 0.0))
    with mpmath.workdps(40):
        count, total = three_vector_oracle(16, 4, 8, 0)
    assert float(total) == pytest.approx(THREE_VECTOR_N16_REFERENCE, rel=1e-15)
    assert rep.raw_count == count == 105
    assert rep.weighted_sum == pytest.approx(THREE_VECTOR_N16_REFERENCE, rel=1e-14)
    assert rep.ratio == rep.weighted_sum / rep.bound_value


def test_two_vector_minus_reference_value():
    rep = count_two_vector(CountingQuery(64, 16.0, 0.3, 0.5, "minus"))
    with mpmath.workdps(40):
        count, total = two_vector_minus_oracle(64, 16, 19, mpmath.mpf("0.5"))
    assert float(total) == pytest.approx(TWO_VECTOR_MINUS_REFERENCE, rel=1e-15)
    assert rep.raw_count == count
    assert rep.weighted_sum == pytest.approx(TWO_VECTOR_MINUS_REFERENCE, rel=1e-14)


def test_far_centres_and_trivial_sums_are_empty():
    assert count_three_vector(CountingQuery(32, 8.0, 0.25, 100.0)).weighted_sum == 0.0
    for sign in ("plus", "minus"):
        assert count_two_vector(CountingQuery(32, 8.0, 0.25, 100.0, sign)).raw_count == 0
    assert count_two_vector(CountingQuery(32, 8.0, 0.0, 0.0, "plus")).weighted_sum == 0.0


def test_query_validation():
    with pytest.raises(InvalidParameter):
        CountingQuery(64, 1.0, 0.3)
    with pytest.raises(InvalidParameter):
        CountingQuery(64, 64.0, 0.3)
    with pytest.raises(InvalidParameter):
        CountingQuery(64, 8.0, 2.5)


def test_two_vector_bound_case_split():
    assert count_two_vector(CountingQuery(64, 16.0, 0.5, 0.0, "plus")).bound_value == 64 / 4
    assert count_two_vector(CountingQuery(64, 16.0, 0.5, 0.0, "minus")).bound_value == 64 / 4
    assert count_two_vector(CountingQuery(64, 16.0, 1 / 64, 0.0, "minus")).bound_value == 64


@given(st.integers(4, 80), st.integers(1, 1000), st.floats(-3.0, 3.0))
def test_reflection_symmetry_is_exact(N, label_seed, m):
    table = sine_table(N)
    assert np.array_equal(table[1:], table[1:][::-1])
    T = min(4.0, N ** 0.95)
    k_label = label_seed % (N - 1) + 1
    a = count_three_vector(CountingQuery(N, T, k_label / N, m))
    b = count_three_vector(CountingQuery(N, T, (N - k_label) / N, m))
    assert a.raw_count == b.raw_count and a.weighted_sum == b.weighted_sum


def test_single_cell_scan_reduces_to_direct_count():
    rows = bound_ratio_scan([32], T_values={32: [8.0]}, k_cells=1, m_grid=[0.3], sets=("S3",))
    rep = rows[0].reports[0]
    direct = count_three_vector(CountingQuery(32, 8.0, rep.query.k, 0.3))
    assert (rep.raw_count, rep.weighted_sum, rep.bound_value) == (direct.raw_count, direct.weighted_sum, direct.bound_value)
    assert rows[0].max_ratio == direct.ratio


def test_scan_is_deterministic(tmp_path):
    runs = []
    for name in ("a.csv", "b.csv"):
        rows = bound_ratio_scan([32], T_exponents=(0.5,), k_cells=4, m_grid=[-1.0, 0.0, 1.0])
        write_report_csv([r for row in rows for r in row.reports], tmp_path / name)
        runs.append((tmp_path / name).read_bytes())
    assert runs[0] == runs[1]
    assert runs[0].splitlines()[0] == b"N,T,k,m,set,raw_count,weighted_sum,bound_value,ratio"


def test_ratio_is_bounded_at_moderate_size():
    rows = bound_ratio_scan([256], T_values={256: [64.0]}, k_cells=8, m_grid=np.linspace(-2, 2, 9), sets=("S3",))
    ratio = rows[0].max_ratio
    print(f"max three-vector ratio at N=256, T=64: {ratio:.4g} at k={rows[0].argmax_k}, m={rows[0].argmax_m}")
    assert 0.0 < ratio < np.inf
