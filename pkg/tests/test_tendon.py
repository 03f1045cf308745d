import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tjsim import (
    BendCommand,
    InvalidConfigError,
    StrokeLimitError,
    TendonLayout,
    allocate,
    check_limits,
    deallocate,
)

LAYOUT = TendonLayout()
R = LAYOUT.pitch_radius

# theta keeps a couple of ulps of guard band above the 1e-9 straightness
# threshold, where the decoded phi legitimately degenerates to 0
commands = st.tuples(
    st.floats(min_value=2e-9, max_value=math.pi / 2),
    st.floats(min_value=0.0, max_value=2.0 * math.pi, exclude_max=True),
)


def model_dl(theta, phi):
    """Allocation law written out independently for checking."""
    return np.array([-R * theta * math.cos(b - phi) for b in LAYOUT.angles])


# ---------------------------------------------------------------------------
# allocate


def test_allocate_max_bend_plane_zero():
    dl = allocate(BendCommand(math.pi / 2, 0.0), LAYOUT)
    expected = 2.5 * math.pi / 2
    assert dl[0] == pytest.approx(-expected, abs=1e-12)
    assert dl[2] == pytest.approx(expected, abs=1e-12)
    assert abs(dl[1]) < 1e-12 and abs(dl[3]) < 1e-12
    assert abs(-dl[0] - 3.92699) < 1e-5


def test_allocate_straight_is_zero():
    for phi in (0.0, 2.0, 5.0):
        assert np.array_equal(allocate(BendCommand(0.0, phi), LAYOUT).dl, np.zeros(4))


def test_allocate_diagonal_plane():
    dl = allocate(BendCommand(math.pi / 2, math.pi / 4), LAYOUT)
    expected = 2.5 * (math.pi / 2) * math.cos(math.pi / 4)
    np.testing.assert_allclose(dl.dl, [-expected, -expected, expected, expected], atol=1e-12)
    assert abs(expected - 2.77680) < 1e-5


@given(commands)
def test_allocate_matches_model_and_pairs_cancel(cmd):
    theta, phi = cmd
    dl = allocate(BendCommand(theta, phi), LAYOUT)
    np.testing.assert_allclose(dl.dl, model_dl(theta, phi), atol=1e-12)
    s02, s13 = dl.pair_sums()
    assert abs(s02) < 1e-12 and abs(s13) < 1e-12
    assert abs(float(dl.dl.sum())) < 1e-12


@given(commands)
def test_allocate_equivariant_under_quarter_turn(cmd):
    theta, phi = cmd
    base = allocate(BendCommand(theta, phi), LAYOUT).dl
    turned = allocate(BendCommand(theta, phi + math.pi / 2), LAYOUT).dl
    np.testing.assert_allclose(turned, np.roll(base, 1), atol=1e-12)


@given(st.floats(min_value=0.0, max_value=2.0 * math.pi, exclude_max=True))
def test_allocate_magnitudes_monotone_in_theta(phi):
    thetas = np.linspace(0.0, math.pi / 2, 25)
    prev = np.zeros(4)
    for theta in thetas:
        cur = np.abs(allocate(BendCommand(theta, phi), LAYOUT).dl)
        assert np.all(cur >= prev - 1e-15)
        prev = cur


def test_allocate_respects_custom_stroke_limit():
    tight = TendonLayout(stroke_limit=1.0)
    with pytest.raises(StrokeLimitError):
        allocate(BendCommand(math.pi / 2, 0.0), tight)
    allocate(BendCommand(0.3, 0.0), tight)  # 0.75 mm, fits


# ---------------------------------------------------------------------------
# deallocate


def test_deallocate_inverts_max_bend():
    cmd, residual = deallocate(allocate(BendCommand(math.pi / 2, 0.0), LAYOUT), LAYOUT)
    assert cmd.theta == pytest.approx(math.pi / 2, abs=1e-12)
    assert min(cmd.phi, 2.0 * math.pi - cmd.phi) < 1e-12
    assert residual < 1e-12


def test_deallocate_zero():
    cmd, residual = deallocate(np.zeros(4), LAYOUT)
    assert cmd.theta == 0.0 and cmd.phi == 0.0 and residual == 0.0


def test_deallocate_inconsistent_input():
    cmd, residual = deallocate(np.array([-1.0, 0.0, 1.2, 0.0]), LAYOUT)
    assert cmd.theta == pytest.approx(1.1 / 2.5, abs=1e-12)
    assert cmd.phi == 0.0
    assert residual == pytest.approx(0.1, abs=1e-12)


@given(commands)
def test_round_trip_is_identity(cmd):
    theta, phi = cmd
    got, residual = deallocate(allocate(BendCommand(theta, phi), LAYOUT), LAYOUT)
    assert abs(got.theta - theta) < 1e-12
    dphi = abs((got.phi - phi + math.pi) % (2.0 * math.pi) - math.pi)
    assert dphi < 1e-12
    assert residual < 1e-12


def test_deallocate_is_least_squares_optimum():
    rng = np.random.default_rng(7)

    def objective(dl, theta, phi):
        return sum(
            (dl[i] + R * theta * math.cos(LAYOUT.angles[i] - phi)) ** 2 for i in range(4)
        )

    for _ in range(50):
        dl = rng.uniform(-4.0, 4.0, size=4)
        cmd, _ = deallocate(dl, LAYOUT)
        best = objective(dl, cmd.theta, cmd.phi)
        for dth in (-0.05, -0.01, 0.01, 0.05):
            theta = cmd.theta + dth
            if theta < 0.0:
                continue
            for dph in (-0.1, -0.02, 0.0, 0.02, 0.1):
                assert objective(dl, theta, cmd.phi + dph) >= best - 1e-12


# ---------------------------------------------------------------------------
# check_limits


def test_check_limits_within():
    dl = allocate(BendCommand(math.pi / 2, 0.7), LAYOUT)
    assert check_limits(dl, LAYOUT).ok


def test_check_limits_reports_overshoot():
    report = check_limits(np.array([-4.2, 0.0, 4.2, 0.0]), LAYOUT)
    assert not report.ok
    assert [idx for idx, _ in report.violations] == [0, 2]
    overshoot = report.violations[0][1]
    assert overshoot == pytest.approx(4.2 - 2.5 * math.pi / 2, abs=1e-12)
    assert abs(overshoot - 0.27301) < 1e-5


def test_check_limits_empty_iff_all_within():
    at_limit = np.full(4, LAYOUT.stroke_limit)
    assert check_limits(at_limit, LAYOUT).ok
    just_over = at_limit.copy()
    just_over[3] *= 1.000001
    assert not check_limits(just_over, LAYOUT).ok


# ---------------------------------------------------------------------------
# layout validation


def test_layout_rejects_non_opposing_pairs():
    with pytest.raises(InvalidConfigError):
        TendonLayout(angles=(0.0, math.pi / 2, math.pi + 0.01, 3 * math.pi / 2)).validate()


def test_layout_rejects_bad_radius():
    with pytest.raises(InvalidConfigError):
        TendonLayout(pitch_radius=-1.0).validate()


def test_layout_rejects_unsorted_angles():
    with pytest.raises(InvalidConfigError):
        TendonLayout(angles=(math.pi / 2, 0.0, 3 * math.pi / 2, math.pi)).validate()


def test_default_stroke_limit_ties_to_envelope():
    assert LAYOUT.stroke_limit == pytest.approx(2.5 * math.pi / 2, abs=1e-15)
