"""HE11 dispersion and single-atom guided coupling rates.

Frozen reference values were produced with an independent dense-scan +
mpmath bisection of the step-index characteristic equation.
"""

import numpy as np
import pytest

from chiralfiber.errors import InvalidPosition, NoGuidedMode
from chiralfiber.fiber_modes import FiberSpec, single_atom_guided_rates, solve_he11
from chiralfiber.geometry import CIRCULAR_MINUS, WAVENUMBER

PAPER_SPEC = FiberSpec(radius=0.22, refractive_index=1.45)


def test_effective_index_at_reference_radius():
    mode = solve_he11(PAPER_SPEC)
    assert mode.n_eff == pytest.approx(1.050615219217, rel=1e-9)


def test_effective_index_at_thicker_radius():
    mode = solve_he11(FiberSpec(0.35, 1.45))
    assert mode.n_eff == pytest.approx(1.205195670116, rel=1e-9)


def test_root_is_guided():
    mode = solve_he11(PAPER_SPEC)
    assert WAVENUMBER < mode.beta_f <= WAVENUMBER * 1.45


def test_thick_fiber_limit():
    mode = solve_he11(FiberSpec(8.0, 1.45))
    assert abs(mode.n_eff - 1.45) < 1e-3


def test_effective_index_monotone_in_radius():
    radii = [0.2, 0.25, 0.3, 0.4, 0.6]
    n_eff = [solve_he11(FiberSpec(r, 1.45)).n_eff for r in radii]
    assert np.all(np.diff(n_eff) > 0)


def test_thin_fiber_has_no_he11_root():
    with pytest.raises(NoGuidedMode):
        solve_he11(FiberSpec(0.05, 1.45))


def test_group_index_exceeds_phase_index():
    # d beta/d k > n_eff for a mode climbing out of cutoff
    mode = solve_he11(PAPER_SPEC)
    assert mode.beta_f_prime > mode.n_eff


def test_guided_rates_beta_calibration():
    mode = solve_he11(PAPER_SPEC)
    g_r, g_l = single_atom_guided_rates(mode, CIRCULAR_MINUS, (0.32, 0.0))
    # total guided = gamma * beta_1 / (1 - beta_1) with beta_1 = 0.15
    assert g_r + g_l == pytest.approx(0.15 / 0.85, rel=1e-12)
    assert g_r == pytest.approx(0.151754891169, rel=1e-9)
    assert g_l == pytest.approx(0.024715697067, rel=1e-9)


def test_directionality_sign():
    mode = solve_he11(PAPER_SPEC)
    g_r, g_l = single_atom_guided_rates(mode, CIRCULAR_MINUS, (0.32, 0.0))
    chi = (g_r - g_l) / (g_r + g_l)
    assert chi == pytest.approx(0.719888766577, rel=1e-9)


def test_conjugate_dipole_swaps_directions():
    mode = solve_he11(PAPER_SPEC)
    d = np.asarray(CIRCULAR_MINUS)
    g_r, g_l = single_atom_guided_rates(mode, d, (0.32, 0.0))
    g_r2, g_l2 = single_atom_guided_rates(mode, np.conj(d), (0.32, 0.0))
    assert g_r2 == pytest.approx(g_l, rel=1e-12)
    assert g_l2 == pytest.approx(g_r, rel=1e-12)


def test_longitudinal_dipole_is_symmetric():
    mode = solve_he11(PAPER_SPEC)
    g_r, g_l = single_atom_guided_rates(mode, (0.0, 0.0, 1.0), (0.32, 0.0))
    assert g_r == pytest.approx(g_l, rel=1e-12)


def test_atom_inside_fiber_rejected():
    mode = solve_he11(PAPER_SPEC)
    with pytest.raises(InvalidPosition):
        single_atom_guided_rates(mode, CIRCULAR_MINUS, (0.1, 0.0))


def test_chi_target_calibration():
    mode = solve_he11(PAPER_SPEC)
    g_r, g_l = single_atom_guided_rates(
        mode, CIRCULAR_MINUS, (0.32, 0.0), chi_target=0.5
    )
    assert (g_r - g_l) / (g_r + g_l) == pytest.approx(0.5, rel=1e-12)
    assert g_r + g_l == pytest.approx(0.15 / 0.85, rel=1e-12)


def test_first_principles_calibration_positive():
    mode = solve_he11(PAPER_SPEC)
    g_r, g_l = single_atom_guided_rates(
        mode, CIRCULAR_MINUS, (0.32, 0.0), calibration="first_principles"
    )
    assert g_r > g_l > 0
