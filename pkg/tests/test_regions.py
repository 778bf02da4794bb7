"""Region layer: the closed-form trichotomy, minimal-gain search, and the
parameter-plane sweep with boundary tracing."""

import numpy as np
import pytest

from pulsectrl.errors import NotControllable
from pulsectrl.model import ModelParams
from pulsectrl.regions import (
    CLASS_F_PRIME_NEG,
    CLASS_F_PRIME_ZERO,
    CLASS_NU_LARGE,
    CLASS_NU_SMALL,
    CONTROLLABLE_CLASSES,
    RegionCell,
    classify_point,
    classify_theorem,
    cells_to_csv,
    min_control_gain,
    min_control_gain_deepening,
    sweep_plane,
    sweep_to_dict,
    uncontrolled_report,
    uncontrolled_verdict,
)
from pulsectrl.spectral import assemble_spectrum

FIG4 = ModelParams(u_star=1.0, f_val=1.0, f_der=-3.0, to_log_der=8.0)


def grid_params(f_der: float, nu: float) -> ModelParams:
    """Sweep normalization u* = f(u*) = 1: to_log_der = nu - 2 f_der."""
    return ModelParams(1.0, 1.0, f_der, nu - 2.0 * f_der)


def test_classification_cases():
    assert classify_point(0.0, 5.0) == CLASS_F_PRIME_ZERO
    assert classify_theorem(FIG4) == CLASS_F_PRIME_NEG
    # the threshold nu >= 1/u* is inclusive
    assert classify_theorem(ModelParams(1.0, 1.0, 1.0, -1.0)) == CLASS_NU_LARGE
    assert classify_point(1.0, 0.5) == CLASS_NU_SMALL
    assert classify_point(2.0, 0.9, u_star=2.0) == CLASS_NU_LARGE


def test_uncontrolled_verdicts():
    # deep in the nu-large uncontrollable region: real positive eigenvalue
    report = uncontrolled_report(grid_params(0.5, 3.0))
    assert report.verdict == "Unstable"
    assert any(z.real > 0.0 and abs(z.imag) <= 1e-8
               for z in report.eigenvalues)

    assert uncontrolled_verdict(ModelParams(1.0, 1.0, 0.0, 0.0)) == "Unstable"

    # a point of the numerically stable region: only the translation
    # eigenvalue sits on the axis
    report = uncontrolled_report(grid_params(-2.0, -1.0))
    assert report.verdict == "NeutrallyStable"
    others = [z for z in report.eigenvalues
              if z != report.translation_eigenvalue]
    assert all(z.real < 0.0 for z in others)


class TestMinControlGain:
    def test_fig4_gain(self):
        diag = {}
        gain = min_control_gain(FIG4, diagnostics=diag)
        assert -3.0 <= gain < 0.0
        assert assemble_spectrum(FIG4.with_control_slope(gain)).verdict == "Stable"
        assert assemble_spectrum(
            FIG4.with_control_slope(gain + 1e-3)).verdict == "Unstable"
        assert diag["transitions"] >= 1
        assert diag["scan_points"] >= 33

    def test_guards(self):
        with pytest.raises(NotControllable):
            min_control_gain(ModelParams(1.0, 1.0, 0.0, 0.0))
        with pytest.raises(NotControllable):
            min_control_gain(grid_params(1.0, 2.0))
        with pytest.raises(ValueError):
            min_control_gain(FIG4, gain_floor=1.0)
        with pytest.raises(ValueError):
            min_control_gain(FIG4, tol=0.0)

    def test_already_stable_returns_zero(self):
        diag = {}
        assert min_control_gain(grid_params(-2.0, -1.0), diagnostics=diag) == 0.0
        assert diag["transitions"] == 0

    def test_deepening_matches_plain_search(self):
        assert min_control_gain_deepening(FIG4) == pytest.approx(
            min_control_gain(FIG4), abs=2e-3)


def test_deep_gain_witness_for_positive_beta():
    # draws with 0 <= -alpha < beta (all controllable, f' > 0, nu < 1);
    # some gain below -5/4 must push every root eigenvalue left of zero
    rng = np.random.default_rng(7)
    candidates = list(-1.5 * 2.0 ** np.arange(0, 8))
    for _ in range(10):
        beta = rng.uniform(0.5, 10.0)
        alpha = -beta * rng.uniform(0.0, 0.99)
        f_der = 3.0 / beta
        to_log_der = -(alpha + 6.0) * f_der / 3.0
        params = ModelParams(1.0, 1.0, f_der, to_log_der)
        gains = candidates + list(np.arange(-1.5, -120.0, -2.0))
        found = None
        for gain in gains:
            report = assemble_spectrum(params.with_control_slope(float(gain)))
            others = [z for z in report.eigenvalues
                      if z != report.translation_eigenvalue]
            if all(z.real < 0.0 for z in others):
                found = gain
                break
        assert found is not None and found < -1.25


def test_uncontrollable_spot_check():
    for params in (ModelParams(1.0, 1.0, 0.0, 3.0), grid_params(1.0, 2.0)):
        for gain in (0.0, -1.0, -10.0, -100.0):
            report = assemble_spectrum(params.with_control_slope(gain))
            assert report.verdict == "Unstable"


class TestSweep:
    @pytest.fixture(scope="class")
    def small_sweep(self):
        return sweep_plane(n_f=13, n_nu=13)

    def test_classes_exact(self, small_sweep):
        for cell in small_sweep.cells:
            assert cell.theorem_class == classify_point(cell.f_der, cell.nu)

    def test_stable_set_respects_trichotomy(self, small_sweep):
        for cell in small_sweep.cells:
            if cell.error or cell.uncontrolled_verdict == "Unstable":
                continue
            assert not (cell.f_der == 0.0)
            assert not (cell.f_der > 0.0 and cell.nu >= 1.0)

    def test_degenerate_cells_recorded_not_fatal(self, small_sweep):
        # the line to_log_der = nu - 2 f' = 1 violates existence nondegeneracy
        assert small_sweep.failures
        for f_der, nu, message in small_sweep.failures:
            assert nu - 2.0 * f_der == pytest.approx(1.0)
            assert "degenerate" in message

    def test_cell_accessor_row_major(self, small_sweep):
        cell = small_sweep.cell(3, 7)
        assert cell.nu == pytest.approx(small_sweep.nu_values[3])
        assert cell.f_der == pytest.approx(small_sweep.f_der_values[7])

    def test_csv_shape(self, small_sweep):
        text = cells_to_csv(small_sweep.cells)
        lines = text.strip().split("\n")
        assert lines[0].startswith("f_der,nu,theorem_class")
        assert len(lines) == 1 + 13 * 13

    def test_thread_determinism(self, small_sweep):
        threaded = sweep_plane(n_f=13, n_nu=13, threads=2)
        assert sweep_to_dict(threaded) == sweep_to_dict(small_sweep)


def test_sweep_min_gain_cells():
    result = sweep_plane(f_der_range=(-2.0, 2.0), nu_range=(-2.0, 2.0),
                         n_f=5, n_nu=5, include_min_gain=True)
    saw_negative = False
    for cell in result.cells:
        if cell.min_gain is None:
            continue
        assert cell.theorem_class in CONTROLLABLE_CLASSES
        params = grid_params(cell.f_der, cell.nu)
        if cell.min_gain < 0.0:
            saw_negative = True
            verdict = assemble_spectrum(
                params.with_control_slope(cell.min_gain)).verdict
            assert verdict == "Stable"
        else:
            assert uncontrolled_verdict(params) != "Unstable"
    assert saw_negative
