import numpy as np
import pytest

from madelung.harness import (
    CheckSpec,
    PotentialDef,
    RegionSpec,
    Scenario,
    StateSpec,
    apply_overrides,
    builtin_scenarios,
    format_report,
    run_scenario,
    scenario_by_name,
)
from madelung.propagator import PropagatorConfig

EXPECTED_NAMES = [
    "plane_wave",
    "free_gaussian",
    "moving_gaussian",
    "harmonic_ground",
    "airy_packet",
    "quantum_bouncer",
    "spreading_negative_control",
]


def test_builtin_names_and_order():
    names = [s.name for s in builtin_scenarios()]
    assert names == EXPECTED_NAMES
    assert len(set(names)) == len(names)


def test_bouncer_is_diagnostic_only():
    s = scenario_by_name("quantum_bouncer")
    assert s.diagnostic_only
    assert s.propagation is None


def test_airy_flagged_non_normalizable():
    assert scenario_by_name("airy_packet").non_normalizable


def test_unknown_scenario():
    with pytest.raises(KeyError):
        scenario_by_name("does_not_exist")


def test_every_check_is_registered():
    from madelung.harness import _CHECKS

    for s in builtin_scenarios():
        for c in s.checks:
            assert c.id in _CHECKS


def test_empty_check_list_trivially_passes():
    s = Scenario(
        name="empty",
        state=StateSpec("gaussian", {"x0": 0.0, "sigma0": 1.0, "k0": 0.0}),
    )
    report = run_scenario(s)
    assert report.passed
    assert report.checks == ()


def test_diagnostic_only_rejects_propagation():
    with pytest.raises(ValueError):
        Scenario(
            name="bad",
            state=StateSpec("bouncer", {"g": 1.0}),
            diagnostic_only=True,
            propagation=PropagatorConfig(1e-3, 10),
        )


def test_duplicate_check_ids_rejected():
    with pytest.raises(ValueError):
        Scenario(
            name="bad",
            state=StateSpec("gaussian", {"x0": 0.0, "sigma0": 1.0, "k0": 0.0}),
            checks=(CheckSpec("norm_drift", 1e-10), CheckSpec("norm_drift", 1e-8)),
        )


def test_unregistered_check_id_raises():
    s = Scenario(
        name="bad",
        state=StateSpec("gaussian", {"x0": 0.0, "sigma0": 1.0, "k0": 0.0}),
        checks=(CheckSpec("not_a_check", 1.0),),
    )
    with pytest.raises(ValueError):
        run_scenario(s)


def test_determinism_bit_identical_payloads():
    s = scenario_by_name("quantum_bouncer")
    a = run_scenario(s).payload()
    b = run_scenario(s).payload()
    assert a == b


def test_format_report_mentions_every_check(suite_reports):
    report = suite_reports["harmonic_ground"]
    text = format_report(report)
    for c in report.checks:
        assert c.id in text


def test_suite_reports_list_each_check_once(suite_reports):
    for name, report in suite_reports.items():
        ids = [c.id for c in report.checks]
        assert len(ids) == len(set(ids))
        configured = [c.id for c in scenario_by_name(name).checks]
        assert ids == configured


def test_full_suite_passes(suite_reports):
    failures = [
        (name, c.id)
        for name, report in suite_reports.items()
        for c in report.checks
        if not c.passed
    ]
    assert failures == []


def test_region_spec_window_and_exclude(desk_grid):
    win = RegionSpec("window", -1.0, 1.0).build(desk_grid)
    assert np.all(np.abs(desk_grid.x[win]) <= 1.0)
    exc = RegionSpec("exclude", -1.0, 1.0).build(desk_grid)
    assert not np.any((desk_grid.x[exc] > -1.0) & (desk_grid.x[exc] < 1.0))


def test_potential_def_abs_linear(desk_grid, natural_units):
    U = PotentialDef("abs_linear", g=2.0).build(desk_grid, natural_units)
    assert np.allclose(U.values, 2.0 * np.abs(desk_grid.x))


class TestOverrides:
    def test_grid_override(self):
        s = apply_overrides(scenario_by_name("harmonic_ground"), {"grid.n": 1024})
        assert s.grid.n == 1024

    def test_propagation_override(self):
        s = apply_overrides(
            scenario_by_name("harmonic_ground"),
            {"propagation.dt": 5e-4, "propagation.n_steps": 2000},
        )
        assert s.propagation.dt == 5e-4
        assert s.propagation.n_steps == 2000

    def test_state_param_override(self):
        s = apply_overrides(scenario_by_name("free_gaussian"), {"state.sigma0": 2.0})
        assert s.state.params["sigma0"] == 2.0

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError):
            apply_overrides(scenario_by_name("free_gaussian"), {"grid.shape": 3})

    def test_unknown_state_param_rejected(self):
        with pytest.raises(ValueError):
            apply_overrides(scenario_by_name("free_gaussian"), {"state.nope": 1.0})

    def test_propagation_override_without_propagation(self):
        with pytest.raises(ValueError):
            apply_overrides(scenario_by_name("quantum_bouncer"), {"propagation.dt": 1e-3})


@pytest.mark.slow
def test_tolerance_monotonic_under_refinement(suite_reports):
    """Doubling resolution and halving dt must not flip a passing check."""
    base = suite_reports["harmonic_ground"]
    refined = apply_overrides(
        scenario_by_name("harmonic_ground"),
        {
            "grid.n": 1024,
            "propagation.dt": 5e-4,
            "propagation.n_steps": 2000,
            "propagation.snapshot_every": 200,
        },
    )
    report = run_scenario(refined)
    passed_before = {c.id for c in base.checks if c.passed}
    passed_after = {c.id for c in report.checks if c.passed}
    assert passed_before <= passed_after
