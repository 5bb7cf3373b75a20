import math
from dataclasses import replace

import pytest

from qkdrate.channel_loss import FiberParams
from qkdrate.scenario_engine import (
    PRESETS,
    SWEEP_COLUMNS,
    FiberLink,
    Scenario,
    SweepSpec,
    get_preset,
    region_of,
    report,
    rows_to_csv,
    run_scenario,
    sweep,
)


def test_every_preset_resolves():
    for name, s in PRESETS.items():
        assert 0 < s.alpha() <= 1
        if s.loss_budget is not None and s.link is not None and hasattr(s.link, "table_key"):
            s.loss_budget()
        s.system_params()


def test_unknown_preset():
    with pytest.raises(KeyError):
        get_preset("moon_base")


def test_scenario_needs_loss():
    with pytest.raises(ValueError):
        Scenario("x")
    with pytest.raises(ValueError):
        Scenario("x", alpha_db=3.0)
    with pytest.raises(ValueError):
        FiberLink(FiberParams(1.0), "stolen")


def test_aircraft_preset():
    r = run_scenario(get_preset("aircraft_leo_clear"))
    assert r.optimum.mu == pytest.approx(0.455, abs=0.01)
    assert r.optimum.R == pytest.approx(57e6, rel=0.05)
    assert r.viable and r.region.region == 2
    assert r.comm is not None and r.comp is not None


def test_geo_preset():
    r = run_scenario(get_preset("earth_geo_clear"))
    assert r.optimum.R == pytest.approx(240e3, rel=0.05)
    assert r.optimum.mu == pytest.approx(0.0891, abs=0.005)


def test_fiber_preset():
    r = run_scenario(get_preset("fiber_10km_02"))
    assert r.optimum.R == pytest.approx(115e6, rel=0.05)
    assert r.optimum.mu == pytest.approx(0.4)


def test_nonviable_is_a_result():
    r = run_scenario(replace(get_preset("aircraft_leo_clear"), alpha_db=-80.0))
    assert not r.viable
    text = report(r)
    assert "viable: no" in text and "largest subtraction is the" in text


def test_tau_sweep_endpoints():
    rows = sweep(get_preset("aircraft_leo_clear"), SweepSpec("tau", (1e-10, 1e-6)))
    assert rows[0]["R_opt_bits_per_s"] == pytest.approx(57e6, rel=0.05)
    assert rows[1]["R_opt_bits_per_s"] == pytest.approx(5700, rel=0.05)


def test_fiber_length_sweep_monotone():
    rows = sweep(get_preset("fiber_10km_02"), SweepSpec("L_fiber", tuple(float(x) for x in range(0, 80, 5))))
    rates = [max(r["R_opt_bits_per_s"], 0.0) for r in rows]
    assert all(b <= a for a, b in zip(rates, rates[1:]))


def test_alpha_sweep_monotone():
    rows = sweep(get_preset("aircraft_leo_clear"), SweepSpec("alpha_db", (-40.0, -30.0, -20.0, -10.0, -3.0)))
    # a nonviable link delivers nothing, whatever the sign of its overhead-dominated S
    rates = [max(r["R_opt_bits_per_s"], 0.0) for r in rows]
    assert [r["viable"] for r in rows] == [0, 0, 1, 1, 1]
    assert all(b >= a for a, b in zip(rates, rates[1:]))


def test_sweep_spec_checks():
    with pytest.raises(ValueError):
        SweepSpec("colour", (1.0,))
    with pytest.raises(ValueError):
        SweepSpec("tau", (2.0, 1.0))
    with pytest.raises(ValueError):
        SweepSpec("tau", (1.0, math.nan))
    with pytest.raises(ValueError):
        sweep(get_preset("aircraft_leo_clear"), SweepSpec("L_fiber", (1.0,)))


def test_aperture_sweep_uses_loss_model():
    rows = sweep(get_preset("ground_leo_clear"), SweepSpec("D_B", (0.5, 1.6)))
    assert rows[0]["alpha_db"] < rows[1]["alpha_db"]
    assert rows[0]["R_opt_bits_per_s"] < rows[1]["R_opt_bits_per_s"]


def test_csv_format():
    rows = sweep(get_preset("aircraft_leo_clear"), SweepSpec("mu", (0.455,)))
    text = rows_to_csv(rows, SWEEP_COLUMNS)
    head, line = text.splitlines()
    assert head == ",".join(SWEEP_COLUMNS)
    R = line.split(",")[4]
    assert len(R.replace(".", "").lstrip("0").split("e")[0]) <= 9


def test_report_contents():
    text = report(run_scenario(get_preset("ground_leo_clear")))
    assert "optics_package" in text and "-5.0000" in text
    assert "table:ground_LEO/clear" in text
    fib = report(run_scenario(get_preset("fiber_10km_02_replaced")))
    assert "y = eta" in fib
    rain = report(run_scenario(get_preset("ground_leo_light_rain")))
    assert "modified attack model" in rain


def test_region_of():
    assert region_of(get_preset("aircraft_leo_clear")).region == 2
