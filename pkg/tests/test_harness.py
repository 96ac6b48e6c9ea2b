"""Tests for configuration, the run loop, replication, CSVs, and the CLI."""

import dataclasses
import json
from pathlib import Path

import numpy as np
import pytest

from vcash_sim import cli
from vcash_sim.errors import ConfigError, ConservationError
from vcash_sim.harness import (
    SimConfig,
    build_world,
    emit_csv,
    run_replications,
    run_simulation,
    run_sweep,
    run_with_market,
    vime_dir_name,
)
from vcash_sim.protocol import EVENT_REPORT
from vcash_sim.world import BOGUS, SELFISH

FAST = dict(density_per_km=10.0, sim_seconds=120, replications=2, seed=11)


def fast_config(**overrides) -> SimConfig:
    return SimConfig(**{**FAST, **overrides})


# ----------------------------------------------------------------------
# Configuration
# ----------------------------------------------------------------------


def test_invalid_configs_are_rejected_by_name():
    with pytest.raises(ConfigError, match="ratio"):
        SimConfig(ratio=1.5).validate()
    with pytest.raises(ConfigError, match="attack_mode"):
        SimConfig(attack_mode="sneaky").validate()
    with pytest.raises(ConfigError, match="framework"):
        SimConfig(framework="other").validate()
    with pytest.raises(ConfigError, match="location_tolerance"):
        SimConfig(location_tolerance_m=200.0, sensing_range_m=100.0).validate()


def test_unknown_config_fields_are_rejected():
    with pytest.raises(ConfigError, match="typo_field"):
        SimConfig.from_dict({"typo_field": 1})


def test_default_density_yields_one_hundred_vehicles():
    assert SimConfig(density_per_km=20.0).vehicle_count == 100


def test_attacker_split_by_mode():
    config = SimConfig(density_per_km=20.0, malicious_fraction=0.1)
    assert config.malicious_count == 10
    assert config.attacker_split == (10, 0)
    assert dataclasses.replace(config, attack_mode="selfish").attacker_split == (0, 10)
    mixed = dataclasses.replace(config, attack_mode="mixed")
    assert mixed.attacker_split == (5, 5)


def test_world_is_identical_across_frameworks_for_one_seed():
    config = fast_config()
    w1 = build_world(config, 42)
    w2 = build_world(dataclasses.replace(config, framework="vime"), 42)
    assert [v.position for v in w1[0]] == [v.position for v in w2[0]]
    assert w1[1] == w2[1]
    assert w1[2] == w2[2]


# ----------------------------------------------------------------------
# Single runs
# ----------------------------------------------------------------------


def test_no_attackers_means_identically_zero_ratio():
    series = run_simulation(fast_config(malicious_fraction=0.0), 11)
    assert (series.bogus_ratio == 0.0).all()


def test_series_shape_and_bounds():
    config = fast_config()
    series = run_simulation(config, 11)
    T, V = config.sim_seconds, config.vehicle_count
    assert len(series.bogus_ratio) == T
    assert series.balances.shape == (T, V)
    assert ((series.bogus_ratio >= 0.0) & (series.bogus_ratio <= 1.0)).all()
    assert (series.balances >= 0.0).all()
    assert series.ticks[0] == 1 and series.ticks[-1] == T


def test_same_seed_reproduces_the_run_exactly():
    config = fast_config()
    a = run_simulation(config, 11)
    b = run_simulation(config, 11)
    assert np.array_equal(a.bogus_ratio, b.bogus_ratio)
    assert np.array_equal(a.balances, b.balances)
    assert np.array_equal(a.notifications, b.notifications)


def test_conservation_holds_every_tick_with_attacks_enabled():
    # check_conservation aborts the run on any violation
    run_simulation(fast_config(attack_mode="mixed", malicious_fraction=0.2), 11)


def test_selfish_vehicles_send_nothing_all_run():
    config = fast_config(attack_mode="selfish")
    series, market = run_with_market(config, 11)
    selfish_ids = {
        vid for vid, mode in zip(series.vehicle_ids, series.modes) if mode == SELFISH
    }
    assert selfish_ids
    senders = {m.sender for m in market.trace if m.kind == EVENT_REPORT}
    assert senders.isdisjoint(selfish_ids)


def test_solitary_bogus_vehicle_never_self_verifies():
    # One attacker, nobody colluding: any listing backed only by the
    # attacker must stay pending forever.  (A real event can still spawn
    # on top of a fabricated location by chance and draw honest
    # corroboration; that is a collision, not self-verification.)
    config = fast_config(malicious_fraction=0.02, sim_seconds=200)
    assert config.attacker_split == (1, 0)
    series, market = run_with_market(config, 11)
    attacker = series.vehicle_ids[0]
    assert series.modes[0] == BOGUS
    solo_listings = [
        l
        for l in market.listings.values()
        if set(l.announce_stakes) <= {attacker}
    ]
    assert solo_listings
    assert all(l.status == "pending" for l in solo_listings)
    # distinctness is universal: nothing verifies with fewer than k backers
    for listing in market.listings.values():
        if listing.status != "pending":
            assert len(listing.announce_stakes) >= config.k_verify


def test_vime_framework_emits_the_same_schema():
    config = fast_config(framework="vime")
    series = run_simulation(config, 11)
    assert len(series.bogus_ratio) == config.sim_seconds
    assert series.balances.shape[1] == config.vehicle_count
    assert (series.balances == config.initial_vcash).all()


# ----------------------------------------------------------------------
# Replication and averaging
# ----------------------------------------------------------------------


def test_single_replication_average_equals_the_run():
    config = fast_config(replications=1)
    result = run_replications(config)
    single = run_simulation(config, config.seed)
    assert np.array_equal(result.mean_ratio, single.bogus_ratio)
    assert (result.sd_ratio == 0.0).all()


def test_average_lies_within_per_run_envelope():
    result = run_replications(fast_config(replications=3))
    low = result.ratios.min(axis=0)
    high = result.ratios.max(axis=0)
    assert (result.mean_ratio >= low - 1e-15).all()
    assert (result.mean_ratio <= high + 1e-15).all()


def test_parallel_replication_matches_serial():
    config = fast_config(replications=3)
    serial = run_replications(config, workers=1)
    parallel = run_replications(config, workers=2)
    assert np.array_equal(serial.mean_ratio, parallel.mean_ratio)
    assert np.array_equal(serial.balances_mean, parallel.balances_mean)
    assert serial.seeds == parallel.seeds


# ----------------------------------------------------------------------
# CSV output
# ----------------------------------------------------------------------


def test_csv_schemas_and_row_counts(tmp_path):
    config = fast_config()
    result = run_replications(config)
    emit_csv(result, tmp_path)
    ratio_lines = (tmp_path / "ratio_timeseries.csv").read_text().splitlines()
    assert ratio_lines[0] == "t,mean_ratio,sd_ratio"
    assert len(ratio_lines) == 1 + config.sim_seconds
    cash_lines = (tmp_path / "cash_timeseries.csv").read_text().splitlines()
    assert cash_lines[0] == "t,vehicle_id,mode,balance"
    assert len(cash_lines) == 1 + config.sim_seconds * config.vehicle_count
    summary_lines = (tmp_path / "summary.csv").read_text().splitlines()
    assert summary_lines[0] == (
        "seed,peak_ratio,peak_time,convergence_time,"
        "final_balance_normal,final_balance_bogus,final_balance_selfish"
    )
    assert len(summary_lines) == 1 + config.replications
    run_files = sorted(p.name for p in (tmp_path / "runs").iterdir())
    assert run_files == ["run_00011.csv", "run_00012.csv"]
    echo = json.loads((tmp_path / "config_echo.json").read_text())
    assert echo["config"]["density_per_km"] == config.density_per_km
    assert echo["vehicle_count"] == config.vehicle_count


def test_csv_floats_use_nine_significant_digits(tmp_path):
    result = run_replications(fast_config())
    emit_csv(result, tmp_path)
    line = (tmp_path / "cash_timeseries.csv").read_text().splitlines()[1]
    balance = line.split(",")[-1]
    digits = balance.replace(".", "").replace("-", "").lstrip("0")
    assert len(digits) <= 9


def test_reemission_is_byte_identical(tmp_path):
    config = fast_config()
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    emit_csv(run_replications(config), out1)
    emit_csv(run_replications(config), out2)
    for name in ("ratio_timeseries.csv", "cash_timeseries.csv", "summary.csv",
                 "config_echo.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


# ----------------------------------------------------------------------
# Sweep layout
# ----------------------------------------------------------------------


def test_sweep_writes_every_cell(tmp_path):
    config = fast_config(sim_seconds=40, replications=1)
    run_sweep(config, tmp_path)
    cells = sorted(p.name for p in tmp_path.iterdir())
    assert cells == [
        f"p{d}_m{m}" for d in (10, 20, 30) for m in (2, 3, 4)
    ]
    for cell in cells:
        subdirs = sorted(p.name for p in (tmp_path / cell).iterdir())
        assert subdirs == ["vcash", vime_dir_name(0.01), vime_dir_name(0.1)]
        for sub in subdirs:
            assert (tmp_path / cell / sub / "ratio_timeseries.csv").exists()
    # baseline runs are m-independent: cells share identical baseline bytes
    a = (tmp_path / "p10_m2" / vime_dir_name(0.1) / "ratio_timeseries.csv").read_bytes()
    b = (tmp_path / "p10_m4" / vime_dir_name(0.1) / "ratio_timeseries.csv").read_bytes()
    assert a == b


# ----------------------------------------------------------------------
# CLI
# ----------------------------------------------------------------------


def test_cli_run_writes_outputs_and_exits_zero(tmp_path):
    out = tmp_path / "out"
    code = cli.main(
        [
            "run",
            "--seed", "11",
            "--out", str(out),
            "--density-per-km", "10",
            "--sim-seconds", "60",
            "--replications", "1",
            "--trace",
        ]
    )
    assert code == 0
    assert (out / "ratio_timeseries.csv").exists()
    trace_lines = (out / "trace.jsonl").read_text().splitlines()
    assert json.loads(trace_lines[0])["kind"] == "zone_enter"


def test_cli_rejects_bad_config_with_exit_two(tmp_path):
    code = cli.main(
        ["run", "--seed", "1", "--out", str(tmp_path / "x"), "--ratio", "1.5"]
    )
    assert code == 2


def test_cli_config_file_with_flag_override(tmp_path):
    config_file = tmp_path / "config.json"
    config_file.write_text(json.dumps({"density_per_km": 10, "sim_seconds": 50,
                                       "replications": 1, "malicious_fraction": 0.0}))
    out = tmp_path / "out"
    code = cli.main(
        [
            "run",
            "--seed", "11",
            "--out", str(out),
            "--config", str(config_file),
            "--sim-seconds", "40",
        ]
    )
    assert code == 0
    echo = json.loads((out / "config_echo.json").read_text())
    assert echo["config"]["sim_seconds"] == 40  # flag wins
    assert echo["config"]["density_per_km"] == 10  # file survives


def test_cli_maps_conservation_failure_to_exit_one(monkeypatch, tmp_path):
    def boom(config, workers=1):
        raise ConservationError("synthetic breach")

    monkeypatch.setattr(cli, "run_replications", boom)
    code = cli.main(["run", "--seed", "1", "--out", str(tmp_path / "x")])
    assert code == 1


def test_cli_check_passes():
    assert cli.main(["check"]) == 0


def test_cli_determinism_end_to_end(tmp_path):
    args = [
        "run",
        "--seed", "11",
        "--out", None,  # placeholder, set below
        "--density-per-km", "10",
        "--sim-seconds", "60",
        "--replications", "2",
    ]
    outs = []
    for name in ("first", "second"):
        out = tmp_path / name
        args[4] = str(out)
        assert cli.main(list(args)) == 0
        outs.append(out)
    for name in ("ratio_timeseries.csv", "cash_timeseries.csv", "summary.csv"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
