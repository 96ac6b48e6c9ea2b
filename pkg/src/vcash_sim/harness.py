"""Experiment driver: configuration, seeded runs, replication, CSV output.

A run is a fixed-step loop at one-second resolution: move vehicles, sense,
report, correlate/verify/terminate at the market, charge subscribers and
distribute profit, then record metrics.  Identical (config, seed) pairs
produce identical metric series byte for byte; replications differ only in
their seed and may execute in parallel processes.

The per-tick headline metric is the bogus event ratio: among listings the
market currently endorses, the fraction that matched no real event when
first reported.  The entity-reputation baseline emits the same series with
"endorsed" meaning held in at least one vehicle's event table.
"""

from __future__ import annotations

import dataclasses
import json
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from vcash_sim import __version__
from vcash_sim import market as mk
from vcash_sim.errors import ConfigError, ConservationError
from vcash_sim.market import TradingPlan
from vcash_sim.protocol import CLAIM_EXISTS, Report, ZoningMarket
from vcash_sim.vime import VimeNetwork, VimeParams
from vcash_sim.world import (
    BOGUS,
    NORMAL,
    SELFISH,
    EventSchedule,
    FalseEventMap,
    TrafficEvent,
    VehicleState,
    emit_reports,
    generate_event_timeline,
    make_false_map,
    make_vehicles,
    ring_distance,
    sense_events,
    step_vehicle,
)

FRAMEWORK_VCASH = "vcash"
FRAMEWORK_VIME = "vime"
ATTACK_BOGUS = "bogus"
ATTACK_SELFISH = "selfish"
ATTACK_MIXED = "mixed"

# A run is considered converged once the ratio stays at or below this.
CONVERGENCE_THRESHOLD = 0.02

_CONSERVATION_RTOL = 1e-9


@dataclass(frozen=True)
class SimConfig:
    """Full description of one experiment; echoed into every output."""

    road_length_m: float = 5000.0
    density_per_km: float = 20.0
    sim_seconds: int = 1000
    replications: int = 50
    initial_vcash: float = 100.0
    c0: float = 1e-4
    ratio: float = 0.1
    min_investment: float = 0.01
    k_verify: int = 2
    m_terminate: int = 2
    sensing_range_m: float = 100.0
    location_tolerance_m: float = 50.0
    malicious_fraction: float = 0.1
    attack_mode: str = ATTACK_BOGUS
    framework: str = FRAMEWORK_VCASH
    vime_err: float = 0.1
    vime_comm_range_m: float = 300.0
    bogus_rate: float = 1.0
    false_map_size: int = 10
    event_initial_count: int = 10
    event_spawn_interval: float = 60.0
    event_duration_min: float = 60.0
    event_duration_max: float = 600.0
    check_conservation: bool = True
    seed: int = 0

    def validate(self) -> None:
        def need(cond: bool, what: str) -> None:
            if not cond:
                raise ConfigError(what)

        need(self.road_length_m > 0, "road_length_m must be positive")
        need(self.density_per_km > 0, "density_per_km must be positive")
        need(self.sim_seconds >= 1, "sim_seconds must be at least 1")
        need(self.replications >= 1, "replications must be at least 1")
        need(self.initial_vcash >= 0, "initial_vcash must be nonnegative")
        need(self.c0 > 0, "c0 must be positive")
        need(0 < self.ratio < 1, "ratio must be in (0, 1)")
        need(self.min_investment > 0, "min_investment must be positive")
        need(self.k_verify >= 1, "k_verify must be at least 1")
        need(self.m_terminate >= 1, "m_terminate must be at least 1")
        need(self.sensing_range_m > 0, "sensing_range_m must be positive")
        need(
            0 < self.location_tolerance_m < self.sensing_range_m,
            "location_tolerance_m must be positive and below sensing_range_m",
        )
        need(0 <= self.malicious_fraction <= 1, "malicious_fraction must be in [0, 1]")
        need(
            self.attack_mode in (ATTACK_BOGUS, ATTACK_SELFISH, ATTACK_MIXED),
            f"attack_mode must be one of bogus|selfish|mixed, got {self.attack_mode!r}",
        )
        need(
            self.framework in (FRAMEWORK_VCASH, FRAMEWORK_VIME),
            f"framework must be vcash|vime, got {self.framework!r}",
        )
        need(0 <= self.vime_err <= 1, "vime_err must be a probability")
        need(self.vime_comm_range_m > 0, "vime_comm_range_m must be positive")
        need(self.bogus_rate > 0, "bogus_rate must be positive")
        need(self.false_map_size >= 1, "false_map_size must be at least 1")
        need(self.event_initial_count >= 0, "event_initial_count must be nonnegative")
        need(self.event_spawn_interval > 0, "event_spawn_interval must be positive")
        need(
            0 < self.event_duration_min <= self.event_duration_max,
            "event durations must satisfy 0 < min <= max",
        )

    # -- derived quantities ------------------------------------------------

    @property
    def vehicle_count(self) -> int:
        return int(round(self.density_per_km * self.road_length_m / 1000.0))

    @property
    def malicious_count(self) -> int:
        return int(round(self.vehicle_count * self.malicious_fraction))

    @property
    def attacker_split(self) -> tuple[int, int]:
        """(bogus, selfish) counts for the configured attack mode."""
        n = self.malicious_count
        if self.attack_mode == ATTACK_BOGUS:
            return n, 0
        if self.attack_mode == ATTACK_SELFISH:
            return 0, n
        return (n + 1) // 2, n // 2

    @property
    def pass_range_m(self) -> float:
        """How close a vehicle must be to judge a listing's event gone.

        Kept inside sensing range by the correlation tolerance so that a
        real event anywhere a listing could legitimately sit is still
        visible; honest vehicles therefore never claim non-existence of a
        live event.
        """
        return self.sensing_range_m - self.location_tolerance_m

    def schedule(self) -> EventSchedule:
        return EventSchedule(
            initial_count=self.event_initial_count,
            spawn_interval=self.event_spawn_interval,
            duration_min=self.event_duration_min,
            duration_max=self.event_duration_max,
        )

    def plan(self) -> TradingPlan:
        return TradingPlan(
            ratio=self.ratio,
            c0=self.c0,
            min_investment=self.min_investment,
            k_verify=self.k_verify,
            m_terminate=self.m_terminate,
        )

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        unknown = set(data) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class RunSummary:
    seed: int
    peak_ratio: float
    peak_time: int
    convergence_time: int  # -1 when the run never converges
    final_balance_by_mode: dict[str, float]


@dataclass
class MetricsSeries:
    """Per-tick series for one run; row t-1 is the state after second t."""

    seed: int
    ticks: np.ndarray
    bogus_ratio: np.ndarray
    verified_listings: np.ndarray
    active_events: np.ndarray
    rate: np.ndarray
    balances: np.ndarray
    notifications: np.ndarray
    vehicle_ids: list[str]
    modes: list[str]
    summary: RunSummary = field(init=False)

    def __post_init__(self):
        self.summary = self._summarize()

    def _summarize(self) -> RunSummary:
        peak_idx = int(np.argmax(self.bogus_ratio))
        below = self.bogus_ratio <= CONVERGENCE_THRESHOLD
        convergence = -1
        for t in range(len(below)):
            if below[t:].all():
                convergence = t + 1
                break
        finals: dict[str, float] = {}
        last = self.balances[-1]
        for mode in (NORMAL, BOGUS, SELFISH):
            picks = [last[i] for i, m in enumerate(self.modes) if m == mode]
            if picks:
                finals[mode] = float(np.mean(picks))
        return RunSummary(
            seed=self.seed,
            peak_ratio=float(self.bogus_ratio[peak_idx]),
            peak_time=int(self.ticks[peak_idx]),
            convergence_time=convergence,
            final_balance_by_mode=finals,
        )


# ----------------------------------------------------------------------
# World construction (shared by both frameworks so a seed means one world)
# ----------------------------------------------------------------------


def build_world(
    config: SimConfig, seed: int
) -> tuple[list[VehicleState], list[TrafficEvent], FalseEventMap]:
    """Vehicles, the full event timeline, and the shared false event map.

    All placement randomness is drawn here, before any framework-specific
    draw, so the same seed yields the same physical world under either
    framework.
    """
    rng = random.Random(seed)
    n_bogus, n_selfish = config.attacker_split
    vehicles = make_vehicles(
        rng,
        config.vehicle_count,
        n_bogus=n_bogus,
        n_selfish=n_selfish,
        road_length=config.road_length_m,
    )
    events = generate_event_timeline(
        rng, config.road_length_m, config.schedule(), horizon=config.sim_seconds
    )
    genesis = [e for e in events if e.active(0.0)]
    false_map = make_false_map(
        rng,
        config.road_length_m,
        config.false_map_size,
        genesis,
        min_distance=config.location_tolerance_m,
    )
    return vehicles, events, false_map


def _matches_truth(
    location: float,
    attr: str,
    active: list[TrafficEvent],
    tolerance: float,
    road_length: float,
) -> bool:
    return any(
        e.attr == attr and ring_distance(location, e.location, road_length) <= tolerance
        for e in active
    )


# ----------------------------------------------------------------------
# Single runs
# ----------------------------------------------------------------------


def run_simulation(
    config: SimConfig, seed: int, record_trace: bool = False
) -> MetricsSeries:
    """One deterministic run; dispatches on the configured framework."""
    config.validate()
    vehicles, events, false_map = build_world(config, seed)
    if config.framework == FRAMEWORK_VCASH:
        return _run_vcash(config, seed, vehicles, events, false_map, record_trace)
    return _run_vime(config, seed, vehicles, events, false_map)


def run_with_market(
    config: SimConfig, seed: int
) -> tuple[MetricsSeries, ZoningMarket]:
    """Like ``run_simulation`` but also hands back the market (with trace)."""
    config.validate()
    if config.framework != FRAMEWORK_VCASH:
        raise ConfigError("run_with_market only applies to the vcash framework")
    vehicles, events, false_map = build_world(config, seed)
    market_holder: list[ZoningMarket] = []
    series = _run_vcash(
        config, seed, vehicles, events, false_map, True, market_holder
    )
    return series, market_holder[0]


def _run_vcash(
    config: SimConfig,
    seed: int,
    vehicles: list[VehicleState],
    events: list[TrafficEvent],
    false_map: FalseEventMap,
    record_trace: bool,
    market_out: list[ZoningMarket] | None = None,
) -> MetricsSeries:
    road = config.road_length_m
    tolerance = config.location_tolerance_m
    pass_range = config.pass_range_m
    T = config.sim_seconds
    V = len(vehicles)

    market = ZoningMarket(
        config.plan(),
        initial_balance=config.initial_vcash,
        location_tolerance=tolerance,
        road_length=road,
        record_trace=record_trace,
    )
    if market_out is not None:
        market_out.append(market)
    for v in vehicles:
        market.handle_zone_entry(v.vehicle_id, 0.0)
    accounts = market.bank.accounts
    expected_total = config.initial_vcash * V

    bogus_listing_ids: set[str] = set()
    ratio = np.zeros(T)
    verified_counts = np.zeros(T, dtype=np.int32)
    active_counts = np.zeros(T, dtype=np.int32)
    rate_series = np.zeros(T)
    balances = np.zeros((T, V))
    notifications = np.zeros((T, V), dtype=np.int32)

    for t in range(1, T + 1):
        now = float(t)
        active = [e for e in events if e.start <= now < e.end]

        for v in vehicles:
            step_vehicle(v, 1.0, road)

        reports: list[Report] = []
        for v in vehicles:
            if v.mode == SELFISH:
                continue
            sensed = (
                sense_events(v, active, config.sensing_range_m, road)
                if v.mode == NORMAL
                else []
            )
            reports.extend(
                emit_reports(
                    v,
                    sensed,
                    false_map,
                    now,
                    road,
                    tolerance,
                    pass_range,
                    config.bogus_rate,
                )
            )

        for report in reports:
            outcome = market.submit_report(report, now)
            if outcome.created and not _matches_truth(
                report.location, report.attr, active, tolerance, road
            ):
                bogus_listing_ids.add(outcome.listing.listing_id)

        delivered = market.charge_subscribers(now)
        rate_series[t - 1] = mk.notification_rate(
            config.c0, market.verified_listing_count()
        )

        n_verified = 0
        n_bogus_verified = 0
        for listing in market.listings.values():
            if listing.status == mk.VERIFIED:
                n_verified += 1
                if listing.listing_id in bogus_listing_ids:
                    n_bogus_verified += 1
        ratio[t - 1] = n_bogus_verified / n_verified if n_verified else 0.0
        verified_counts[t - 1] = n_verified
        active_counts[t - 1] = len(active)
        for i, v in enumerate(vehicles):
            balances[t - 1, i] = accounts[v.vehicle_id].balance
            notifications[t - 1, i] = delivered.get(v.vehicle_id, 0)

        broadcasts, withdrawals = market.drain_deliveries()
        if broadcasts or withdrawals:
            for v in vehicles:
                if not market.in_session(v.vehicle_id):
                    continue
                for listing_id, location, attr in broadcasts:
                    v.event_table[listing_id] = (location, attr)
                for listing_id in withdrawals:
                    v.event_table.pop(listing_id, None)

        if config.check_conservation:
            total = market.conservation_total()
            if abs(total - expected_total) > _CONSERVATION_RTOL * expected_total:
                raise ConservationError(
                    f"tick {t}: total cash {total!r} != {expected_total!r}"
                )

    return MetricsSeries(
        seed=seed,
        ticks=np.arange(1, T + 1),
        bogus_ratio=ratio,
        verified_listings=verified_counts,
        active_events=active_counts,
        rate=rate_series,
        balances=balances,
        notifications=notifications,
        vehicle_ids=[v.vehicle_id for v in vehicles],
        modes=[v.mode for v in vehicles],
    )


def _run_vime(
    config: SimConfig,
    seed: int,
    vehicles: list[VehicleState],
    events: list[TrafficEvent],
    false_map: FalseEventMap,
) -> MetricsSeries:
    road = config.road_length_m
    tolerance = config.location_tolerance_m
    T = config.sim_seconds
    V = len(vehicles)

    params = VimeParams(err=config.vime_err, comm_range=config.vime_comm_range_m)
    net = VimeNetwork(
        params,
        V,
        road_length=road,
        location_tolerance=tolerance,
        pass_range=config.pass_range_m,
    )
    # Classification noise comes from its own stream so the physical world
    # stays identical to the market framework's under the same seed.
    classify_rng = random.Random(f"{seed}:vime")

    ratio = np.zeros(T)
    existing_counts = np.zeros(T, dtype=np.int32)
    active_counts = np.zeros(T, dtype=np.int32)
    balances = np.full((T, V), config.initial_vcash)
    notifications = np.zeros((T, V), dtype=np.int32)

    for t in range(1, T + 1):
        now = float(t)
        active = [e for e in events if e.start <= now < e.end]

        for v in vehicles:
            step_vehicle(v, 1.0, road)

        sensed_per_vehicle: list[list[TrafficEvent]] = []
        for i, v in enumerate(vehicles):
            if v.mode == NORMAL or net.tables[i]:
                sensed_per_vehicle.append(
                    sense_events(v, active, config.sensing_range_m, road)
                )
            else:
                sensed_per_vehicle.append([])

        reports: list[tuple[int, float, str, bool]] = []
        for i, v in enumerate(vehicles):
            if v.mode == SELFISH:
                continue
            if v.mode == BOGUS:
                v.emission_carry += config.bogus_rate
                while v.emission_carry >= 1.0 and false_map.entries:
                    location, attr = false_map.entries[
                        v.bogus_cursor % len(false_map.entries)
                    ]
                    v.bogus_cursor += 1
                    v.emission_carry -= 1.0
                    is_bogus = not _matches_truth(location, attr, active, tolerance, road)
                    reports.append((i, location, attr, is_bogus))
                continue
            for event in sensed_per_vehicle[i]:
                if event.event_id in v.announced:
                    continue
                if (event.location, event.attr) in net.tables[i]:
                    continue
                v.announced.add(event.event_id)
                reports.append((i, event.location, event.attr, False))

        net.step(reports, vehicles, classify_rng)
        net.drop_passed_entries(vehicles, sensed_per_vehicle)

        bogus_live, total_live = net.existing_counts()
        ratio[t - 1] = bogus_live / total_live if total_live else 0.0
        existing_counts[t - 1] = total_live
        active_counts[t - 1] = len(active)

    return MetricsSeries(
        seed=seed,
        ticks=np.arange(1, T + 1),
        bogus_ratio=ratio,
        verified_listings=existing_counts,
        active_events=active_counts,
        rate=np.zeros(T),
        balances=balances,
        notifications=notifications,
        vehicle_ids=[v.vehicle_id for v in vehicles],
        modes=[v.mode for v in vehicles],
    )


# ----------------------------------------------------------------------
# Replications and averaging
# ----------------------------------------------------------------------


@dataclass
class ReplicationResult:
    """Averaged series plus the per-run archive for one configuration."""

    config: SimConfig
    seeds: list[int]
    ticks: np.ndarray
    ratios: np.ndarray  # (n, T) per-run bogus ratio
    mean_ratio: np.ndarray
    sd_ratio: np.ndarray
    verified: np.ndarray  # (n, T)
    active: np.ndarray  # (n, T)
    balances_mean: np.ndarray  # (T, V)
    vehicle_ids: list[str]
    modes: list[str]
    summaries: list[RunSummary]

    @property
    def n(self) -> int:
        return len(self.seeds)

    def tail_mean_ratio(self, t_from: int, t_to: int | None = None) -> float:
        """Mean of the averaged ratio over ticks in [t_from, t_to]."""
        mask = self.ticks >= t_from
        if t_to is not None:
            mask &= self.ticks <= t_to
        return float(self.mean_ratio[mask].mean())

    def per_run_tail_means(self, t_from: int, t_to: int | None = None) -> np.ndarray:
        mask = self.ticks >= t_from
        if t_to is not None:
            mask &= self.ticks <= t_to
        return self.ratios[:, mask].mean(axis=1)


def _replication_worker(args: tuple[dict, int]) -> MetricsSeries:
    config_dict, seed = args
    return run_simulation(SimConfig.from_dict(config_dict), seed)


def run_replications(
    config: SimConfig, n: int | None = None, workers: int = 1
) -> ReplicationResult:
    """Run seeds seed..seed+n-1 and average the series across runs.

    Runs share no state, so they may execute in parallel worker processes;
    results are always reduced in seed order, making the averages
    independent of scheduling.
    """
    config.validate()
    if n is None:
        n = config.replications
    if n < 1:
        raise ConfigError("replication count must be at least 1")
    seeds = [config.seed + i for i in range(n)]
    if workers > 1 and n > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_replication_worker, [(config.as_dict(), s) for s in seeds]))
    else:
        runs = [run_simulation(config, s) for s in seeds]

    T = config.sim_seconds
    ratios = np.stack([r.bogus_ratio for r in runs])
    verified = np.stack([r.verified_listings for r in runs])
    active = np.stack([r.active_events for r in runs])
    balances_sum = np.zeros((T, len(runs[0].vehicle_ids)))
    for r in runs:
        balances_sum += r.balances
    sd = ratios.std(axis=0, ddof=1) if n > 1 else np.zeros(T)
    return ReplicationResult(
        config=config,
        seeds=seeds,
        ticks=runs[0].ticks,
        ratios=ratios,
        mean_ratio=ratios.mean(axis=0),
        sd_ratio=sd,
        verified=verified,
        active=active,
        balances_mean=balances_sum / n,
        vehicle_ids=runs[0].vehicle_ids,
        modes=runs[0].modes,
        summaries=[r.summary for r in runs],
    )


# ----------------------------------------------------------------------
# CSV emission
# ----------------------------------------------------------------------


def _f(x: float) -> str:
    """Floats are written with 9 significant digits everywhere."""
    return format(float(x), ".9g")


def emit_csv(result: ReplicationResult, out_dir: str | Path) -> list[Path]:
    """Write the fixed-schema outputs for one configuration.

    Produces ratio_timeseries.csv, cash_timeseries.csv, summary.csv,
    config_echo.json, and one compact per-run file under runs/.  Rewriting
    with the same inputs overwrites byte-identically.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "runs").mkdir(exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    written: list[Path] = []

    def write(path: Path, lines: list[str]) -> None:
        try:
            with open(path, "w", newline="\n") as fh:
                fh.write("\n".join(lines))
                fh.write("\n")
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc}") from exc
        written.append(path)

    lines = ["t,mean_ratio,sd_ratio"]
    for i, t in enumerate(result.ticks):
        lines.append(f"{t},{_f(result.mean_ratio[i])},{_f(result.sd_ratio[i])}")
    write(out / "ratio_timeseries.csv", lines)

    lines = ["t,vehicle_id,mode,balance"]
    for i, t in enumerate(result.ticks):
        row = result.balances_mean[i]
        for j, vid in enumerate(result.vehicle_ids):
            lines.append(f"{t},{vid},{result.modes[j]},{_f(row[j])}")
    write(out / "cash_timeseries.csv", lines)

    lines = [
        "seed,peak_ratio,peak_time,convergence_time,"
        "final_balance_normal,final_balance_bogus,final_balance_selfish"
    ]
    for s in result.summaries:
        finals = s.final_balance_by_mode
        cells = [
            str(s.seed),
            _f(s.peak_ratio),
            str(s.peak_time),
            str(s.convergence_time),
        ]
        for mode in (NORMAL, BOGUS, SELFISH):
            cells.append(_f(finals[mode]) if mode in finals else "")
        lines.append(",".join(cells))
    write(out / "summary.csv", lines)

    for k, seed in enumerate(result.seeds):
        lines = ["t,ratio,verified_listings,active_events"]
        for i, t in enumerate(result.ticks):
            lines.append(
                f"{t},{_f(result.ratios[k, i])},"
                f"{result.verified[k, i]},{result.active[k, i]}"
            )
        write(out / "runs" / f"run_{seed:05d}.csv", lines)

    n_bogus, n_selfish = result.config.attacker_split
    echo = {
        "config": result.config.as_dict(),
        "seeds": result.seeds,
        "vehicle_count": result.config.vehicle_count,
        "bogus_vehicles": n_bogus,
        "selfish_vehicles": n_selfish,
        "convergence_threshold": CONVERGENCE_THRESHOLD,
        "version": __version__,
    }
    if result.config.framework == FRAMEWORK_VIME:
        echo["vime_params"] = dataclasses.asdict(
            VimeParams(
                err=result.config.vime_err,
                comm_range=result.config.vime_comm_range_m,
            )
        )
        echo["note"] = "vime runs have no cash dynamics; balances stay at initial"
    path = out / "config_echo.json"
    try:
        with open(path, "w", newline="\n") as fh:
            json.dump(echo, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    written.append(path)
    return written


# ----------------------------------------------------------------------
# The figure-grid sweep
# ----------------------------------------------------------------------

SWEEP_DENSITIES = (10.0, 20.0, 30.0)
SWEEP_M_VALUES = (2, 3, 4)
SWEEP_VIME_ERRS = (0.1, 0.01)


def vime_dir_name(err: float) -> str:
    return f"vime_err{format(err, 'g')}"


def run_sweep(config: SimConfig, out_dir: str | Path, workers: int = 1) -> None:
    """Reproduce the full comparison grid into per-cell subdirectories.

    Cells p{density}_m{m} each hold a vcash/ directory plus one directory
    per baseline error setting.  Baseline runs do not depend on m, so each
    (density, err) pair is simulated once and written into all m cells.
    """
    out = Path(out_dir)
    for density in SWEEP_DENSITIES:
        vime_results = {}
        for err in SWEEP_VIME_ERRS:
            vime_config = dataclasses.replace(
                config,
                density_per_km=density,
                framework=FRAMEWORK_VIME,
                vime_err=err,
            )
            vime_results[err] = run_replications(vime_config, workers=workers)
        for m in SWEEP_M_VALUES:
            cell = out / f"p{format(density, 'g')}_m{m}"
            vcash_config = dataclasses.replace(
                config,
                density_per_km=density,
                m_terminate=m,
                framework=FRAMEWORK_VCASH,
            )
            result = run_replications(vcash_config, workers=workers)
            emit_csv(result, cell / FRAMEWORK_VCASH)
            for err in SWEEP_VIME_ERRS:
                emit_csv(vime_results[err], cell / vime_dir_name(err))
