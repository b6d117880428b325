"""Serial-to-parallel conversion of heralded single-photon streams.

A pulsed pair source heralds signal photons; runs of n consecutive
heralds drive a router chain that fans the photons out to n spatial
modes.  This package provides the closed-form conversion efficiencies of
the three routing strategies, a slot-level Monte-Carlo simulation of the
full herald/trigger/route/detect chain, and the counting estimators used
to analyze such an experiment.
"""

from .analytic import (
    EfficiencyCurve,
    efficiency_curves,
    s_heralded,
    s_passive,
    s_unheralded_clocked,
    switching_efficiency,
)
from .config import (
    RunControls,
    Scenario,
    SweepGrid,
    apply_grid_point,
    config_digest,
    load_scenario,
    scenario_from_mapping,
    scenario_to_mapping,
)
from .controller import DriveSchedule, detect_runs, drive_schedule, run_starts_from_heralds
from .converter import (
    RoutingBatch,
    clock_offset_draw,
    monte_carlo_efficiency,
    route_clocked,
    route_clocked_batch,
    route_heralded,
    route_heralded_batch,
    route_passive,
    route_passive_batch,
)
from .measurement import (
    compensate_transmittance,
    count_rates,
    estimate_routing_efficiencies,
    estimate_s,
    port_detection_counts,
    propagate_counting_uncertainty,
)
from .model import (
    ConfigError,
    ConverterParams,
    EfficiencyEstimate,
    EstimatorMethod,
    OutputRecord,
    RoutingStrategy,
    SimulationConfig,
    SimulationReport,
    SlotRecord,
    SourceParams,
    TriggerEvent,
    deadtime_to_slots,
    validate_config,
)
from .pipeline import (
    ExecutionResult,
    curves_from_csv,
    execute_scenario,
    read_report,
    report_digest_matches,
    report_to_mapping,
    run_analytic,
    run_calibrate,
    run_simulation,
    run_sweep,
    write_report,
)
from .source import (
    HeraldStream,
    RngStream,
    SlotStream,
    generate_herald_stream,
    generate_slots,
    herald_probability,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
