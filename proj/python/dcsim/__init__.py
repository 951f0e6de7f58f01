"""Python bindings for the dcsim data-center simulation engine."""

from ._core import (
    CoverageError,
    DcsimError,
    DomainError,
    EpisodeOverflowError,
    Environment,
    IoError,
    ParseError,
    ProtocolError,
    RangeError,
    SchemaError,
    UnitError,
    ValidationError,
    chiller_load,
    cli,
    crac_return_temp,
    load_config,
    load_traces,
    parse_config,
    run_fixed,
    run_rbc,
    step_hvac,
    step_it_room,
    step_it_room_naive,
    sweep,
    temperature_field_csv,
    validate_config,
)

EPISODE_STEPS_7_DAYS = 672
EPISODE_STEPS_30_DAYS = 2880

__all__ = [name for name in dir() if not name.startswith("_")]
