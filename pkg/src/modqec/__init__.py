"""Compilation and simulation toolchain for syndrome extraction on
shuttled module arrays: code construction, machine-level layout
compilers, circuit-noise simulation, decoding, and experiment harness.
"""

from .circuits import (
    CircuitOp,
    DetectorErrorModel,
    Mechanism,
    NoiseModel,
    NoisyCircuit,
    build_memory_experiment,
    detector_error_model,
    lower_to_circuit,
)
from .codes import (
    BBCode,
    PauliOperator,
    StabilizerCode,
    build_bb_code,
    catalog_code,
    load_catalog,
    logical_observables,
    make_stabilizer_code,
    stabilizer_generators,
)
from .decoder import DecodeResult, DecoderConfig, decode, decode_batch
from .harness import (
    CSV_COLUMNS,
    DEFAULT_GRID,
    ExperimentSpec,
    FitResult,
    LogicalErrorEstimate,
    ModularityReport,
    export_results,
    fit_curve,
    modularity_comparison,
    per_round_rate,
    run_memory_experiment,
    wilson_interval,
)
from .layouts import (
    LAYOUT_NAMES,
    build_layout,
    cyclic_layout,
    depth_table,
    flat_cyclic_layout,
    interleaved_layout,
    sparse_cyclic_layout,
)
from .machine import (
    CHAIN_SEQUENTIAL,
    FULL,
    ArrayConfig,
    MachineProgram,
    ProgramBuilder,
    program_from_text,
    program_to_text,
    validate_program,
)
from .simulate import (
    ShotBatch,
    circuit_outcome_distribution,
    dense_circuit_oracle,
    dense_sequential_oracle,
    sample,
    verify_memory_experiment,
    verify_noiseless,
)

__version__ = "0.1.0"

__all__ = [
    "ArrayConfig",
    "BBCode",
    "CHAIN_SEQUENTIAL",
    "CSV_COLUMNS",
    "CircuitOp",
    "DEFAULT_GRID",
    "DecodeResult",
    "DecoderConfig",
    "DetectorErrorModel",
    "ExperimentSpec",
    "FULL",
    "FitResult",
    "LAYOUT_NAMES",
    "LogicalErrorEstimate",
    "MachineProgram",
    "Mechanism",
    "ModularityReport",
    "NoiseModel",
    "NoisyCircuit",
    "PauliOperator",
    "ProgramBuilder",
    "ShotBatch",
    "StabilizerCode",
    "build_bb_code",
    "build_layout",
    "build_memory_experiment",
    "catalog_code",
    "circuit_outcome_distribution",
    "cyclic_layout",
    "decode",
    "decode_batch",
    "dense_circuit_oracle",
    "dense_sequential_oracle",
    "depth_table",
    "detector_error_model",
    "export_results",
    "fit_curve",
    "flat_cyclic_layout",
    "interleaved_layout",
    "load_catalog",
    "logical_observables",
    "lower_to_circuit",
    "make_stabilizer_code",
    "modularity_comparison",
    "per_round_rate",
    "program_from_text",
    "program_to_text",
    "run_memory_experiment",
    "sample",
    "sparse_cyclic_layout",
    "stabilizer_generators",
    "validate_program",
    "verify_memory_experiment",
    "verify_noiseless",
    "wilson_interval",
]
