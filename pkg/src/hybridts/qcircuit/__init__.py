"""Gate-level reversible and quantum circuit emulation."""

from .core import (
    Circuit,
    Gate,
    TraceResult,
    ancilla_audit,
    append_increment,
    export_text,
    is_classical,
    simulate,
    trace_basis,
)
from .oracles import (
    clause_oracle_counter,
    clause_oracle_naive,
    closed_form_success,
    grover_angle,
    grover_circuit,
    grover_search,
    oracle_cost_report,
    oracle_phases,
    qubit_cost,
)
from .qpe import qpe_counter, qpe_standard
from .walk import build_walk_components, walk_cost_report

__all__ = [name for name in dir() if not name.startswith("_")]
