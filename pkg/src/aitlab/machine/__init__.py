"""Reference machine, bounded enumeration and the estimators built on it."""

from .core import (
    IDENTITY,
    OPCODES,
    Diverged,
    InvalidProgram,
    MachineError,
    ReferenceMachine,
    RunResult,
    aux_prefix,
    binary_op,
    key,
    lit,
    parse,
    table,
    unary_op,
)
from .estimators import (
    INF,
    HaltingApprox,
    Undefined,
    build_halting,
    coding_constant,
    coding_excess,
    halting_aux,
    info_with_halting,
    k_hat,
    k_whole,
    m_hat,
    mutual_info,
    omega_hat,
)
from .lefttotal import (
    NotTotal,
    border_prefixes,
    is_total,
    layout,
    left_of,
    left_total_violations,
    left_totalize,
    m_b,
    m_b_table,
    omega_bits,
)
from .universe import (
    AuxiliaryNotProbed,
    HaltRecord,
    UniverseSnapshot,
    complete_programs,
    enumerate_universe,
)
