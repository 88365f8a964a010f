"""Markov-chain engine: Glauber steps, couplings, censoring and block samplers."""
from .glauber import ChainState, glauber_step, is_cut_edge, update_threshold
from .coupling import (CensorPhase, CensorSchedule, ChainSpec, CoupledSystem, CouplingRun,
                       OrderViolation, RandomStream, coupled_run, coupling_time_profile,
                       sample_trajectory)
from .sampler import (ENUM_CAP, ScanSummary, block_heat_bath, exact_tree_sampler,
                      scan_block_dynamics, tree_blocks)

__all__ = [
    "ChainState", "glauber_step", "is_cut_edge", "update_threshold",
    "CensorPhase", "CensorSchedule", "ChainSpec", "CoupledSystem", "CouplingRun",
    "OrderViolation", "RandomStream", "coupled_run", "coupling_time_profile",
    "sample_trajectory",
    "ENUM_CAP", "ScanSummary", "block_heat_bath", "exact_tree_sampler",
    "scan_block_dynamics", "tree_blocks",
]
