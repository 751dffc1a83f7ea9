"""Secure multi-hop routing for OFDM underwater acoustic sensor networks."""
from .acoustics import (BandProfile, PropagationParams, absorption_db_per_km, band_integral_noise,
                        band_integral_pathloss, make_band_profile, noise_psd_db, path_loss_db)
from .errors import ConfigError, ContractError, DomainError, GenerationError
from .harness import ExperimentConfig, TrialRecord, db_to_linear, run_sweep, summarize
from .optimizer import (AllocationResult, SolverConfig, Status, evaluate_lagrangian,
                        inner_power_allocation, oracle_allocation, select_node, solve_hop)
from .routing import PowerMode, RouteResult, RouteStatus, Scheme, route_dbr, route_secure
from .secrecy import Channel, LinkNoiseProfile, link_noise_profile, secrecy_capacity, snr
from .topology import NetworkTopology, NodeId, NodeKind, generate

__version__ = "0.1.0"
