"""Element grouping for RIS-assisted links: simulated rate, rate bound and optimal group size."""

from ._backend import BACKEND
from .beamforming import Mode, PhaseConfig, estimated_phases, onoff_config, optimal_phases
from .channel import ChannelRealization, GroupMoments, group_cascade, group_moments, sample_channels
from .estimation import ChannelEstimate, PilotObservation, PilotSchedule, ls_estimate, pilot_matrix, simulate_pilots
from .linkbudget import (
    Geometry,
    PathLossModel,
    SystemParams,
    db_to_linear,
    linear_to_db,
    pathloss_cascaded,
    pathloss_direct,
    transmit_snr,
)
from .optimizer import (
    GroupSizeResult,
    Method,
    PowerFit,
    fit_z_power,
    lambert_w0,
    optimal_group_alt_form,
    optimal_group_brute_force,
    optimal_group_closed_form,
)
from .rate import (
    BoundCoefficients,
    RateResult,
    bound_coefficients,
    instantaneous_snr,
    mc_achievable_rate,
    mc_onoff_rate,
    rate_upper_bound,
    z_ratio,
)

__version__ = "0.1.0"
