"""SEP-based transmit beamforming for MIMO Gaussian wiretap channels."""

from .antipodal import Case, KktConfig, KktReport, solve_antipodal
from .baseline import sinr_bf
from .mary import PgdConfig, PgdTrace, pgd_solve, tune_gamma
from .model import (
    QAM4_SYMBOLS,
    AntipodalSpec,
    BeamVector,
    Constellation,
    RealBeamMatrix,
    WiretapSystem,
    validate_system,
)
from .sdr import SdrConfig, SdrSolution, randomize, solve_sdr
from .sep import eve_lower_bound, secrecy_rate, sep_antipodal, sep_union_bound
from .simulate import (
    SerEstimate,
    SweepConfig,
    estimate_ser_antipodal,
    estimate_ser_mary,
    gen_gaussian_channel,
    sweep_snr,
)

__version__ = "0.1.0"
