"""
Heralded single-phonon preparation, decay and photon-counting statistics.

Closed-form models of the write / herald / read sequence on a Raman-active
vibrational mode, an exact Monte Carlo of the same sequence, and the
time-tag histogram analysis used to turn detector clicks into correlation
functions.
"""

__version__ = "0.1.0"

from .errors import (
    ApproximationWarning,
    DomainError,
    FitError,
    ImpossibleConditionError,
    IntegrationError,
    PhononHeraldError,
    TimeTagFormatError,
    TruncationError,
    UndefinedStatisticError,
)
from .fock import (
    JointPairState,
    NumberDistribution,
    bose_occupancy,
    factorial_moment,
    fock_distribution,
    g2,
    marginal,
    thermal_distribution,
    two_mode_squeezed,
)
from .heralding import DetectorModel, click_weight, herald, herald_click_probability, heralded_state_approx
from .dynamics import (
    DecayParams,
    alpha_model,
    evolve_analytic,
    evolve_numeric,
    fit_decay,
    g2_conditional,
    g2_SAS_decay_model,
    pn_closed_form,
    rate_rhs,
)
from .readout import ReadoutModel, alpha_offset, g2_after_thinning, noisy_g2, thin
from .powermodel import (
    PowerModelParams,
    alpha_loss,
    alpha_zero_delay,
    detection_probabilities,
    g2_SAS_power,
)
from .montecarlo import (
    CoincidenceCounts,
    ExperimentConfig,
    alpha_estimate,
    g2_from_histogram,
    g2_SAS_estimate,
    simulate,
)
from .timetag import (
    StartStopHistogram,
    TimeTagRecord,
    TimeTagStream,
    build_histogram,
    herald_filter,
    read_stream,
    write_stream,
)
