"""Restart analysis for discrete first-passage times.

The restart sequence ``S_n`` of a hitting time decides whether any restart
policy can lower its mean.  This package computes and classifies it,
evaluates mean hitting times under restart, perturbs supports, inverts the
sequence back to a distribution and checks the analytics by simulation.
"""

__version__ = "0.1.0"

from .dist import (
    Binomial,
    Deterministic,
    Explicit,
    Gapped,
    Geometric,
    LogShape,
    NegativeBinomial,
    Pmf,
    Poisson,
    ShiftedGeometric,
    TwoPoint,
    Uniform,
    Zeta,
    from_spec,
    truncate,
)
from .errors import (
    DegenerateRestartError,
    DistributionError,
    InconsistentTailError,
    InfiniteMeanError,
    NotADistributionError,
    NotApplicableError,
    PreemptiveRestartError,
    RestartCapExceeded,
    RestartSeqError,
)
from .fpur import (
    Distributional,
    NoRestart,
    Sharp,
    mean_hitting_time,
    optimize_sharp,
    simulate,
)
from .perturb import GapSpec, insert_gap, predicted_gap_sequence
from .reconstruct import reconstruct_cmf, round_trip_error
from .restart_seq import (
    beneficial,
    bounded_verdict,
    convexity_at,
    fsa,
    log_shape,
    restart_sequence,
    tail_class,
)

__all__ = [name for name in dir() if not name.startswith("_")]
