"""Banded zero-forcing precoders with successive interference
pre-cancellation for multiuser MISO broadcast channels."""

from .channels import (SPEED_OF_LIGHT, ChannelMatrix, CorrelationSpec,
                       FdMimoGeometry, exponential_correlation,
                       gen_fdmimo_los, gen_iid_gaussian,
                       gen_kronecker_rayleigh, load_channel_fixture,
                       save_channel_fixture)
from .exceptions import (CapabilityError, DimensionError, FixtureFormatError,
                         GzfdpError, ParameterError, RankDeficiencyError,
                         SpecValidationError)
from .gram import GramGeometry, build_gram
from .harness import (ExperimentSpec, RateReport, emit_report, load_spec,
                      parse_spec, run_experiment)
from .ordering import (UserOrdering, apply_ordering, evaluate_ordering,
                       order_alg1, order_alg2, order_bruteforce, order_random)
from .precoding import (GzfDpPrecoder, PrecoderSolution, UgDpPrecoder,
                        ZeroForcingPrecoder, ZfDpPrecoder, build_gzfdp_minrate,
                        build_gzfdp_sumrate, build_ugdp, build_zf, build_zfdp,
                        water_fill)

__version__ = "0.1.0"

__all__ = [
    "SPEED_OF_LIGHT", "ChannelMatrix", "CorrelationSpec", "FdMimoGeometry",
    "exponential_correlation",
    "gen_fdmimo_los", "gen_iid_gaussian", "gen_kronecker_rayleigh",
    "load_channel_fixture", "save_channel_fixture",
    "CapabilityError", "DimensionError", "FixtureFormatError", "GzfdpError",
    "ParameterError", "RankDeficiencyError", "SpecValidationError",
    "GramGeometry", "build_gram",
    "ExperimentSpec", "RateReport", "emit_report", "load_spec", "parse_spec",
    "run_experiment",
    "UserOrdering", "apply_ordering", "evaluate_ordering", "order_alg1",
    "order_alg2", "order_bruteforce", "order_random",
    "GzfDpPrecoder", "PrecoderSolution", "UgDpPrecoder", "ZeroForcingPrecoder",
    "ZfDpPrecoder", "build_gzfdp_minrate", "build_gzfdp_sumrate", "build_ugdp",
    "build_zf", "build_zfdp", "water_fill",
]
