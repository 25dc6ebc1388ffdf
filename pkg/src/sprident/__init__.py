"""Estimation of strictly positive real discrete-time transfer functions.

Frequency-response data is fitted with a linear combination of
orthonormal basis filters (Laguerre / Kautz) under linear constraints
that keep the real part of the fit positive on a frequency grid. An
observer-based time-domain identification front end supplies approximate
pole locations when none are known.
"""

from .errors import (ConfigError, EvaluationError, InfeasibleError,
                     NumericalError, ParseError, SprIdentError)
from .gobf import (BasisSpec, GobfBasis, KautzAtom, LaguerreAtom,
                   basis_from_poles, build_basis, combine, eval_basis,
                   gram_matrix, kautz_basis, laguerre_basis)
from .io_formats import (emit_frf, emit_tio, parse_config, parse_frf,
                          parse_tio, read_model_file, write_model_file)
from .lti import (FrequencyResponse, RationalTf, StateSpaceModel, eval_freq,
                  gaussian_sequence, is_schur, simulate, sort_poles,
                  spr_margin, ss_freq_response,
                  ss_poles, ss_to_markov, ss_to_tf)
from .okid import (EraRealization, ObserverMarkov, OkidConfig, build_hankels,
                   build_regression, era, estimate_markov, okid_era_pipeline,
                   recover_system)
from .sprfit import (QpProblem, SprFitConfig, SprFitResult, assemble_qp,
                     check_kkt, fit_spr, solve_qp)

__version__ = "0.1.0"
