"""Truncated tensor algebra and Monte-Carlo harness for signature
representations of linear Volterra, delay and Gaussian Volterra processes."""

from .bounds import (
    HWeightConfig,
    a_norm_pathwise,
    ah_norm,
    h_weight,
    l2_bound,
    lp_bound,
    truncation_tail,
)
from .brownian import BrownianPath, TimeGrid, sample_brownian, sample_increments_batch
from .errors import DimensionMismatchError, KernelDomainError, ResolventDivergenceError
from .models import (
    DelayParams,
    DiracMixture,
    ExpSumKernel,
    SmoothKernel,
    TimeVaryingFunctional,
    VolterraParams,
    constant_kernel,
    delay_domination_witness,
    delay_functional,
    delay_pair,
    exponential_kernel,
    fractional_dirac_mixture,
    gaussian_volterra_functional,
    gaussian_volterra_time_functional,
    laplace_exp_integral,
    ou_time_functional,
    riemann_liouville_functional,
    riemann_liouville_kernel,
    riemann_liouville_time_functional,
    shifted_kernel,
    volterra_domination_witness,
    volterra_functional,
    volterra_pair,
)
from .signature import (
    SignatureStream,
    dump_stream,
    evaluate,
    expected_signature,
    ito_residual,
    read_stream_dump,
    segment_exponential,
    signature_stream,
)
from .simulate import (
    ReferenceSeries,
    closed_form_gbm,
    closed_form_ou,
    euler_delay,
    euler_volterra,
    gv_quadrature,
    heun_delay,
)
from .tensor import (
    DominationWitness,
    TruncatedTensor,
    concat_mul,
    concat_pow,
    dominates,
    linear_combine,
    pair,
    project,
    resolvent,
    shuffle_exp,
    shuffle_mul,
    shuffle_pow,
)
from .words import Alphabet, Word, iter_words

__version__ = "0.1.0"
