"""driftlab: simulation and inference for discretely observed SDE models.

Core pieces: exact and Euler-Maruyama simulators, transition-density
likelihoods (closed form, Euler, forward-PDE, bridge-sampled), Monte Carlo
estimating functions, a bootstrap particle filter with a Kalman oracle,
penalized spline collocation, and synthetic-data adequacy checks.
"""

from .adequacy import AdequacyReport, envelope_check, register_statistic, synthetic_replicates
from .bridge import bridge_loglikelihood, bridge_pair_logdensity
from .collocation import (
    BasisConfig,
    CollocationOptions,
    CollocationState,
    PenaltySpec,
    collocation_fit,
    collocation_objective,
    map_equivalent_sigma,
)
from .densities import (
    euler_transition_logdensity,
    gbm_transition_logdensity,
    ou_transition_logdensity,
)
from .estimating import EstimatingFunction, ee_solve, mc_conditional_expectation, raw_moment_psi
from .fokker_planck import FokkerPlanckResult, fokker_planck_transition_density
from .kalman import LinearGaussianSSM, kalman_filter, kalman_loglik, ou_to_ssm
from .lamperti import TransformedDiffusion, lamperti_transform
from .likelihood import (
    BridgeDensity,
    EulerDensity,
    FokkerPlanckDensity,
    GbmDensity,
    OuDensity,
    SimplexOptions,
    TransitionDensity,
    discrete_loglikelihood,
    mle_fit,
)
from .models import (
    DiffusionSpec,
    GbmParams,
    OuParams,
    TvGrowthParams,
    gbm_beta_spec,
    gbm_spec,
    model_factory,
    ou_spec,
    register_model,
)
from .movement import gaussian_position_model, preset_integrated_rw_t
from .observe import (
    NoisyObservationSet,
    ObservationModel,
    ObservationSet,
    projection_link,
    read_noisy_csv,
    read_observations_csv,
    write_observations_csv,
)
from .particle import (
    DiscreteKernel,
    FilterResult,
    ParticleCloud,
    particle_filter,
    pf_profile_loglik,
    systematic_resample,
)
from .paths import Path, TimeGrid, quadratic_variation, read_path_csv, write_path_csv
from .results import FitResult
from .rng import replicate_normals, stream
from .simulate import simulate_euler, simulate_gbm_exact, simulate_ou, simulate_tv_growth

__version__ = "0.1.0"
