"""Measure-preserving Markov kernels on cotangent bundles.

Target potentials in chart coordinates, fiber disintegrations as Gaussian or
Student-t kinetic energies, symplectic integration of the induced Hamiltonian
flow with Metropolis correction, classical baseline kernels, and the chain
diagnostics used to compare them.
"""

from .diagnostics import (
    AutocorrResult,
    BenchEntry,
    BenchRow,
    CheckResult,
    EnergyStats,
    TestFunction,
    autocorrelation_rho,
    autocorrelation_series,
    coordinate,
    coordinate_squared,
    density_of_states_histogram,
    energy_gamma_check,
    gradient_fd_check,
    kernel_comparison,
    kinetic_fd_check,
    mcmc_estimator,
    ranked_rho1,
)
from .dynamics import (
    HamiltonianSystem,
    IntegratorSpec,
    PhasePoint,
    Trajectory,
    euler_step,
    exact_gaussian_flow,
    flow_endpoint,
    generalized_leapfrog_step,
    integrate,
    jacobian_det_fd,
    leapfrog_step,
    momentum_flip,
    reversibility_defect,
)
from .errors import (
    BracketError,
    ConfigError,
    DegenerateChainError,
    DivergenceError,
    NumericError,
)
from .fibers import (
    DenseMetric,
    DiagonalMetric,
    IdentityMetric,
    KineticEnergy,
    Metric,
    MetricEval,
    SoftAbsMetric,
    grad_kinetic_p,
    grad_kinetic_q,
    kinetic_energy,
    metric_eval,
    sample_momentum,
    softabs_eigmap,
)
from .kernels import (
    Chain,
    FixedTime,
    GibbsConfig,
    HMCConfig,
    MALAConfig,
    RWMConfig,
    TransitionInfo,
    ULAConfig,
    UniformTime,
    conditional_cdf,
    conditional_cdf_invert,
    gibbs_transition,
    hmc_transition,
    langevin_path,
    mala_transition,
    run_chain,
    rwm_transition,
    sample_integration_time,
    transition,
    ula_transition,
)
from .targets import (
    ChartTransform,
    TargetDensity,
    apply_chart,
    gaussian,
    identity_chart,
    iid_gaussian,
    invert_chart,
    make_target,
    scaling_chart,
    sinh_chart,
    warped_gaussian,
)

__version__ = "0.1.0"
