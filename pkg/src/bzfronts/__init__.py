"""Traveling wavefronts of the monostable Belousov-Zhabotinsky system
with nonlocal spatiotemporal interaction.

Subpackages: kernels (interaction kernels, convolutions, moments),
spectral (characteristic roots and the pulled/pushed criterion),
profile_solver (monotone iteration and super-solution certificates),
pde_sim (Crank-Nicolson time stepping of the weak-kernel system),
speed (front tracking and speed estimation), verify (lemma-level checks),
cli (command-line entry point).
"""

from .errors import (
    BzfrontsError, ComplexRoots, DivergentMoment, DomainError, EmptySupport,
    Instability, MonotonicityBroken, NoConvergence, NoCrossing,
    NormalizationUnstable, NotNormalized, NumericalError, ResonantIndex,
    SingularSystem, TailTooShort, WindowTooShort,
)
from .gridfn import Grid, GridFunction
from .kernels import (
    Kernel, PointDelay, PointMass, Shifted, Strong, Tabulated, Weak,
    convolve, convolve_grid, kappa_moment, kappa_moment_quadrature, mass,
    parse_kernel_spec, truncate,
)
from .spectral import (
    CharRoots, Classification, Params, Verdict, char_roots, classify,
    critical_speed, pushed_scalar_speed, weak_kernel_threshold,
)
from .profile_solver import (
    CorrectionCoeffs, CriterionViolatedWarning, IterationScheme,
    SupersolutionReport, WaveProfile, certify_supersolution,
    correction_coeffs, default_grid, kpp_lower_front, monotone_iterate,
    solve_Lb,
)
from .pde_sim import PdeState, SimConfig, init_step_data, preset_config, run, scalar_run, step
from .speed import (
    FrontTrack, SpeedEstimate, SweepRow, TrendRow, estimate_speed,
    shifted_kernel_trend, sweep, track_front,
)
from .verify import Check, CheckStatus, VerificationReport, run_all

__version__ = "0.1.0"
