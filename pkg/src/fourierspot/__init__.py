"""Spot covariance matrices from asynchronous high-frequency data.

The estimator at the core of the package reconstructs the instantaneous
covariance matrix of a multivariate diffusion from irregular, asynchronous
tick observations as a positive semi-definite quadratic form in the
returns' Fourier coefficients; the surrounding modules simulate price
panels, microstructure noise and sampling schemes, and orchestrate the
Monte Carlo experiments that benchmark it.
"""

from .errors import ConfigurationError, InputFileError, NumericalError
from .fourier_estimator import (CoeffPanel, FourierCoeffVector, FreqParams,
                                PsdWeight, SpotCovEstimate, default_eval_times,
                                detect_noise, dirichlet_kernel,
                                estimate_classical, estimate_pdf,
                                estimate_reference_oracle, fejer_kernel,
                                fourier_coeffs, select_freq)
from .harness import (ResultStore, ScenarioConfig, enumerate_noise_specs,
                      enumerate_scenarios, run_comparison, run_grid_search,
                      run_scenario, run_scenarios, run_sensitivity_study)
from .kernels import HAVE_COMPILED
from .metrics import (ScoreReport, bias_mse_vs_n, integrated_sq_err, mise,
                      psd_rate, psd_rate_by_path, weighted_selection)
from .microstructure import (CorrelatedOUNoise, HeteroskedasticNoise, IidNoise,
                             NoisyPanel, NoNoise, OUNoise, Rounding,
                             apply_iid_noise, apply_ou_noise, apply_rounding,
                             heteroskedastic_profile, reference_return_variance)
from .path_sim import (TRADING_DAY_S, ConstantVolParams, CorrelationSpec,
                       DenseGrid, HestonParams, PanelBundle, RoughHestonParams,
                       SV1FParams, SV2FParams, one_day_grid, s_exp, simulate,
                       simulate_constant_vol, simulate_heston,
                       simulate_rough_heston, simulate_sv1f, simulate_sv2f,
                       true_spot_cov, write_panel_csv)
from .sampling import (PoissonSampling, RegularSampling, ShiftedPairSampling,
                       TickSeries, read_ticks_csv, resample_regular, sample,
                       sample_poisson, sample_shifted_pair, write_ticks_csv)

__version__ = "0.1.0"
