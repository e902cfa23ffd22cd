"""Remote charging of a two-level quantum battery through a rectangular waveguide.

Units: ``omega_11 = c = hbar = 1``; times in ``1/omega_11``, distances in
``lambda_11 = 2 pi c / omega_11``.
"""
__version__ = "0.1.0"

from .errors import NumericalError
from .model import (
    PhysicalWaveguide,
    SystemParams,
    cutoff_frequency,
    gamma11_from_physical,
    spectral_density,
)
from .kernels import (
    KernelGrid,
    MarkovRates,
    kernel_grid,
    lamb_shift,
    load_kernel_grid,
    markov_rates,
    memory_kernel,
    memory_kernel_quadrature,
    save_kernel_grid,
)
from .spectrum import (
    BoundState,
    SpectrumResult,
    find_bound_states,
    residue,
    spectrum_sweep,
    y_function,
)
from .dynamics import (
    SolverConfig,
    Trajectory,
    long_time_amplitude,
    markovian_solution,
    solve_scalar_pm,
    solve_volterra,
    steady_energy_formula,
)
from .observables import (
    ObservableSeries,
    QubitState,
    ergotropy,
    qb_energy,
    reduce_battery,
    series_extrema,
    series_from_trajectory,
    steady_extrema,
)
