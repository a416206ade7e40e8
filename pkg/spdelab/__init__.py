from .kernels.heat_kernel import SpaceTimeGrid, KernelParams
from .noise.noise_field import WhiteNoiseSample, DriftField
from .solvers.coefficients import Coefficients
from .solvers.spde_solver import RandomField, solve_mild, solve_coupled_pair
from .convolution.stochastic_convolution import FactorizationParams, convolve_direct
from .verifiers import (Scenario, MomentBoundVerifier, TailBoundVerifier, SmallMomentVerifier, TransportVerifier,
                        ConcentrationVerifier, LayerCakeVerifier, LocalPropertyVerifier)
from .utils.report import VerificationReport
from ._version import __version__

__all__ = ['__version__', 'SpaceTimeGrid', 'KernelParams', 'WhiteNoiseSample', 'DriftField', 'Coefficients',
           'RandomField', 'solve_mild', 'solve_coupled_pair', 'FactorizationParams', 'convolve_direct', 'Scenario',
           'MomentBoundVerifier', 'TailBoundVerifier', 'SmallMomentVerifier', 'TransportVerifier',
           'ConcentrationVerifier', 'LayerCakeVerifier', 'LocalPropertyVerifier', 'VerificationReport']
