from .stochastic_convolution import FactorizationParams, convolve_direct, apply_j_alpha, \
    apply_j_alpha_minus_one, factorization_residual, factorization_study, truncate_sigma
