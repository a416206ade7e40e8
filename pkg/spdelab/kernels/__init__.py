from .heat_kernel import SpaceTimeGrid, KernelParams, kernel_value, kernel_integrals, kernel_matrix
