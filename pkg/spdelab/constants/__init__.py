from .constants import c_moment, c_small_p, c_small_p_eps, c_tci, constants_table
