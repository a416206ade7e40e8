from .verifier import Scenario, BaseVerifier
from .moments import MomentBoundVerifier, TailBoundVerifier, SmallMomentVerifier, sup_norm_moment, \
    verify_moment_bound, verify_tail_bound, verify_small_p
from .transport import TransportVerifier, estimate_w2_and_entropy
from .concentration import ConcentrationVerifier, ConcentrationProfile, concentration_profile
from .appendix import LayerCakeVerifier, LocalPropertyVerifier, layer_cake_checks, local_property_check
