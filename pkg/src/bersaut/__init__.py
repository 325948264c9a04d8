"""Automorphisms, composition operators and Bergman geometry on model domains."""
from .algebra import (bers_recover, character_locate, annulus_auto_classify, CompositionOperator,
                      evaluation_character, is_unital_hom, lipschitz_hom_bound, standard_test_set)
from .bergman import (ClosedFormKernel, NumericKernel, QuadratureSpec, bergman_metric, blowup_exponent,
                      build_numeric_kernel, holo_curvature, klembeck_profile, transformation_residual)
from .domains import (Annulus, AnnulusAutomorphism, Ball, BallAutomorphism, Bidisc, BidiscAutomorphism, Disk,
                      DiskAutomorphism, Ellipsoid, Siegel, SiegelAutomorphism, orbit, random_automorphism)
from .errors import *  # noqa: F401,F403
from .limits import normal_limit_classify, prop52_check
from .lipschitz import CompactExhaustion, PairSampler, family_classify, lipschitz_norm
from .scaling import BoundaryFrame, cayley, cayley_inverse, dilation_map, scale_sequence
from .series import TruncatedLaurent, TruncatedTaylor2, compose, hadamard_radii, multiply

__version__ = "0.1.0"
