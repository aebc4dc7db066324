"""Fiberwise analysis of finitely generated shift-invariant spaces.

Builds Fourier-domain generators, assembles the Gramian G(w) and the coarse
periodization A(w), and tests Riesz/frame bounds, extra invariance and
regularity trends on sampled fibers.
"""

__version__ = "0.1.0"

from .exceptions import (AlreadyMinimal, ConfigError, DimensionMismatch, NotLattice, NotSublattice,
                         NotSuperGroup, ShiftInvError, ZeroMatrix)
from .lattice import (FullSpace, Lattice, ZeroGroup, coset_reps, dual_group, fundamental_domain, index,
                      parse_group, reduce_to_domain)
from .fiber import (FiberMatrix, FrameReport, a_fiber, check_frame_A_bounds, check_ga_identity,
                    frame_report, gram_fiber, min_nonzero_eig, numerical_rank)
from .invariance import (InvarianceReport, ReducedSet, check_gamma_invariance,
                         check_translation_invariance, constant_rank_scan, minimal_generator_count,
                         rank_drop_locus, reduce_generators, semicontinuity_scan)
from .diagnostics import (DecayReport, SobolevTrendReport, decay_sup, gagliardo_trend,
                          level_energy_profile, local_fiber_mass, trace_continuity_scan)
