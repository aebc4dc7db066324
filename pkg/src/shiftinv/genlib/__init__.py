"""Fourier-domain generator construction and evaluation."""

from .expr import (BumpG, Dilate, Eq62Series, G0, G1, Hj, Indicator, Lemma61Series, Node,
                   PiecewiseLinear, Product, Reflect, Scale, Shift, Sum, Tensor, eval_g,
                   eval_g0, eval_g1, eval_hj, gamma_j, hj_interval, interiors_disjoint, merge_intervals,
                   node_from_dict)
from .generators import FourierGenerator, GeneratorSet, eval_generator, support_intervals
from .presets import (PRESETS, bump_set, dependent_regular_set, duplicated_sinc_set, gamma_for,
                      hat_set, make_eq62_generator, make_lemma61_generator,
                      make_prop_pointwise_set, make_prop_regular_set, phi1_hat, phi2_hat,
                      sinc_set, zero_set)
