"""Imaging package: reverse time migration, sparse inversion and image metrics."""

from .rtm import check_receivers, rtm_image
from .sparse import L1Params, l1_certificate, l1_reconstruct, soft_threshold, solve_l1
from .slices import (
    ImageSlice, count_above, energy_fraction, extract_slices, peak_location, peak_sidelobe_ratio,
    shell_rear_mask, support_estimate,
)

__all__ = [
    'check_receivers', 'rtm_image',
    'L1Params', 'l1_certificate', 'l1_reconstruct', 'soft_threshold', 'solve_l1',
    'ImageSlice', 'count_above', 'energy_fraction', 'extract_slices', 'peak_location',
    'peak_sidelobe_ratio', 'shell_rear_mask', 'support_estimate',
]
