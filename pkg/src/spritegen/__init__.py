"""Reference-conditioned, pose-guided sprite sequence generation.

Given a character reference image and a pose sequence, generate the
frames of that character performing the poses, via a two-stage diffusion
training scheme (pose-to-image, then motion-only pose-to-sprite), with a
full quality-metric suite for evaluation.
"""

__version__ = "0.1.0"
