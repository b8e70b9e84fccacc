"""Annealed winner-takes-all training for conditional vector quantization.

Multi-hypothesis regression with MCL / Relaxed-WTA / annealed MCL training
schemes, a from-scratch multi-head MLP, and diagnostics for the
free-energy / rate-distortion / phase-transition picture of annealed
quantization.
"""

__version__ = "0.1.0"
