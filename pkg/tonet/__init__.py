"""
TONet: tone-octave melody extraction.

CFP/TCFP front end, a numpy autodiff engine, the TONet encoder/decoder
graph with its ablation variants, training, and melody metrics.
"""

__version__ = "0.1.0"

__all__ = ["__version__"]
