"""
spade_url - Sparse-to-dense depth with uncertainty for all-day depth completion
"""

__version__ = "0.1.0"
