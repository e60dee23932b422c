"""DRRPVT - dynamic bike repositioning with carrier vehicles and bike trailers."""

__version__ = "0.1.0"
