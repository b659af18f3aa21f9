"""Numerical laboratory for the n-th coefficient problem on atomic singular inner functions."""

from .core import (
    AtomicConfig,
    ConfigError,
    PowerSeries,
    coefficient_via_contour,
    f_series,
    fg_series,
    g_series,
    load_config,
    m_n,
    make_config,
    reference_config,
    series_exp,
)

__version__ = "0.1.0"

__all__ = [
    "AtomicConfig",
    "ConfigError",
    "PowerSeries",
    "coefficient_via_contour",
    "f_series",
    "fg_series",
    "g_series",
    "load_config",
    "m_n",
    "make_config",
    "reference_config",
    "series_exp",
]
