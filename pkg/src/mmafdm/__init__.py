"""Link-level simulation of multiple-mode index-modulated AFDM (MM-AFDM-IM)."""

__version__ = "0.1.0"
