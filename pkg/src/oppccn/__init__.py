"""MobCCN and Epidemic-family protocols over opportunistic contact traces."""

__version__ = "0.1.0"
