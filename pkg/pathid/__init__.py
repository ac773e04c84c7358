"""
Simulator and analysis toolkit for multi-source path-identity interferometers
"""
__version__ = "0.1.0"
