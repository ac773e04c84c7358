"""
Simulation core
"""
