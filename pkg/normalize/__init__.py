"""
Termination Database Miner - Normalize Module
Rewrite theory, clause simplification, canonical schemes and subsumption.
"""
