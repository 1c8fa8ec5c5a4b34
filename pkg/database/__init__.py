"""
Termination Database Miner - Database Module
Scheme entries, corpus mining, and .tdb persistence.
"""
