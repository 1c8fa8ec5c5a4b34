"""
Termination Database Miner - Core Module
Terms, the reader, errors and the event bus.
"""
