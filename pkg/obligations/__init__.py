"""
Termination Database Miner - Obligations Module
Definitions, rulers, measure conjectures and the bounded evaluator.
"""
