"""
Termination Database Miner - Engine Module
Search, certificates, verification and the command line.
"""
