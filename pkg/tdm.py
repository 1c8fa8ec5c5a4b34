#!/usr/bin/env python3
"""
Termination Database Miner - Entry Point

Run:
    python3 tdm.py mine corpus/desk.tdc -o desk.tdb
    python3 tdm.py prove corpus/f3.tdc --db desk.tdb --out f3.cert
    python3 tdm.py verify f3.cert corpus/f3.tdc --db desk.tdb
"""

import sys

from engine.cli import main

if __name__ == "__main__":
    sys.exit(main())
