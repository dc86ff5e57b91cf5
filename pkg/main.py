#!/usr/bin/env python3
"""
Hardy Non-Locality - CLI interface

Usage:
    python main.py analyze data/table1.csv --format json
    python main.py simulate --seed 42 --out aggregates.csv
    python main.py quantum --restarts 16
    python main.py lhv --drop 2
"""
import sys

from src.cli import main

if __name__ == "__main__":
    sys.exit(main())
