"""
Experiment plugins; each sub-package provides a ``plugin.py`` with one
``BaseExperiment`` subclass.
"""
from pathlib import Path

EXPERIMENTS_DIR = Path(__file__).resolve().parent
