"""
Predictor-guided regularized evolution over DAG programs.
"""

__version__ = "0.1.0"
