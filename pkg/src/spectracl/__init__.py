"""Random directed graph laboratory: Chung-Lu and block Chung-Lu models, spectral radius predictors, path bounds and SIS epidemics."""

__version__ = "0.1.0"
