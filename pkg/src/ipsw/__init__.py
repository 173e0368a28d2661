"""Reweighting a randomized trial toward a target population over categorical covariates."""

__version__ = "0.1.0"
