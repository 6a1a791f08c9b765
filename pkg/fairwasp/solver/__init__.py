"""Cutting-plane solver for fairness-constrained Wasserstein reweighting."""
