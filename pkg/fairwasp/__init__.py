"""FairWASP - fairness-constrained Wasserstein reweighting solver."""
__version__ = "1.0.0"
