"""Dataset ingestion, standardization and synthetic data."""
from fairwasp.data.dataset import (
    Dataset, GroupIndex, MarginalY, load_csv, standardize, marginal_y, group_index
)
from fairwasp.data.synthetic import generate_synthetic

__all__ = [
    'Dataset', 'GroupIndex', 'MarginalY', 'load_csv', 'standardize',
    'marginal_y', 'group_index', 'generate_synthetic'
]
