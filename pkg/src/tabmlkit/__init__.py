"""tabmlkit: a self-contained tabular analytics toolkit.

Two pipelines over typed in-memory tables: unsupervised engagement
segmentation (standardize -> PCA -> K-Means with K selection) and binary
outcome prediction (preprocess -> split -> five from-scratch classifiers ->
grid search -> metric panel -> Shapley attributions), plus seeded synthetic
generators and a CLI front end.
"""

__version__ = "0.1.0"
