"""Few-shot topic classifiers built from example queries over an embedding corpus."""

from . import classifier, corpus, dataset, evaluation, retrieval

__all__ = ["classifier", "corpus", "dataset", "evaluation", "retrieval"]
__version__ = "0.1.0"
