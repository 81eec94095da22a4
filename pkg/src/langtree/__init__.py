"""Language-relatedness analysis toolkit.

Builds per-language centroid embeddings from speech-model outputs, clusters
them into bootstrap-supported dendrograms, scores recovery of genealogical
groupings, and relates discriminative embedding dimensions to raw-audio
acoustic features.
"""

__version__ = "0.1.0"
