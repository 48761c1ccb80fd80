"""Isolated-word recognition from lip-shape moments and mel-cepstral audio.

The pipeline: mouth-region frames are reduced to 120x120 binary lip masks,
described per frame by unit-disk moment magnitudes, and concatenated into a
fixed-length vector per utterance; audio is described by mel-frequency
cepstral coefficients. Training vectors build a PCA eigenspace; recognition
is Euclidean nearest-neighbor in that space, scored by a confusion matrix.
"""

__version__ = "0.1.0"
