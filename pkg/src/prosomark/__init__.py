"""Word prominence and boundary labeling for speech corpora.

Continuous-wavelet analysis of pitch, energy, and duration signals yields
per-word prominence and boundary strengths, discretized to three classes
for TTS input augmentation and evaluated objectively against references.
"""

__version__ = "0.1.0"
