"""Low-density binary codes and low-coherence sensing matrices for pulse-based ToF."""
__version__ = "0.1.0"
