"""Source printer identification from text-line geometric distortion signatures."""

__version__ = "0.1.0"
