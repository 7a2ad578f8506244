"""Transform-coding key binding for ring-oscillator PUFs."""

__version__ = "0.1.0"
