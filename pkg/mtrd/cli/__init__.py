from mtrd.cli import region, simulate, spectrum

__all__ = ["region", "simulate", "spectrum"]
