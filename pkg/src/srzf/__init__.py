"""SRZF precoding."""
