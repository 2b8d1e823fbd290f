"""Scheduling toolkit for two parallel queues with ON/OFF connectivity and one-slot switchover."""

__version__ = "0.1.0"
