import os


def threads():
    """Worker cap from ``CONSENSUS_KIT_THREADS`` (0 or unset means ``os.cpu_count()``)."""
    try:
        n = int(os.environ.get("CONSENSUS_KIT_THREADS", "0"))
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)
