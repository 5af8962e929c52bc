"""Number formatting shared by the JSON and CSV emitters.

Every float written to disk goes through :func:`g17` so that files are
byte-reproducible across runs and round-trip to the exact same double.
"""


def g17(x: float) -> str:
    """Decimal form with up to 17 significant digits (lossless for float64)."""
    return format(float(x), ".17g")
