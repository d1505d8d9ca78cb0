"""Number formatting shared by every CSV writer."""


def fmt(x) -> str:
    """12 significant digits, '.' decimal separator, no grouping; None -> empty field."""
    if x is None:
        return ""
    return format(float(x), ".12g")
