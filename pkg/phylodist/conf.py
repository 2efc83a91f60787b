"""
Numerical tolerances shared by the flow and geodesic engines
"""
from dataclasses import dataclass, replace

COVER_TOLERANCE = 1e-12
RATIO_TOLERANCE = 1e-9
FLOW_EPSILON = 1e-15


@dataclass(frozen=True)
class Tolerances:
    """
    cover: a vertex cover of weight >= 1 - cover means no extension exists.
    ratio: relative slack allowed when checking non-decreasing norm ratios.
    flow_epsilon: augmenting paths with a smaller bottleneck are ignored.
    """
    cover: float = COVER_TOLERANCE
    ratio: float = RATIO_TOLERANCE
    flow_epsilon: float = FLOW_EPSILON

    @classmethod
    def from_settings(cls, **overrides):
        """Defaults from settings.PHYLODIST, then any non-None override"""
        from django.conf import settings

        config = getattr(settings, "PHYLODIST", {})
        tolerances = cls(
            cover=config.get("COVER_TOLERANCE", COVER_TOLERANCE),
            ratio=config.get("RATIO_TOLERANCE", RATIO_TOLERANCE),
            flow_epsilon=config.get("FLOW_EPSILON", FLOW_EPSILON),
        )
        return replace(tolerances, **{k: v for k, v in overrides.items() if v is not None})


DEFAULT_TOLERANCES = Tolerances()
