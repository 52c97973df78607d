"""Built-in city mobility profiles.

Each profile pairs a lognormal transition-length law with a speed mixture
calibrated against large road-trip corpora for that city. Mixture component
means sit near the modal cruising speeds of the local road classes; every
component has a standard deviation of 0.25 m/s.
"""

from dataclasses import dataclass

from .trips import LengthModel, VelocityMixture

__all__ = ["CityPreset", "PRESETS", "get_preset", "preset_names"]

_SIGMA_COMPONENT = 0.25  # m/s, shared by all mixture components


@dataclass(frozen=True)
class CityPreset:
    name: str
    length: LengthModel
    velocity: VelocityMixture


def _preset(name, mu_log, sigma_log, means, weights):
    return CityPreset(
        name=name,
        length=LengthModel(mu_log=mu_log, sigma_log=sigma_log),
        velocity=VelocityMixture(
            weights=weights, means=means, stds=(_SIGMA_COMPONENT,) * len(means)
        ),
    )


PRESETS = {
    p.name: p
    for p in (
        _preset(
            "manhattan",
            5.98,
            1.01,
            (4.5, 7.0, 8.9, 11.8, 12.5, 14.5, 15.5, 16.5, 18.0, 20.0, 25.0),
            (6.5, 8.5, 2.5, 5.0, 4.0, 6.0, 10.0, 6.0, 10.0, 1.0, 7.0),
        ),
        _preset(
            "toronto",
            6.13,
            1.13,
            (4.2, 7.0, 9.0, 11.2, 12.5, 13.4, 15.3, 15.6, 17.8, 20.0, 23.0),
            (4.0, 7.0, 4.0, 10.0, 4.0, 9.0, 3.0, 3.0, 2.0, 1.5, 9.0),
        ),
        _preset(
            "shanghai",
            7.11,
            1.0,
            (4.0, 6.5, 8.5, 11.0, 12.5, 15.0, 17.8, 23.5, 25.0),
            (1.0, 5.0, 0.5, 5.0, 4.0, 6.0, 10.0, 7.0, 7.0),
        ),
        _preset(
            "rome",
            5.78,
            1.06,
            (3.0, 4.2, 7.0, 9.0, 12.0, 16.0, 20.0, 29.0),
            (0.5, 0.5, 1.0, 1.0, 10.0, 1.0, 0.5, 2.0),
        ),
    )
}


def get_preset(name):
    """Look up a preset by case-insensitive name."""
    key = str(name).strip().lower()
    try:
        return PRESETS[key]
    except KeyError:
        raise ValueError(
            "unknown preset %r; available: %s" % (name, ", ".join(sorted(PRESETS)))
        ) from None


def preset_names():
    return tuple(PRESETS)
