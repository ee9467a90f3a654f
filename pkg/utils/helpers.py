"""
Small parsing and formatting helpers
"""
from typing import Tuple

from core.exceptions import ConfigurationError


def parse_atoms(text: str) -> Tuple[Tuple[float, float], ...]:
    """'z:rate, z:rate, ...' -> ((z, rate), ...)"""
    atoms = []
    for item in text.split(','):
        item = item.strip()
        if not item:
            continue
        try:
            z, rate = item.split(':')
            atoms.append((float(z), float(rate)))
        except ValueError:
            raise ConfigurationError(f"atom '{item}' is not of the form location:rate")
    return tuple(atoms)


def verdict(passed: bool) -> str:
    return 'PASS' if passed else 'FAIL'
