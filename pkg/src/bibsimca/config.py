"""Pipeline configuration in a flat ``key = value`` text format."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import InputError


@dataclass
class PipelineConfig:
    start_year: int = 2006
    end_year: int = 2010
    field_code: str = "BIO/14"
    counting_mode: str = "byline"
    hca_inclusive: bool = True
    hca5_band: str = "nested"
    percentiles: tuple[float, ...] = (95.0, 97.5)
    max_inflation: float = 1.05
    confidence: float = 0.95
    n_components: str = "2"
    max_components: int = 4
    cv_segments: int = 7
    train_fraction: float = 0.75
    log_base: float = 10.0
    log_translation: float = 1.0
    bcs_weights: tuple[float, ...] = (0.50, 0.20, 0.10, 0.10, 0.10)
    score_box: bool = True
    band_width: int = 10
    band_limit: int = 50
    histogram_bin_width: float = 0.1
    seed: int = 20150101
    synth_n: int = 506
    synth_correlation: float = 0.6

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.start_year > self.end_year:
            raise InputError(f"observation window {self.start_year}-{self.end_year} is empty")
        if not 0 < self.train_fraction < 1:
            raise InputError(f"train_fraction must be in (0, 1), got {self.train_fraction}")
        if not 0 < self.confidence < 1:
            raise InputError(f"confidence must be in (0, 1), got {self.confidence}")
        if self.counting_mode not in ("byline", "uniform"):
            raise InputError(f"counting_mode must be byline or uniform, got {self.counting_mode!r}")
        if self.hca5_band not in ("nested", "exclusive"):
            raise InputError(f"hca5_band must be nested or exclusive, got {self.hca5_band!r}")
        if self.n_components != "auto":
            try:
                if int(self.n_components) < 1:
                    raise ValueError
            except ValueError:
                raise InputError(f"n_components must be 'auto' or a positive integer, "
                                 f"got {self.n_components!r}") from None
        if self.log_base <= 0 or self.log_base == 1:
            raise InputError("log_base must be positive and not 1")
        if not 0 <= self.synth_correlation < 1:
            raise InputError("synth_correlation must be in [0, 1)")

    @property
    def components(self):
        return None if self.n_components == "auto" else int(self.n_components)

    @classmethod
    def from_text(cls, text, source="<config>"):
        types = {f.name: f.type for f in fields(cls)}
        values = {}
        for ln, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if not sep:
                raise InputError(f"{source}:{ln}: expected key = value")
            if key not in types:
                raise InputError(f"{source}:{ln}: unknown key {key!r}")
            try:
                values[key] = _coerce(types[key], value)
            except ValueError as exc:
                raise InputError(f"{source}:{ln}: bad value for {key}: {exc}") from None
        return cls(**values)

    @classmethod
    def from_file(cls, path):
        return cls.from_text(Path(path).read_text(), source=str(path))

    def to_text(self):
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(repr(x) for x in v)
            elif isinstance(v, bool):
                v = str(v).lower()
            out.append(f"{f.name} = {v}")
        return "\n".join(out) + "\n"

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


def _coerce(type_name, value):
    t = str(type_name)
    if t == "bool":
        low = value.lower()
        if low in ("true", "yes", "1", "on"):
            return True
        if low in ("false", "no", "0", "off"):
            return False
        raise ValueError(f"not a boolean: {value!r}")
    if t == "int":
        return int(value)
    if t == "float":
        return float(value)
    if t.startswith("tuple"):
        return tuple(float(v) for v in value.split(",") if v.strip())
    return value
