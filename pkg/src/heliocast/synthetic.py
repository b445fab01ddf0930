"""Synthetic pyranometer data generator.

Stands in for the original UTEQ instrument feed, which is not
distributable. The shape follows the published summary of that feed:
5-minute cadence, irradiance peaking 700-1459 W/m² around noon, slightly
negative night-time sensor readings (floor -9 W/m²), temperatures near
296-302 K tracking the diurnal arc.

Generation recipe (all randomness from one numpy PCG64 generator seeded by
``seed``, drawn in document order, so output is reproducible):

* per day: clear-sky amplitude A ~ U[700, 1459], temperature offset
  ~ N(0, 1.2), cloud factor random walk starting at U[0.6, 1.0] with
  N(0, 0.03) steps clipped to [0.3, 1.0];
* per 5-minute record, with h the fractional hour and
  arc = max(0, sin(pi (h - 6) / 12)):
  - day (arc > 0): irradiance = A * arc * cloud + N(0, 6), clipped to
    [-9, 1459];
  - night: irradiance = N(-0.8, 0.8) clipped to [-9, 0];
  - temperature = 296 + 6 * arc + day offset + N(0, 0.25) K.
"""

from __future__ import annotations

import math
from datetime import date, datetime, timedelta

import numpy as np

from .dataset import Record

DEFAULT_START = date(2020, 5, 2)
RECORDS_PER_DAY = 24 * 12
NIGHT_FLOOR = -9.0
PEAK_CEILING = 1459.0


def generate_synthetic(days: int, seed: int = 42, start: date = DEFAULT_START) -> list[Record]:
    """Generate ``days`` * 288 records of plausible pyranometer output."""
    if days < 1:
        raise ValueError("days must be >= 1")
    rng = np.random.default_rng(seed)
    records: list[Record] = []
    for day_index in range(days):
        day_start = datetime.combine(start + timedelta(days=day_index), datetime.min.time())
        amplitude = float(rng.uniform(700.0, PEAK_CEILING))
        temp_offset = float(rng.normal(0.0, 1.2))
        cloud = float(rng.uniform(0.6, 1.0))
        for slot in range(RECORDS_PER_DAY):
            ts = day_start + timedelta(minutes=5 * slot)
            h = ts.hour + ts.minute / 60.0
            arc = max(0.0, math.sin(math.pi * (h - 6.0) / 12.0))
            if arc < 1e-9:  # sin(pi) roundoff dust at 18:00 is still night
                arc = 0.0
            cloud = float(np.clip(cloud + rng.normal(0.0, 0.03), 0.3, 1.0))
            if arc > 0.0:
                irr = amplitude * arc * cloud + float(rng.normal(0.0, 6.0))
                irr = float(np.clip(irr, NIGHT_FLOOR, PEAK_CEILING))
            else:
                irr = float(np.clip(rng.normal(-0.8, 0.8), NIGHT_FLOOR, 0.0))
            temp = 296.0 + 6.0 * arc + temp_offset + float(rng.normal(0.0, 0.25))
            records.append(Record(ts, irr, temp))
    return records
