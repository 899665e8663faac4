"""Regenerate the bundled synthetic flight logs (one per preset)."""

from pathlib import Path

from downwash import DEFAULT_ENVIRONMENT, DEFAULT_JET, presets
from downwash.pipeline import campaign_log, write_log

OUT = Path(__file__).resolve().parents[1] / "src" / "downwash" / "data" / "logs"

for i, (key, drone) in enumerate(sorted(presets().items())):
    records = campaign_log(drone, DEFAULT_ENVIRONMENT, DEFAULT_JET, seed=100 + i)
    write_log(records, OUT / f"{key}.csv")
    print(f"{key}: {len(records)} records")
